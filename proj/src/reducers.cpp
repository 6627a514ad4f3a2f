#include "rptsne/reducers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rptsne/data_io.hpp"
#include "rptsne/kernels.hpp"
#include "rptsne/rng.hpp"

namespace rptsne {

ProjectionMatrix gaussian_projection(std::size_t d, std::size_t d_prime, std::uint64_t seed) {
    if (d_prime < 1 || d_prime > d) {
        throw UsageError("projection dimension must satisfy 1 <= d_prime <= d");
    }
    ProjectionMatrix r;
    r.d = d;
    r.d_prime = d_prime;
    r.seed = seed;
    r.entries = Matrix(d, d_prime);
    const double sigma = 1.0 / std::sqrt(static_cast<double>(d));
    Rng rng(seed);
    for (double& v : r.entries.values) v = rng.gaussian() * sigma;
    return r;
}

Matrix apply_projection(const Matrix& x, const ProjectionMatrix& r) {
    if (x.cols != r.d) {
        throw UsageError("projection input has " + std::to_string(x.cols) +
                         " columns, expected " + std::to_string(r.d));
    }
    Matrix out(x.rows, r.d_prime);
    parallel_for(x.rows, [&](std::size_t i) {
        const double* xi = x.row(i);
        double* oi = out.row(i);
        for (std::size_t k = 0; k < r.d; ++k) {
            if (xi[k] != 0.0) kernels::axpy(oi, xi[k], r.entries.row(k), r.d_prime);
        }
    });
    return out;
}

JlAudit jl_audit(const Matrix& x, const Matrix& x_proj, double epsilon, std::size_t pair_budget,
                 std::uint64_t seed) {
    if (x.rows != x_proj.rows) throw UsageError("jl_audit: row counts differ");
    if (x.rows < 2) throw UsageError("jl_audit: need at least 2 rows");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw UsageError("jl_audit: epsilon must be in (0,1)");

    JlAudit audit;
    audit.epsilon = epsilon;
    audit.scale_correction = static_cast<double>(x.cols) / static_cast<double>(x_proj.cols);
    std::size_t within = 0;

    auto eval_pair = [&](std::size_t i, std::size_t j) {
        const double orig = kernels::squared_l2(x.row(i), x.row(j), x.cols);
        if (orig == 0.0) {
            ++audit.skipped_pairs;
            return;
        }
        const double proj = kernels::squared_l2(x_proj.row(i), x_proj.row(j), x_proj.cols);
        const double ratio = proj / orig * audit.scale_correction;
        audit.max_distortion = std::max(audit.max_distortion, std::abs(ratio - 1.0));
        if (ratio >= 1.0 - epsilon && ratio <= 1.0 + epsilon) ++within;
        ++audit.pair_count;
    };

    const std::size_t n = x.rows;
    const std::size_t total = n * (n - 1) / 2;
    if (pair_budget >= total) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) eval_pair(i, j);
        }
    } else {
        Rng rng(seed);
        for (std::size_t s = 0; s < pair_budget; ++s) {
            const auto i = static_cast<std::size_t>(rng.below(n));
            auto j = static_cast<std::size_t>(rng.below(n - 1));
            if (j >= i) ++j;
            eval_pair(i, j);
        }
    }
    audit.fraction_within =
        audit.pair_count == 0 ? 0.0 : static_cast<double>(within) / audit.pair_count;
    return audit;
}

namespace {

// One cyclic Jacobi sweep pass; returns the off-diagonal Frobenius mass.
double off_diagonal_norm(const Matrix& a) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = i + 1; j < a.cols; ++j) acc += a.at(i, j) * a.at(i, j);
    }
    return std::sqrt(2.0 * acc);
}

}  // namespace

SymEigen sym_eigen(const Matrix& input) {
    if (input.rows != input.cols) throw UsageError("sym_eigen: matrix must be square");
    const std::size_t n = input.rows;
    Matrix a = input;
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v.at(i, i) = 1.0;

    double norm = 0.0;
    for (double e : a.values) norm += e * e;
    norm = std::sqrt(norm);
    const double stop = std::max(norm, 1.0) * 1e-14;

    const int max_sweeps = 64;
    int sweep = 0;
    while (off_diagonal_norm(a) > stop) {
        if (++sweep > max_sweeps) {
            throw NumericError("sym_eigen: Jacobi iteration did not converge");
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a.at(p, q);
                if (std::abs(apq) <= stop / (static_cast<double>(n) * n)) continue;
                const double app = a.at(p, p);
                const double aqq = a.at(q, q);
                const double tau = (aqq - app) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a.at(k, p);
                    const double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a.at(p, k);
                    const double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v.at(k, p);
                    const double vkq = v.at(k, q);
                    v.at(k, p) = c * vkp - s * vkq;
                    v.at(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return a.at(l, l) > a.at(r, r);
    });

    SymEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a.at(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors.at(i, k) = v.at(i, order[k]);
    }
    return out;
}

namespace {

std::vector<double> column_means(const Matrix& x) {
    std::vector<double> mean(x.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        kernels::axpy(mean.data(), 1.0, x.row(i), x.cols);
    }
    for (double& m : mean) m /= static_cast<double>(x.rows);
    return mean;
}

Matrix centered_transpose(const Matrix& x, const std::vector<double>& mean) {
    Matrix xt(x.cols, x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* r = x.row(i);
        for (std::size_t j = 0; j < x.cols; ++j) xt.at(j, i) = r[j] - mean[j];
    }
    return xt;
}

void fix_column_sign(Matrix& m, std::size_t col) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        const double mag = std::abs(m.at(i, col));
        if (mag > best) {
            best = mag;
            arg = i;
        }
    }
    if (m.at(arg, col) < 0.0) {
        for (std::size_t i = 0; i < m.rows; ++i) m.at(i, col) = -m.at(i, col);
    }
}

}  // namespace

PrincipalBasis pca_fit(const Matrix& x, std::size_t d_prime) {
    const std::size_t n = x.rows;
    const std::size_t d = x.cols;
    if (n < 2) throw UsageError("pca_fit: need at least 2 rows");
    if (d_prime < 1 || d_prime > std::min(n, d)) {
        throw UsageError("pca_fit: d_prime must be in [1, min(N, d)]");
    }

    PrincipalBasis basis;
    basis.mean = column_means(x);
    const Matrix xt = centered_transpose(x, basis.mean);  // d x N
    const double divisor = static_cast<double>(n - 1);

    basis.components = Matrix(d, d_prime);
    basis.explained_variance.resize(d_prime);

    if (d <= n) {
        Matrix cov(d, d);
        parallel_for(d, [&](std::size_t i) {
            for (std::size_t j = i; j < d; ++j) {
                const double c = kernels::dot(xt.row(i), xt.row(j), n) / divisor;
                cov.at(i, j) = c;
                if (j != i) cov.at(j, i) = c;
            }
        });
        const SymEigen eig = sym_eigen(cov);
        for (std::size_t k = 0; k < d_prime; ++k) {
            basis.explained_variance[k] = std::max(eig.values[k], 0.0);
            for (std::size_t i = 0; i < d; ++i) basis.components.at(i, k) = eig.vectors.at(i, k);
        }
    } else {
        // Gram form: eigenvectors u of Xc Xc^T / (N-1) map to components
        // Xc^T u / |Xc^T u| with the same eigenvalues.
        Matrix gram(n, n);
        parallel_for(n, [&](std::size_t i) {
            for (std::size_t j = i; j < n; ++j) {
                double acc = 0.0;
                for (std::size_t kk = 0; kk < d; ++kk) acc += xt.at(kk, i) * xt.at(kk, j);
                acc /= divisor;
                gram.at(i, j) = acc;
                if (j != i) gram.at(j, i) = acc;
            }
        });
        const SymEigen eig = sym_eigen(gram);
        const double rank_floor = std::max(eig.values.empty() ? 0.0 : eig.values[0], 0.0) * 1e-12;
        for (std::size_t k = 0; k < d_prime; ++k) {
            const double lambda = eig.values[k];
            if (lambda <= rank_floor) {
                throw NumericError("pca_fit: requested components exceed the data rank");
            }
            basis.explained_variance[k] = lambda;
            // component = Xc^T u, then normalize
            std::vector<double> comp(d, 0.0);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = eig.vectors.at(i, k);
                if (u != 0.0) {
                    for (std::size_t kk = 0; kk < d; ++kk) comp[kk] += xt.at(kk, i) * u;
                }
            }
            const double nrm = std::sqrt(kernels::dot(comp.data(), comp.data(), d));
            for (std::size_t i = 0; i < d; ++i) basis.components.at(i, k) = comp[i] / nrm;
        }
    }

    for (std::size_t k = 0; k < d_prime; ++k) fix_column_sign(basis.components, k);
    return basis;
}

Matrix pca_transform(const Matrix& x, const PrincipalBasis& basis) {
    const std::size_t d = basis.mean.size();
    if (x.cols != d) {
        throw UsageError("pca_transform: input has " + std::to_string(x.cols) +
                         " columns, basis expects " + std::to_string(d));
    }
    const std::size_t d_prime = basis.components.cols;
    // transpose components once so each output entry is a contiguous dot
    Matrix ct(d_prime, d);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t k = 0; k < d_prime; ++k) ct.at(k, i) = basis.components.at(i, k);
    }
    Matrix out(x.rows, d_prime);
    parallel_for(x.rows, [&](std::size_t i) {
        std::vector<double> centered(d);
        const double* r = x.row(i);
        for (std::size_t j = 0; j < d; ++j) centered[j] = r[j] - basis.mean[j];
        double* oi = out.row(i);
        for (std::size_t k = 0; k < d_prime; ++k) {
            oi[k] = kernels::dot(centered.data(), ct.row(k), d);
        }
    });
    return out;
}

void save_projection(const std::string& base_path, const ProjectionMatrix& r) {
    write_raw_matrix(base_path + ".f64", base_path + ".meta", r.entries);
    std::ofstream meta(base_path + ".meta", std::ios::app);
    meta << "seed=" << r.seed << "\n";
}

ProjectionMatrix load_projection(const std::string& base_path) {
    ProjectionMatrix r;
    r.entries = read_raw_matrix(base_path + ".f64", base_path + ".meta");
    r.d = r.entries.rows;
    r.d_prime = r.entries.cols;
    std::ifstream meta(base_path + ".meta");
    std::string line;
    while (std::getline(meta, line)) {
        if (line.rfind("seed=", 0) == 0) r.seed = std::stoull(line.substr(5));
    }
    return r;
}

void save_basis(const std::string& base_path, const PrincipalBasis& b) {
    write_raw_matrix(base_path + ".components.f64", base_path + ".components.meta", b.components);
    Matrix mean(1, b.mean.size());
    mean.values = b.mean;
    write_raw_matrix(base_path + ".mean.f64", base_path + ".mean.meta", mean);
    Matrix ev(1, b.explained_variance.size());
    ev.values = b.explained_variance;
    write_raw_matrix(base_path + ".variance.f64", base_path + ".variance.meta", ev);
}

PrincipalBasis load_basis(const std::string& base_path) {
    PrincipalBasis b;
    b.components = read_raw_matrix(base_path + ".components.f64", base_path + ".components.meta");
    b.mean = read_raw_matrix(base_path + ".mean.f64", base_path + ".mean.meta").values;
    b.explained_variance =
        read_raw_matrix(base_path + ".variance.f64", base_path + ".variance.meta").values;
    return b;
}

}  // namespace rptsne
