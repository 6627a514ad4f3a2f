#include "rptsne/tsne.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "quadtree.hpp"
#include "rptsne/kernels.hpp"
#include "rptsne/rng.hpp"

namespace rptsne {

namespace {

constexpr double kLn2 = 0.6931471805599453;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Calibration core over a compact list of squared distances (anchor
// excluded). Returns the normalized probabilities in-place.
struct CalibrationResult {
    double beta = 1.0;
    double achieved_perplexity = 0.0;
    bool duplicate_fallback = false;
};

CalibrationResult calibrate_distances(const double* d2, std::size_t k, double* probs,
                                      double perplexity, double tol, int max_iter) {
    CalibrationResult res;
    double dmin = d2[0], dmax = d2[0];
    for (std::size_t j = 1; j < k; ++j) {
        dmin = std::min(dmin, d2[j]);
        dmax = std::max(dmax, d2[j]);
    }
    if (dmax <= 0.0) {
        // duplicate points: entropy is beta-independent, fall back to uniform
        const double u = 1.0 / static_cast<double>(k);
        for (std::size_t j = 0; j < k; ++j) probs[j] = u;
        res.beta = 0.0;
        res.achieved_perplexity = static_cast<double>(k);
        res.duplicate_fallback = true;
        return res;
    }

    // shifted distances keep exp() in (0, 1] without changing the
    // normalized distribution or its entropy
    std::vector<double> shifted(k);
    for (std::size_t j = 0; j < k; ++j) shifted[j] = d2[j] - dmin;

    const double target_bits = std::log2(perplexity);
    double beta = 1.0;
    double beta_lo = -std::numeric_limits<double>::infinity();
    double beta_hi = std::numeric_limits<double>::infinity();
    double s0 = 0.0;
    double h_bits = 0.0;
    auto evaluate = [&] {
        kernels::exp_scale(probs, shifted.data(), -beta, k);
        s0 = kernels::sum(probs, k);
        const double s1 = kernels::dot(probs, shifted.data(), k);
        h_bits = (beta * (s1 / s0) + std::log(s0)) / kLn2;
    };
    for (int it = 0; it < max_iter; ++it) {
        evaluate();
        const double diff = h_bits - target_bits;
        if (std::abs(diff) <= tol) break;
        if (diff > 0.0) {  // entropy too high, sharpen
            beta_lo = beta;
            beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
        } else {
            beta_hi = beta;
            beta = std::isinf(beta_lo) ? beta * 0.5 : 0.5 * (beta + beta_lo);
        }
        if (it + 1 == max_iter) evaluate();  // keep probs consistent with beta
    }
    const double inv_s0 = 1.0 / s0;
    for (std::size_t j = 0; j < k; ++j) probs[j] *= inv_s0;
    res.beta = beta;
    res.achieved_perplexity = std::exp2(h_bits);
    return res;
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite()) throw NumericError(std::string(what) + " contains non-finite values");
}

AffinityMatrix dense_affinities_from_distances(const Matrix& d, const TsneConfig& config) {
    const std::size_t n = d.rows;
    Matrix cond(n, n);  // cond(i, j) = p_{j|i}
    std::vector<unsigned char> duplicate(n, 0);
    parallel_for(n, [&](std::size_t i) {
        std::vector<double> compact(n - 1);
        std::vector<double> probs(n - 1);
        const double* drow = d.row(i);
        for (std::size_t j = 0, w = 0; j < n; ++j) {
            if (j != i) compact[w++] = drow[j];
        }
        const CalibrationResult res =
            calibrate_distances(compact.data(), n - 1, probs.data(), config.perplexity,
                                config.calibration_tol, config.calibration_max_iter);
        duplicate[i] = res.duplicate_fallback ? 1 : 0;
        double* crow = cond.row(i);
        for (std::size_t j = 0, w = 0; j < n; ++j) {
            crow[j] = (j == i) ? 0.0 : probs[w++];
        }
    });

    AffinityMatrix out;
    out.n = n;
    out.p = Matrix(n, n);
    const double inv_2n = 1.0 / (2.0 * static_cast<double>(n));
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v =
                std::max((cond.at(i, j) + cond.at(j, i)) * inv_2n, config.min_prob_floor);
            out.p.at(i, j) = v;
            out.p.at(j, i) = v;
        }
    });
    out.duplicate_rows = std::accumulate(duplicate.begin(), duplicate.end(), std::size_t{0});
    return out;
}

void split_columns(const Matrix& y, std::vector<double>& yx, std::vector<double>& yy) {
    const std::size_t n = y.rows;
    yx.resize(n);
    yy.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        yx[i] = y.at(i, 0);
        yy[i] = y.at(i, 1);
    }
}

void require_embedding(const Matrix& y) {
    if (y.cols != 2) throw UsageError("embedding must have 2 columns");
    if (y.rows < 2) throw UsageError("embedding needs at least 2 points");
    require_finite(y, "embedding");
}

// Exact normalizer Z = sum_{k != l} w_kl via the row kernel.
double exact_z(const std::vector<double>& yx, const std::vector<double>& yy) {
    const std::size_t n = yx.size();
    std::vector<double> partial(n);
    parallel_for(n, [&](std::size_t i) {
        const auto acc = kernels::student_t_row_2d(yx[i], yy[i], yx.data(), yy.data(), nullptr, n);
        partial[i] = acc.z - 1.0;  // subtract the self term w_ii = 1
    });
    double z = 0.0;
    for (double p : partial) z += p;
    return z;
}

}  // namespace

void TsneConfig::validate(std::size_t n) const {
    if (n < 4) throw UsageError("t-SNE needs at least 4 points");
    if (!(perplexity > 0.0) || perplexity >= static_cast<double>(n)) {
        throw UsageError("perplexity must be positive and below N");
    }
    if (theta < 0.0 || theta > 1.0) throw UsageError("theta must be in [0, 1]");
    if (n_iter < 0 || early_exaggeration_iters < 0 || momentum_switch_iter < 0 ||
        calibration_max_iter < 0) {
        throw UsageError("iteration counts must be non-negative");
    }
    if (!(learning_rate > 0.0) || !(init_scale > 0.0)) {
        throw UsageError("learning_rate and init_scale must be positive");
    }
    if (min_prob_floor < 0.0) throw UsageError("min_prob_floor must be non-negative");
}

Matrix squared_distances(const Matrix& x) {
    if (x.rows < 2) throw UsageError("squared_distances: need at least 2 rows");
    require_finite(x, "input");
    const std::size_t n = x.rows;
    std::vector<double> sq_norm(n);
    parallel_for(n, [&](std::size_t i) { sq_norm[i] = kernels::dot(x.row(i), x.row(i), x.cols); });
    Matrix d(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v =
                std::max(0.0, sq_norm[i] + sq_norm[j] - 2.0 * kernels::dot(x.row(i), x.row(j), x.cols));
            d.at(i, j) = v;
            d.at(j, i) = v;
        }
    });
    return d;
}

ConditionalRow calibrate_row(const double* distances, std::size_t n, std::size_t anchor,
                             double perplexity, double tol, int max_iter) {
    if (n < 3) throw UsageError("calibrate_row: need at least 2 entries besides the anchor");
    if (anchor >= n) throw UsageError("calibrate_row: anchor out of range");
    if (!(perplexity > 0.0) || perplexity > static_cast<double>(n - 1)) {
        throw UsageError("calibrate_row: perplexity must be in (0, N-1]");
    }
    std::vector<double> compact(n - 1);
    for (std::size_t j = 0, w = 0; j < n; ++j) {
        if (j != anchor) compact[w++] = distances[j];
    }
    std::vector<double> probs(n - 1);
    const CalibrationResult res =
        calibrate_distances(compact.data(), n - 1, probs.data(), perplexity, tol, max_iter);

    ConditionalRow row;
    row.anchor = anchor;
    row.probabilities.assign(n, 0.0);
    for (std::size_t j = 0, w = 0; j < n; ++j) {
        if (j != anchor) row.probabilities[j] = probs[w++];
    }
    row.sigma = res.beta > 0.0 ? std::sqrt(0.5 / res.beta)
                               : std::numeric_limits<double>::infinity();
    row.achieved_perplexity = res.achieved_perplexity;
    row.duplicate_fallback = res.duplicate_fallback;
    return row;
}

AffinityMatrix joint_affinities(const Matrix& x, const TsneConfig& config) {
    config.validate(x.rows);
    return dense_affinities_from_distances(squared_distances(x), config);
}

SparseAffinity joint_affinities_sparse(const Matrix& x, const TsneConfig& config) {
    config.validate(x.rows);
    require_finite(x, "input");
    const std::size_t n = x.rows;
    const std::size_t k =
        std::min(n - 1, static_cast<std::size_t>(std::ceil(3.0 * config.perplexity)));

    // per-row neighbor lists and conditional probabilities
    std::vector<std::vector<std::uint32_t>> nbr(n);
    std::vector<std::vector<double>> nbr_p(n);
    std::vector<unsigned char> duplicate(n, 0);
    parallel_for(n, [&](std::size_t i) {
        std::vector<std::pair<double, std::uint32_t>> cand;
        cand.reserve(n - 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            cand.emplace_back(kernels::squared_l2(x.row(i), x.row(j), x.cols),
                              static_cast<std::uint32_t>(j));
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
        std::vector<double> dist(k);
        nbr[i].resize(k);
        for (std::size_t t = 0; t < k; ++t) {
            dist[t] = cand[t].first;
            nbr[i][t] = cand[t].second;
        }
        nbr_p[i].resize(k);
        const CalibrationResult res =
            calibrate_distances(dist.data(), k, nbr_p[i].data(), config.perplexity,
                                config.calibration_tol, config.calibration_max_iter);
        duplicate[i] = res.duplicate_fallback ? 1 : 0;
    });

    // symmetrise: both directions of every stored conditional entry
    struct Entry {
        std::uint64_t key;
        double v;
    };
    std::vector<Entry> entries;
    entries.reserve(2 * n * k);
    const double inv_2n = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < k; ++t) {
            const std::uint64_t j = nbr[i][t];
            const double v = nbr_p[i][t] * inv_2n;
            entries.push_back({i * n + j, v});
            entries.push_back({j * n + i, v});
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.key < b.key; });

    SparseAffinity out;
    out.n = n;
    out.row_ptr.assign(n + 1, 0);
    out.duplicate_rows = std::accumulate(duplicate.begin(), duplicate.end(), std::size_t{0});
    std::size_t idx = 0;
    while (idx < entries.size()) {
        const std::uint64_t key = entries[idx].key;
        double v = 0.0;
        while (idx < entries.size() && entries[idx].key == key) {
            v += entries[idx].v;
            ++idx;
        }
        out.col.push_back(static_cast<std::uint32_t>(key % n));
        out.val.push_back(std::max(v, config.min_prob_floor));
        ++out.row_ptr[key / n + 1];
    }
    for (std::size_t i = 0; i < n; ++i) out.row_ptr[i + 1] += out.row_ptr[i];
    return out;
}

LowDimAffinities low_dim_affinities(const Matrix& y, double min_prob_floor) {
    require_embedding(y);
    const std::size_t n = y.rows;
    Matrix w(n, n);
    parallel_for(n, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = y.at(i, 0) - y.at(j, 0);
            const double dy = y.at(i, 1) - y.at(j, 1);
            const double v = 1.0 / (1.0 + dx * dx + dy * dy);
            w.at(i, j) = v;
            w.at(j, i) = v;
        }
    });
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) z += w.at(i, j);
        }
    }
    LowDimAffinities out;
    out.z = z;
    out.q = Matrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) out.q.at(i, j) = std::max(w.at(i, j) / z, min_prob_floor);
        }
    }
    return out;
}

double kl_divergence(const AffinityMatrix& p, const LowDimAffinities& q) {
    if (p.n != q.q.rows) throw UsageError("kl_divergence: shape mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.n; ++i) {
        for (std::size_t j = 0; j < p.n; ++j) {
            if (j == i) continue;
            const double pij = p.p.at(i, j);
            if (pij > 0.0) kl += pij * std::log(pij / q.q.at(i, j));
        }
    }
    return kl;
}

double kl_divergence(const AffinityMatrix& p, const Matrix& y, double min_prob_floor) {
    if (p.n != y.rows) throw UsageError("kl_divergence: shape mismatch");
    require_embedding(y);
    std::vector<double> yx, yy;
    split_columns(y, yx, yy);
    const double z = exact_z(yx, yy);
    const std::size_t n = p.n;
    std::vector<double> partial(n);
    parallel_for(n, [&](std::size_t i) {
        double acc = 0.0;
        const double* prow = p.p.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double pij = prow[j];
            if (pij <= 0.0) continue;
            const double dx = yx[i] - yx[j];
            const double dy = yy[i] - yy[j];
            const double q = std::max(1.0 / ((1.0 + dx * dx + dy * dy) * z), min_prob_floor);
            acc += pij * std::log(pij / q);
        }
        partial[i] = acc;
    });
    double kl = 0.0;
    for (double v : partial) kl += v;
    return kl;
}

double kl_divergence(const SparseAffinity& p, const Matrix& y, double min_prob_floor) {
    if (p.n != y.rows) throw UsageError("kl_divergence: shape mismatch");
    require_embedding(y);
    std::vector<double> yx, yy;
    split_columns(y, yx, yy);
    const double z = exact_z(yx, yy);
    std::vector<double> partial(p.n);
    parallel_for(p.n, [&](std::size_t i) {
        double acc = 0.0;
        for (std::size_t t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
            const std::size_t j = p.col[t];
            const double pij = p.val[t];
            if (pij <= 0.0) continue;
            const double dx = yx[i] - yx[j];
            const double dy = yy[i] - yy[j];
            const double q = std::max(1.0 / ((1.0 + dx * dx + dy * dy) * z), min_prob_floor);
            acc += pij * std::log(pij / q);
        }
        partial[i] = acc;
    });
    double kl = 0.0;
    for (double v : partial) kl += v;
    return kl;
}

ForceDecomposition exact_forces(const AffinityMatrix& p, const Matrix& y) {
    if (p.n != y.rows) throw UsageError("exact_forces: shape mismatch");
    require_embedding(y);
    const std::size_t n = p.n;
    std::vector<double> yx, yy;
    split_columns(y, yx, yy);
    ForceDecomposition f;
    f.attr = Matrix(n, 2);
    f.rep = Matrix(n, 2);
    std::vector<double> zpart(n);
    parallel_for(n, [&](std::size_t i) {
        const auto acc =
            kernels::student_t_row_2d(yx[i], yy[i], yx.data(), yy.data(), p.p.row(i), n);
        f.attr.at(i, 0) = acc.attr_x;
        f.attr.at(i, 1) = acc.attr_y;
        f.rep.at(i, 0) = acc.rep_x;
        f.rep.at(i, 1) = acc.rep_y;
        zpart[i] = acc.z - 1.0;  // self term
    });
    f.z = 0.0;
    for (double v : zpart) f.z += v;
    return f;
}

Matrix exact_gradient(const AffinityMatrix& p, const Matrix& y) {
    const ForceDecomposition f = exact_forces(p, y);
    Matrix grad(p.n, 2);
    for (std::size_t i = 0; i < p.n; ++i) {
        grad.at(i, 0) = 4.0 * (f.attr.at(i, 0) - f.rep.at(i, 0) / f.z);
        grad.at(i, 1) = 4.0 * (f.attr.at(i, 1) - f.rep.at(i, 1) / f.z);
    }
    return grad;
}

ForceDecomposition barnes_hut_forces(const SparseAffinity& p, const Matrix& y, double theta) {
    if (p.n != y.rows) throw UsageError("barnes_hut_forces: shape mismatch");
    if (theta < 0.0 || theta > 1.0) throw UsageError("theta must be in [0, 1]");
    require_embedding(y);
    const std::size_t n = p.n;
    std::vector<double> yx, yy;
    split_columns(y, yx, yy);

    const QuadTree tree(yx.data(), yy.data(), n);

    ForceDecomposition f;
    f.attr = Matrix(n, 2);
    f.rep = Matrix(n, 2);
    std::vector<double> zpart(n);
    parallel_for(n, [&](std::size_t i) {
        double ax = 0.0, ay = 0.0;
        for (std::size_t t = p.row_ptr[i]; t < p.row_ptr[i + 1]; ++t) {
            const std::size_t j = p.col[t];
            const double dx = yx[i] - yx[j];
            const double dy = yy[i] - yy[j];
            const double pw = p.val[t] / (1.0 + dx * dx + dy * dy);
            ax += pw * dx;
            ay += pw * dy;
        }
        f.attr.at(i, 0) = ax;
        f.attr.at(i, 1) = ay;

        double rx = 0.0, ry = 0.0, z = 0.0;
        if (tree.degenerate()) {
            const auto acc =
                kernels::student_t_row_2d(yx[i], yy[i], yx.data(), yy.data(), nullptr, n);
            rx = acc.rep_x;
            ry = acc.rep_y;
            z = acc.z - 1.0;
        } else {
            tree.accumulate(i, theta, rx, ry, z);
        }
        f.rep.at(i, 0) = rx;
        f.rep.at(i, 1) = ry;
        zpart[i] = z;
    });
    f.z = 0.0;
    for (double v : zpart) f.z += v;
    return f;
}

Matrix barnes_hut_gradient(const SparseAffinity& p, const Matrix& y, double theta) {
    const ForceDecomposition f = barnes_hut_forces(p, y, theta);
    Matrix grad(p.n, 2);
    for (std::size_t i = 0; i < p.n; ++i) {
        grad.at(i, 0) = 4.0 * (f.attr.at(i, 0) - f.rep.at(i, 0) / f.z);
        grad.at(i, 1) = 4.0 * (f.attr.at(i, 1) - f.rep.at(i, 1) / f.z);
    }
    return grad;
}

namespace {

struct GradientScratch {
    Matrix grad;
    double norm = 0.0;
};

void combine_forces(const ForceDecomposition& f, double exaggeration, GradientScratch& out) {
    const std::size_t n = f.attr.rows;
    if (out.grad.rows != n) out.grad = Matrix(n, 2);
    double norm2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double gx = 4.0 * (exaggeration * f.attr.at(i, 0) - f.rep.at(i, 0) / f.z);
        const double gy = 4.0 * (exaggeration * f.attr.at(i, 1) - f.rep.at(i, 1) / f.z);
        out.grad.at(i, 0) = gx;
        out.grad.at(i, 1) = gy;
        norm2 += gx * gx + gy * gy;
    }
    out.norm = std::sqrt(norm2);
}

}  // namespace

TsneResult run_tsne(const Matrix& x, const TsneConfig& config) {
    config.validate(x.rows);
    require_finite(x, "input");
    const std::size_t n = x.rows;
    const bool exact = config.theta == 0.0;

    TsneResult result;
    OptimizerTrace& trace = result.trace;

    const auto t_aff = std::chrono::steady_clock::now();
    AffinityMatrix dense;
    SparseAffinity sparse;
    if (exact) {
        const auto t_dist = std::chrono::steady_clock::now();
        const Matrix d = squared_distances(x);
        trace.distance_seconds = seconds_since(t_dist);
        dense = dense_affinities_from_distances(d, config);
        trace.duplicate_rows = dense.duplicate_rows;
    } else {
        sparse = joint_affinities_sparse(x, config);
        trace.duplicate_rows = sparse.duplicate_rows;
    }
    trace.affinity_seconds = seconds_since(t_aff);

    const auto t_opt = std::chrono::steady_clock::now();
    Matrix y(n, 2);
    {
        Rng rng(config.seed);
        for (double& v : y.values) v = rng.gaussian() * config.init_scale;
    }
    Matrix velocity(n, 2);
    Matrix gains(n, 2, 1.0);

    auto forces = [&](const Matrix& cur) {
        return exact ? exact_forces(dense, cur) : barnes_hut_forces(sparse, cur, config.theta);
    };
    auto kl_now = [&](const Matrix& cur) {
        return exact ? kl_divergence(dense, cur, config.min_prob_floor)
                     : kl_divergence(sparse, cur, config.min_prob_floor);
    };

    GradientScratch scratch;
    for (int iter = 0; iter < config.n_iter; ++iter) {
        const double exaggeration =
            iter < config.early_exaggeration_iters ? config.early_exaggeration_factor : 1.0;
        const double momentum =
            iter < config.momentum_switch_iter ? config.momentum_initial : config.momentum_final;

        combine_forces(forces(y), exaggeration, scratch);
        if (iter % 50 == 0) {
            trace.points.push_back({iter, kl_now(y), scratch.norm});
        }

        for (std::size_t c = 0; c < 2 * n; ++c) {
            const double g = scratch.grad.values[c];
            double& gain = gains.values[c];
            double& vel = velocity.values[c];
            // sign disagreement between gradient and velocity means the
            // velocity still points downhill: grow the gain additively
            // (multiplicative growth compounds without bound), decay it
            // multiplicatively otherwise
            gain = std::max(0.01, (g > 0.0) != (vel > 0.0) ? gain + 0.2 : gain * 0.8);
            vel = momentum * vel - config.learning_rate * gain * g;
            y.values[c] += vel;
        }
        for (double v : y.values) {
            if (!std::isfinite(v)) {
                throw NumericError("embedding diverged (non-finite value) at iteration " +
                                   std::to_string(iter));
            }
        }
    }

    combine_forces(forces(y), 1.0, scratch);
    trace.points.push_back({config.n_iter, kl_now(y), scratch.norm});
    trace.optimize_seconds = seconds_since(t_opt);
    trace.total_seconds = trace.affinity_seconds + trace.optimize_seconds;

    result.embedding = std::move(y);
    return result;
}

}  // namespace rptsne
