#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "rptsne/kernels.hpp"
#include "rptsne/reducers.hpp"
#include "rptsne/rng.hpp"

using namespace rptsne;

namespace {

Matrix random_matrix(std::size_t n, std::size_t d, std::uint64_t seed, double scale = 1.0) {
    Matrix m(n, d);
    Rng rng(seed);
    for (double& v : m.values) v = rng.gaussian() * scale;
    return m;
}

// Closed-form eigenvalues of a symmetric 3x3 matrix (trigonometric
// method on the characteristic polynomial) -- independent of sym_eigen.
std::vector<double> eigen3x3(const Matrix& a) {
    const double p1 = a.at(0, 1) * a.at(0, 1) + a.at(0, 2) * a.at(0, 2) + a.at(1, 2) * a.at(1, 2);
    const double q = (a.at(0, 0) + a.at(1, 1) + a.at(2, 2)) / 3.0;
    if (p1 == 0.0) {
        std::vector<double> ev = {a.at(0, 0), a.at(1, 1), a.at(2, 2)};
        std::sort(ev.rbegin(), ev.rend());
        return ev;
    }
    const double p2 = (a.at(0, 0) - q) * (a.at(0, 0) - q) + (a.at(1, 1) - q) * (a.at(1, 1) - q) +
                      (a.at(2, 2) - q) * (a.at(2, 2) - q) + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    Matrix b(3, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            b.at(i, j) = (a.at(i, j) - (i == j ? q : 0.0)) / p;
        }
    }
    const double detb = b.at(0, 0) * (b.at(1, 1) * b.at(2, 2) - b.at(1, 2) * b.at(2, 1)) -
                        b.at(0, 1) * (b.at(1, 0) * b.at(2, 2) - b.at(1, 2) * b.at(2, 0)) +
                        b.at(0, 2) * (b.at(1, 0) * b.at(2, 1) - b.at(1, 1) * b.at(2, 0));
    const double r = std::clamp(detb / 2.0, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::vector<double> ev = {e1, e2, e3};
    std::sort(ev.rbegin(), ev.rend());
    return ev;
}

}  // namespace

TEST_CASE("gaussian_projection is a pure function of (d, d_prime, seed)") {
    const ProjectionMatrix a = gaussian_projection(784, 50, 1);
    const ProjectionMatrix b = gaussian_projection(784, 50, 1);
    CHECK(a.entries.values == b.entries.values);
    const ProjectionMatrix c = gaussian_projection(784, 50, 2);
    CHECK(a.entries.values != c.entries.values);
}

TEST_CASE("gaussian_projection moments at d = 1000") {
    const std::size_t d = 1000;
    const ProjectionMatrix r = gaussian_projection(d, d, 7);
    const double n = static_cast<double>(d * d);
    double sum = 0.0, sum2 = 0.0;
    for (double v : r.entries.values) {
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    const double sigma = 1.0 / std::sqrt(static_cast<double>(d));
    CHECK(std::abs(mean) <= 4.0 * sigma / std::sqrt(n));
    CHECK(std::abs(var - 1.0 / d) <= 0.02 * (1.0 / d));
}

TEST_CASE("gaussian_projection parameter errors") {
    CHECK_THROWS_AS(gaussian_projection(3, 5, 1), UsageError);
    CHECK_THROWS_AS(gaussian_projection(3, 0, 1), UsageError);
}

TEST_CASE("apply_projection basics") {
    const ProjectionMatrix r = gaussian_projection(3, 2, 5);

    Matrix zero(4, 3);
    const Matrix pz = apply_projection(zero, r);
    for (double v : pz.values) CHECK(v == 0.0);

    Matrix basis(2, 3);
    basis.at(0, 0) = 1.0;
    basis.at(1, 1) = 1.0;
    const Matrix pb = apply_projection(basis, r);
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(pb.at(0, j) == r.entries.at(0, j));
        CHECK(pb.at(1, j) == r.entries.at(1, j));
    }

    Matrix wrong(2, 4);
    CHECK_THROWS_AS(apply_projection(wrong, r), UsageError);
}

TEST_CASE("apply_projection matches the naive triple loop") {
    const Matrix x = random_matrix(10, 8, 31);
    const ProjectionMatrix r = gaussian_projection(8, 5, 32);
    const Matrix got = apply_projection(x, r);
    for (std::size_t i = 0; i < 10; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < 8; ++k) acc += x.at(i, k) * r.entries.at(k, j);
            CHECK(got.at(i, j) == doctest::Approx(acc).epsilon(1e-12));
        }
    }
}

TEST_CASE("apply_projection is linear") {
    const Matrix x1 = random_matrix(6, 9, 41);
    const Matrix x2 = random_matrix(6, 9, 42);
    const ProjectionMatrix r = gaussian_projection(9, 4, 43);
    const double a = 1.7, b = -0.3;
    Matrix combo(6, 9);
    for (std::size_t i = 0; i < combo.values.size(); ++i) {
        combo.values[i] = a * x1.values[i] + b * x2.values[i];
    }
    const Matrix p_combo = apply_projection(combo, r);
    const Matrix p1 = apply_projection(x1, r);
    const Matrix p2 = apply_projection(x2, r);
    for (std::size_t i = 0; i < p_combo.values.size(); ++i) {
        CHECK(p_combo.values[i] ==
              doctest::Approx(a * p1.values[i] + b * p2.values[i]).epsilon(1e-10));
    }
}

TEST_CASE("jl_audit identity and degenerate pairs") {
    const Matrix x = random_matrix(20, 6, 51);
    const JlAudit same = jl_audit(x, x, 0.3, 1000000, 1);
    CHECK(same.fraction_within == 1.0);
    CHECK(same.max_distortion == 0.0);
    CHECK(same.skipped_pairs == 0);

    Matrix dup = random_matrix(4, 3, 52);
    std::copy(dup.row(0), dup.row(0) + 3, dup.row(2));
    const JlAudit audit = jl_audit(dup, dup, 0.5, 1000000, 1);
    CHECK(audit.skipped_pairs == 1);
    CHECK(std::isfinite(audit.max_distortion));

    Matrix one(1, 3);
    CHECK_THROWS_AS(jl_audit(one, one, 0.3, 10, 1), UsageError);
}

TEST_CASE("jl_audit concentration at d' = 200") {
    bool ok = false;
    for (const std::uint64_t seed : {7ull, 8ull}) {  // statistical: one fresh retry
        const Matrix x = random_matrix(200, 784, seed);
        const ProjectionMatrix r = gaussian_projection(784, 200, seed + 100);
        const Matrix xp = apply_projection(x, r);
        const JlAudit audit = jl_audit(x, xp, 0.3, 1u << 30, seed);
        CHECK(audit.pair_count == 200 * 199 / 2);
        if (audit.fraction_within >= 0.99) {
            ok = true;
            break;
        }
    }
    CHECK(ok);
}

TEST_CASE("pca_fit on collinear points has a vanishing second eigenvalue") {
    Matrix x(6, 3);
    for (std::size_t i = 0; i < 6; ++i) {
        const double t = static_cast<double>(i) - 2.5;
        x.at(i, 0) = 2.0 * t;
        x.at(i, 1) = -1.0 * t;
        x.at(i, 2) = 0.5 * t;
    }
    const PrincipalBasis basis = pca_fit(x, 2);
    CHECK(basis.explained_variance[1] <= 1e-10 * basis.explained_variance[0]);
}

TEST_CASE("pca_fit eigenvalues match a closed-form 3x3 oracle") {
    const Matrix x = random_matrix(5, 3, 61);
    const PrincipalBasis basis = pca_fit(x, 3);

    // covariance formed explicitly, eigenvalues from the trig formula
    std::vector<double> mean(3, 0.0);
    for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 3; ++j) mean[j] += x.at(i, j) / 5.0;
    }
    Matrix cov(3, 3);
    for (std::size_t a = 0; a < 3; ++a) {
        for (std::size_t b = 0; b < 3; ++b) {
            double acc = 0.0;
            for (std::size_t i = 0; i < 5; ++i) {
                acc += (x.at(i, a) - mean[a]) * (x.at(i, b) - mean[b]);
            }
            cov.at(a, b) = acc / 4.0;
        }
    }
    const std::vector<double> want = eigen3x3(cov);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(basis.explained_variance[k] == doctest::Approx(want[k]).epsilon(1e-8));
    }
}

TEST_CASE("pca_fit is invariant to row permutation") {
    const Matrix x = random_matrix(9, 4, 71);
    Matrix perm(9, 4);
    const std::size_t order[9] = {3, 1, 8, 0, 2, 7, 5, 4, 6};
    for (std::size_t i = 0; i < 9; ++i) {
        std::copy(x.row(order[i]), x.row(order[i]) + 4, perm.row(i));
    }
    const PrincipalBasis a = pca_fit(x, 3);
    const PrincipalBasis b = pca_fit(perm, 3);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(a.explained_variance[k] == doctest::Approx(b.explained_variance[k]).epsilon(1e-10));
    }
}

TEST_CASE("principal basis columns are orthonormal") {
    for (const bool gram_path : {false, true}) {
        const Matrix x = gram_path ? random_matrix(5, 12, 81) : random_matrix(30, 6, 82);
        const std::size_t d_prime = gram_path ? 4 : 6;
        const PrincipalBasis basis = pca_fit(x, d_prime);
        for (std::size_t a = 0; a < d_prime; ++a) {
            for (std::size_t b = 0; b < d_prime; ++b) {
                double acc = 0.0;
                for (std::size_t i = 0; i < x.cols; ++i) {
                    acc += basis.components.at(i, a) * basis.components.at(i, b);
                }
                CHECK(std::abs(acc - (a == b ? 1.0 : 0.0)) <= 1e-10);
            }
        }
        for (std::size_t k = 1; k < d_prime; ++k) {
            CHECK(basis.explained_variance[k] <= basis.explained_variance[k - 1]);
        }
    }
}

TEST_CASE("gram path rejects components beyond the data rank") {
    const Matrix x = random_matrix(4, 6, 91);  // centered rank <= 3
    CHECK_THROWS_AS(pca_fit(x, 4), NumericError);
}

TEST_CASE("pca_transform properties") {
    const Matrix x = random_matrix(40, 7, 101);
    const PrincipalBasis basis = pca_fit(x, 5);
    const Matrix t = pca_transform(x, basis);

    SUBCASE("columns are centered") {
        for (std::size_t j = 0; j < 5; ++j) {
            double mean = 0.0;
            for (std::size_t i = 0; i < t.rows; ++i) mean += t.at(i, j);
            mean /= static_cast<double>(t.rows);
            CHECK(std::abs(mean) <= 1e-10);
        }
    }

    SUBCASE("column variances equal explained_variance") {
        for (std::size_t j = 0; j < 5; ++j) {
            double var = 0.0;
            for (std::size_t i = 0; i < t.rows; ++i) var += t.at(i, j) * t.at(i, j);
            var /= static_cast<double>(t.rows - 1);
            CHECK(var == doctest::Approx(basis.explained_variance[j]).epsilon(1e-8));
        }
    }

    SUBCASE("dimension mismatch throws") {
        Matrix wrong(3, 6);
        CHECK_THROWS_AS(pca_transform(wrong, basis), UsageError);
    }
}

TEST_CASE("pca_transform is an isometry on planar data") {
    // points on a 2-D affine plane inside R^10
    Matrix x(25, 10);
    Rng rng(111);
    std::vector<double> u(10), v(10), origin(10);
    for (auto* vec : {&u, &v, &origin}) {
        for (double& c : *vec) c = rng.gaussian();
    }
    for (std::size_t i = 0; i < 25; ++i) {
        const double a = rng.gaussian(), b = rng.gaussian();
        for (std::size_t j = 0; j < 10; ++j) x.at(i, j) = origin[j] + a * u[j] + b * v[j];
    }
    const PrincipalBasis basis = pca_fit(x, 2);
    const Matrix t = pca_transform(x, basis);
    for (std::size_t i = 0; i < 25; ++i) {
        for (std::size_t j = i + 1; j < 25; ++j) {
            const double orig = kernels::squared_l2(x.row(i), x.row(j), 10);
            const double red = kernels::squared_l2(t.row(i), t.row(j), 2);
            CHECK(red == doctest::Approx(orig).epsilon(1e-8));
        }
    }
}

TEST_CASE("projection preserves nearest-neighbor order on mixture data") {
    bool ok = false;
    for (const std::uint64_t seed : {5ull, 6ull}) {  // statistical: one fresh retry
        // 250 tight Gaussian pairs: each point's 1-NN (its partner) is
        // an order of magnitude closer than anything else
        Matrix x(500, 200);
        Rng rng(seed);
        std::vector<std::vector<double>> centers(250, std::vector<double>(200));
        for (auto& c : centers) {
            for (double& v : c) v = rng.gaussian() * 3.0;
        }
        for (std::size_t i = 0; i < 500; ++i) {
            const auto& c = centers[i / 2];
            for (std::size_t j = 0; j < 200; ++j) x.at(i, j) = c[j] + rng.gaussian();
        }
        const ProjectionMatrix r = gaussian_projection(200, 50, seed + 10);
        const Matrix xp = apply_projection(x, r);

        auto nn1 = [](const Matrix& m, std::size_t i) {
            std::size_t best = i == 0 ? 1 : 0;
            double best_d = kernels::squared_l2(m.row(i), m.row(best), m.cols);
            for (std::size_t j = 0; j < m.rows; ++j) {
                if (j == i) continue;
                const double d = kernels::squared_l2(m.row(i), m.row(j), m.cols);
                if (d < best_d) {
                    best_d = d;
                    best = j;
                }
            }
            return best;
        };
        std::size_t agree = 0;
        for (std::size_t i = 0; i < 500; ++i) {
            if (nn1(x, i) == nn1(xp, i)) ++agree;
        }
        if (agree >= 450) {
            ok = true;
            break;
        }
    }
    CHECK(ok);
}

TEST_CASE("reducer serialization round-trips") {
    const auto dir = std::filesystem::temp_directory_path() / "rptsne_reducers";
    std::filesystem::create_directories(dir);

    const ProjectionMatrix r = gaussian_projection(12, 4, 3);
    save_projection((dir / "proj").string(), r);
    const ProjectionMatrix r2 = load_projection((dir / "proj").string());
    CHECK(r2.d == r.d);
    CHECK(r2.d_prime == r.d_prime);
    CHECK(r2.seed == r.seed);
    CHECK(r2.entries.values == r.entries.values);

    const Matrix x = random_matrix(20, 6, 121);
    const PrincipalBasis b = pca_fit(x, 3);
    save_basis((dir / "basis").string(), b);
    const PrincipalBasis b2 = load_basis((dir / "basis").string());
    CHECK(b2.mean == b.mean);
    CHECK(b2.components.values == b.components.values);
    CHECK(b2.explained_variance == b.explained_variance);
}
