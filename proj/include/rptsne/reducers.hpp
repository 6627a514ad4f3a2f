#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rptsne/common.hpp"

namespace rptsne {

struct ProjectionMatrix {
    std::size_t d = 0;
    std::size_t d_prime = 0;
    std::uint64_t seed = 0;
    Matrix entries;  // d x d_prime, row-major
};

// Entries drawn i.i.d. from N(0, 1/d) via Rng(seed), filled row-major.
// Pure function of (d, d_prime, seed).
ProjectionMatrix gaussian_projection(std::size_t d, std::size_t d_prime, std::uint64_t seed);

// X (N x d) times R.entries, giving N x d_prime.
Matrix apply_projection(const Matrix& x, const ProjectionMatrix& r);

// Measured distance distortion between a matrix and its reduction.
struct JlAudit {
    double epsilon = 0.0;
    std::size_t pair_count = 0;      // pairs that entered the statistics
    std::size_t skipped_pairs = 0;   // zero-distance pairs, left out
    double scale_correction = 1.0;   // d / d_prime, see below
    double max_distortion = 0.0;     // max |ratio - 1|
    double fraction_within = 0.0;    // pairs with ratio in [1-eps, 1+eps]
};

// Compares squared pair distances |x'_i - x'_j|^2 / |x_i - x_j|^2 over
// up to pair_budget pairs: all pairs when the budget covers them,
// otherwise pairs sampled by Rng(seed). Because projection entries are
// N(0, 1/d), the expected ratio is d_prime / d; ratios are multiplied
// by d / d_prime so the audit measures concentration around that
// expectation (the distance-preservation property) rather than the
// global scale convention.
JlAudit jl_audit(const Matrix& x, const Matrix& x_proj, double epsilon, std::size_t pair_budget,
                 std::uint64_t seed);

struct PrincipalBasis {
    std::vector<double> mean;                 // length d
    Matrix components;                        // d x d_prime, orthonormal columns
    std::vector<double> explained_variance;   // length d_prime, non-increasing
};

// Top-d_prime eigenpairs of the sample covariance (divisor N-1),
// via the d x d covariance when d <= N and the N x N Gram matrix
// otherwise. Columns are sign-fixed: the largest-magnitude entry of
// each component is positive.
PrincipalBasis pca_fit(const Matrix& x, std::size_t d_prime);

// (X - mean) times components.
Matrix pca_transform(const Matrix& x, const PrincipalBasis& basis);

// Cache helpers; see README for the on-disk layout.
void save_projection(const std::string& base_path, const ProjectionMatrix& r);
ProjectionMatrix load_projection(const std::string& base_path);
void save_basis(const std::string& base_path, const PrincipalBasis& b);
PrincipalBasis load_basis(const std::string& base_path);

// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations;
// returns pairs sorted by non-increasing eigenvalue. Exposed for reuse
// and testing.
struct SymEigen {
    std::vector<double> values;
    Matrix vectors;  // column k is the eigenvector for values[k]
};
SymEigen sym_eigen(const Matrix& a);

}  // namespace rptsne
