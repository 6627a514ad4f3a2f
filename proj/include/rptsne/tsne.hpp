#pragma once

#include <cstdint>
#include <vector>

#include "rptsne/common.hpp"

namespace rptsne {

struct TsneConfig {
    double perplexity = 30.0;
    int n_iter = 1000;
    double early_exaggeration_factor = 12.0;
    int early_exaggeration_iters = 250;
    double learning_rate = 200.0;
    double momentum_initial = 0.5;
    double momentum_final = 0.8;
    int momentum_switch_iter = 250;
    double init_scale = 1e-4;
    double theta = 0.0;  // Barnes-Hut accuracy; 0 runs the exact engine
    std::uint64_t seed = 0;
    double min_prob_floor = 1e-12;
    double calibration_tol = 1e-5;  // on log2(perplexity)
    int calibration_max_iter = 50;

    void validate(std::size_t n) const;
};

// One calibrated conditional distribution p_{.|i}.
struct ConditionalRow {
    std::size_t anchor = 0;
    std::vector<double> probabilities;  // length N, anchor entry exactly 0
    double sigma = 0.0;
    double achieved_perplexity = 0.0;
    bool duplicate_fallback = false;  // all-zero distances, uniform row
};

// Symmetric joint affinities P, dense form.
struct AffinityMatrix {
    std::size_t n = 0;
    Matrix p;  // n x n, symmetric, zero diagonal, off-diagonal >= floor
    std::size_t duplicate_rows = 0;
};

// Sparse symmetric affinities restricted to each point's neighbor list.
struct SparseAffinity {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr;  // length n+1
    std::vector<std::uint32_t> col;
    std::vector<double> val;
    std::size_t duplicate_rows = 0;
};

// Pairwise squared Euclidean distances, expanded form |a|^2 + |b|^2 - 2ab
// clamped at 0. Symmetric with a zero diagonal.
Matrix squared_distances(const Matrix& x);

// Binary search over beta = 1/(2 sigma^2) until the row entropy matches
// log2(perplexity) within tol (or max_iter bisections). distances is a
// full length-n row of squared distances; the anchor entry is ignored.
ConditionalRow calibrate_row(const double* distances, std::size_t n, std::size_t anchor,
                             double perplexity, double tol, int max_iter);

// P_ij = (p_{i|j} + p_{j|i}) / (2N), floored off-diagonal afterwards.
AffinityMatrix joint_affinities(const Matrix& x, const TsneConfig& config);

// Same affinities truncated to each point's ceil(3*perplexity) nearest
// neighbors (exact scan, ties to the smaller index).
SparseAffinity joint_affinities_sparse(const Matrix& x, const TsneConfig& config);

// Student-t responsibilities of an embedding. q is floored for KL use;
// z is the unfloored normalizer sum_{k != l} (1 + |y_k - y_l|^2)^-1.
struct LowDimAffinities {
    Matrix q;
    double z = 0.0;
};
LowDimAffinities low_dim_affinities(const Matrix& y, double min_prob_floor = 1e-12);

double kl_divergence(const AffinityMatrix& p, const LowDimAffinities& q);

// KL of the embedding against P without materialising Q (exact Z).
double kl_divergence(const AffinityMatrix& p, const Matrix& y, double min_prob_floor = 1e-12);
double kl_divergence(const SparseAffinity& p, const Matrix& y, double min_prob_floor = 1e-12);

// Attraction / repulsion split of the KL gradient: the gradient of
// point i is 4 * (attr_i - rep_i / z).
struct ForceDecomposition {
    Matrix attr;  // sum_j P_ij w_ij (y_i - y_j)
    Matrix rep;   // sum_j w_ij^2 (y_i - y_j), possibly tree-approximated
    double z = 0.0;
};

ForceDecomposition exact_forces(const AffinityMatrix& p, const Matrix& y);
Matrix exact_gradient(const AffinityMatrix& p, const Matrix& y);

ForceDecomposition barnes_hut_forces(const SparseAffinity& p, const Matrix& y, double theta);
Matrix barnes_hut_gradient(const SparseAffinity& p, const Matrix& y, double theta);

struct TracePoint {
    int iteration = 0;
    double kl = 0.0;
    double grad_norm = 0.0;
};

struct OptimizerTrace {
    std::vector<TracePoint> points;
    double distance_seconds = 0.0;     // dense mode: the N^2 d distance pass
    double affinity_seconds = 0.0;     // distances + calibration + symmetrisation
    double optimize_seconds = 0.0;
    double total_seconds = 0.0;        // affinity + optimize
    std::size_t duplicate_rows = 0;
    double final_kl() const { return points.empty() ? 0.0 : points.back().kl; }
};

struct TsneResult {
    Matrix embedding;  // N x 2
    OptimizerTrace trace;
};

// Full pipeline: affinities, N(0, init_scale^2) start from Rng(seed),
// early exaggeration, gain-adjusted momentum gradient descent.
// Deterministic for fixed (x, config) at any worker count.
TsneResult run_tsne(const Matrix& x, const TsneConfig& config);

}  // namespace rptsne
