#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rptsne/common.hpp"

namespace rptsne {

struct AccuracyReport {
    std::size_t k = 1;
    double score = 0.0;  // fraction of correctly clustered points
    std::map<std::int64_t, double> per_class_scores;
    std::size_t tie_count = 0;  // modal-label ties among the k neighbors
};

// A point is correctly clustered when the modal label of its k nearest
// embedding neighbors (self excluded, distance ties to the smaller
// index, modal ties to the smaller label) equals its own label.
AccuracyReport accuracy_score(const Matrix& y, const LabelVector& labels, std::size_t k);

// Monotonic wall-clock seconds of the callable.
template <class F>
double time_stage(F&& action) {
    const auto t0 = std::chrono::steady_clock::now();
    std::forward<F>(action)();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

enum class Reducer { none, random_projection, pca };

std::string reducer_name(Reducer r);
Reducer reducer_from_name(const std::string& name);

// One benchmark observation.
struct RunRecord {
    Reducer reducer = Reducer::none;
    std::size_t d_prime = 0;
    std::uint64_t seed = 0;
    double tsne_seconds = 0.0;  // t-SNE stage only; reduction time excluded
    AccuracyReport accuracy;
    double final_kl = 0.0;
};

struct RatioRow {
    std::size_t d_prime = 0;
    double time_ratio = 0.0;
    double accuracy_ratio = 0.0;
};

// Per-run ratios against the no-reduction baseline, sorted by d_prime.
std::vector<RatioRow> ratio_table(const RunRecord& baseline, const std::vector<RunRecord>& runs);

// CSV schema: reducer,d_prime,seed,tsne_seconds,accuracy,final_kl.
// Doubles are printed with 17 significant digits so a re-parse is exact.
std::string run_record_csv_header();
std::string run_record_to_csv(const RunRecord& r);
std::vector<RunRecord> read_run_records(const std::string& csv_path, std::size_t* error_rows = nullptr);

}  // namespace rptsne
