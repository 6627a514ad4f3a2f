#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rptsne/data_io.hpp"
#include "rptsne/evaluation.hpp"
#include "rptsne/tsne.hpp"

namespace rptsne {

struct DatasetSpec {
    enum class Format { idx, raw, csv };
    Format format = Format::raw;
    std::string images, labels;   // idx pair
    std::string matrix, sidecar;  // raw pair
    std::string csv;
    bool csv_header = false;
    bool csv_labels = true;
    bool normalize = true;  // divide by 255
    std::size_t subsample = 0;  // 0 keeps all rows
    std::uint64_t subsample_seed = 0;
};

Dataset load_dataset(const DatasetSpec& spec);

struct SweepConfig {
    DatasetSpec dataset;
    bool use_random_projection = true;
    bool use_pca = false;
    std::size_t dim_start = 7;
    double dim_base = 1.5;
    TsneConfig tsne;
    int repeats = 1;
    std::size_t k = 1;  // accuracy neighbor count
    std::uint64_t master_seed = 0;
    std::string out_dir = ".";
};

// round(dim_start * dim_base^t) for t = 0, 1, ... while below d
// (round half away from zero), deduplicated, with d appended.
std::vector<std::size_t> sweep_dimensions(std::size_t d, std::size_t dim_start, double dim_base);

// Runs the no-reduction baseline first, then every enabled reducer at
// every swept dimension, appending each record to <out_dir>/runs.csv as
// it completes. A failed run becomes an error-marker row and the sweep
// continues. Returns the successful records (baseline first).
//
// Seeds derive from the master seed (see README, "Reproducibility"):
//   run_stream  = derive(derive(derive(master, reducer_tag), d_prime), repeat)
//   tsne seed   = derive(run_stream, 1)
//   reducer seed= derive(run_stream, 2)
// with reducer_tag none=0, random_projection=1, pca=2.
std::vector<RunRecord> run_sweep(const SweepConfig& config);

// Flat key=value config file; unknown keys are rejected.
SweepConfig load_sweep_config(const std::string& path);

}  // namespace rptsne
