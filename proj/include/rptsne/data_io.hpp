#pragma once

#include <cstdint>
#include <string>

#include "rptsne/common.hpp"

namespace rptsne {

// A loaded dataset. labels is empty when the source had none.
struct Dataset {
    Matrix x;
    LabelVector labels;
    bool has_labels() const { return !labels.empty(); }
};

// IDX files as distributed for the MNIST-family datasets: big-endian
// u32 headers, magic 0x00000803 for images (dims [N, rows, cols]) and
// 0x00000801 for labels (dims [N]), u8 payload. Each image becomes one
// row of rows*cols values; normalize divides by 255.
Dataset load_idx(const std::string& images_path, const std::string& labels_path,
                 bool normalize = true);

// raw_f64: header-less little-endian f64 matrix, row-major, with an
// optional block of little-endian u64 labels appended, described by a
// text sidecar of key=value lines: n_rows, n_cols, labels (true/false).
Dataset load_raw(const std::string& matrix_path, const std::string& sidecar_path);
void write_raw(const std::string& matrix_path, const std::string& sidecar_path, const Matrix& x,
               const LabelVector* labels = nullptr);

// Low-level raw_f64 matrix io without dataset invariants (used for
// caching projection matrices and bases).
Matrix read_raw_matrix(const std::string& matrix_path, const std::string& sidecar_path);
void write_raw_matrix(const std::string& matrix_path, const std::string& sidecar_path,
                      const Matrix& x);

// CSV: optional header row; when labels_last_column is set the final
// column holds the integer label.
Dataset load_csv(const std::string& path, bool header, bool labels_last_column);

// Keeps m rows chosen without replacement, preserving their original
// order. Selection is a partial Fisher-Yates shuffle over [0, N) driven
// by Rng(seed) with j = i + below(N - i); the first m slots, sorted
// ascending, are the kept row indices (see README, "Reproducibility").
Dataset subsample(const Dataset& in, std::size_t m, std::uint64_t seed);

// In-place division by 255, for byte-valued sources.
void normalize255(Matrix& x);

}  // namespace rptsne
