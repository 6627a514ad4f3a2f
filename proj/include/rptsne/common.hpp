#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace rptsne {

// Error taxonomy, mapped onto CLI exit codes (1/2/3).
class UsageError : public std::runtime_error {
public:
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense row-major matrix of doubles. One row per sample.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), values(r * c, fill) {}

    double* row(std::size_t i) { return values.data() + i * cols; }
    const double* row(std::size_t i) const { return values.data() + i * cols; }

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

    bool all_finite() const {
        for (double v : values) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }
};

using LabelVector = std::vector<std::int64_t>;

// Worker count used by parallel_for. Results never depend on it.
int threads();
void set_threads(int n);

namespace detail {
template <class F>
void run_range(std::size_t begin, std::size_t end, const F& fn) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
}
}  // namespace detail

// Runs fn(i) for i in [0, n). Each index must write only to its own
// outputs; reductions are done by the caller in index order afterwards,
// so results are identical for every worker count.
template <class F>
void parallel_for(std::size_t n, const F& fn) {
    const int t = threads();
    if (t <= 1 || n < 2) {
        detail::run_range(0, n, fn);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(t), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = n * w / workers;
        const std::size_t end = n * (w + 1) / workers;
        pool.emplace_back([begin, end, &fn] { detail::run_range(begin, end, fn); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rptsne
