#pragma once

#include <cstddef>
#include <string>

namespace rptsne::kernels {

// Arithmetic inner loops exist as scalar reference code and as AVX2
// variants; one set is selected at process start. The AVX2 variants
// reassociate sums, so callers treat kernel results as accurate to a
// few ulps times the reduction length, never as bit-equal to scalar.
// Per-call results do not depend on the worker count: a kernel call
// always reduces its own range sequentially.

enum class Isa { scalar, avx2 };

// Active instruction set. Detected once (CPUID); overridable with
// force_isa() or the RPTSNE_ISA environment variable ("scalar"/"avx2").
Isa active();
void force_isa(Isa isa);
std::string isa_name(Isa isa);

// sum_i a[i] * b[i]
double dot(const double* a, const double* b, std::size_t n);

// sum_i (a[i] - b[i])^2
double squared_l2(const double* a, const double* b, std::size_t n);

// sum_i x[i]
double sum(const double* x, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double* y, double alpha, const double* x, std::size_t n);

// dst[i] = exp(alpha * src[i]); arguments below -708 underflow to 0.
void exp_scale(double* dst, const double* src, double alpha, std::size_t n);

// One row of the 2-D Student-t pair pass. For a query point (yix, yiy)
// against points ((yx[j], yy[j]))_{j<n} with w_j = 1/(1 + |q - y_j|^2):
//   z      = sum_j w_j                 (includes any self term)
//   rep_*  = sum_j w_j^2 * (q - y_j)
//   attr_* = sum_j p[j] * w_j * (q - y_j)   (skipped when p == nullptr)
struct PairAccum2D {
    double attr_x = 0.0;
    double attr_y = 0.0;
    double rep_x = 0.0;
    double rep_y = 0.0;
    double z = 0.0;
};

PairAccum2D student_t_row_2d(double yix, double yiy, const double* yx, const double* yy,
                             const double* p, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double squared_l2(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void exp_scale(double* dst, const double* src, double alpha, std::size_t n);
PairAccum2D student_t_row_2d(double yix, double yiy, const double* yx, const double* yy,
                             const double* p, std::size_t n);
}  // namespace scalar

namespace avx2 {
bool supported();
double dot(const double* a, const double* b, std::size_t n);
double squared_l2(const double* a, const double* b, std::size_t n);
double sum(const double* x, std::size_t n);
void axpy(double* y, double alpha, const double* x, std::size_t n);
void exp_scale(double* dst, const double* src, double alpha, std::size_t n);
PairAccum2D student_t_row_2d(double yix, double yiy, const double* yx, const double* yy,
                             const double* p, std::size_t n);
}  // namespace avx2

}  // namespace rptsne::kernels
