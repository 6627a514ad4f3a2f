#include "rptsne/kernels.hpp"

#include <cmath>

namespace rptsne::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double squared_l2(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

double sum(const double* x, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void exp_scale(double* dst, const double* src, double alpha, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = alpha * src[i];
        dst[i] = (x < -708.0) ? 0.0 : std::exp(x);
    }
}

PairAccum2D student_t_row_2d(double yix, double yiy, const double* yx, const double* yy,
                             const double* p, std::size_t n) {
    PairAccum2D acc;
    for (std::size_t j = 0; j < n; ++j) {
        const double dx = yix - yx[j];
        const double dy = yiy - yy[j];
        const double w = 1.0 / (1.0 + dx * dx + dy * dy);
        acc.z += w;
        const double w2 = w * w;
        acc.rep_x += w2 * dx;
        acc.rep_y += w2 * dy;
        if (p != nullptr) {
            const double pw = p[j] * w;
            acc.attr_x += pw * dx;
            acc.attr_y += pw * dy;
        }
    }
    return acc;
}

}  // namespace rptsne::kernels::scalar
