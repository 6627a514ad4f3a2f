#include "rptsne/kernels.hpp"

#include <immintrin.h>

#include <cmath>
#include <limits>

#define RPTSNE_TARGET_AVX2 __attribute__((target("avx2,fma")))

namespace rptsne::kernels::avx2 {

bool supported() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

RPTSNE_TARGET_AVX2 inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    const __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

// exp() on 4 lanes, Cephes-style: n = round(x*log2(e)), Cody-Waite
// reduction, rational approximation on the remainder, 2^n by exponent
// assembly. Accurate to ~2 ulp; below -708 the result is flushed to 0.
RPTSNE_TARGET_AVX2 inline __m256d exp4(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);

    const __m256d lo_mask = _mm256_cmp_pd(x, _mm256_set1_pd(-708.0), _CMP_LT_OQ);
    const __m256d hi_mask = _mm256_cmp_pd(x, _mm256_set1_pd(709.0), _CMP_GT_OQ);
    x = _mm256_max_pd(x, _mm256_set1_pd(-708.0));
    x = _mm256_min_pd(x, _mm256_set1_pd(709.0));

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);
    const __m256d r2 = _mm256_mul_pd(r, r);

    __m256d px = _mm256_fmadd_pd(p0, r2, p1);
    px = _mm256_fmadd_pd(px, r2, p2);
    px = _mm256_mul_pd(px, r);

    __m256d qx = _mm256_fmadd_pd(q0, r2, q1);
    qx = _mm256_fmadd_pd(qx, r2, q2);
    qx = _mm256_fmadd_pd(qx, r2, q3);

    const __m256d ratio = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    const __m256d er = _mm256_fmadd_pd(two, ratio, one);

    // 2^n via the exponent field; n stays within the normal range here.
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    const __m256d scale = _mm256_castsi256_pd(bits);

    __m256d result = _mm256_mul_pd(er, scale);
    result = _mm256_blendv_pd(result, _mm256_setzero_pd(), lo_mask);
    result = _mm256_blendv_pd(result, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
                              hi_mask);
    return result;
}

}  // namespace

RPTSNE_TARGET_AVX2 double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    if (i + 4 <= n) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        i += 4;
    }
    double result = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) result += a[i] * b[i];
    return result;
}

RPTSNE_TARGET_AVX2 double squared_l2(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        acc1 = _mm256_fmadd_pd(d1, d1, acc1);
    }
    if (i + 4 <= n) {
        const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc0 = _mm256_fmadd_pd(d0, d0, acc0);
        i += 4;
    }
    double result = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        result += d * d;
    }
    return result;
}

RPTSNE_TARGET_AVX2 double sum(const double* x, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
    double result = hsum(acc);
    for (; i < n; ++i) result += x[i];
    return result;
}

RPTSNE_TARGET_AVX2 void axpy(double* y, double alpha, const double* x, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

RPTSNE_TARGET_AVX2 void exp_scale(double* dst, const double* src, double alpha, std::size_t n) {
    const __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(dst + i, exp4(_mm256_mul_pd(va, _mm256_loadu_pd(src + i))));
    }
    for (; i < n; ++i) {
        const double x = alpha * src[i];
        dst[i] = (x < -708.0) ? 0.0 : std::exp(x);
    }
}

RPTSNE_TARGET_AVX2 PairAccum2D student_t_row_2d(double yix, double yiy, const double* yx,
                                                const double* yy, const double* p,
                                                std::size_t n) {
    const __m256d qx = _mm256_set1_pd(yix);
    const __m256d qy = _mm256_set1_pd(yiy);
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d vz = _mm256_setzero_pd();
    __m256d vrx = _mm256_setzero_pd();
    __m256d vry = _mm256_setzero_pd();
    __m256d vax = _mm256_setzero_pd();
    __m256d vay = _mm256_setzero_pd();
    std::size_t j = 0;
    if (p != nullptr) {
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(qx, _mm256_loadu_pd(yx + j));
            const __m256d dy = _mm256_sub_pd(qy, _mm256_loadu_pd(yy + j));
            const __m256d d2 = _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx));
            const __m256d w = _mm256_div_pd(one, _mm256_add_pd(one, d2));
            vz = _mm256_add_pd(vz, w);
            const __m256d w2 = _mm256_mul_pd(w, w);
            vrx = _mm256_fmadd_pd(w2, dx, vrx);
            vry = _mm256_fmadd_pd(w2, dy, vry);
            const __m256d pw = _mm256_mul_pd(_mm256_loadu_pd(p + j), w);
            vax = _mm256_fmadd_pd(pw, dx, vax);
            vay = _mm256_fmadd_pd(pw, dy, vay);
        }
    } else {
        for (; j + 4 <= n; j += 4) {
            const __m256d dx = _mm256_sub_pd(qx, _mm256_loadu_pd(yx + j));
            const __m256d dy = _mm256_sub_pd(qy, _mm256_loadu_pd(yy + j));
            const __m256d d2 = _mm256_fmadd_pd(dy, dy, _mm256_mul_pd(dx, dx));
            const __m256d w = _mm256_div_pd(one, _mm256_add_pd(one, d2));
            vz = _mm256_add_pd(vz, w);
            const __m256d w2 = _mm256_mul_pd(w, w);
            vrx = _mm256_fmadd_pd(w2, dx, vrx);
            vry = _mm256_fmadd_pd(w2, dy, vry);
        }
    }
    PairAccum2D acc;
    acc.z = hsum(vz);
    acc.rep_x = hsum(vrx);
    acc.rep_y = hsum(vry);
    acc.attr_x = hsum(vax);
    acc.attr_y = hsum(vay);
    for (; j < n; ++j) {
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

}  // namespace rptsne::kernels::avx2
