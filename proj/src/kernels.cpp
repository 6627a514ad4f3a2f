#include "rptsne/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

#include "rptsne/common.hpp"

namespace rptsne {

namespace {
std::atomic<int> g_threads{1};
}

int threads() { return g_threads.load(std::memory_order_relaxed); }

void set_threads(int n) { g_threads.store(n < 1 ? 1 : n, std::memory_order_relaxed); }

}  // namespace rptsne

namespace rptsne::kernels {

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*squared_l2)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    void (*axpy)(double*, double, const double*, std::size_t);
    void (*exp_scale)(double*, const double*, double, std::size_t);
    PairAccum2D (*student_t_row_2d)(double, double, const double*, const double*, const double*,
                                    std::size_t);
};

constexpr Table kScalar = {scalar::dot,  scalar::squared_l2, scalar::sum,
                           scalar::axpy, scalar::exp_scale,  scalar::student_t_row_2d};
constexpr Table kAvx2 = {avx2::dot,  avx2::squared_l2, avx2::sum,
                         avx2::axpy, avx2::exp_scale,  avx2::student_t_row_2d};

Isa detect() {
    if (const char* env = std::getenv("RPTSNE_ISA")) {
        if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2::supported()) return Isa::avx2;
    }
    return avx2::supported() ? Isa::avx2 : Isa::scalar;
}

struct State {
    Isa isa;
    const Table* table;
    State() : isa(detect()), table(isa == Isa::avx2 ? &kAvx2 : &kScalar) {}
};

State& state() {
    static State s;
    return s;
}

}  // namespace

Isa active() { return state().isa; }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2::supported()) isa = Isa::scalar;
    state().isa = isa;
    state().table = (isa == Isa::avx2) ? &kAvx2 : &kScalar;
}

std::string isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return state().table->dot(a, b, n); }

double squared_l2(const double* a, const double* b, std::size_t n) {
    return state().table->squared_l2(a, b, n);
}

double sum(const double* x, std::size_t n) { return state().table->sum(x, n); }

void axpy(double* y, double alpha, const double* x, std::size_t n) {
    state().table->axpy(y, alpha, x, n);
}

void exp_scale(double* dst, const double* src, double alpha, std::size_t n) {
    state().table->exp_scale(dst, src, alpha, n);
}

PairAccum2D student_t_row_2d(double yix, double yiy, const double* yx, const double* yy,
                             const double* p, std::size_t n) {
    return state().table->student_t_row_2d(yix, yiy, yx, yy, p, n);
}

}  // namespace rptsne::kernels
