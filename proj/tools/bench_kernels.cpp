// Micro-benchmark for the scalar vs AVX2 kernel variants.
// Usage: bench_kernels [n] [reps]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "rptsne/kernels.hpp"
#include "rptsne/rng.hpp"

using namespace rptsne;

namespace {

volatile double g_sink = 0.0;

template <class F>
double time_loop(int reps, F&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) g_sink = g_sink + fn();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

}  // namespace

int main(int argc, char** argv) {
    const std::size_t n = argc > 1 ? std::stoull(argv[1]) : 4096;
    const int reps = argc > 2 ? std::stoi(argv[2]) : 20000;

    Rng rng(1);
    std::vector<double> a(n), b(n), out(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = rng.gaussian();
        b[i] = rng.gaussian();
        p[i] = rng.uniform01();
    }

    struct Row {
        const char* name;
        double scalar_ns;
        double avx2_ns;
    };
    std::vector<Row> rows;

    auto bench = [&](const char* name, auto scalar_fn, auto avx2_fn) {
        Row row{name, 0.0, 0.0};
        row.scalar_ns = time_loop(reps, scalar_fn) * 1e9;
        if (kernels::avx2::supported()) row.avx2_ns = time_loop(reps, avx2_fn) * 1e9;
        rows.push_back(row);
    };

    bench("dot",
          [&] { return kernels::scalar::dot(a.data(), b.data(), n); },
          [&] { return kernels::avx2::dot(a.data(), b.data(), n); });
    bench("squared_l2",
          [&] { return kernels::scalar::squared_l2(a.data(), b.data(), n); },
          [&] { return kernels::avx2::squared_l2(a.data(), b.data(), n); });
    bench("sum",
          [&] { return kernels::scalar::sum(a.data(), n); },
          [&] { return kernels::avx2::sum(a.data(), n); });
    bench("exp_scale",
          [&] {
              kernels::scalar::exp_scale(out.data(), a.data(), -1.3, n);
              return out[0];
          },
          [&] {
              kernels::avx2::exp_scale(out.data(), a.data(), -1.3, n);
              return out[0];
          });
    bench("student_t_row_2d",
          [&] {
              return kernels::scalar::student_t_row_2d(0.3, -0.7, a.data(), b.data(), p.data(), n)
                  .z;
          },
          [&] {
              return kernels::avx2::student_t_row_2d(0.3, -0.7, a.data(), b.data(), p.data(), n).z;
          });

    std::printf("kernel timings at n=%zu (%d reps, ns per call)\n", n, reps);
    std::printf("%-18s %12s %12s %8s\n", "kernel", "scalar", "avx2", "speedup");
    for (const Row& r : rows) {
        if (r.avx2_ns > 0.0) {
            std::printf("%-18s %12.1f %12.1f %7.2fx\n", r.name, r.scalar_ns, r.avx2_ns,
                        r.scalar_ns / r.avx2_ns);
        } else {
            std::printf("%-18s %12.1f %12s %8s\n", r.name, r.scalar_ns, "n/a", "-");
        }
    }
    return 0;
}
