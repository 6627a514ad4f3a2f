#include <doctest.h>

#include <cmath>

#include "rptsne/rng.hpp"

using namespace rptsne;

TEST_CASE("identical seeds give identical streams") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
    Rng c(43);
    bool differs = false;
    Rng a2(42);
    for (int i = 0; i < 10; ++i) differs = differs || (a2.next_u64() != c.next_u64());
    CHECK(differs);
}

TEST_CASE("uniform01 stays in [0, 1)") {
    Rng rng(7);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("below(k) stays in range and covers small ranges") {
    Rng rng(8);
    bool seen[5] = {};
    for (int i = 0; i < 1000; ++i) {
        const auto v = rng.below(5);
        CHECK(v < 5);
        seen[v] = true;
    }
    for (bool s : seen) CHECK(s);
}

TEST_CASE("gaussian moments") {
    Rng rng(9);
    const int n = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gaussian();
        sum += g;
        sum2 += g * g;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(std::abs(mean) < 5.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("derive_stream separates ids and seeds") {
    CHECK(derive_stream(1, 0) != derive_stream(1, 1));
    CHECK(derive_stream(1, 0) != derive_stream(2, 0));
    CHECK(derive_stream(123, 7) == derive_stream(123, 7));
}
