#pragma once

#include <cmath>
#include <cstdint>

namespace rptsne {

// All randomness in this project comes from xoshiro256** seeded through
// splitmix64, with the derivations below. The exact procedures are part
// of the output contract (see README, "Reproducibility") so that runs
// are bit-reproducible across machines and reimplementations.

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

// Derives an independent stream seed from (seed, id).
constexpr std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t id) {
    return mix64(seed ^ mix64(id ^ 0x9E3779B97F4A7C15ull));
}

struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        return mix64(state);
    }
};

// xoshiro256** 1.0 (Blackman / Vigna).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : spare_(0.0), has_spare_(false) {
        SplitMix64 sm(seed);
        for (auto& si : s_) si = sm.next();
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in {0, ..., bound-1}. Plain modulo; the bias is below
    // bound * 2^-64 and the simple rule is easy to reimplement.
    std::uint64_t below(std::uint64_t bound) { return next_u64() % bound; }

    // Standard normal via Box-Muller; the sine mate is cached.
    double gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform01();  // (0, 1]
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
    double spare_;
    bool has_spare_;
};

}  // namespace rptsne
