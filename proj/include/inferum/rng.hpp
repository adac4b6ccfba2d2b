#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace inferum {

// splitmix64 finalizer; full-avalanche 64-bit mix.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Label hash for stream families ("instance", "rollout", ...).
inline uint64_t stream_tag(std::string_view name) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t derive_seed(uint64_t base, uint64_t t) {
    return mix64(base ^ mix64(t));
}

template <typename... Rest>
uint64_t derive_seed(uint64_t base, uint64_t t, Rest... rest) {
    return derive_seed(derive_seed(base, t), rest...);
}

// Deterministic splitmix64 stream. Every source of randomness in the project
// draws from an Rng whose seed is derived from explicit labels/indices via
// derive_seed, so results do not depend on thread count or scheduling.
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n). n must be positive.
    int next_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

    // Standard normal via Box-Muller. Draws a fresh pair per call and keeps
    // the spare so consecutive calls stay cheap; the cache is part of the
    // value state, so copies replay identically.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - next_double(); // (0, 1]
        double u2 = next_double();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    // Child stream keyed by t; independent of how much this stream has drawn
    // only if called before any draws, so fold from freshly-derived seeds.
    Rng fold(uint64_t t) const { return Rng(derive_seed(state_, t)); }

private:
    uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace inferum
