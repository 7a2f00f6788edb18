#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace va {

// splitmix64: tiny, well-mixed generator used for seed derivation and for
// cheap procedural noise. Every run of the toolkit derives all of its
// randomness from one master seed through these helpers, so identical
// configs reproduce identical bytes.
inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline uint64_t hash_combine(uint64_t seed, uint64_t value) {
    uint64_t s = seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    return splitmix64(s);
}

inline uint64_t fnv1a(std::string_view s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Named sub-seed for a pipeline stage, e.g. derive_seed(master, "train").
inline uint64_t derive_seed(uint64_t master, std::string_view stage) {
    return hash_combine(master, fnv1a(stage));
}

// Small deterministic RNG with convenience draws. Wraps splitmix64 so the
// stream is identical across platforms (no distribution implementation
// differences, unlike std::uniform_real_distribution).
class Rng {
public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() { return splitmix64(state_); }

    // uniform in [0,1)
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // uniform integer in [0, n)
    uint64_t next_below(uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

    double gaussian() {
        // Box-Muller, always consumes two draws.
        double u1 = next_double();
        double u2 = next_double();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

private:
    uint64_t state_;
};

} // namespace va
