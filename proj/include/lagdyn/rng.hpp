#pragma once

#include <cstdint>
#include <vector>

namespace lagdyn {

/// Deterministic pseudo-random generator (splitmix64 core).
///
/// Standard-library distributions are not bit-stable across toolchains, and
/// datasets/checkpoints must reproduce byte-for-byte from a seed, so the
/// generator and the uniform mapping are owned here.
class Rng {
public:
    explicit Rng(uint64_t seed = 0) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Independent child stream; used to give each trajectory its own seed.
    Rng fork() { return Rng(next_u64()); }

    void fill_uniform(std::vector<double>& out, double lo, double hi) {
        for (auto& x : out) x = uniform(lo, hi);
    }

private:
    uint64_t state_;
};

} // namespace lagdyn
