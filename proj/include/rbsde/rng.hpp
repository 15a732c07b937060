#pragma once

#include <cstdint>

namespace rbsde {

/// Deterministic splitmix64 generator.  The standard-library engines are
/// portable but the distributions are not, so every random value used by the
/// suites is produced here: identical seeds give identical streams on every
/// platform, which is what makes the randomized reports byte-reproducible.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Uniform integer in [0, n).
    int next_below(int n) { return static_cast<int>(next_u64() % static_cast<std::uint64_t>(n)); }

    /// Uniform integer in [lo, hi] inclusive.
    int uniform_int(int lo, int hi) { return lo + next_below(hi - lo + 1); }

    bool coin(double p = 0.5) { return next_double() < p; }

    /// Derive an independent per-instance seed from a master seed.  Suites
    /// expand one user-visible 64-bit seed into instance seeds with this, so
    /// instance k is reproducible in isolation.
    static std::uint64_t derive(std::uint64_t master, std::uint64_t index) {
        Rng r(master + 0x632be59bd9b4e019ULL * (index + 1));
        return r.next_u64();
    }

  private:
    std::uint64_t state_;
};

}  // namespace rbsde
