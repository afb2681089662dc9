#pragma once

#include <cmath>
#include <cstdint>

namespace rfsep {

// Deterministic splitmix64-based generator. Used everywhere instead of
// std::mt19937 distributions so that streams are reproducible across
// standard library implementations.
class Rng {
  public:
    explicit Rng(uint64_t seed) : state_(seed) {}

    uint64_t next_u64() {
        uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // integer in [0, n)
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

    // standard normal (polar Box-Muller, one value cached)
    double gaussian() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        double m = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * m;
        have_cached_ = true;
        return u * m;
    }

    // Derive an independent stream for (seed, index) pairs; lets dataset
    // builds be parallelized while staying bit-identical to a serial run.
    static Rng for_index(uint64_t seed, uint64_t index) {
        Rng mix(seed ^ (0x517cc1b727220a95ull * (index + 1)));
        mix.next_u64();
        return Rng(mix.next_u64());
    }

  private:
    uint64_t state_;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

} // namespace rfsep
