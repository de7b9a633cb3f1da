#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace finwin {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to derive per-sample
/// sub-seeds as splitmix64(seed ^ sample_index), so Monte Carlo results do not
/// depend on how samples are scheduled across threads.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Deterministic 64-bit-seed generator (std::mt19937_64 sequence) with
/// portable uniform and categorical draws.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    static Rng for_sample(std::uint64_t seed, std::uint64_t sample_index) {
        return Rng(splitmix64(seed ^ sample_index));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Index drawn from the (normalized) weight vector by CDF inversion.
    int categorical(std::span<const double> weights) {
        const double u = uniform();
        double acc = 0.0;
        int last_positive = 0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] > 0.0) last_positive = static_cast<int>(i);
            acc += weights[i];
            if (u < acc) return static_cast<int>(i);
        }
        return last_positive;  // guard against round-off at the tail
    }

  private:
    std::mt19937_64 gen_;
};

}  // namespace finwin
