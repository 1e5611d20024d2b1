#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace melasso {

// Deterministic random streams.
//
// Every consumer derives its own stream from (seed, stream, purpose), so
// Monte Carlo replicates are independent of thread scheduling and can be
// regenerated in isolation. The generator is xoshiro256++ seeded through
// splitmix64; both algorithms are pinned here rather than delegated to
// <random>, whose distributions differ between standard libraries.
// Gaussian variates use the Box-Muller transform, Poisson variates use
// sequential inversion for small means and Hormann's PTRS transformed
// rejection for large ones.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0,
                     std::uint64_t purpose = 0) {
    std::uint64_t s = seed;
    s = splitmix64(s) ^ (stream * 0xD1342543DE82EF95ull);
    s = splitmix64(s) ^ (purpose * 0xDABA0B6EB09322DBull);
    for (auto& w : state_) w = splitmix64(s);
    // xoshiro must not start from the all-zero state.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1), 53 random bits.
  double next_uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Standard normal via Box-Muller; generates pairs, caches the second.
  double next_normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    // u1 in (0, 1] so log(u1) is finite.
    const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * pi() * u2;
    cached_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
  }

  /// Unbiased integer in [0, n).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    std::uint64_t x, r;
    do {
      x = next_u64();
      r = x % n;
    } while (x - r > std::uint64_t(0) - n);
    return r;
  }

  long next_poisson(double mean) {
    if (!(mean >= 0.0)) throw std::invalid_argument("next_poisson: mean must be >= 0");
    if (mean == 0.0) return 0;
    if (mean < 10.0) return poisson_inversion(mean);
    return poisson_ptrs(mean);
  }

  /// In-place Fisher-Yates shuffle.
  template <class RandomIt>
  void shuffle(RandomIt first, RandomIt last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      const std::uint64_t j = uniform_below(i);
      std::swap(first[i - 1], first[j]);
    }
  }

 private:
  static constexpr double pi() { return 3.14159265358979323846; }

  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  long poisson_inversion(double mean) {
    const double u = next_uniform();
    double p = std::exp(-mean);
    double cdf = p;
    long k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (k > 2000) break;  // cdf rounds to 1 long before this
    }
    return k;
  }

  // Hormann (1993), "The transformed rejection method for generating
  // Poisson random variables", algorithm PTRS.
  long poisson_ptrs(double mean) {
    const double slam = std::sqrt(mean);
    const double loglam = std::log(mean);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    while (true) {
      const double u = next_uniform() - 0.5;
      const double v = next_uniform();
      const double us = 0.5 - std::abs(u);
      const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
      if (us >= 0.07 && v <= vr) return static_cast<long>(kf);
      if (kf < 0.0 || (us < 0.013 && v > us)) continue;
      const double k = kf;
      if (std::log(v * inv_alpha / (a / (us * us) + b)) <=
          k * loglam - mean - std::lgamma(k + 1.0)) {
        return static_cast<long>(kf);
      }
    }
  }

  std::array<std::uint64_t, 4> state_{};
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Purpose tags keep draws from different pipeline stages independent even
// when they share (seed, replicate).
namespace rng_purpose {
inline constexpr std::uint64_t model = 1;
inline constexpr std::uint64_t linear_data = 2;
inline constexpr std::uint64_t glm_data = 3;
inline constexpr std::uint64_t cv_folds_naive = 4;
inline constexpr std::uint64_t cv_folds_corrected = 5;
inline constexpr std::uint64_t multi_start = 6;
}  // namespace rng_purpose

}  // namespace melasso
