#pragma once

#include <cmath>
#include <cstdint>

namespace colddipole {

// Counter-based substream derivation: realization r of master seed s draws
// from a SplitMix64 stream keyed by mix(s, r). Streams are fully determined
// by (seed, realization), independent of thread scheduling.
namespace detail {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace detail

class Rng {
 public:
  Rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed;
    std::uint64_t key = detail::splitmix64_next(s) ^ (stream * 0xda942042e4dd58b5ULL);
    state_ = key;
    // burn a few outputs so nearby (seed, stream) keys decorrelate
    for (int i = 0; i < 4; ++i) detail::splitmix64_next(state_);
  }

  std::uint64_t next_u64() { return detail::splitmix64_next(state_); }

  /// Uniform double in [0, 1).
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  /// Standard normal via Box-Muller (pairs cached).
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  double gaussian(double sigma) { return sigma == 0.0 ? 0.0 : sigma * gaussian(); }

 private:
  std::uint64_t state_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

} // namespace colddipole
