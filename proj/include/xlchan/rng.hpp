#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "xlchan/errors.hpp"

// Deterministic randomness.
//
// Every stochastic quantity in the library is drawn from a RandomStream.
// The standard library's distribution objects are implementation-defined,
// so streams map raw mt19937_64 output to doubles themselves:
//
//   uniform:   (x >> 11) * 2^-53                     in [0, 1)
//   gaussian:  Box-Muller on a pair of uniforms
//   CN(0,1):   (z0 + i*z1) / sqrt(2), one Box-Muller pair per draw
//
// Independent child streams are derived, not split: derive_seed() chains a
// splitmix64 finalizer over (base_seed, tag0, tag1, ...), and each distinct
// tag tuple yields an unrelated mt19937_64 seed. Experiment code tags
// streams with (purpose, sweep point index, trial index) so any trial can
// be replayed in isolation and reordering trials cannot change their draws.

namespace xlchan {

namespace detail {

// splitmix64 finalizer (Vigna). Good avalanche, cheap, stateless.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace detail

// Seed for the child stream identified by (base, tags...). Chaining keeps
// tag tuples of different lengths and orders distinct.
inline std::uint64_t derive_seed(std::uint64_t base,
                                 std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = detail::mix64(base);
  for (std::uint64_t t : tags) h = detail::mix64(h ^ t);
  return h;
}

class RandomStream {
public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream child(std::uint64_t base,
                            std::initializer_list<std::uint64_t> tags) {
    return RandomStream(derive_seed(base, tags));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53 random mantissa bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform on [lo, hi).
  double uniform(double lo, double hi) {
    if (!(lo < hi)) throw DomainError("uniform: empty interval");
    return lo + (hi - lo) * uniform();
  }

  // Equiprobable +1 / -1.
  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  // Standard normal pair via Box-Muller. 1 - uniform() keeps the log
  // argument in (0, 1].
  std::pair<double, double> gaussian_pair() {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    return {rad * std::cos(ang), rad * std::sin(ang)};
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    auto [z0, z1] = gaussian_pair();
    spare_ = z1;
    have_spare_ = true;
    return z0;
  }

  // CN(0,1): zero-mean circularly symmetric complex gaussian, unit total
  // variance (1/2 per real dimension). Consumes exactly one pair, so the
  // draw count per complex sample is fixed.
  std::complex<double> cgaussian() {
    auto [z0, z1] = gaussian_pair();
    return {z0 * std::numbers::sqrt2 / 2.0, z1 * std::numbers::sqrt2 / 2.0};
  }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

} // namespace xlchan
