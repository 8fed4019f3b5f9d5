#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace risuav {

// Counter-based deterministic random streams. Every draw is addressed by a
// (seed, purpose, a, b, k) tuple, so adding elements or slots to a sweep never
// shifts the draws of existing ones, and results are identical across
// platforms and thread schedules.
namespace rng {

enum class Purpose : std::uint64_t {
  direct_fade = 0x9e3779b97f4a7c15ull,
  ris_nlos = 0x7f4a7c159e3779b9ull,
  random_phase = 0xbf58476d1ce4e5b9ull,
  gauss_randomize = 0x94d049bb133111ebull,
  instance = 0xd6e8feb86659fd93ull,
};

inline std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Stream {
  std::uint64_t base;

  Stream(std::uint64_t seed, Purpose purpose, std::uint64_t a = 0,
         std::uint64_t b = 0) {
    std::uint64_t h = splitmix(seed);
    h = splitmix(h ^ static_cast<std::uint64_t>(purpose));
    h = splitmix(h ^ a);
    h = splitmix(h ^ b);
    base = h;
  }

  std::uint64_t word(std::uint64_t k) const { return splitmix(base ^ splitmix(k)); }

  // Uniform in (0, 1); never returns 0 so log() is safe.
  double uniform(std::uint64_t k) const {
    return (static_cast<double>(word(k) >> 11) + 0.5) * 0x1.0p-53;
  }

  // Circularly symmetric complex normal, unit total variance.
  std::complex<double> complex_normal(std::uint64_t k) const {
    double u1 = uniform(2 * k);
    double u2 = uniform(2 * k + 1);
    double r = std::sqrt(-std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
  }

  // Real standard normal.
  double normal(std::uint64_t k) const {
    double u1 = uniform(2 * k);
    double u2 = uniform(2 * k + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double uniform_in(std::uint64_t k, double lo, double hi) const {
    return lo + (hi - lo) * uniform(k);
  }
};

}  // namespace rng
}  // namespace risuav
