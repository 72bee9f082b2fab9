#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace glick {

// Seeded random source with named sub-streams. Deriving a stream does not
// advance the parent: stream identity depends only on (root seed, name), so
// e.g. the "batch" and "target" streams of a run never interleave.
//
// All draw transforms are written out explicitly (instead of the stdlib
// distribution objects, whose sequences are implementation-defined) so that
// a given seed produces the same values on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(mix(seed)) {}

  Rng stream(std::string_view name) const {
    return Rng(mix(seed_ ^ fnv1a(name)));
  }

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) { return gen_() % n; }

  /// Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal via Box-Muller (no cached spare).
  double next_normal() {
    double u1 = next_unit();
    double u2 = next_unit();
    while (u1 <= 0.0) u1 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  bool next_bool(double p) { return next_unit() < p; }

 private:
  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    return h;
  }

  // splitmix64 finalizer; decorrelates nearby seeds before feeding mt19937_64.
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97f4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

}  // namespace glick
