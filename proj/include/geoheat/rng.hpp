#pragma once

#include <cmath>
#include <cstdint>

#include "geoheat/common.hpp"

namespace geoheat {

// Counter-based deterministic random stream. Every value is a pure function
// of (seed, stream, counter), so paths can be generated in any order on any
// number of workers and still be bit-identical.
class CounterRng {
 public:
  CounterRng(uint64_t seed, uint64_t stream)
      : key_(mix(mix(seed + 0x9E3779B97F4A7C15ull) ^
                 mix(stream + 0xD1B54A32D192ED03ull))) {}

  /// Uniform double in the open interval (0,1), indexed by counter.
  double uniform(uint64_t counter) const {
    const uint64_t bits = mix(key_ + counter * 0x9E3779B97F4A7C15ull);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal pair via Box-Muller; consumes counters 2c and 2c+1.
  void normal_pair(uint64_t c, double& n0, double& n1) const {
    const double u1 = uniform(2 * c);
    const double u2 = uniform(2 * c + 1);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    n0 = rad * std::cos(2.0 * kPi * u2);
    n1 = rad * std::sin(2.0 * kPi * u2);
  }

 private:
  // splitmix64 finalizer
  static uint64_t mix(uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  uint64_t key_;
};

}  // namespace geoheat
