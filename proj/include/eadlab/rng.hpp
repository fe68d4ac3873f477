#pragma once

// Random streams for simulations. The engine is std::mt19937_64, whose
// output sequence is fixed by the standard; the variate transforms below are
// spelled out here rather than taken from <random> distributions, whose
// algorithms differ between standard libraries. Regression fixtures depend
// on both.

#include <cmath>
#include <cstdint>
#include <random>

namespace eadlab {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Stream seed for replicate `replicate` of schedule point `schedule`.
constexpr std::uint64_t stream_seed(std::uint64_t master, std::uint64_t replicate,
                                    std::uint64_t schedule = 0) {
  return mix64(mix64(mix64(master) ^ replicate) ^ (schedule * 0xd1b54a32d192ed03ULL));
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

  /// Exponential with the given rate (> 0).
  double exponential(double rate) { return -std::log(uniform()) / rate; }

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace eadlab
