#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

#include "szego/errors.hpp"

namespace szego {

/// SplitMix64 stream. Each sphere sample owns a stream keyed by
/// (seed, sample index), so the k-th point does not depend on how the
/// sample range is split into shards.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint64_t counter) : state_(mix(seed ^ mix(counter + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform in (0, 1].
  double uniform_open_closed() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }
  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard complex Gaussian (independent N(0,1) real and imaginary parts), Box-Muller.
  std::complex<double> complex_gaussian() {
    const double radius = std::sqrt(-2.0 * std::log(uniform_open_closed()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state_;
};

/// Writes the index-th uniform point of the unit sphere in C^d into `out`.
inline void sphere_point(std::uint64_t seed, std::uint64_t index, std::span<std::complex<double>> out) {
  if (out.empty()) throw PreconditionError("sphere dimension must be at least 1");
  CounterStream stream(seed, index);
  for (;;) {
    double norm_sq = 0.0;
    for (auto& z : out) {
      z = stream.complex_gaussian();
      norm_sq += std::norm(z);
    }
    if (norm_sq > 0.0) {
      const double inv = 1.0 / std::sqrt(norm_sq);
      for (auto& z : out) z *= inv;
      return;
    }
  }
}

inline std::vector<std::complex<double>> sphere_point(std::size_t d, std::uint64_t seed, std::uint64_t index) {
  std::vector<std::complex<double>> z(d);
  sphere_point(seed, index, z);
  return z;
}

}  // namespace szego
