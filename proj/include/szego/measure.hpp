#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "szego/errors.hpp"
#include "szego/multiindex.hpp"
#include "szego/rational.hpp"
#include "szego/spectral.hpp"
#include "szego/sphere_sampler.hpp"
#include "szego/symbol.hpp"

namespace szego {

/// Normalized surface measure on the unit sphere of C^d, sampled by
/// normalized complex Gaussians. Point k depends only on (seed, k).
class SphereMeasure {
 public:
  SphereMeasure(std::size_t d, std::uint64_t seed) : dimension_(d), seed_(seed) {
    if (d == 0) throw PreconditionError("sphere dimension must be at least 1");
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::uint64_t seed() const noexcept { return seed_; }

  std::vector<Complex> point(std::uint64_t index) const { return sphere_point(dimension_, seed_, index); }

  void point(std::uint64_t index, std::span<Complex> out) const {
    if (out.size() != dimension_) throw DimensionMismatch("sphere point buffer has wrong dimension");
    sphere_point(seed_, index, out);
  }

  /// n points, row-major: point k occupies [k*d, (k+1)*d).
  std::vector<Complex> sample(std::uint64_t n, std::uint64_t first = 0) const {
    if (n == 0) throw PreconditionError("sample_sphere: need at least one point");
    std::vector<Complex> out(n * dimension_);
    for (std::uint64_t k = 0; k < n; ++k) {
      sphere_point(seed_, first + k, std::span<Complex>(out.data() + k * dimension_, dimension_));
    }
    return out;
  }

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

inline std::vector<Complex> sample_sphere(const SphereMeasure& measure, std::uint64_t n) { return measure.sample(n); }

/// int conj(z)^beta z^alpha dsigma = delta_{alpha beta} (d-1)! alpha! / (d-1+|alpha|)!.
inline Rational monomial_moment(const MultiIndex& alpha, const MultiIndex& beta) {
  alpha.check_same_dimension(beta);
  if (alpha != beta) return Rational(0);
  const std::uint64_t d = alpha.dimension();
  return Rational(factorial(d - 1) * multi_factorial(alpha), factorial(d - 1 + alpha.degree()));
}

struct MonteCarloEstimate {
  double estimate;
  double std_error;
  std::uint64_t samples;
};

/// Monte Carlo estimate of int f(phi(z)) dsigma with standard error sd/sqrt(n).
inline MonteCarloEstimate integrate_pushforward(const HermitianSymbol& symbol, const ScalarFunction& f,
                                                std::uint64_t n, std::uint64_t seed) {
  if (n == 0) throw PreconditionError("integrate_pushforward: need at least one sample");
  const SphereMeasure measure(symbol.dimension(), seed);
  std::vector<Complex> z(symbol.dimension());
  // Welford
  double mean = 0.0;
  double m2 = 0.0;
  for (std::uint64_t k = 0; k < n; ++k) {
    measure.point(k, z);
    const double phi = symbol_eval(symbol, z);
    const double value = f(phi);
    if (!std::isfinite(value)) throw DomainError("test function undefined at symbol value " + std::to_string(phi), phi);
    const double delta = value - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (value - mean);
  }
  const double variance = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
  return {mean, std::sqrt(variance / static_cast<double>(n)), n};
}

/// Complex number with exact rational parts.
struct ComplexRational {
  Rational re;
  Rational im;

  static ComplexRational from(Complex c) { return {exact_rational(c.real()), exact_rational(c.imag())}; }

  ComplexRational& operator+=(const ComplexRational& o) {
    re += o.re;
    im += o.im;
    return *this;
  }

  friend ComplexRational operator*(const ComplexRational& a, const ComplexRational& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }

  bool is_zero() const { return re == 0 && im == 0; }
};

struct ExactPushforward {
  /// Exact value of int phi^k dsigma (coefficients taken as their exact binary64 values).
  Rational value;
  /// Number of (z-monomial, conj z-monomial) pairs in the expansion of phi^k.
  std::size_t pair_count;

  double to_double() const { return szego::to_double(value); }
};

/// Expands phi^k into monomial pairs and integrates each pair exactly.
inline ExactPushforward exact_polynomial_pushforward(const HermitianSymbol& symbol, unsigned k,
                                                     std::size_t expansion_cap = 1'000'000) {
  const std::size_t d = symbol.dimension();
  using Key = std::pair<MultiIndex, MultiIndex>;  // (z exponent, conj z exponent)
  std::map<Key, ComplexRational> power{{{MultiIndex::zero(d), MultiIndex::zero(d)}, {Rational(1), Rational(0)}}};

  std::vector<std::pair<Key, ComplexRational>> factors;
  for (const auto& [key, c] : symbol.terms()) {
    if (c != Complex(0.0)) factors.emplace_back(key, ComplexRational::from(c));
  }

  for (unsigned step = 0; step < k; ++step) {
    if (power.size() * factors.size() > expansion_cap) {
      throw CapExceeded("exact_polynomial_pushforward: expanding power " + std::to_string(step + 1) + " needs " +
                        std::to_string(power.size() * factors.size()) + " monomial pairs (cap " +
                        std::to_string(expansion_cap) + "); use Monte Carlo integration instead");
    }
    std::map<Key, ComplexRational> next;
    for (const auto& [key, coeff] : power) {
      for (const auto& [fkey, fcoeff] : factors) {
        next[{key.first + fkey.first, key.second + fkey.second}] += coeff * fcoeff;
      }
    }
    std::erase_if(next, [](const auto& kv) { return kv.second.is_zero(); });
    power = std::move(next);
  }

  ComplexRational total{0, 0};
  for (const auto& [key, coeff] : power) {
    if (key.first != key.second) continue;  // off-diagonal moments vanish
    const Rational moment = monomial_moment(key.first, key.second);
    total += ComplexRational{coeff.re * moment, coeff.im * moment};
  }
  if (total.im != 0) {
    throw InvariantViolation("exact_polynomial_pushforward: nonzero imaginary part " + total.im.str());
  }
  return {total.re, power.size()};
}

}  // namespace szego
