#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "szego/errors.hpp"
#include "szego/multiindex.hpp"
#include "szego/sphere_sampler.hpp"

namespace szego {

using Complex = std::complex<double>;

/// Finite operator recipe T = sum c_{ab} S^{b*} S^{a}, keyed by (a, b).
/// The same data read as a function on the sphere is sum c_{ab} conj(z)^b z^a.
/// No symmetry is imposed here; see HermitianSymbol.
class ToeplitzPolynomial {
 public:
  using Key = std::pair<MultiIndex, MultiIndex>;  // (alpha, beta)
  using TermMap = std::map<Key, Complex>;

  explicit ToeplitzPolynomial(std::size_t d) : dimension_(d) {
    if (d == 0) throw PreconditionError("dimension must be at least 1");
  }

  static ToeplitzPolynomial identity(std::size_t d) {
    ToeplitzPolynomial p(d);
    p.add_term(MultiIndex::zero(d), MultiIndex::zero(d), 1.0);
    return p;
  }

  /// S_i (coordinate i raised once).
  static ToeplitzPolynomial shift(std::size_t d, std::size_t i) {
    ToeplitzPolynomial p(d);
    p.add_term(MultiIndex::unit(d, i), MultiIndex::zero(d), 1.0);
    return p;
  }

  /// S_i^*.
  static ToeplitzPolynomial shift_adjoint(std::size_t d, std::size_t i) {
    ToeplitzPolynomial p(d);
    p.add_term(MultiIndex::zero(d), MultiIndex::unit(d, i), 1.0);
    return p;
  }

  /// Accumulates c into the coefficient of S^{beta*} S^{alpha}.
  ToeplitzPolynomial& add_term(const MultiIndex& alpha, const MultiIndex& beta, Complex c) {
    if (alpha.dimension() != dimension_ || beta.dimension() != dimension_) {
      throw DimensionMismatch("term " + alpha.to_string() + "," + beta.to_string() + " does not match dimension " +
                              std::to_string(dimension_));
    }
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) throw DomainError("non-finite coefficient");
    terms_[{alpha, beta}] += c;
    return *this;
  }

  std::size_t dimension() const noexcept { return dimension_; }
  const TermMap& terms() const noexcept { return terms_; }
  bool empty() const noexcept { return terms_.empty(); }

  /// max over terms of max(|alpha|, |beta|).
  std::uint64_t max_degree() const noexcept {
    std::uint64_t D = 0;
    for (const auto& [key, c] : terms_) D = std::max({D, key.first.degree(), key.second.degree()});
    return D;
  }

  double coefficient_l1() const noexcept {
    double s = 0.0;
    for (const auto& [key, c] : terms_) s += std::abs(c);
    return s;
  }

  ToeplitzPolynomial& operator+=(const ToeplitzPolynomial& other) {
    if (other.dimension_ != dimension_) throw DimensionMismatch("adding polynomials of different dimension");
    for (const auto& [key, c] : other.terms_) terms_[key] += c;
    return *this;
  }

  ToeplitzPolynomial& operator*=(Complex t) {
    for (auto& [key, c] : terms_) c *= t;
    return *this;
  }

  friend ToeplitzPolynomial operator+(ToeplitzPolynomial a, const ToeplitzPolynomial& b) { return a += b; }
  friend ToeplitzPolynomial operator*(Complex t, ToeplitzPolynomial a) { return a *= t; }

 private:
  std::size_t dimension_;
  TermMap terms_;
};

enum class HermitianMode {
  AutoComplete,  ///< add missing conjugate terms
  Enforce,       ///< reject input lacking them
};

/// A ToeplitzPolynomial whose coefficients satisfy c_{ba} = conj(c_{ab}).
/// The assembled truncation is Hermitian and the symbol real on the sphere.
class HermitianSymbol {
 public:
  static constexpr double kSymmetryTolerance = 1e-12;

  explicit HermitianSymbol(ToeplitzPolynomial terms, HermitianMode mode = HermitianMode::AutoComplete,
                           std::string id = "symbol")
      : terms_(complete(std::move(terms), mode)), id_(std::move(id)) {}

  static HermitianSymbol constant(std::size_t d, double c, std::string id = "constant") {
    ToeplitzPolynomial p(d);
    p.add_term(MultiIndex::zero(d), MultiIndex::zero(d), c);
    return HermitianSymbol(std::move(p), HermitianMode::Enforce, std::move(id));
  }

  /// |z^alpha|^2, i.e. S^{alpha*} S^{alpha}.
  static HermitianSymbol modulus_squared(const MultiIndex& alpha, std::string id = "") {
    ToeplitzPolynomial p(alpha.dimension());
    p.add_term(alpha, alpha, 1.0);
    return HermitianSymbol(std::move(p), HermitianMode::Enforce, id.empty() ? "abs2" + alpha.to_string() : id);
  }

  std::size_t dimension() const noexcept { return terms_.dimension(); }
  const ToeplitzPolynomial& polynomial() const noexcept { return terms_; }
  const ToeplitzPolynomial::TermMap& terms() const noexcept { return terms_.terms(); }
  std::uint64_t max_degree() const noexcept { return terms_.max_degree(); }
  const std::string& id() const noexcept { return id_; }

  /// Adds c * identity (c real).
  HermitianSymbol shifted(double c) const {
    ToeplitzPolynomial p = terms_;
    p.add_term(MultiIndex::zero(dimension()), MultiIndex::zero(dimension()), c);
    return HermitianSymbol(std::move(p), HermitianMode::Enforce, id_);
  }

  /// All coefficients scaled by real t.
  HermitianSymbol scaled(double t) const {
    ToeplitzPolynomial p = terms_;
    p *= t;
    return HermitianSymbol(std::move(p), HermitianMode::Enforce, id_);
  }

 private:
  static ToeplitzPolynomial complete(ToeplitzPolynomial p, HermitianMode mode) {
    ToeplitzPolynomial out(p.dimension());
    const auto& terms = p.terms();
    for (const auto& [key, c] : terms) {
      const auto& [alpha, beta] = key;
      const double scale = std::max(1.0, std::abs(c));
      if (alpha == beta) {
        if (std::abs(c.imag()) > kSymmetryTolerance * scale) {
          throw DomainError("diagonal term " + alpha.to_string() + " has non-real coefficient", c.imag());
        }
        out.add_term(alpha, beta, c.real());
        continue;
      }
      const auto mirror = terms.find({beta, alpha});
      if (mirror == terms.end()) {
        if (mode == HermitianMode::Enforce) {
          throw DomainError("term (" + alpha.to_string() + "," + beta.to_string() + ") lacks its conjugate partner");
        }
        out.add_term(alpha, beta, c);
        out.add_term(beta, alpha, std::conj(c));
        continue;
      }
      if (std::abs(mirror->second - std::conj(c)) > kSymmetryTolerance * scale) {
        throw DomainError("terms (" + alpha.to_string() + "," + beta.to_string() + ") and its mirror are not conjugate");
      }
      if (alpha < beta) {
        // store one representative so the pair is exactly conjugate
        out.add_term(alpha, beta, c);
        out.add_term(beta, alpha, std::conj(c));
      }
    }
    return out;
  }

  ToeplitzPolynomial terms_;
  std::string id_;
};

/// conj(z)^beta z^alpha.
inline Complex monomial_value(const MultiIndex& alpha, const MultiIndex& beta, std::span<const Complex> z) {
  Complex v = 1.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    for (MultiIndex::value_type k = 0; k < alpha[i]; ++k) v *= z[i];
    for (MultiIndex::value_type k = 0; k < beta[i]; ++k) v *= std::conj(z[i]);
  }
  return v;
}

/// phi(z) = sum c_{ab} conj(z)^b z^a for z on the unit sphere.
inline double symbol_eval(const HermitianSymbol& symbol, std::span<const Complex> z) {
  if (z.size() != symbol.dimension()) throw DimensionMismatch("symbol_eval: point dimension mismatch");
  double norm_sq = 0.0;
  for (const auto& zi : z) norm_sq += std::norm(zi);
  if (std::abs(std::sqrt(norm_sq) - 1.0) > 1e-12) {
    throw DomainError("symbol_eval: point is off the unit sphere", std::sqrt(norm_sq));
  }
  Complex value = 0.0;
  for (const auto& [key, c] : symbol.terms()) value += c * monomial_value(key.first, key.second, z);
  const double scale = std::max(1.0, symbol.polynomial().coefficient_l1());
  if (std::abs(value.imag()) > 1e-12 * scale) {
    throw InvariantViolation("symbol_eval: imaginary part " + std::to_string(value.imag()) + " on a Hermitian symbol");
  }
  return value.real();
}

struct RangeBounds {
  double lower;
  double upper;
};

/// Monte Carlo min/max of the symbol over the sphere. Always inside the true range.
inline RangeBounds symbol_range_bounds(const HermitianSymbol& symbol, std::uint64_t samples, std::uint64_t seed) {
  if (samples == 0) throw PreconditionError("symbol_range_bounds: need at least one sample");
  std::vector<Complex> z(symbol.dimension());
  RangeBounds bounds{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::uint64_t k = 0; k < samples; ++k) {
    sphere_point(seed, k, z);
    const double v = symbol_eval(symbol, z);
    bounds.lower = std::min(bounds.lower, v);
    bounds.upper = std::max(bounds.upper, v);
  }
  return bounds;
}

/// Finite-rank Hermitian operator given by entries in the graded basis
/// (indices are basis ranks, independent of any cutoff).
class CompactPerturbation {
 public:
  struct Entry {
    std::uint64_t row;
    std::uint64_t col;
    Complex value;
  };

  CompactPerturbation() = default;

  explicit CompactPerturbation(const std::vector<Entry>& entries, HermitianMode mode = HermitianMode::AutoComplete) {
    std::map<std::pair<std::uint64_t, std::uint64_t>, Complex> raw;
    for (const auto& e : entries) raw[{e.row, e.col}] += e.value;
    for (const auto& [rc, v] : raw) {
      const auto [r, c] = rc;
      const double scale = std::max(1.0, std::abs(v));
      if (r == c) {
        if (std::abs(v.imag()) > HermitianSymbol::kSymmetryTolerance * scale) {
          throw DomainError("perturbation diagonal entry is not real", v.imag());
        }
        entries_[rc] = v.real();
        continue;
      }
      const auto mirror = raw.find({c, r});
      if (mirror == raw.end()) {
        if (mode == HermitianMode::Enforce) throw DomainError("perturbation entry lacks its conjugate partner");
        entries_[rc] = v;
        entries_[{c, r}] = std::conj(v);
        continue;
      }
      if (std::abs(mirror->second - std::conj(v)) > HermitianSymbol::kSymmetryTolerance * scale) {
        throw DomainError("perturbation is not Hermitian");
      }
      if (r < c) {
        entries_[rc] = v;
        entries_[{c, r}] = std::conj(v);
      }
    }
  }

  bool empty() const noexcept { return entries_.empty(); }

  /// (row, col) -> value, Hermitian-complete.
  const std::map<std::pair<std::uint64_t, std::uint64_t>, Complex>& entries() const noexcept { return entries_; }

  /// Largest basis rank touched; the support lies in range(P_N) once d_N exceeds it.
  std::uint64_t max_rank() const noexcept {
    std::uint64_t m = 0;
    for (const auto& [rc, v] : entries_) m = std::max({m, rc.first, rc.second});
    return m;
  }

  /// Sum of diagonal entries with rank < limit.
  double partial_trace(std::uint64_t limit) const noexcept {
    double t = 0.0;
    for (const auto& [rc, v] : entries_) {
      if (rc.first == rc.second && rc.first < limit) t += v.real();
    }
    return t;
  }

  /// Nuclear norm ||K||_1 = sum |eigenvalues| on the support.
  double trace_norm() const {
    if (entries_.empty()) return 0.0;
    std::map<std::uint64_t, Eigen::Index> slot;
    for (const auto& [rc, v] : entries_) {
      slot.emplace(rc.first, 0);
      slot.emplace(rc.second, 0);
    }
    Eigen::Index next = 0;
    for (auto& [rank, s] : slot) s = next++;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(next, next);
    for (const auto& [rc, v] : entries_) m(slot[rc.first], slot[rc.second]) = v;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().sum();
  }

 private:
  std::map<std::pair<std::uint64_t, std::uint64_t>, Complex> entries_;
};

}  // namespace szego
