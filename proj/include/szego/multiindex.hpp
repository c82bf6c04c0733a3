#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "szego/errors.hpp"
#include "szego/rational.hpp"

namespace szego {

/// Exponent vector alpha in N^d. The degree |alpha| is cached.
class MultiIndex {
 public:
  using value_type = std::uint32_t;

  MultiIndex() = default;

  /// Zero index of dimension d.
  static MultiIndex zero(std::size_t d) {
    if (d == 0) throw PreconditionError("multi-index dimension must be at least 1");
    return MultiIndex(std::vector<value_type>(d, 0));
  }

  /// e_i: one in coordinate i, zero elsewhere.
  static MultiIndex unit(std::size_t d, std::size_t i) {
    MultiIndex m = zero(d);
    if (i >= d) throw RangeError("unit index coordinate out of range");
    m.exponents_[i] = 1;
    m.degree_ = 1;
    return m;
  }

  explicit MultiIndex(std::vector<value_type> exponents) : exponents_(std::move(exponents)) {
    if (exponents_.empty()) throw PreconditionError("multi-index dimension must be at least 1");
    degree_ = std::accumulate(exponents_.begin(), exponents_.end(), std::uint64_t{0});
  }

  MultiIndex(std::initializer_list<value_type> exponents)
      : MultiIndex(std::vector<value_type>(exponents)) {}

  std::size_t dimension() const noexcept { return exponents_.size(); }
  std::uint64_t degree() const noexcept { return degree_; }
  value_type operator[](std::size_t i) const { return exponents_[i]; }
  std::span<const value_type> exponents() const noexcept { return exponents_; }
  bool is_zero() const noexcept { return degree_ == 0; }

  /// Raise coordinate i by one.
  MultiIndex raised(std::size_t i) const {
    MultiIndex m = *this;
    ++m.exponents_.at(i);
    ++m.degree_;
    return m;
  }

  /// this - other, or nullopt if some coordinate would go negative.
  std::optional<MultiIndex> minus(const MultiIndex& other) const {
    check_same_dimension(other);
    MultiIndex m = *this;
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      if (other.exponents_[i] > exponents_[i]) return std::nullopt;
      m.exponents_[i] -= other.exponents_[i];
    }
    m.degree_ = degree_ - other.degree_;
    return m;
  }

  friend MultiIndex operator+(const MultiIndex& a, const MultiIndex& b) {
    a.check_same_dimension(b);
    MultiIndex m = a;
    for (std::size_t i = 0; i < a.exponents_.size(); ++i) m.exponents_[i] += b.exponents_[i];
    m.degree_ = a.degree_ + b.degree_;
    return m;
  }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  /// Plain lexicographic comparison (used for map keys, not the basis order).
  friend std::strong_ordering operator<=>(const MultiIndex& a, const MultiIndex& b) {
    return a.exponents_ <=> b.exponents_;
  }

  std::string to_string() const {
    std::string s = "(";
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
      if (i) s += ",";
      s += std::to_string(exponents_[i]);
    }
    return s + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& m) { return os << m.to_string(); }

  void check_same_dimension(const MultiIndex& other) const {
    if (other.dimension() != dimension()) {
      throw DimensionMismatch("multi-index dimensions differ: " + to_string() + " vs " + other.to_string());
    }
  }

 private:
  std::vector<value_type> exponents_;
  std::uint64_t degree_ = 0;
};

/// Number of multi-indices of dimension d and degree j: C(j+d-1, d-1).
inline BigInt slab_size(std::uint64_t d, std::uint64_t j) { return binomial(j + d - 1, d - 1); }

/// d_N = sum_{j<=N} C(j+d-1, d-1), the rank of the degree-<=N projection.
inline BigInt rank_PN(std::uint64_t d, std::uint64_t N) {
  if (d == 0) throw PreconditionError("dimension must be at least 1");
  return binomial(N + d, d);  // hockey stick: sum_{j<=N} C(j+d-1, d-1)
}

namespace detail {

inline void enumerate_into(std::vector<MultiIndex::value_type>& prefix, std::size_t pos,
                           std::uint64_t remaining, std::vector<MultiIndex>& out) {
  if (pos + 1 == prefix.size()) {
    prefix[pos] = static_cast<MultiIndex::value_type>(remaining);
    out.emplace_back(prefix);
    return;
  }
  for (std::uint64_t v = remaining + 1; v-- > 0;) {
    prefix[pos] = static_cast<MultiIndex::value_type>(v);
    enumerate_into(prefix, pos + 1, remaining - v, out);
  }
}

/// C(total+parts-1, parts-1) in 64 bits; callers keep it below the rank cap.
inline std::uint64_t compositions(std::uint64_t total, std::uint64_t parts) {
  if (parts == 0) return total == 0 ? 1 : 0;
  std::uint64_t k = parts - 1;
  const std::uint64_t n = total + parts - 1;
  if (k > n - k) k = n - k;
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

}  // namespace detail

/// All alpha with |alpha| = j, in lexicographically descending order:
/// (2,0), (1,1), (0,2) for d = 2, j = 2.
inline std::vector<MultiIndex> enumerate_slab(std::size_t d, std::uint64_t j) {
  if (d == 0) throw PreconditionError("dimension must be at least 1");
  std::vector<MultiIndex> out;
  std::vector<MultiIndex::value_type> prefix(d, 0);
  detail::enumerate_into(prefix, 0, j, out);
  return out;
}

/// Graded-lexicographic ranking of all multi-indices with |alpha| <= N.
class GradedBasisIndexer {
 public:
  static constexpr std::uint64_t kDefaultRankCap = 20000;

  GradedBasisIndexer(std::size_t d, std::uint64_t N, std::uint64_t rank_cap = kDefaultRankCap)
      : dimension_(d), cutoff_(N) {
    if (d == 0) throw PreconditionError("dimension must be at least 1");
    const BigInt total = rank_PN(d, N);
    if (total > rank_cap) {
      throw CapExceeded("basis of dimension " + std::to_string(d) + " at cutoff " + std::to_string(N) +
                        " has rank " + total.str() + " > cap " + std::to_string(rank_cap));
    }
    total_rank_ = total.convert_to<std::uint64_t>();
    slab_offsets_.reserve(N + 2);
    std::uint64_t offset = 0;
    for (std::uint64_t j = 0; j <= N; ++j) {
      slab_offsets_.push_back(offset);
      offset += detail::compositions(j, d);
    }
    slab_offsets_.push_back(offset);
    basis_.reserve(total_rank_);
    for (std::uint64_t j = 0; j <= N; ++j) {
      auto slab = enumerate_slab(d, j);
      basis_.insert(basis_.end(), std::make_move_iterator(slab.begin()), std::make_move_iterator(slab.end()));
    }
  }

  std::size_t dimension() const noexcept { return dimension_; }
  std::uint64_t cutoff() const noexcept { return cutoff_; }
  std::uint64_t total_rank() const noexcept { return total_rank_; }
  /// Offsets of each degree slab; size cutoff + 2, last entry is total_rank.
  std::span<const std::uint64_t> slab_offsets() const noexcept { return slab_offsets_; }
  /// Rank of the first index of degree j.
  std::uint64_t slab_offset(std::uint64_t j) const { return slab_offsets_.at(j); }

  /// Basis in rank order.
  std::span<const MultiIndex> basis() const noexcept { return basis_; }

  bool contains(const MultiIndex& alpha) const noexcept {
    return alpha.dimension() == dimension_ && alpha.degree() <= cutoff_;
  }

  std::uint64_t rank(const MultiIndex& alpha) const {
    if (alpha.dimension() != dimension_) throw DimensionMismatch("rank: multi-index dimension mismatch");
    if (alpha.degree() > cutoff_) {
      throw RangeError("rank: " + alpha.to_string() + " has degree above cutoff " + std::to_string(cutoff_));
    }
    std::uint64_t within = 0;
    std::uint64_t remaining = alpha.degree();
    for (std::size_t p = 0; p + 1 < dimension_; ++p) {
      const std::uint64_t parts_after = dimension_ - p - 1;
      // indices sharing the prefix but with a larger value at p come first
      for (std::uint64_t v = remaining; v > alpha[p]; --v) within += detail::compositions(remaining - v, parts_after);
      remaining -= alpha[p];
    }
    return slab_offsets_[alpha.degree()] + within;
  }

  const MultiIndex& unrank(std::uint64_t k) const {
    if (k >= total_rank_) {
      throw RangeError("unrank: " + std::to_string(k) + " outside [0, " + std::to_string(total_rank_) + ")");
    }
    return basis_[k];
  }

  /// Unrank by the combinatorial inverse of rank() (no table lookup).
  MultiIndex unrank_direct(std::uint64_t k) const {
    if (k >= total_rank_) {
      throw RangeError("unrank: " + std::to_string(k) + " outside [0, " + std::to_string(total_rank_) + ")");
    }
    const auto it = std::upper_bound(slab_offsets_.begin(), slab_offsets_.end(), k);
    const std::uint64_t degree = static_cast<std::uint64_t>(it - slab_offsets_.begin()) - 1;
    std::uint64_t within = k - slab_offsets_[degree];
    std::vector<MultiIndex::value_type> exps(dimension_, 0);
    std::uint64_t remaining = degree;
    for (std::size_t p = 0; p + 1 < dimension_; ++p) {
      const std::uint64_t parts_after = dimension_ - p - 1;
      std::uint64_t v = remaining;
      for (;; --v) {
        const std::uint64_t block = detail::compositions(remaining - v, parts_after);
        if (within < block) break;
        within -= block;
      }
      exps[p] = static_cast<MultiIndex::value_type>(v);
      remaining -= v;
    }
    exps[dimension_ - 1] = static_cast<MultiIndex::value_type>(remaining);
    return MultiIndex(std::move(exps));
  }

 private:
  std::size_t dimension_;
  std::uint64_t cutoff_;
  std::uint64_t total_rank_ = 0;
  std::vector<std::uint64_t> slab_offsets_;
  std::vector<MultiIndex> basis_;
};

/// alpha! = prod alpha_i!
inline BigInt multi_factorial(const MultiIndex& alpha) {
  BigInt result = 1;
  for (auto a : alpha.exponents()) result *= factorial(a);
  return result;
}

/// |alpha|! / alpha!
inline BigInt multinomial(const MultiIndex& alpha) {
  return factorial(alpha.degree()) / multi_factorial(alpha);
}

/// ||z^alpha||^2 = alpha! / |alpha|! in the Drury-Arveson norm.
inline Rational multinomial_norm_sq(const MultiIndex& alpha) {
  return Rational(multi_factorial(alpha), factorial(alpha.degree()));
}

/// sum_{|w| = j} prod_i C(w_i + k_i, w_i), by explicit enumeration.
inline BigInt chu_vandermonde_lhs(const MultiIndex& k, std::uint64_t j) {
  BigInt total = 0;
  for (const auto& w : enumerate_slab(k.dimension(), j)) {
    BigInt term = 1;
    for (std::size_t i = 0; i < k.dimension(); ++i) term *= binomial(std::uint64_t{w[i]} + k[i], w[i]);
    total += term;
  }
  return total;
}

/// C(|k| + j + d - 1, j).
inline BigInt chu_vandermonde_rhs(const MultiIndex& k, std::uint64_t j) {
  return binomial(k.degree() + j + k.dimension() - 1, j);
}

}  // namespace szego
