#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "szego/errors.hpp"
#include "szego/multiindex.hpp"
#include "szego/rational.hpp"
#include "szego/symbol.hpp"

namespace szego {

/// Which weighted shift the basis carries.
class WeightFamily {
 public:
  enum class Kind { DruryArveson, Bergman };

  static WeightFamily drury_arveson(std::size_t d) { return WeightFamily(Kind::DruryArveson, d, 0.0); }

  /// Weighted Bergman space with weight parameter a > -1.
  static WeightFamily bergman(std::size_t d, double a) {
    if (!(a > -1.0) || !std::isfinite(a)) throw DomainError("Bergman weight parameter must be > -1", a);
    return WeightFamily(Kind::Bergman, d, a);
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t dimension() const noexcept { return dimension_; }
  double bergman_parameter() const noexcept { return a_; }
  bool is_drury_arveson() const noexcept { return kind_ == Kind::DruryArveson; }

  /// Coefficient of e_{m + e_i} in S_i e_m.
  double step_weight(const MultiIndex& m, std::size_t i) const {
    const double num = static_cast<double>(m[i]) + 1.0;
    const double deg = static_cast<double>(m.degree());
    if (kind_ == Kind::DruryArveson) return std::sqrt(num / (deg + 1.0));
    return std::sqrt(num / (static_cast<double>(dimension_) + deg + a_ + 2.0));
  }

  std::string to_string() const {
    if (kind_ == Kind::DruryArveson) return "drury-arveson";
    return "bergman(a=" + format_parameter() + ")";
  }

  friend bool operator==(const WeightFamily&, const WeightFamily&) = default;

 private:
  WeightFamily(Kind kind, std::size_t d, double a) : kind_(kind), dimension_(d), a_(a) {
    if (d == 0) throw PreconditionError("dimension must be at least 1");
  }

  std::string format_parameter() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", a_);
    return buf;
  }

  Kind kind_;
  std::size_t dimension_;
  double a_;
};

struct ShiftImage {
  MultiIndex target;
  double weight;
};

/// Applies S_{word[0]}, then S_{word[1]}, ... to e_m.
inline ShiftImage shift_word(const WeightFamily& weights, std::span<const std::size_t> word, const MultiIndex& m) {
  ShiftImage out{m, 1.0};
  for (std::size_t i : word) {
    if (i >= m.dimension()) throw RangeError("shift coordinate out of range");
    out.weight *= weights.step_weight(out.target, i);
    out.target = out.target.raised(i);
  }
  return out;
}

/// S^gamma e_m = weight * e_{m+gamma}; coordinates raised in increasing order.
inline ShiftImage shift_column(const WeightFamily& weights, const MultiIndex& gamma, const MultiIndex& m) {
  gamma.check_same_dimension(m);
  if (weights.dimension() != m.dimension()) throw DimensionMismatch("shift_column: weight family dimension mismatch");
  std::vector<std::size_t> word;
  word.reserve(gamma.degree());
  for (std::size_t i = 0; i < gamma.dimension(); ++i) word.insert(word.end(), gamma[i], i);
  return shift_word(weights, word, m);
}

/// ||S^gamma e_m||^2 for Drury-Arveson weights, exactly.
inline Rational shift_norm_sq_exact(const MultiIndex& gamma, const MultiIndex& m) {
  gamma.check_same_dimension(m);
  Rational w = 1;
  MultiIndex cur = m;
  for (std::size_t i = 0; i < gamma.dimension(); ++i) {
    for (MultiIndex::value_type k = 0; k < gamma[i]; ++k) {
      w *= Rational(BigInt(cur[i]) + 1, BigInt(cur.degree()) + 1);
      cur = cur.raised(i);
    }
  }
  return w;
}

/// Matrix of S^gamma from span{e_w : |w| <= N} into span{e_v : |v| <= N + |gamma|}.
/// Exactly one nonzero per column.
class ShiftMatrix {
 public:
  ShiftMatrix(const WeightFamily& weights, const MultiIndex& gamma, const GradedBasisIndexer& domain,
              const GradedBasisIndexer& codomain)
      : gamma_(gamma) {
    if (codomain.cutoff() < domain.cutoff() + gamma.degree()) {
      throw RangeError("ShiftMatrix: codomain cutoff too small for the word");
    }
    const auto cols = domain.total_rank();
    row_of_col_.resize(cols);
    weight_of_col_.resize(cols);
    col_of_row_.assign(codomain.total_rank(), -1);
    for (std::uint64_t c = 0; c < cols; ++c) {
      const auto image = shift_column(weights, gamma, domain.unrank(c));
      const auto r = codomain.rank(image.target);
      row_of_col_[c] = r;
      weight_of_col_[c] = image.weight;
      col_of_row_[r] = static_cast<std::int64_t>(c);
    }
  }

  const MultiIndex& word() const noexcept { return gamma_; }
  std::uint64_t cols() const noexcept { return row_of_col_.size(); }
  std::uint64_t rows() const noexcept { return col_of_row_.size(); }
  std::uint64_t row_of(std::uint64_t col) const { return row_of_col_.at(col); }
  double weight_of(std::uint64_t col) const { return weight_of_col_.at(col); }
  /// Column mapped onto `row`, or nullopt if the row is not in the image.
  std::optional<std::uint64_t> col_of(std::uint64_t row) const {
    const auto c = col_of_row_.at(row);
    if (c < 0) return std::nullopt;
    return static_cast<std::uint64_t>(c);
  }

  Eigen::MatrixXd to_dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows()), static_cast<Eigen::Index>(cols()));
    for (std::uint64_t c = 0; c < cols(); ++c) {
      m(static_cast<Eigen::Index>(row_of_col_[c]), static_cast<Eigen::Index>(c)) = weight_of_col_[c];
    }
    return m;
  }

 private:
  MultiIndex gamma_;
  std::vector<std::uint64_t> row_of_col_;
  std::vector<double> weight_of_col_;
  std::vector<std::int64_t> col_of_row_;
};

struct AssemblyOptions {
  static constexpr std::uint64_t kDefaultMaxRank = 5000;
  /// Cap on d_N for the dense matrix.
  std::uint64_t max_rank = kDefaultMaxRank;
  /// Cap on the rank of the extended (degree <= N + D) basis.
  std::uint64_t max_extended_rank = GradedBasisIndexer::kDefaultRankCap;
};

/// Matrix of P_N T P_N for T = sum c_{ab} S^{b*} S^a (+ K), entry (v, w) = <T e_w, e_v>.
/// Each term is formed as R_b^H R_a with R_g the rectangular matrix of S^g
/// into the degree <= N + D basis. Products of square truncated shifts
/// would insert a spurious P_N between S^{b*} and S^a.
inline Eigen::MatrixXcd assemble_matrix(const ToeplitzPolynomial& op, const WeightFamily& weights, std::uint64_t N,
                                        const CompactPerturbation* perturbation = nullptr,
                                        const AssemblyOptions& options = {}) {
  if (op.dimension() != weights.dimension()) {
    throw DimensionMismatch("operator has dimension " + std::to_string(op.dimension()) + " but weight family has " +
                            std::to_string(weights.dimension()));
  }
  const GradedBasisIndexer basis(op.dimension(), N, options.max_rank);
  const GradedBasisIndexer extended(op.dimension(), N + op.max_degree(), options.max_extended_rank);
  const auto n = static_cast<Eigen::Index>(basis.total_rank());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);

  std::map<MultiIndex, ShiftMatrix> factors;
  const auto factor = [&](const MultiIndex& gamma) -> const ShiftMatrix& {
    auto it = factors.find(gamma);
    if (it == factors.end()) {
      const GradedBasisIndexer& codomain = extended;
      it = factors.emplace(gamma, ShiftMatrix(weights, gamma, basis, codomain)).first;
    }
    return it->second;
  };

  for (const auto& [key, c] : op.terms()) {
    if (c == Complex(0.0)) continue;
    const auto& right = factor(key.first);   // R_alpha
    const auto& left = factor(key.second);   // R_beta
    for (std::uint64_t w = 0; w < right.cols(); ++w) {
      const auto v = left.col_of(right.row_of(w));
      if (!v) continue;  // w + alpha = v + beta has no solution with |v| <= N
      const double product = right.weight_of(w) * left.weight_of(*v);
      m(static_cast<Eigen::Index>(*v), static_cast<Eigen::Index>(w)) += c * product;
    }
  }

  if (perturbation) {
    for (const auto& [rc, value] : perturbation->entries()) {
      if (rc.first < basis.total_rank() && rc.second < basis.total_rank()) {
        m(static_cast<Eigen::Index>(rc.first), static_cast<Eigen::Index>(rc.second)) += value;
      }
    }
  }
  return m;
}

/// P_N T P_N of a Hermitian recipe, with its basis metadata.
class TruncatedOperator {
 public:
  TruncatedOperator(GradedBasisIndexer indexer, Eigen::MatrixXcd matrix, std::string symbol_id, WeightFamily weights,
                    bool perturbed)
      : indexer_(std::move(indexer)),
        matrix_(std::move(matrix)),
        symbol_id_(std::move(symbol_id)),
        weights_(weights),
        perturbed_(perturbed) {}

  const GradedBasisIndexer& indexer() const noexcept { return indexer_; }
  const Eigen::MatrixXcd& matrix() const noexcept { return matrix_; }
  std::size_t dimension() const noexcept { return indexer_.dimension(); }
  std::uint64_t cutoff() const noexcept { return indexer_.cutoff(); }
  std::uint64_t rank() const noexcept { return indexer_.total_rank(); }
  const std::string& symbol_id() const noexcept { return symbol_id_; }
  const WeightFamily& weights() const noexcept { return weights_; }
  bool perturbed() const noexcept { return perturbed_; }

  /// Real trace (imaginary diagonal parts are exactly zero).
  double trace() const { return matrix_.diagonal().real().sum(); }

  std::string provenance() const {
    return "symbol=" + symbol_id_ + " space=" + weights_.to_string() + " d=" + std::to_string(dimension()) +
           " N=" + std::to_string(cutoff()) + (perturbed_ ? " +K" : "");
  }

 private:
  GradedBasisIndexer indexer_;
  Eigen::MatrixXcd matrix_;
  std::string symbol_id_;
  WeightFamily weights_;
  bool perturbed_;
};

inline TruncatedOperator assemble_truncation(const HermitianSymbol& symbol, const WeightFamily& weights,
                                             std::uint64_t N, const CompactPerturbation* perturbation = nullptr,
                                             const AssemblyOptions& options = {}) {
  Eigen::MatrixXcd m = assemble_matrix(symbol.polynomial(), weights, N, perturbation, options);
  // (a + conj b)/2 and (b + conj a)/2 are exact conjugates in IEEE arithmetic
  const Eigen::MatrixXcd adjoint = m.adjoint();
  m = (m + adjoint) * 0.5;
  return TruncatedOperator(GradedBasisIndexer(symbol.dimension(), N, options.max_rank), std::move(m), symbol.id(),
                           weights, perturbation && !perturbation->empty());
}

inline TruncatedOperator assemble_truncation(const HermitianSymbol& symbol, const WeightFamily& weights,
                                             std::uint64_t N, const CompactPerturbation& perturbation,
                                             const AssemblyOptions& options = {}) {
  return assemble_truncation(symbol, weights, N, &perturbation, options);
}

/// Tr(P_N S^{alpha*} S^alpha P_N) by the closed form
/// alpha!/(|alpha|+d-1)! * sum_{j<=N} (|alpha|+j+d-1)!/(|alpha|+j)!.
inline Rational trace_closed_form(const MultiIndex& alpha, std::uint64_t N) {
  const std::uint64_t a = alpha.degree();
  const std::uint64_t d = alpha.dimension();
  BigInt sum = 0;
  for (std::uint64_t j = 0; j <= N; ++j) {
    // (a+j+d-1)!/(a+j)! as a falling product
    BigInt ratio = 1;
    for (std::uint64_t k = a + j + 1; k <= a + j + d - 1; ++k) ratio *= k;
    sum += ratio;
  }
  return Rational(multi_factorial(alpha) * sum, factorial(a + d - 1));
}

/// Same trace as the exact sum of ||S^alpha e_w||^2 over |w| <= N.
inline Rational trace_enumerated(const MultiIndex& alpha, std::uint64_t N) {
  Rational sum = 0;
  for (std::uint64_t j = 0; j <= N; ++j) {
    for (const auto& w : enumerate_slab(alpha.dimension(), j)) sum += shift_norm_sq_exact(alpha, w);
  }
  return sum;
}

/// Exact trace of the single-word truncation P_N S^{alpha*} S^alpha P_N.
/// Both routes are computed and must agree.
inline Rational trace_exact(const MultiIndex& alpha, const WeightFamily& weights, std::uint64_t N) {
  if (!weights.is_drury_arveson()) {
    throw Unsupported("trace_exact: closed form only holds for Drury-Arveson weights, got " + weights.to_string());
  }
  if (weights.dimension() != alpha.dimension()) throw DimensionMismatch("trace_exact: dimension mismatch");
  Rational closed = trace_closed_form(alpha, N);
  const Rational enumerated = trace_enumerated(alpha, N);
  if (closed != enumerated) {
    throw InvariantViolation("trace_exact: closed form " + closed.str() + " != enumerated " + enumerated.str());
  }
  return closed;
}

/// Assembles S^{alpha*}S^beta + S^{beta*}S^alpha at cutoff N and checks that
/// every diagonal entry vanishes.
inline bool mixed_word_trace_is_zero(const MultiIndex& alpha, const MultiIndex& beta, std::uint64_t N,
                                     const WeightFamily& weights) {
  alpha.check_same_dimension(beta);
  if (alpha == beta) throw PreconditionError("mixed_word_trace_is_zero: alpha must differ from beta");
  ToeplitzPolynomial p(alpha.dimension());
  p.add_term(alpha, beta, 1.0);
  p.add_term(beta, alpha, 1.0);
  const auto m = assemble_matrix(p, weights, N);
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    if (m(k, k) != Complex(0.0)) return false;
  }
  return true;
}

inline bool mixed_word_trace_is_zero(const MultiIndex& alpha, const MultiIndex& beta, std::uint64_t N) {
  return mixed_word_trace_is_zero(alpha, beta, N, WeightFamily::drury_arveson(alpha.dimension()));
}

}  // namespace szego
