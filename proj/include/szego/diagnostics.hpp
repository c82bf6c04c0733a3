#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "szego/errors.hpp"
#include "szego/measure.hpp"
#include "szego/multiindex.hpp"
#include "szego/operator.hpp"
#include "szego/rational.hpp"
#include "szego/spectral.hpp"
#include "szego/symbol.hpp"

namespace szego {

/// One row of a convergence study. gap() is always recomputed from lhs/rhs.
struct TableRow {
  std::uint64_t N = 0;
  std::uint64_t d_N = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  /// NaN when the experiment has no bound column.
  double bound = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> aux;

  double gap() const noexcept { return std::abs(lhs - rhs); }
};

class ConvergenceTable {
 public:
  explicit ConvergenceTable(std::string experiment, std::vector<std::string> aux_names = {})
      : experiment_(std::move(experiment)), aux_names_(std::move(aux_names)) {}

  void add_row(TableRow row) {
    if (!rows_.empty() && row.N <= rows_.back().N) {
      throw PreconditionError("ConvergenceTable: cutoffs must be strictly increasing");
    }
    if (row.aux.size() != aux_names_.size()) throw PreconditionError("ConvergenceTable: auxiliary column count mismatch");
    rows_.push_back(std::move(row));
  }

  const std::string& experiment() const noexcept { return experiment_; }
  std::span<const std::string> aux_names() const noexcept { return aux_names_; }
  std::span<const TableRow> rows() const noexcept { return rows_; }
  bool empty() const noexcept { return rows_.empty(); }
  const TableRow& back() const { return rows_.back(); }

  std::vector<double> gaps() const {
    std::vector<double> g;
    g.reserve(rows_.size());
    for (const auto& r : rows_) g.push_back(r.gap());
    return g;
  }

  /// Gaps over the last `count` rows are non-increasing within `slack`.
  bool tail_non_increasing(std::size_t count = 5, double slack = 1e-12) const {
    return tail_non_increasing_values(gaps(), count, slack);
  }

  static bool tail_non_increasing_values(std::span<const double> values, std::size_t count = 5, double slack = 1e-12) {
    const std::size_t start = values.size() > count ? values.size() - count : 0;
    for (std::size_t k = start + 1; k < values.size(); ++k) {
      if (values[k] > values[k - 1] + slack) return false;
    }
    return true;
  }

  /// Columns N,d_N,lhs,rhs,gap,bound then the auxiliary columns.
  void write_csv(std::ostream& os, std::span<const std::string> header_comments = {}) const {
    os << "# experiment=" << experiment_ << '\n';
    for (const auto& line : header_comments) os << "# " << line << '\n';
    os << "N,d_N,lhs,rhs,gap,bound";
    for (const auto& name : aux_names_) os << ',' << name;
    os << '\n';
    for (const auto& r : rows_) {
      os << r.N << ',' << r.d_N << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
         << format_double(r.gap()) << ',' << (std::isnan(r.bound) ? std::string() : format_double(r.bound));
      for (double a : r.aux) os << ',' << format_double(a);
      os << '\n';
    }
  }

 private:
  std::string experiment_;
  std::vector<std::string> aux_names_;
  std::vector<TableRow> rows_;
};

/// Named scalar function; polynomial ones keep their coefficients so the
/// reference side can be integrated exactly.
struct TestFunction {
  std::string name;
  ScalarFunction f;
  /// c_0 + c_1 x + ... when the function is a polynomial.
  std::optional<std::vector<double>> polynomial;

  double operator()(double x) const { return f(x); }

  static TestFunction from_polynomial(std::vector<double> coefficients, std::string name = "polynomial") {
    auto coeffs = coefficients;
    return {std::move(name),
            [coeffs](double x) {
              double v = 0.0;
              for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * x + *it;
              return v;
            },
            std::move(coefficients)};
  }

  /// x^k.
  static TestFunction power(unsigned k) {
    std::vector<double> c(k + 1, 0.0);
    c[k] = 1.0;
    return from_polynomial(std::move(c), k == 1 ? "x" : "x^" + std::to_string(k));
  }

  static TestFunction log() {
    return {"log",
            [](double x) { return x > 0.0 ? std::log(x) : std::numeric_limits<double>::quiet_NaN(); },
            std::nullopt};
  }
};

/// ||(P_M - P_N) T P_N||_2^2 + ||P_N T (P_M - P_N)||_2^2 for a matrix
/// assembled at a cutoff M large enough to hold every nonzero entry.
inline double commutator_ratio_of_matrix(const Eigen::MatrixXcd& t, std::uint64_t d_N) {
  const auto n = static_cast<Eigen::Index>(d_N);
  const auto rest = t.rows() - n;
  if (rest < 0) throw RangeError("commutator_ratio_of_matrix: matrix smaller than the projection");
  const double lower = t.bottomLeftCorner(rest, n).squaredNorm();
  const double upper = t.topRightCorner(n, rest).squaredNorm();
  return std::sqrt(lower + upper) / std::sqrt(static_cast<double>(d_N));
}

inline double corner_ratio_of_matrix(const Eigen::MatrixXcd& t, std::uint64_t d_N) {
  const auto n = static_cast<Eigen::Index>(d_N);
  const auto rest = t.rows() - n;
  if (rest < 0) throw RangeError("corner_ratio_of_matrix: matrix smaller than the projection");
  return t.bottomLeftCorner(rest, n).norm() / std::sqrt(static_cast<double>(d_N));
}

/// Smallest M with basis rank r inside the degree <= M basis.
inline std::uint64_t degree_of_rank(std::size_t d, std::uint64_t r) {
  std::uint64_t M = 0;
  BigInt covered = 1;
  while (covered <= r) {
    ++M;
    covered += slab_size(d, M);
  }
  return M;
}

/// Cutoff at which every entry of T between range(P_N) and its complement is held.
inline std::uint64_t folner_extended_cutoff(const ToeplitzPolynomial& op, std::uint64_t N,
                                            const CompactPerturbation* perturbation) {
  std::uint64_t M = N + op.max_degree();
  if (perturbation && !perturbation->empty()) {
    M = std::max(M, degree_of_rank(op.dimension(), perturbation->max_rank()));
  }
  return std::max(M, N + 1);
}

/// tau_N(T) = ||P_N T - T P_N||_2 / ||P_N||_2.
inline double folner_ratio_commutator(const ToeplitzPolynomial& op, const WeightFamily& weights, std::uint64_t N,
                                      const CompactPerturbation* perturbation = nullptr,
                                      const AssemblyOptions& options = {}) {
  const auto M = folner_extended_cutoff(op, N, perturbation);
  AssemblyOptions wide = options;
  wide.max_rank = std::max(options.max_rank, options.max_extended_rank);
  const auto t = assemble_matrix(op, weights, M, perturbation, wide);
  return commutator_ratio_of_matrix(t, to_u64_checked(rank_PN(op.dimension(), N), "d_N"));
}

/// ||(I - P_N) T P_N||_2 / ||P_N||_2.
inline double folner_ratio_corner(const ToeplitzPolynomial& op, const WeightFamily& weights, std::uint64_t N,
                                  const CompactPerturbation* perturbation = nullptr,
                                  const AssemblyOptions& options = {}) {
  const auto M = folner_extended_cutoff(op, N, perturbation);
  AssemblyOptions wide = options;
  wide.max_rank = std::max(options.max_rank, options.max_extended_rank);
  const auto t = assemble_matrix(op, weights, M, perturbation, wide);
  return corner_ratio_of_matrix(t, to_u64_checked(rank_PN(op.dimension(), N), "d_N"));
}

/// ||S_i P_N - P_N S_i||_2^2 = sum_{|a| = N} (a_i + 1)/(N + 1) for Drury-Arveson shifts.
inline Rational folner_commutator_sq_exact(std::size_t d, std::size_t i, std::uint64_t N) {
  if (i >= d) throw RangeError("shift coordinate out of range");
  BigInt numerator = 0;
  for (const auto& a : enumerate_slab(d, N)) numerator += BigInt(a[i]) + 1;
  return Rational(numerator, BigInt(N) + 1);
}

/// tau_N(S_i)^2, exact.
inline Rational folner_ratio_sq_exact(std::size_t d, std::size_t i, std::uint64_t N) {
  return folner_commutator_sq_exact(d, i, N) / Rational(rank_PN(d, N));
}

/// C(N+d-1, d-1) / d_N, the upper bound on tau_N(S_i)^2.
inline Rational folner_bound_sq(std::size_t d, std::uint64_t N) { return Rational(slab_size(d, N), rank_PN(d, N)); }

/// chi_N(S^{alpha*} S^alpha) against its limit int |z^alpha|^2 dsigma.
/// Drury-Arveson rows are exact rationals rounded once.
inline ConvergenceTable chi_limit_table(const MultiIndex& alpha, const WeightFamily& weights,
                                        std::span<const std::uint64_t> cutoffs) {
  if (cutoffs.empty()) throw PreconditionError("chi_limit_table: empty cutoff list");
  if (weights.dimension() != alpha.dimension()) throw DimensionMismatch("chi_limit_table: dimension mismatch");
  const double limit = to_double(monomial_moment(alpha, alpha));
  ConvergenceTable table("chi_limit" + alpha.to_string(), {"trace"});
  for (auto N : cutoffs) {
    const BigInt d_N = rank_PN(alpha.dimension(), N);
    double chi = 0.0;
    double trace = 0.0;
    if (weights.is_drury_arveson()) {
      const Rational exact = trace_exact(alpha, weights, N);
      chi = to_double(exact / Rational(d_N));
      trace = to_double(exact);
    } else {
      for (std::uint64_t j = 0; j <= N; ++j) {
        for (const auto& w : enumerate_slab(alpha.dimension(), j)) {
          const double s = shift_column(weights, alpha, w).weight;
          trace += s * s;
        }
      }
      chi = trace / to_double(d_N);
    }
    table.add_row({N, to_u64_checked(d_N, "d_N"), chi, limit, std::numeric_limits<double>::quiet_NaN(), {trace}});
  }
  return table;
}

/// chi_N(K) for a finite-rank perturbation with the bound ||K||_1 / sqrt(d_N).
inline ConvergenceTable compact_decay_table(const CompactPerturbation& perturbation, std::size_t d,
                                            std::span<const std::uint64_t> cutoffs) {
  if (cutoffs.empty()) throw PreconditionError("compact_decay_table: empty cutoff list");
  const double nuclear = perturbation.trace_norm();
  ConvergenceTable table("compact_decay", {"trace_norm"});
  for (auto N : cutoffs) {
    const auto d_N = to_u64_checked(rank_PN(d, N), "d_N");
    const double chi = perturbation.partial_trace(d_N) / static_cast<double>(d_N);
    table.add_row({N, d_N, chi, 0.0, nuclear / std::sqrt(static_cast<double>(d_N)), {nuclear}});
  }
  return table;
}

struct IntegrationSpec {
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t seed = 0;
  std::size_t expansion_cap = 1'000'000;
};

/// Value of int f(phi) dsigma; exact when f is a polynomial.
struct ReferenceValue {
  double value = 0.0;
  double std_error = 0.0;
  bool exact = false;
};

inline ReferenceValue pushforward_reference(const HermitianSymbol& symbol, const TestFunction& f,
                                            const IntegrationSpec& spec) {
  if (f.polynomial) {
    Rational total = 0;
    const auto& c = *f.polynomial;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == 0.0) continue;
      total += exact_rational(c[k]) * exact_polynomial_pushforward(symbol, static_cast<unsigned>(k), spec.expansion_cap).value;
    }
    return {to_double(total), 0.0, true};
  }
  const auto mc = integrate_pushforward(symbol, f.f, spec.mc_samples, spec.seed);
  return {mc.estimate, mc.std_error, false};
}

struct SzegoGap {
  double lhs;
  double rhs;
  double rhs_std_error;
  bool rhs_exact;
  double gap;
};

/// Both sides of the limit theorem at one cutoff, from an already computed spectrum.
inline SzegoGap szego_gap(const EmpiricalSpectralDistribution& esd, const ReferenceValue& reference,
                          const TestFunction& f) {
  const double lhs = esd_mean_of(f.f, esd);
  return {lhs, reference.value, reference.std_error, reference.exact, std::abs(lhs - reference.value)};
}

inline SzegoGap szego_gap(const HermitianSymbol& symbol, const WeightFamily& weights, const TestFunction& f,
                          std::uint64_t N, const IntegrationSpec& spec, const AssemblyOptions& options = {}) {
  const auto op = assemble_truncation(symbol, weights, N, nullptr, options);
  const auto esd = EmpiricalSpectralDistribution::of(op);
  return szego_gap(esd, pushforward_reference(symbol, f, spec), f);
}

/// Largest singular value of a truncation; a lower bound on the operator norm.
inline double truncated_operator_norm(const Eigen::MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  const Eigen::MatrixXcd gram = m.adjoint() * m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, solver.eigenvalues().maxCoeff()));
}

struct SubadditivityReport {
  double tau_a = 0.0;
  double tau_b = 0.0;
  double tau_sum = 0.0;
  double tau_product = 0.0;
  /// Truncation estimates, flagged as lower bounds.
  double norm_a = 0.0;
  double norm_b = 0.0;
  bool norms_are_lower_bounds = true;
  bool sum_holds = false;
  bool product_holds = false;
};

/// tau_N(A+B) <= tau_N(A) + tau_N(B) and tau_N(AB) <= tau_N(A)||B|| + tau_N(B)||A||.
inline SubadditivityReport subadditivity_check(const ToeplitzPolynomial& a, const ToeplitzPolynomial& b,
                                               const WeightFamily& weights, std::uint64_t N, double slack = 1e-8,
                                               const AssemblyOptions& options = {}) {
  if (a.dimension() != b.dimension()) throw DimensionMismatch("subadditivity_check: dimension mismatch");
  AssemblyOptions wide = options;
  wide.max_rank = std::max(options.max_rank, options.max_extended_rank);
  const std::size_t d = a.dimension();
  const auto d_N = to_u64_checked(rank_PN(d, N), "d_N");
  const std::uint64_t reach = a.max_degree() + b.max_degree();
  const std::uint64_t M = N + 2 * reach + 1;

  SubadditivityReport report;
  report.tau_a = folner_ratio_commutator(a, weights, N, nullptr, options);
  report.tau_b = folner_ratio_commutator(b, weights, N, nullptr, options);
  report.tau_sum = folner_ratio_commutator(a + b, weights, N, nullptr, options);

  const Eigen::MatrixXcd ma = assemble_matrix(a, weights, M, nullptr, wide);
  const Eigen::MatrixXcd mb = assemble_matrix(b, weights, M, nullptr, wide);
  // entries of AB with both indices of degree <= N + reach are exact here
  const auto inner = static_cast<Eigen::Index>(to_u64_checked(rank_PN(d, N + reach), "rank"));
  const Eigen::MatrixXcd product = (ma * mb).topLeftCorner(inner, inner);
  report.tau_product = commutator_ratio_of_matrix(product, d_N);
  report.norm_a = truncated_operator_norm(ma);
  report.norm_b = truncated_operator_norm(mb);
  report.sum_holds = report.tau_sum <= report.tau_a + report.tau_b + slack;
  report.product_holds = report.tau_product <= report.tau_a * report.norm_b + report.tau_b * report.norm_a + slack;
  return report;
}

/// Largest distance of a spectrum from the interval [lower, upper]; 0 when contained.
inline double containment_violation(const EmpiricalSpectralDistribution& esd, double lower, double upper) {
  return std::max({0.0, lower - esd.min(), esd.max() - upper});
}

}  // namespace szego
