#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "szego/errors.hpp"
#include "szego/operator.hpp"

namespace szego {

/// Scalar test function applied to eigenvalues or symbol values.
using ScalarFunction = std::function<double(double)>;

struct EigenOptions {
  /// Eigenvectors (and residual spot-checks) only up to this size.
  std::int64_t residual_check_max_size = 2000;
  double residual_tolerance = 1e-8;
};

/// All eigenvalues of a Hermitian matrix, ascending, with multiplicity.
inline std::vector<double> eigenvalues_hermitian(const Eigen::MatrixXcd& m, const std::string& provenance = "matrix",
                                                 const EigenOptions& options = {}) {
  if (m.rows() != m.cols()) throw DimensionMismatch("eigenvalues_hermitian: matrix is not square (" + provenance + ")");
  if (m.rows() == 0) return {};
  const bool check = m.rows() <= options.residual_check_max_size;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m, check ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw SpectralError("eigensolver did not converge for " + provenance);
  const Eigen::VectorXd& values = solver.eigenvalues();
  if (check) {
    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    const Eigen::Index n = m.rows();
    for (Eigen::Index k : {Eigen::Index{0}, n / 2, n - 1}) {
      const auto v = solver.eigenvectors().col(k);
      const double residual = (m * v - values(k) * v).norm();
      if (residual > options.residual_tolerance * scale) {
        throw SpectralError("eigenpair residual " + std::to_string(residual) + " too large for " + provenance);
      }
    }
  }
  std::vector<double> out(values.data(), values.data() + values.size());
  for (double x : out) {
    if (!std::isfinite(x)) throw SpectralError("non-finite eigenvalue for " + provenance);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Uniform probability measure on the eigenvalues of a truncation.
class EmpiricalSpectralDistribution {
 public:
  struct Provenance {
    std::size_t dimension = 0;
    std::uint64_t cutoff = 0;
    std::string symbol_id;
  };

  EmpiricalSpectralDistribution(std::vector<double> eigenvalues, Provenance provenance)
      : eigenvalues_(std::move(eigenvalues)), provenance_(std::move(provenance)) {
    if (eigenvalues_.empty()) throw PreconditionError("empirical spectral distribution needs at least one eigenvalue");
    for (double x : eigenvalues_) {
      if (!std::isfinite(x)) throw DomainError("non-finite eigenvalue", x);
    }
    std::sort(eigenvalues_.begin(), eigenvalues_.end());
  }

  static EmpiricalSpectralDistribution of(const TruncatedOperator& op, const EigenOptions& options = {}) {
    return EmpiricalSpectralDistribution(eigenvalues_hermitian(op.matrix(), op.provenance(), options),
                                         {op.dimension(), op.cutoff(), op.symbol_id()});
  }

  std::span<const double> eigenvalues() const noexcept { return eigenvalues_; }
  std::size_t size() const noexcept { return eigenvalues_.size(); }
  double weight() const noexcept { return 1.0 / static_cast<double>(eigenvalues_.size()); }
  double min() const noexcept { return eigenvalues_.front(); }
  double max() const noexcept { return eigenvalues_.back(); }
  const Provenance& provenance() const noexcept { return provenance_; }

 private:
  std::vector<double> eigenvalues_;
  Provenance provenance_;
};

/// (1/n) sum f(lambda_i). A non-finite f value is reported as a domain error.
inline double esd_mean_of(const ScalarFunction& f, std::span<const double> values) {
  if (values.empty()) throw PreconditionError("esd_mean_of: empty sample");
  double sum = 0.0;
  for (double x : values) {
    const double fx = f(x);
    if (!std::isfinite(fx)) throw DomainError("test function undefined at eigenvalue " + std::to_string(x), x);
    sum += fx;
  }
  return sum / static_cast<double>(values.size());
}

inline double esd_mean_of(const ScalarFunction& f, const EmpiricalSpectralDistribution& esd) {
  return esd_mean_of(f, esd.eigenvalues());
}

/// Tr(P_N T P_N) / rank(P_N).
inline double chi_N(const TruncatedOperator& op) { return op.trace() / static_cast<double>(op.rank()); }

/// Eigenvalues at or below this are treated as non-positive.
inline constexpr double kPositivityThreshold = 1e-12;

/// det(M)^{1/n} = exp(mean log lambda_i).
inline double geometric_mean(std::span<const double> values) {
  if (values.empty()) throw PreconditionError("geometric_mean: empty sample");
  double sum = 0.0;
  for (double x : values) {
    if (!(x > kPositivityThreshold)) {
      throw PositivityError("geometric_mean: eigenvalue " + std::to_string(x) + " is not positive", x);
    }
    sum += std::log(x);
  }
  return std::exp(sum / static_cast<double>(values.size()));
}

inline double geometric_mean(const EmpiricalSpectralDistribution& esd) { return geometric_mean(esd.eigenvalues()); }

/// sup_x |F_a(x) - F_b(x)| for the uniform empirical CDFs of two samples.
inline double kolmogorov_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("kolmogorov_distance: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double sup = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double x;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      x = sa[i];
    } else {
      x = sb[j];
    }
    // consume every atom at x before comparing the right-continuous CDFs
    while (i < sa.size() && sa[i] == x) ++i;
    while (j < sb.size() && sb[j] == x) ++j;
    sup = std::max(sup, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return sup;
}

inline double kolmogorov_distance(const EmpiricalSpectralDistribution& a, const EmpiricalSpectralDistribution& b) {
  return kolmogorov_distance(a.eigenvalues(), b.eigenvalues());
}

/// Round-trippable decimal form of a double.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// CSV with a commented header carrying d, N, d_N and the symbol id.
inline void write_esd_csv(std::ostream& os, const EmpiricalSpectralDistribution& esd,
                          std::span<const std::string> extra_header = {}) {
  const auto& p = esd.provenance();
  os << "# d=" << p.dimension << " N=" << p.cutoff << " d_N=" << esd.size() << " symbol=" << p.symbol_id << '\n';
  for (const auto& line : extra_header) os << "# " << line << '\n';
  os << "index,eigenvalue\n";
  const auto values = esd.eigenvalues();
  for (std::size_t k = 0; k < values.size(); ++k) os << k << ',' << format_double(values[k]) << '\n';
}

}  // namespace szego
