#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "szego/operator.hpp"

namespace szego {
namespace {

using Exps = std::vector<MultiIndex::value_type>;

// Dense matrix of S_i on the degree <= L basis, from the weight formula
// written out independently of WeightFamily.
Eigen::MatrixXd dense_shift(std::size_t d, std::uint64_t L, std::size_t i, bool bergman = false, double a = 0.0) {
  const GradedBasisIndexer idx(d, L);
  const auto n = static_cast<Eigen::Index>(idx.total_rank());
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (std::uint64_t c = 0; c < idx.total_rank(); ++c) {
    const auto& m = idx.unrank(c);
    if (m.degree() == L) continue;
    const double num = m[i] + 1.0;
    const double den = bergman ? d + m.degree() + a + 2.0 : m.degree() + 1.0;
    s(static_cast<Eigen::Index>(idx.rank(m.raised(i))), static_cast<Eigen::Index>(c)) = std::sqrt(num / den);
  }
  return s;
}

Eigen::MatrixXd dense_word(const std::vector<Eigen::MatrixXd>& shifts, const MultiIndex& gamma) {
  const auto n = shifts[0].rows();
  Eigen::MatrixXd w = Eigen::MatrixXd::Identity(n, n);
  for (std::size_t i = 0; i < gamma.dimension(); ++i) {
    for (std::uint32_t k = 0; k < gamma[i]; ++k) w = shifts[i] * w;
  }
  return w;
}

// Leading d_N block of sum c (S^beta)^* S^alpha formed on a basis big enough
// that nothing is cut off.
Eigen::MatrixXcd oracle_truncation(const ToeplitzPolynomial& p, std::uint64_t N, bool bergman = false,
                                   double a = 0.0) {
  const std::size_t d = p.dimension();
  const std::uint64_t L = N + p.max_degree() + 1;
  std::vector<Eigen::MatrixXd> shifts;
  for (std::size_t i = 0; i < d; ++i) shifts.push_back(dense_shift(d, L, i, bergman, a));
  const auto n = shifts[0].rows();
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [key, c] : p.terms()) {
    t += c * (dense_word(shifts, key.second).transpose() * dense_word(shifts, key.first)).cast<Complex>();
  }
  const auto dN = static_cast<Eigen::Index>(rank_PN(d, N).convert_to<std::uint64_t>());
  return t.topLeftCorner(dN, dN);
}

ToeplitzPolynomial random_polynomial(std::mt19937_64& rng, std::size_t d, std::uint32_t max_part, int terms) {
  std::uniform_int_distribution<std::uint32_t> part(0, max_part);
  std::normal_distribution<double> coeff(0.0, 1.0);
  ToeplitzPolynomial p(d);
  for (int t = 0; t < terms; ++t) {
    Exps a(d), b(d);
    for (auto& v : a) v = part(rng);
    for (auto& v : b) v = part(rng);
    const Complex c{coeff(rng), a == b ? 0.0 : coeff(rng)};  // diagonal terms of a symbol must be real
    p.add_term(MultiIndex(a), MultiIndex(b), c);
  }
  return p;
}

// Terms whose mirror is already present are skipped so auto-completion yields a valid symbol.
HermitianSymbol random_symbol(std::mt19937_64& rng, std::size_t d, std::uint32_t max_part, int terms) {
  const auto raw = random_polynomial(rng, d, max_part, terms);
  ToeplitzPolynomial p(d);
  for (const auto& [key, c] : raw.terms()) {
    if (key.first != key.second && p.terms().contains({key.second, key.first})) continue;
    p.add_term(key.first, key.second, c);
  }
  return HermitianSymbol(p);
}

TEST(ShiftColumn, Examples) {
  const auto da = WeightFamily::drury_arveson(2);
  auto r = shift_column(da, MultiIndex({1, 0}), MultiIndex({0, 0}));
  EXPECT_EQ(r.target, MultiIndex({1, 0}));
  EXPECT_DOUBLE_EQ(r.weight, 1.0);

  r = shift_column(da, MultiIndex({1, 0}), MultiIndex({0, 1}));
  EXPECT_EQ(r.target, MultiIndex({1, 1}));
  EXPECT_DOUBLE_EQ(r.weight, std::sqrt(0.5));

  for (const auto& m : {MultiIndex({3, 1}), MultiIndex({0, 0}), MultiIndex({2, 5})}) {
    r = shift_column(da, MultiIndex::zero(2), m);
    EXPECT_EQ(r.target, m);
    EXPECT_EQ(r.weight, 1.0);
  }
}

TEST(ShiftColumn, PathIndependentForBothFamilies) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint32_t> part(0, 4);
  for (const bool bergman : {false, true}) {
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t d = 1 + trial % 3;
      const auto family = bergman ? WeightFamily::bergman(d, 0.7) : WeightFamily::drury_arveson(d);
      Exps m(d), g(d, 0);
      for (auto& v : m) v = part(rng);
      std::vector<std::size_t> word;
      for (int k = 0; k < 4; ++k) {
        const std::size_t i = rng() % d;
        if (rng() % 2) word.push_back(i);
      }
      for (auto i : word) ++g[i];
      const auto canonical = shift_column(family, MultiIndex(g), MultiIndex(m));
      std::sort(word.begin(), word.end());
      do {
        const auto permuted = shift_word(family, word, MultiIndex(m));
        ASSERT_EQ(permuted.target, canonical.target);
        ASSERT_NEAR(permuted.weight, canonical.weight, 1e-15);
      } while (std::next_permutation(word.begin(), word.end()));
    }
  }
}

TEST(WeightFamily, WeightsInUnitInterval) {
  const GradedBasisIndexer idx(3, 8);
  for (const auto& family : {WeightFamily::drury_arveson(3), WeightFamily::bergman(3, -0.9),
                             WeightFamily::bergman(3, 0.0), WeightFamily::bergman(3, 5.0)}) {
    for (const auto& m : idx.basis()) {
      for (std::size_t i = 0; i < 3; ++i) {
        const double w = family.step_weight(m, i);
        EXPECT_GT(w, 0.0);
        EXPECT_LE(w, 1.0);
      }
    }
  }
  EXPECT_THROW(WeightFamily::bergman(2, -1.0), DomainError);
}

TEST(ShiftNormExact, MatchesMultinomialFormula) {
  // ||S^a e_w||^2 = multinomial(|w|; w) / multinomial(|a|+|w|; a+w)
  const GradedBasisIndexer idx(3, 5);
  for (const auto& alpha : idx.basis()) {
    if (alpha.degree() > 3) continue;
    for (const auto& w : idx.basis()) {
      const Rational expected(multinomial(w), multinomial(alpha + w));
      ASSERT_EQ(shift_norm_sq_exact(alpha, w), expected) << alpha << " " << w;
      const double numeric = shift_column(WeightFamily::drury_arveson(3), alpha, w).weight;
      ASSERT_NEAR(numeric * numeric, to_double(expected), 1e-15);
    }
  }
}

TEST(ShiftMatrix, OneNonzeroPerColumn) {
  const GradedBasisIndexer dom(2, 3);
  const GradedBasisIndexer cod(2, 5);
  const ShiftMatrix r(WeightFamily::drury_arveson(2), MultiIndex({1, 1}), dom, cod);
  const Eigen::MatrixXd dense = r.to_dense();
  ASSERT_EQ(dense.rows(), 21);
  ASSERT_EQ(dense.cols(), 10);
  for (Eigen::Index c = 0; c < dense.cols(); ++c) {
    EXPECT_EQ((dense.col(c).array() != 0.0).count(), 1);
    EXPECT_EQ(*r.col_of(r.row_of(static_cast<std::uint64_t>(c))), static_cast<std::uint64_t>(c));
  }
  EXPECT_FALSE(r.col_of(0).has_value());
}

TEST(AssembleTruncation, Examples) {
  const auto da = WeightFamily::drury_arveson(2);
  ToeplitzPolynomial p(2);
  p.add_term(MultiIndex({1, 0}), MultiIndex({0, 0}), 1.0);
  p.add_term(MultiIndex({0, 0}), MultiIndex({1, 0}), 1.0);
  const auto op = assemble_truncation(HermitianSymbol(p, HermitianMode::Enforce), da, 1);
  Eigen::MatrixXcd expected(3, 3);
  expected << 0, 1, 0, 1, 0, 0, 0, 0, 0;
  EXPECT_EQ(op.matrix(), expected);

  for (std::uint64_t N : {0u, 3u, 7u}) {
    const auto id = assemble_truncation(HermitianSymbol::constant(2, 1.0), da, N);
    EXPECT_EQ(id.matrix(), Eigen::MatrixXcd::Identity(id.matrix().rows(), id.matrix().cols()));
  }

  const auto mod = assemble_truncation(HermitianSymbol::modulus_squared(MultiIndex({1, 0})), da, 1);
  Eigen::MatrixXcd diag = Eigen::MatrixXcd::Zero(3, 3);
  diag.diagonal() << 1.0, 1.0, 0.5;
  EXPECT_TRUE(mod.matrix().isApprox(diag, 1e-15));
}

TEST(AssembleTruncation, MatchesUntruncatedDenseProducts) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const std::uint64_t N = 2 + trial % 4;
    const auto p = random_polynomial(rng, d, 2, 4);
    for (const bool bergman : {false, true}) {
      const auto family = bergman ? WeightFamily::bergman(d, 0.5) : WeightFamily::drury_arveson(d);
      const auto m = assemble_matrix(p, family, N);
      const auto oracle = oracle_truncation(p, N, bergman, 0.5);
      ASSERT_LT((m - oracle).cwiseAbs().maxCoeff(), 1e-12) << "trial " << trial;
    }
  }
}

TEST(AssembleTruncation, SquareTruncatedProductsDiffer) {
  // P_N S^* P_N S P_N loses the top slab; the rectangular route keeps it
  const std::size_t d = 2;
  const std::uint64_t N = 3;
  const auto op = assemble_truncation(HermitianSymbol::modulus_squared(MultiIndex({1, 0})),
                                      WeightFamily::drury_arveson(d), N);
  const auto dN = op.matrix().rows();
  const Eigen::MatrixXd square = dense_shift(d, N, 0);
  const Eigen::MatrixXd naive = square.transpose() * square;
  EXPECT_GT((op.matrix().real() - naive.topLeftCorner(dN, dN)).cwiseAbs().maxCoeff(), 0.4);
  // the top-degree diagonal is (m_1 + 1)/(N + 1), not zero
  EXPECT_NEAR(op.matrix()(dN - 1, dN - 1).real(), 1.0 / (N + 1), 1e-15);
}

TEST(AssembleTruncation, HermitianAndNested) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t d = 1 + trial % 3;
    const auto symbol = random_symbol(rng, d, 2, 3);
    const auto family = trial % 2 ? WeightFamily::bergman(d, 1.0) : WeightFamily::drury_arveson(d);
    const std::uint64_t N = 6;
    const auto big = assemble_truncation(symbol, family, N);
    EXPECT_EQ(big.matrix(), big.matrix().adjoint());
    for (Eigen::Index k = 0; k < big.matrix().rows(); ++k) EXPECT_EQ(big.matrix()(k, k).imag(), 0.0);
    for (std::uint64_t M = 0; M < N; ++M) {
      const auto small = assemble_truncation(symbol, family, M);
      const auto n = small.matrix().rows();
      EXPECT_LT((big.matrix().topLeftCorner(n, n) - small.matrix()).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(AssembleTruncation, SelectionRule) {
  const std::size_t d = 3;
  const std::uint64_t N = 4;
  const MultiIndex alpha{1, 0, 2};
  const MultiIndex beta{0, 1, 1};
  ToeplitzPolynomial p(d);
  p.add_term(alpha, beta, {0.3, -0.4});
  const auto m = assemble_matrix(p, WeightFamily::drury_arveson(d), N);
  const GradedBasisIndexer idx(d, N);
  for (std::uint64_t v = 0; v < idx.total_rank(); ++v) {
    for (std::uint64_t w = 0; w < idx.total_rank(); ++w) {
      const bool allowed = idx.unrank(w) + alpha == idx.unrank(v) + beta;
      const auto entry = m(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w));
      if (allowed) {
        EXPECT_NE(entry, Complex(0.0));
      } else {
        EXPECT_EQ(entry, Complex(0.0));
      }
    }
  }
}

TEST(AssembleTruncation, PerturbationAddsEntriesInsideRange) {
  const CompactPerturbation K({{0, 0, 2.0}, {1, 4, {0.0, 1.0}}});
  const auto op = assemble_truncation(HermitianSymbol::constant(2, 1.0), WeightFamily::drury_arveson(2), 1, K);
  EXPECT_EQ(op.matrix()(0, 0), Complex(3.0));
  EXPECT_EQ(op.matrix().rows(), 3);  // entry (1,4) lies outside d_1 = 3
  const auto op2 = assemble_truncation(HermitianSymbol::constant(2, 1.0), WeightFamily::drury_arveson(2), 2, K);
  EXPECT_EQ(op2.matrix()(1, 4), Complex(0.0, 1.0));
  EXPECT_EQ(op2.matrix()(4, 1), Complex(0.0, -1.0));
  EXPECT_TRUE(op2.perturbed());
}

TEST(AssembleTruncation, Errors) {
  EXPECT_THROW(assemble_truncation(HermitianSymbol::constant(2, 1.0), WeightFamily::drury_arveson(3), 2),
               DimensionMismatch);
  AssemblyOptions tight;
  tight.max_rank = 10;
  EXPECT_THROW(assemble_truncation(HermitianSymbol::constant(2, 1.0), WeightFamily::drury_arveson(2), 4, nullptr, tight),
               CapExceeded);
}

TEST(TraceExact, Examples) {
  const auto da = WeightFamily::drury_arveson(2);
  EXPECT_EQ(trace_exact(MultiIndex({1, 0}), da, 0), Rational(1));
  EXPECT_EQ(trace_exact(MultiIndex({1, 0}), da, 1), Rational(5, 2));
  for (std::uint64_t N : {0u, 4u, 9u}) {
    EXPECT_EQ(trace_exact(MultiIndex::zero(2), da, N), Rational(rank_PN(2, N)));
    EXPECT_EQ(trace_exact(MultiIndex::zero(3), WeightFamily::drury_arveson(3), N), Rational(rank_PN(3, N)));
  }
  EXPECT_THROW((void)trace_exact(MultiIndex({1, 0}), WeightFamily::bergman(2, 0.0), 3), Unsupported);
}

TEST(TraceExact, MatchesAssembledTrace) {
  for (std::size_t d = 1; d <= 3; ++d) {
    const auto da = WeightFamily::drury_arveson(d);
    const GradedBasisIndexer words(d, 3);
    for (const auto& alpha : words.basis()) {
      for (std::uint64_t N : {0u, 5u, 15u}) {
        const double exact = to_double(trace_exact(alpha, da, N));
        const double assembled = assemble_truncation(HermitianSymbol::modulus_squared(alpha), da, N).trace();
        ASSERT_NEAR(assembled, exact, 1e-10 * exact) << alpha << " N=" << N;
      }
    }
  }
}

TEST(MixedWordTrace, Examples) {
  EXPECT_TRUE(mixed_word_trace_is_zero(MultiIndex({1, 0}), MultiIndex({0, 1}), 5));
  EXPECT_TRUE(mixed_word_trace_is_zero(MultiIndex({2}), MultiIndex({0}), 10));
  EXPECT_TRUE(mixed_word_trace_is_zero(MultiIndex({1, 0, 0}), MultiIndex({1, 1, 0}), 4));
  EXPECT_TRUE(mixed_word_trace_is_zero(MultiIndex({1, 0}), MultiIndex({0, 1}), 5, WeightFamily::bergman(2, 0.0)));
  EXPECT_THROW((void)mixed_word_trace_is_zero(MultiIndex({1, 1}), MultiIndex({1, 1}), 3), PreconditionError);
}

TEST(SymbolEval, Examples) {
  const std::vector<Complex> e1{1.0, 0.0};
  const std::vector<Complex> diag{1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)};
  EXPECT_DOUBLE_EQ(symbol_eval(HermitianSymbol::constant(2, 1.0), diag), 1.0);

  ToeplitzPolynomial p(2);
  p.add_term(MultiIndex({1, 0}), MultiIndex({0, 0}), 1.0);
  const HermitianSymbol twice_re(p);  // auto-completes the conjugate term
  EXPECT_DOUBLE_EQ(symbol_eval(twice_re, e1), 2.0);
  EXPECT_NEAR(symbol_eval(HermitianSymbol::modulus_squared(MultiIndex({1, 0})), diag), 0.5, 1e-15);

  const std::vector<Complex> off{1.0, 1.0};
  EXPECT_THROW((void)symbol_eval(twice_re, off), DomainError);
  EXPECT_THROW((void)symbol_eval(twice_re, std::vector<Complex>{1.0}), DimensionMismatch);
}

TEST(SymbolRangeBounds, Examples) {
  const auto c = symbol_range_bounds(HermitianSymbol::constant(3, 2.5), 100, 1);
  EXPECT_EQ(c.lower, 2.5);
  EXPECT_EQ(c.upper, 2.5);

  ToeplitzPolynomial p(1);
  p.add_term(MultiIndex({1}), MultiIndex({0}), 1.0);
  const auto cos2 = symbol_range_bounds(HermitianSymbol(p), 100000, 3);
  EXPECT_NEAR(cos2.lower, -2.0, 1e-3);
  EXPECT_NEAR(cos2.upper, 2.0, 1e-3);
  EXPECT_GE(cos2.lower, -2.0);
  EXPECT_LE(cos2.upper, 2.0);

  const auto mod = symbol_range_bounds(HermitianSymbol::modulus_squared(MultiIndex({1, 0})), 100000, 3);
  EXPECT_NEAR(mod.lower, 0.0, 1e-3);
  EXPECT_NEAR(mod.upper, 1.0, 1e-3);
  EXPECT_LE(mod.lower, mod.upper);
}

TEST(HermitianSymbol, CompletionModes) {
  ToeplitzPolynomial half(2);
  half.add_term(MultiIndex({1, 0}), MultiIndex({0, 1}), {1.0, 2.0});
  const HermitianSymbol completed(half);
  ASSERT_EQ(completed.terms().size(), 2u);
  EXPECT_EQ(completed.terms().at({MultiIndex({0, 1}), MultiIndex({1, 0})}), Complex(1.0, -2.0));
  EXPECT_THROW(HermitianSymbol(half, HermitianMode::Enforce), DomainError);

  ToeplitzPolynomial bad = half;
  bad.add_term(MultiIndex({0, 1}), MultiIndex({1, 0}), {1.0, 2.0});  // should be 1 - 2i
  EXPECT_THROW(HermitianSymbol(bad, HermitianMode::AutoComplete), DomainError);

  ToeplitzPolynomial diag(2);
  diag.add_term(MultiIndex({1, 0}), MultiIndex({1, 0}), {1.0, 0.5});
  EXPECT_THROW(HermitianSymbol{diag}, DomainError);
}

TEST(CompactPerturbation, TraceNormAndCompletion) {
  const CompactPerturbation K({{2, 5, {0.0, 3.0}}, {1, 1, -2.0}});
  EXPECT_EQ(K.entries().size(), 3u);
  EXPECT_EQ(K.entries().at({5, 2}), Complex(0.0, -3.0));
  EXPECT_EQ(K.max_rank(), 5u);
  // eigenvalues -2, 3, -3
  EXPECT_NEAR(K.trace_norm(), 8.0, 1e-12);
  EXPECT_EQ(K.partial_trace(100), -2.0);
  EXPECT_EQ(K.partial_trace(1), 0.0);
  EXPECT_THROW(CompactPerturbation({{0, 1, 1.0}}, HermitianMode::Enforce), DomainError);
}

}  // namespace
}  // namespace szego
