#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

#include "szego/errors.hpp"

namespace szego {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt factorial(std::uint64_t n) {
  BigInt result = 1;
  for (std::uint64_t k = 2; k <= n; ++k) result *= k;
  return result;
}

/// C(n, k); zero when k > n.
inline BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  BigInt result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;  // exact: result is C(n-k+i, i) here
  }
  return result;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(const BigInt& n) { return n.convert_to<double>(); }

/// Exact value of a finite binary64 number as a rational.
inline Rational exact_rational(double x) {
  if (!std::isfinite(x)) throw DomainError("non-finite value has no rational form", x);
  if (x == 0.0) return Rational(0);
  int exponent = 0;
  const double mantissa = std::frexp(x, &exponent);  // x = mantissa * 2^exponent
  constexpr int kDigits = std::numeric_limits<double>::digits;
  const auto scaled = static_cast<std::int64_t>(std::ldexp(mantissa, kDigits));
  exponent -= kDigits;
  BigInt numerator = scaled;
  BigInt denominator = 1;
  if (exponent >= 0) {
    numerator <<= exponent;
  } else {
    denominator <<= -exponent;
  }
  return Rational(numerator, denominator);
}

inline std::uint64_t to_u64_checked(const BigInt& n, const char* what) {
  if (n < 0 || n > std::numeric_limits<std::uint64_t>::max()) {
    throw RangeError(std::string(what) + " does not fit in 64 bits");
  }
  return n.convert_to<std::uint64_t>();
}

}  // namespace szego
