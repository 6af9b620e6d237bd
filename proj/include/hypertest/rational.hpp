#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>
#include <type_traits>

#include "hypertest/common.hpp"

namespace hypertest {

using Rational = mpq_class;

/// Parses "p", "p/q", or a finite decimal ("-0.125", "1e-3") into an exact
/// rational. Decimals are read digit by digit, never through a double.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw InvalidArgument("empty number");
  if (s.find('/') != std::string::npos) {
    Rational q;
    if (q.set_str(s, 10) != 0) throw InvalidArgument("malformed rational '" + s + "'");
    if (q.get_den() == 0) throw InvalidArgument("zero denominator in '" + s + "'");
    q.canonicalize();
    return q;
  }
  long exp10 = 0;
  if (auto e = s.find_first_of("eE"); e != std::string::npos) {
    try {
      exp10 = std::stol(s.substr(e + 1));
    } catch (const std::exception&) {
      throw InvalidArgument("malformed exponent in '" + s + "'");
    }
    s.resize(e);
  }
  bool neg = false;
  std::size_t pos = 0;
  if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
    neg = s[0] == '-';
    pos = 1;
  }
  mpz_class num = 0;
  long frac_digits = 0;
  bool seen_dot = false;
  bool seen_digit = false;
  for (; pos < s.size(); ++pos) {
    const char c = s[pos];
    if (c == '.') {
      if (seen_dot) throw InvalidArgument("malformed number '" + std::string(text) + "'");
      seen_dot = true;
    } else if (c >= '0' && c <= '9') {
      num = num * 10 + (c - '0');
      if (seen_dot) ++frac_digits;
      seen_digit = true;
    } else {
      throw InvalidArgument("malformed number '" + std::string(text) + "'");
    }
  }
  if (!seen_digit) throw InvalidArgument("malformed number '" + std::string(text) + "'");
  const long shift = exp10 - frac_digits;
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(shift < 0 ? -shift : shift));
  Rational out = shift >= 0 ? Rational(num * scale) : Rational(num, scale);
  out.canonicalize();
  return neg ? Rational(-out) : out;
}

/// Canonical n/d.
inline Rational ratio(long num, long den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline Rational ratio(unsigned long num, unsigned long den) {
  if (den == 0) throw InvalidArgument("zero denominator");
  Rational q(num, den);
  q.canonicalize();
  return q;
}

inline std::string to_string(const Rational& q) { return q.get_str(); }

inline Rational rational_pow(const Rational& base, std::size_t exp) {
  mpz_class num, den;
  mpz_pow_ui(num.get_mpz_t(), base.get_num_mpz_t(), exp);
  mpz_pow_ui(den.get_mpz_t(), base.get_den_mpz_t(), exp);
  Rational out(num, den);
  out.canonicalize();
  return out;
}

// ---------------------------------------------------------------------------
// Scalar traits: kernels and norms are templates over an exact type
// (Rational) or a float type (double).

template <class T>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational from(const Rational& q) { return q; }
  static Rational from_double(double x) { return Rational(x); }
  static double to_double(const Rational& q) { return q.get_d(); }
  static Rational abs(const Rational& q) {
    Rational out;
    mpq_abs(out.get_mpq_t(), q.get_mpq_t());
    return out;
  }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static double from(const Rational& q) { return q.get_d(); }
  static double from_double(double x) { return x; }
  static double to_double(double x) { return x; }
  static double abs(double x) { return std::fabs(x); }
};

template <class T>
inline double to_double(const T& x) {
  return ScalarTraits<T>::to_double(x);
}

template <class T>
inline T scalar_abs(const T& x) {
  return ScalarTraits<T>::abs(x);
}

template <class T>
inline T scalar_from(const Rational& q) {
  return ScalarTraits<T>::from(q);
}

template <class T>
inline constexpr bool is_exact_v = ScalarTraits<T>::exact;

/// Canonical text for a scalar: "p/q" for rationals, shortest round-trip
/// decimal for doubles.
inline std::string scalar_text(const Rational& q) { return q.get_str(); }
inline std::string scalar_text(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace hypertest
