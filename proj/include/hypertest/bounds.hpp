#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hypertest/common.hpp"
#include "hypertest/rational.hpp"

namespace hypertest {

/// exp^{(levels)}(top) with natural exponentials. Canonical form keeps top
/// above ln(DBL_MAX) whenever levels > 0, so comparison is lexicographic.
/// Arithmetic on towers rounds up: results are upper bounds.
class TowerNumber {
 public:
  static constexpr double kCollapse = 709.0;

  TowerNumber() = default;
  explicit TowerNumber(double x) : top_(x) {}
  TowerNumber(std::size_t levels, double top) : levels_(levels), top_(top) { normalize(); }

  std::size_t levels() const { return levels_; }
  double top() const { return top_; }
  bool finite() const { return levels_ == 0; }
  double value() const { return levels_ == 0 ? top_ : std::numeric_limits<double>::infinity(); }

  static TowerNumber exp_of(const TowerNumber& x, std::size_t times = 1) {
    if (x.levels_ == 0 && x.top_ < kCollapse) {
      TowerNumber once(std::exp(x.top_));
      return times == 1 ? once : exp_of(once, times - 1);
    }
    return TowerNumber(x.levels_ + times, x.top_);
  }
  static TowerNumber from_log(double ln_value) { return exp_of(TowerNumber(ln_value)); }

  /// Natural log; the argument must exceed 0.
  TowerNumber log() const {
    if (levels_ > 0) return TowerNumber(levels_ - 1, top_);
    if (!(top_ > 0)) throw RangeError("log of a non-positive tower");
    return TowerNumber(std::log(top_));
  }

  friend TowerNumber operator*(const TowerNumber& a, const TowerNumber& b) {
    if (a.levels_ == 0 && b.levels_ == 0) {
      const double p = a.top_ * b.top_;
      if (std::isfinite(p)) return TowerNumber(p);
    }
    if ((a.levels_ == 0 && a.top_ <= 0) || (b.levels_ == 0 && b.top_ <= 0))
      throw RangeError("tower products need positive factors");
    return exp_of(a.log() + b.log());
  }

  friend TowerNumber operator+(const TowerNumber& a, const TowerNumber& b) {
    if (a.levels_ == 0 && b.levels_ == 0) {
      const double s = a.top_ + b.top_;
      if (std::isfinite(s)) return TowerNumber(s);
    }
    const TowerNumber& big = a < b ? b : a;
    return big * TowerNumber(2.0);
  }

  /// a^b for a > 0.
  static TowerNumber pow(const TowerNumber& a, const TowerNumber& b) {
    if (a.levels_ == 0 && a.top_ == 1) return TowerNumber(1.0);
    const TowerNumber la = a.log();
    if (la.levels_ == 0 && la.top_ < 0) {
      // base below one: the power shrinks; only finite exponents are needed here
      if (b.levels_ != 0) return TowerNumber(0.0);
      return TowerNumber(std::pow(a.top_, b.top_));
    }
    return exp_of(la * b);
  }

  friend bool operator<(const TowerNumber& a, const TowerNumber& b) {
    if (a.levels_ != b.levels_) return a.levels_ < b.levels_;
    return a.top_ < b.top_;
  }
  friend bool operator<=(const TowerNumber& a, const TowerNumber& b) { return !(b < a); }
  friend bool operator==(const TowerNumber& a, const TowerNumber& b) {
    return a.levels_ == b.levels_ && a.top_ == b.top_;
  }

  std::string str() const {
    std::ostringstream os;
    os.precision(12);
    if (levels_ == 0) {
      os << top_;
    } else {
      os << "exp^(" << levels_ << ")(" << top_ << ")";
    }
    return os.str();
  }

 private:
  void normalize() {
    while (levels_ > 0 && top_ < kCollapse) {
      top_ = std::exp(top_);
      --levels_;
    }
  }

  std::size_t levels_ = 0;
  double top_ = 0;
};

/// One entry of the calculator: an expression exp^{(height)}(top),
/// its value as a tower, and an exact form when it is small enough to print.
struct BoundValue {
  std::string name;
  std::string formula;
  std::size_t height = 0;  // nominal number of iterated exponentials
  TowerNumber top;
  TowerNumber value;
  std::optional<mpz_class> exact_integer;  // ceiling of the value
  std::optional<Rational> exact_rational;
};

struct BoundInputs {
  std::size_t r = 2;
  std::size_t k = 2;
  std::size_t t = 2;
  Rational eps = ratio(1L, 10L);
  Rational delta = ratio(1L, 10L);
  std::size_t q0 = 2;
  std::size_t s = 2;
  // unspecified absolute constants
  Rational c = 1;       // q_cut
  Rational c_r = 1;     // q_tv
  Rational c_rk = 1;    // q_f
  Rational c_56 = 1;    // linear ND bound
};

namespace detail {

inline constexpr std::size_t kMaxPrintDigits = 4000;

inline double ln_rational(const Rational& q) {
  if (q <= 0) throw RangeError("logarithm of a non-positive rational");
  long en = 0, ed = 0;
  const double mn = mpz_get_d_2exp(&en, q.get_num_mpz_t());
  const double md = mpz_get_d_2exp(&ed, q.get_den_mpz_t());
  return std::log(mn) - std::log(md) + static_cast<double>(en - ed) * std::log(2.0);
}

inline TowerNumber tower_of(const Rational& q) {
  const double d = q.get_d();
  if (std::isfinite(d) && std::fabs(d) < 1e300) return TowerNumber(d);
  return TowerNumber::from_log(ln_rational(q));
}

inline mpz_class ceil_of(const Rational& q) {
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), q.get_num_mpz_t(), q.get_den_mpz_t());
  return out;
}

inline bool printable(double ln_value) { return ln_value / std::log(10.0) < kMaxPrintDigits; }

inline std::string rtext(const Rational& q) { return q.get_str(); }

inline BoundValue finish(BoundValue b) {
  b.value = TowerNumber::exp_of(b.top, b.height);
  if (b.height == 0 && b.exact_rational && !b.exact_integer && *b.exact_rational > 0)
    b.exact_integer = ceil_of(*b.exact_rational);
  if (b.height > 0) b.exact_rational.reset();
  return b;
}

/// Exact rational power when the result is printable.
inline std::optional<Rational> exact_pow(const Rational& base, std::size_t e) {
  if (base == 0) return Rational(0);
  const double ln = std::fabs(ln_rational(base)) * static_cast<double>(e);
  if (!printable(ln)) return std::nullopt;
  return rational_pow(base, e);
}

}  // namespace detail

/// Π(r, δ, q0, t, k) = δ / (4k (kt)^{q0^r} q0^r), exact.
inline Rational pi_bound(std::size_t r, const Rational& delta, std::size_t q0, std::size_t t,
                         std::size_t k) {
  const std::size_t q0r = ipow(q0, r);
  Rational den = rational_pow(Rational(static_cast<unsigned long>(k * t)), q0r);
  den *= Rational(static_cast<unsigned long>(4 * k * q0r));
  Rational out = delta / den;
  out.canonicalize();
  return out;
}

/// t_reg(r, k, ε, t) = (2t)^{(rk+1)^{4k²/ε²}}.
inline BoundValue treg_bound(std::size_t r, std::size_t k, const Rational& eps, std::size_t t) {
  BoundValue b;
  b.name = "t_reg";
  const Rational e = Rational(static_cast<unsigned long>(4 * k * k)) / (eps * eps);
  b.formula = std::to_string(2 * t) + "^(" + std::to_string(r * k + 1) + "^(" + detail::rtext(e) + "))";
  b.height = 2;
  // (2t)^{(rk+1)^e} = exp(exp(e ln(rk+1) + ln ln 2t))
  const double lnln2t = std::log(std::log(2.0 * static_cast<double>(t)));
  b.top = TowerNumber(detail::ln_rational(e) > 700 ? 1e308
                                                    : e.get_d() * std::log(static_cast<double>(r * k + 1)) + lnln2t);
  b = detail::finish(b);
  if (e.get_den() == 1 && e.get_num().fits_ulong_p()) {
    const unsigned long ee = e.get_num().get_ui();
    const double ln_inner = static_cast<double>(ee) * std::log(static_cast<double>(r * k + 1));
    if (ln_inner < 40) {
      mpz_class inner;
      mpz_ui_pow_ui(inner.get_mpz_t(), r * k + 1, ee);
      const double digits = inner.get_d() * std::log10(2.0 * static_cast<double>(t));
      if (digits < detail::kMaxPrintDigits && inner.fits_ulong_p()) {
        mpz_class v;
        mpz_ui_pow_ui(v.get_mpz_t(), 2 * t, inner.get_ui());
        b.exact_integer = v;
      }
    }
  }
  return b;
}

/// q_cut(r, k, ε, t) ≤ c (1/ε)^{2^{2r}} t^{2^{2r}} k³ r².
inline BoundValue qcut_bound(std::size_t r, std::size_t k, const Rational& eps, std::size_t t,
                             const Rational& c = 1) {
  BoundValue b;
  b.name = "q_cut";
  const std::size_t p = std::size_t{1} << (2 * r);
  b.formula = detail::rtext(c) + "*(1/" + detail::rtext(eps) + ")^" + std::to_string(p) + "*" +
              std::to_string(t) + "^" + std::to_string(p) + "*" + std::to_string(k) + "^3*" +
              std::to_string(r) + "^2";
  const Rational base = Rational(static_cast<unsigned long>(t)) / eps;
  const double ln = detail::ln_rational(c) + static_cast<double>(p) * detail::ln_rational(base) +
                    3 * std::log(static_cast<double>(k)) + 2 * std::log(static_cast<double>(r));
  b.height = 0;
  b.top = TowerNumber::from_log(ln);
  if (detail::printable(ln)) {
    if (auto pw = detail::exact_pow(base, p))
      b.exact_rational = c * *pw * Rational(static_cast<unsigned long>(k * k * k * r * r));
  }
  return detail::finish(b);
}

/// q_tv(r, δ, q0, t, k) ≤ exp^{(4(r-1))}(c_r (q0^r/δ)³ (kt)^{6 q0^r}).
inline BoundValue qtv_bound(std::size_t r, const Rational& delta, std::size_t q0, std::size_t t,
                            std::size_t k, const Rational& c_r = 1) {
  BoundValue b;
  b.name = "q_tv";
  const std::size_t q0r = ipow(q0, r);
  b.height = 4 * (r - 1);
  b.formula = "exp^(" + std::to_string(b.height) + ")(" + detail::rtext(c_r) + "*(" +
              std::to_string(q0r) + "/" + detail::rtext(delta) + ")^3*" + std::to_string(k * t) +
              "^" + std::to_string(6 * q0r) + ")";
  const Rational ratio_q = Rational(static_cast<unsigned long>(q0r)) / delta;
  const double ln = detail::ln_rational(c_r) + 3 * detail::ln_rational(ratio_q) +
                    static_cast<double>(6 * q0r) * std::log(static_cast<double>(k * t));
  b.top = TowerNumber::from_log(ln);
  if (detail::printable(ln))
    b.exact_rational =
        c_r * rational_pow(ratio_q, 3) * rational_pow(Rational(static_cast<unsigned long>(k * t)), 6 * q0r);
  return detail::finish(b);
}

/// The explicit base case q_tv(1, δ, q0, t, k) = (t + ln 2 − ln δ)·3 q0^{2k+2} / (4δ²).
inline double qtv_base_case(const Rational& delta, std::size_t q0, std::size_t t, std::size_t k) {
  const double d = delta.get_d();
  return (static_cast<double>(t) + std::log(2.0) - std::log(d)) * 3 *
         std::pow(static_cast<double>(q0), static_cast<double>(2 * k + 2)) / (4 * d * d);
}

/// q_f(ε) ≤ exp^{(4(r-1)+1)}(c_{r,k} q_g(ε)/ε).
inline BoundValue qf_bound(std::size_t r, const Rational& eps, std::size_t q_g, const Rational& c = 1) {
  BoundValue b;
  b.name = "q_f";
  b.height = 4 * (r - 1) + 1;
  const Rational top = c * Rational(static_cast<unsigned long>(q_g)) / eps;
  b.formula = "exp^(" + std::to_string(b.height) + ")(" + detail::rtext(c) + "*" + std::to_string(q_g) +
              "/" + detail::rtext(eps) + ")";
  b.top = detail::tower_of(top);
  return detail::finish(b);
}

/// Linear ND bound q_f(ε) ≤ exp^{(3)}(c q_g(ε/2)²).
inline BoundValue linear_nd_bound(std::size_t q_g_half, const Rational& c = 1) {
  BoundValue b;
  b.name = "q_f_linear";
  b.height = 3;
  const Rational top = c * Rational(static_cast<unsigned long>(q_g_half * q_g_half));
  b.formula = "exp^(3)(" + detail::rtext(c) + "*" + std::to_string(q_g_half) + "^2)";
  b.top = detail::tower_of(top);
  return detail::finish(b);
}

/// Θ = 2^{r+10} s^r r / δ and the sample size Θ⁴ log Θ of the GSE sampling
/// theorem.
struct ThetaBound {
  Rational theta;
  double q_min = 0;
};

inline ThetaBound theta_bound(std::size_t r, std::size_t s, const Rational& delta) {
  mpz_class two;
  mpz_ui_pow_ui(two.get_mpz_t(), 2, r + 10);
  Rational th = Rational(two * static_cast<unsigned long>(ipow(s, r) * r)) / delta;
  th.canonicalize();
  const double t = th.get_d();
  return {th, t * t * t * t * std::log(t)};
}

/// t₂ = t_reg(r, tk, Δ, 1) and t₁ = t_reg(r, t, (Δ/(t₂^r t))^{2^r} 2^{-r-1}, t₂)
/// from the induction step of the coloring-transfer lemma, as towers.
struct InductionSizes {
  TowerNumber t2;
  TowerNumber t1;
};

inline InductionSizes induction_sizes(std::size_t r, std::size_t t, std::size_t k, const Rational& delta_pi) {
  using T = TowerNumber;
  // t_reg(r, k', ε, t') = exp(ln(2t') exp(4k'²/ε² ln(rk'+1)))
  auto treg = [&](std::size_t kk, const T& inv_eps, const T& tt) {
    const T e = T(4.0 * static_cast<double>(kk * kk)) * inv_eps * inv_eps;
    const T inner = T::exp_of(e * T(std::log(static_cast<double>(r * kk + 1))));
    return T::exp_of((T(2.0) * tt).log() * inner);
  };
  InductionSizes out;
  const T inv_delta = detail::tower_of(1 / delta_pi);
  out.t2 = treg(t * k, inv_delta, T(1.0));
  // 1/ε₁ = (t₂^r t / Δ)^{2^r} 2^{r+1}
  const T base = T::pow(out.t2, T(static_cast<double>(r))) * T(static_cast<double>(t)) * inv_delta;
  const T inv_eps1 = T::pow(base, T(static_cast<double>(std::size_t{1} << r))) *
                     T(std::ldexp(1.0, static_cast<int>(r + 1)));
  out.t1 = treg(t, inv_eps1, out.t2);
  return out;
}

struct BoundReport {
  BoundInputs in;
  Rational pi;
  BoundValue treg;
  BoundValue qcut;
  BoundValue qtv;
  std::optional<double> qtv_base;
  BoundValue qf;
  BoundValue qf_linear;
  ThetaBound theta;
  InductionSizes induction;

  std::vector<const BoundValue*> all() const { return {&treg, &qcut, &qtv, &qf, &qf_linear}; }
};

/// Every explicit bound evaluated at one parameter point. q0
/// doubles as the witness sample complexity q_g in q_f and its linear variant.
inline BoundReport bound_calculator(const BoundInputs& in) {
  if (in.r < 1 || in.k < 1 || in.t < 1 || in.q0 < 1 || in.s < 1)
    throw InvalidArgument("r, k, t, q0 and s must be positive");
  if (in.eps <= 0 || in.delta <= 0) throw InvalidArgument("epsilon and delta must be positive");
  BoundReport rep;
  rep.in = in;
  rep.pi = pi_bound(in.r, in.delta, in.q0, in.t, in.k);
  rep.treg = treg_bound(in.r, in.k, in.eps, in.t);
  rep.qcut = qcut_bound(in.r, in.k, in.eps, in.t, in.c);
  rep.qtv = qtv_bound(in.r, in.delta, in.q0, in.t, in.k, in.c_r);
  if (in.r == 1) rep.qtv_base = qtv_base_case(in.delta, in.q0, in.t, in.k);
  rep.qf = qf_bound(in.r, in.eps, in.q0, in.c_rk);
  rep.qf_linear = linear_nd_bound(in.q0, in.c_56);
  rep.theta = theta_bound(in.r, in.s, in.delta);
  rep.induction = induction_sizes(in.r, in.t, in.k, rep.pi);
  return rep;
}

}  // namespace hypertest
