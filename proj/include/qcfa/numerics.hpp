#pragma once

// Exact and certified number types.
//
//   Rational           - GMP rational, always canonical.
//   Real               - RAII handle around an mpfr_t.
//   CertifiedInterval  - [lo, hi] of Reals produced with directed rounding.
//   Enclosure          - a probability-like quantity known either exactly (lo == hi)
//                        or only through rational bounds.

#include <gmpxx.h>
#include <mpfr.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

#include "qcfa/errors.hpp"

namespace qcfa {

using BigInt = mpz_class;
using Rational = mpq_class;

inline constexpr mpfr_prec_t kDefaultPrecision = 256;
inline constexpr mpfr_prec_t kMaxPrecision = 4096;

inline Rational make_rational(const BigInt& num, const BigInt& den) {
  if (den == 0) throw Error("rational with zero denominator");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

/// "p/q" with q always present.
inline std::string to_string(const Rational& r) {
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// Accepts "p/q", "p" and plain decimals such as "0.125" or "-3.5".
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  auto bad = [&]() -> Rational { throw UsageError("not a rational number: '" + s + "'"); };
  if (s.empty()) return bad();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    BigInt num, den;
    if (num.set_str(s.substr(0, slash), 10) != 0 || den.set_str(s.substr(slash + 1), 10) != 0) return bad();
    if (den == 0) return bad();
    return make_rational(num, den);
  }
  std::size_t pos = 0;
  bool negative = false;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    pos = 1;
  }
  std::string digits;
  int fraction_digits = -1;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (fraction_digits >= 0) return bad();
      fraction_digits = 0;
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      if (fraction_digits >= 0) ++fraction_digits;
    } else {
      return bad();
    }
  }
  if (digits.empty()) return bad();
  BigInt num(digits, 10);
  BigInt den = 1;
  if (fraction_digits > 0) mpz_ui_pow_ui(den.get_mpz_t(), 10, static_cast<unsigned long>(fraction_digits));
  if (negative) num = -num;
  return make_rational(num, den);
}

inline BigInt pow_ui(const BigInt& base, unsigned long exp) {
  BigInt out;
  mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), exp);
  return out;
}

inline BigInt pow_ui(unsigned long base, unsigned long exp) {
  BigInt out;
  mpz_ui_pow_ui(out.get_mpz_t(), base, exp);
  return out;
}

/// Number of significant bits of |x| (0 for zero).
inline std::size_t bit_size(const BigInt& x) {
  return x == 0 ? 0 : mpz_sizeinbase(x.get_mpz_t(), 2);
}

/// Smallest j >= 0 with 2^j >= 1/eps, i.e. ceil(log2(1/eps)) for 0 < eps <= 1.
inline unsigned ceil_log2_inverse(const Rational& eps) {
  if (eps <= 0) throw Error("ceil_log2_inverse needs a positive argument");
  unsigned j = 0;
  Rational scaled = eps;
  while (scaled < 1) {
    scaled *= 2;
    ++j;
  }
  return j;
}

// ---------------------------------------------------------------------------

class Real {
 public:
  explicit Real(mpfr_prec_t prec = kDefaultPrecision) {
    mpfr_init2(v_, prec);
    mpfr_set_zero(v_, 1);
  }
  Real(const Real& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  Real(Real&& other) noexcept {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_swap(v_, other.v_);
  }
  Real& operator=(const Real& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  static Real from_rational(const Rational& q, mpfr_prec_t prec, mpfr_rnd_t rnd) {
    Real r(prec);
    mpfr_set_q(r.v_, q.get_mpq_t(), rnd);
    return r;
  }

  mpfr_ptr get() noexcept { return v_; }
  mpfr_srcptr get() const noexcept { return v_; }
  mpfr_prec_t precision() const noexcept { return mpfr_get_prec(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }

  /// Exact conversion; MPFR values are dyadic.
  Rational to_rational() const {
    if (!mpfr_number_p(v_)) throw Error("non-finite value in certified arithmetic");
    Rational q;
    mpfr_get_q(q.get_mpq_t(), v_);
    return q;
  }

 private:
  mpfr_t v_;
};

inline int compare(const Real& a, const Real& b) { return mpfr_cmp(a.get(), b.get()); }

// ---------------------------------------------------------------------------

/// Closed interval with endpoints rounded outward. lo <= hi always.
class CertifiedInterval {
 public:
  explicit CertifiedInterval(mpfr_prec_t prec = kDefaultPrecision) : lo_(prec), hi_(prec) {}
  CertifiedInterval(Real lo, Real hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (compare(lo_, hi_) > 0) throw Error("certified interval with lo > hi");
  }

  static CertifiedInterval from_rational(const Rational& q, mpfr_prec_t prec) {
    return {Real::from_rational(q, prec, MPFR_RNDD), Real::from_rational(q, prec, MPFR_RNDU)};
  }
  static CertifiedInterval from_decimal(const std::string& text, mpfr_prec_t prec) {
    return from_rational(parse_rational(text), prec);
  }

  const Real& lo() const noexcept { return lo_; }
  const Real& hi() const noexcept { return hi_; }
  mpfr_prec_t precision() const noexcept { return std::max(lo_.precision(), hi_.precision()); }

  Real width() const {
    Real w(precision());
    mpfr_sub(w.get(), hi_.get(), lo_.get(), MPFR_RNDU);
    return w;
  }
  bool is_point() const { return compare(lo_, hi_) == 0; }
  bool contains(const Rational& q) const {
    return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) <= 0 && mpfr_cmp_q(hi_.get(), q.get_mpq_t()) >= 0;
  }
  bool contains(const CertifiedInterval& inner) const {
    return compare(lo_, inner.lo_) <= 0 && compare(inner.hi_, hi_) <= 0;
  }
  bool certainly_greater(const Rational& q) const { return mpfr_cmp_q(lo_.get(), q.get_mpq_t()) > 0; }
  bool certainly_less(const Rational& q) const { return mpfr_cmp_q(hi_.get(), q.get_mpq_t()) < 0; }
  double midpoint() const { return 0.5 * (lo_.to_double() + hi_.to_double()); }

 private:
  Real lo_;
  Real hi_;
};

inline CertifiedInterval operator+(const CertifiedInterval& a, const CertifiedInterval& b) {
  mpfr_prec_t p = std::max(a.precision(), b.precision());
  Real lo(p), hi(p);
  mpfr_add(lo.get(), a.lo().get(), b.lo().get(), MPFR_RNDD);
  mpfr_add(hi.get(), a.hi().get(), b.hi().get(), MPFR_RNDU);
  return {std::move(lo), std::move(hi)};
}

inline CertifiedInterval operator-(const CertifiedInterval& a, const CertifiedInterval& b) {
  mpfr_prec_t p = std::max(a.precision(), b.precision());
  Real lo(p), hi(p);
  mpfr_sub(lo.get(), a.lo().get(), b.hi().get(), MPFR_RNDD);
  mpfr_sub(hi.get(), a.hi().get(), b.lo().get(), MPFR_RNDU);
  return {std::move(lo), std::move(hi)};
}

inline CertifiedInterval operator*(const CertifiedInterval& a, const CertifiedInterval& b) {
  mpfr_prec_t p = std::max(a.precision(), b.precision());
  const Real* xs[2] = {&a.lo(), &a.hi()};
  const Real* ys[2] = {&b.lo(), &b.hi()};
  Real lo(p), hi(p), t(p);
  bool first = true;
  for (const Real* x : xs) {
    for (const Real* y : ys) {
      mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDD);
      if (first || compare(t, lo) < 0) lo = t;
      mpfr_mul(t.get(), x->get(), y->get(), MPFR_RNDU);
      if (first || compare(t, hi) > 0) hi = t;
      first = false;
    }
  }
  return {std::move(lo), std::move(hi)};
}

inline CertifiedInterval square(const CertifiedInterval& a) {
  mpfr_prec_t p = a.precision();
  Real lo(p), hi(p);
  if (a.lo().sign() >= 0) {
    mpfr_sqr(lo.get(), a.lo().get(), MPFR_RNDD);
    mpfr_sqr(hi.get(), a.hi().get(), MPFR_RNDU);
  } else if (a.hi().sign() <= 0) {
    mpfr_sqr(lo.get(), a.hi().get(), MPFR_RNDD);
    mpfr_sqr(hi.get(), a.lo().get(), MPFR_RNDU);
  } else {
    Real t(p);
    mpfr_sqr(hi.get(), a.lo().get(), MPFR_RNDU);
    mpfr_sqr(t.get(), a.hi().get(), MPFR_RNDU);
    if (compare(t, hi) > 0) hi = t;
  }
  return {std::move(lo), std::move(hi)};
}

/// Division by an interval that is strictly positive.
inline CertifiedInterval divide_by_positive(const CertifiedInterval& a, const CertifiedInterval& b) {
  if (b.lo().sign() <= 0) throw Error("interval division by a range that touches zero");
  mpfr_prec_t p = std::max(a.precision(), b.precision());
  const Real* xs[2] = {&a.lo(), &a.hi()};
  const Real* ys[2] = {&b.lo(), &b.hi()};
  Real lo(p), hi(p), t(p);
  bool first = true;
  for (const Real* x : xs) {
    for (const Real* y : ys) {
      mpfr_div(t.get(), x->get(), y->get(), MPFR_RNDD);
      if (first || compare(t, lo) < 0) lo = t;
      mpfr_div(t.get(), x->get(), y->get(), MPFR_RNDU);
      if (first || compare(t, hi) > 0) hi = t;
      first = false;
    }
  }
  return {std::move(lo), std::move(hi)};
}

inline CertifiedInterval sqrt_nonnegative(const CertifiedInterval& a) {
  mpfr_prec_t p = a.precision();
  Real lo(p), hi(p);
  if (a.hi().sign() < 0) throw Error("square root of a negative interval");
  if (a.lo().sign() > 0) mpfr_sqrt(lo.get(), a.lo().get(), MPFR_RNDD);
  mpfr_sqrt(hi.get(), a.hi().get(), MPFR_RNDU);
  return {std::move(lo), std::move(hi)};
}

// ---------------------------------------------------------------------------

namespace detail {
inline mpfr_prec_t& working_precision() {
  thread_local mpfr_prec_t bits = kDefaultPrecision;
  return bits;
}
}  // namespace detail

/// Scoped override of the working precision used by interval leaves and enclosure compaction.
class PrecisionScope {
 public:
  explicit PrecisionScope(mpfr_prec_t bits) : saved_(detail::working_precision()) {
    if (bits < 64) throw UsageError("precision must be at least 64 bits");
    detail::working_precision() = bits;
  }
  ~PrecisionScope() { detail::working_precision() = saved_; }
  PrecisionScope(const PrecisionScope&) = delete;
  PrecisionScope& operator=(const PrecisionScope&) = delete;

 private:
  mpfr_prec_t saved_;
};

inline mpfr_prec_t working_precision() { return detail::working_precision(); }

/// An exact rational, or rational bounds around an irrational value.
/// Exact values keep only `lo_`; `hi_` is meaningful only when `exact_` is false.
class Enclosure {
 public:
  Enclosure() = default;
  Enclosure(const Rational& exact) : lo_(exact) {}  // NOLINT: implicit by intent
  Enclosure(Rational&& exact) : lo_(std::move(exact)) {}  // NOLINT
  Enclosure(long exact) : lo_(exact) {}             // NOLINT
  static Enclosure between(const Rational& lo, const Rational& hi) {
    if (lo > hi) throw Error("enclosure with lo > hi");
    Enclosure e(lo);
    if (lo != hi) {
      e.hi_ = hi;
      e.exact_ = false;
    }
    return e;
  }
  static Enclosure from_interval(const CertifiedInterval& i) {
    return between(i.lo().to_rational(), i.hi().to_rational());
  }

  bool is_exact() const noexcept { return exact_; }
  const Rational& lo() const noexcept { return lo_; }
  const Rational& hi() const noexcept { return exact_ ? lo_ : hi_; }
  const Rational& exact() const {
    if (!exact_) throw Error("value is only known to lie in an interval");
    return lo_;
  }
  Rational width() const { return exact_ ? Rational(0) : Rational(hi_ - lo_); }
  double approx() const { return exact_ ? lo_.get_d() : 0.5 * (lo_.get_d() + hi_.get_d()); }
  bool contains(const Rational& q) const { return lo_ <= q && q <= hi(); }
  bool is_zero() const { return exact_ && sgn(lo_) == 0; }
  bool certainly_positive() const { return lo_ > 0; }

  bool operator==(const Enclosure& o) const { return lo_ == o.lo_ && hi() == o.hi(); }

  /// Intersection with [0, 1]; used after subtractions that can only overshoot.
  Enclosure clamped_unit() const {
    Rational lo = lo_, hi = this->hi();
    if (lo < 0) lo = 0;
    if (hi > 1) hi = 1;
    if (lo > hi) lo = hi;
    return between(lo, hi);
  }

  /// Outward-rounds non-exact bounds to dyadics once their denominators outgrow the working precision.
  Enclosure& compact() {
    if (exact_) return *this;
    const mpfr_prec_t bits = working_precision() + 64;
    auto too_big = [&](const Rational& q) {
      return bit_size(q.get_den()) > static_cast<std::size_t>(2 * bits) ||
             bit_size(q.get_num()) > static_cast<std::size_t>(2 * bits);
    };
    if (too_big(lo_)) lo_ = Real::from_rational(lo_, bits, MPFR_RNDD).to_rational();
    if (too_big(hi_)) hi_ = Real::from_rational(hi_, bits, MPFR_RNDU).to_rational();
    return *this;
  }

  friend Enclosure operator+(const Enclosure& a, const Enclosure& b) {
    if (a.exact_ && b.exact_) return Enclosure(Rational(a.lo_ + b.lo_));
    Enclosure e = between(a.lo_ + b.lo_, a.hi() + b.hi());
    return e.compact();
  }
  friend Enclosure operator-(const Enclosure& a, const Enclosure& b) {
    if (a.exact_ && b.exact_) return Enclosure(Rational(a.lo_ - b.lo_));
    Enclosure e = between(a.lo_ - b.hi(), a.hi() - b.lo_);
    return e.compact();
  }
  friend Enclosure operator*(const Enclosure& a, const Enclosure& b) {
    if (a.exact_ && b.exact_) return Enclosure(Rational(a.lo_ * b.lo_));
    std::array<Rational, 4> p = {a.lo_ * b.lo_, a.lo_ * b.hi(), a.hi() * b.lo_, a.hi() * b.hi()};
    Enclosure e = between(*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end()));
    return e.compact();
  }
  friend Enclosure operator/(const Enclosure& a, const Enclosure& b) {
    if (b.lo_ <= 0 && b.hi() >= 0) throw Error("enclosure division by a range containing zero");
    if (a.exact_ && b.exact_) return Enclosure(Rational(a.lo_ / b.lo_));
    std::array<Rational, 4> p = {a.lo_ / b.lo_, a.lo_ / b.hi(), a.hi() / b.lo_, a.hi() / b.hi()};
    Enclosure e = between(*std::min_element(p.begin(), p.end()), *std::max_element(p.begin(), p.end()));
    return e.compact();
  }
  Enclosure& operator+=(const Enclosure& o) {
    if (exact_ && o.exact_) {
      lo_ += o.lo_;
      return *this;
    }
    return *this = *this + o;
  }

 private:
  Rational lo_;
  Rational hi_;
  bool exact_ = true;
};

enum class Certainty { yes, no, inconclusive };

/// Three-valued strict comparison x > bound.
inline Certainty certify_greater(const Enclosure& x, const Rational& bound) {
  if (x.lo() > bound) return Certainty::yes;
  if (x.hi() <= bound) return Certainty::no;
  return Certainty::inconclusive;
}

/// Re-runs `attempt(precision)` with doubled precision while it is inconclusive.
/// Throws CertificationError once `max_bits` has been tried.
template <class Attempt>
Certainty certify_with_escalation(Attempt&& attempt, const std::string& what,
                                  mpfr_prec_t start_bits = kDefaultPrecision,
                                  mpfr_prec_t max_bits = kMaxPrecision) {
  for (mpfr_prec_t bits = start_bits; bits <= max_bits; bits *= 2) {
    PrecisionScope scope(bits);
    Certainty c = attempt(bits);
    if (c != Certainty::inconclusive) return c;
  }
  throw CertificationError("certification inconclusive at " + std::to_string(max_bits) + " bits: " + what);
}

}  // namespace qcfa
