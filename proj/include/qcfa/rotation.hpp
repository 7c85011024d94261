#pragma once

// Exact qubit states reachable with rotations by integer multiples of
// alpha = sqrt(2)*pi, eighth-turn offsets and reflections, together with
// certified evaluation of their measurement probabilities.

#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>

#include "qcfa/numerics.hpp"

namespace qcfa {

/// The state cos(theta)|q0> + sin(theta)|q1> with theta = turns*alpha + eighths*pi/4.
/// `eighths` is kept modulo 4: theta and theta + pi describe the same state up to global phase.
struct RotationIndex {
  std::int64_t turns = 0;
  int eighths = 0;

  RotationIndex() = default;
  RotationIndex(std::int64_t t, int e = 0) : turns(t), eighths(normalize(e)) {}  // NOLINT

  static RotationIndex basis(int index) { return {0, index == 0 ? 0 : 2}; }

  RotationIndex rotated(std::int64_t dt, int de) const { return {turns + dt, eighths + de}; }
  /// theta -> c - theta, with c = c_turns*alpha + c_eighths*pi/4.
  RotationIndex reflected(std::int64_t c_turns, int c_eighths) const {
    return {c_turns - turns, c_eighths - eighths};
  }

  bool is_basis() const { return turns == 0 && (eighths % 2) == 0; }
  /// Index of the basis state when is_basis().
  int basis_index() const { return eighths == 0 ? 0 : 1; }

  bool operator==(const RotationIndex& o) const { return turns == o.turns && eighths == o.eighths; }

 private:
  static int normalize(int e) { return ((e % 4) + 4) % 4; }
};

namespace detail {

inline CertifiedInterval sqrt2_times(std::int64_t t, mpfr_prec_t prec) {
  Real s_lo(prec), s_hi(prec), lo(prec), hi(prec);
  mpfr_sqrt_ui(s_lo.get(), 2, MPFR_RNDD);
  mpfr_sqrt_ui(s_hi.get(), 2, MPFR_RNDU);
  const long tl = static_cast<long>(t);
  if (t >= 0) {
    mpfr_mul_si(lo.get(), s_lo.get(), tl, MPFR_RNDD);
    mpfr_mul_si(hi.get(), s_hi.get(), tl, MPFR_RNDU);
  } else {
    mpfr_mul_si(lo.get(), s_hi.get(), tl, MPFR_RNDD);
    mpfr_mul_si(hi.get(), s_lo.get(), tl, MPFR_RNDU);
  }
  return {std::move(lo), std::move(hi)};
}

}  // namespace detail

/// sin^2(pi*y) for every y in [y.lo, y.hi].
///
/// Uses sin^2(pi*y) = sin^2(pi*|y - r|) for the integer r nearest the interval,
/// on which sin is monotone.
inline CertifiedInterval sin_squared_pi(const CertifiedInterval& y) {
  const mpfr_prec_t p = y.precision() + 16;
  Real mid(p), r(p);
  mpfr_add(mid.get(), y.lo().get(), y.hi().get(), MPFR_RNDN);
  mpfr_div_2ui(mid.get(), mid.get(), 1, MPFR_RNDN);
  mpfr_rint(r.get(), mid.get(), MPFR_RNDN);

  Real d_lo(p), d_hi(p);
  mpfr_sub(d_lo.get(), y.lo().get(), r.get(), MPFR_RNDD);
  mpfr_sub(d_hi.get(), y.hi().get(), r.get(), MPFR_RNDU);

  auto full = [&] {
    Real zero(p), one(p);
    mpfr_set_ui(one.get(), 1, MPFR_RNDN);
    return CertifiedInterval(std::move(zero), std::move(one));
  };

  // Distance interval [a, b] of y from r.
  Real a(p), b(p), abs_lo(p), abs_hi(p);
  mpfr_abs(abs_lo.get(), d_lo.get(), MPFR_RNDN);
  mpfr_abs(abs_hi.get(), d_hi.get(), MPFR_RNDN);
  if (d_lo.sign() <= 0 && d_hi.sign() >= 0) {
    mpfr_set_zero(a.get(), 1);
    b = compare(abs_lo, abs_hi) > 0 ? abs_lo : abs_hi;
  } else if (d_lo.sign() > 0) {
    a = d_lo;
    b = d_hi;
  } else {
    a = abs_hi;
    b = abs_lo;
  }
  if (mpfr_cmp_d(b.get(), 0.5) > 0) return full();

  Real pi_lo(p), pi_hi(p), x(p), s(p), lo(p), hi(p);
  mpfr_const_pi(pi_lo.get(), MPFR_RNDD);
  mpfr_const_pi(pi_hi.get(), MPFR_RNDU);

  mpfr_mul(x.get(), pi_lo.get(), a.get(), MPFR_RNDD);
  mpfr_sin(s.get(), x.get(), MPFR_RNDD);
  if (s.sign() < 0) mpfr_set_zero(s.get(), 1);
  mpfr_sqr(lo.get(), s.get(), MPFR_RNDD);

  mpfr_mul(x.get(), pi_hi.get(), b.get(), MPFR_RNDU);
  Real half_pi(p);
  mpfr_div_2ui(half_pi.get(), pi_lo.get(), 1, MPFR_RNDD);
  if (compare(x, half_pi) >= 0) {
    mpfr_set_ui(hi.get(), 1, MPFR_RNDN);
  } else {
    mpfr_sin(s.get(), x.get(), MPFR_RNDU);
    mpfr_sqr(hi.get(), s.get(), MPFR_RNDU);
    if (mpfr_cmp_ui(hi.get(), 1) > 0) mpfr_set_ui(hi.get(), 1, MPFR_RNDN);
  }
  return {std::move(lo), std::move(hi)};
}

/// Probability sin^2(sqrt(2)*t*pi) of observing |q1> after a net rotation of t*alpha from |q0>.
inline CertifiedInterval rotation_reject_probability(std::int64_t t, mpfr_prec_t precision = kDefaultPrecision) {
  if (precision < 64) throw UsageError("precision must be at least 64 bits");
  // Guard bits cover the magnitude of sqrt(2)*t so the final width stays near 2^-precision.
  const mpfr_prec_t guard = 32 + static_cast<mpfr_prec_t>(bit_size(BigInt(static_cast<long>(t))));
  CertifiedInterval wide = sin_squared_pi(detail::sqrt2_times(t, precision + guard));
  Real lo(precision), hi(precision);
  mpfr_set(lo.get(), wide.lo().get(), MPFR_RNDD);
  mpfr_set(hi.get(), wide.hi().get(), MPFR_RNDU);
  return {std::move(lo), std::move(hi)};
}

/// |<q_index|psi>|^2 for psi given by `state`, certified.
inline CertifiedInterval rotation_basis_probability(const RotationIndex& state, int index,
                                                    mpfr_prec_t precision = kDefaultPrecision) {
  // theta = pi*(sqrt(2)*turns + eighths/4); P(q1) = sin^2(theta), P(q0) = sin^2(theta + pi/2).
  CertifiedInterval y = detail::sqrt2_times(state.turns, precision);
  double shift = state.eighths / 4.0 + (index == 0 ? 0.5 : 0.0);
  Real lo(precision), hi(precision);
  mpfr_add_d(lo.get(), y.lo().get(), shift, MPFR_RNDD);
  mpfr_add_d(hi.get(), y.hi().get(), shift, MPFR_RNDU);
  return sin_squared_pi(CertifiedInterval(std::move(lo), std::move(hi)));
}

/// Same probability as an Enclosure: exact whenever turns == 0, cached otherwise.
inline Enclosure rotation_basis_enclosure(const RotationIndex& state, int index) {
  if (state.turns == 0) {
    // cos^2 / sin^2 of a multiple of pi/4.
    static const Rational half(1, 2);
    int e = state.eighths;
    if (e % 2 == 1) return Enclosure(half);
    bool on_q0 = e == 0;
    return Enclosure(Rational((on_q0 == (index == 0)) ? 1 : 0));
  }
  using Key = std::tuple<std::int64_t, int, int, mpfr_prec_t>;
  static std::mutex mu;
  static std::map<Key, Enclosure> cache;
  const mpfr_prec_t bits = working_precision();
  Key key{state.turns, state.eighths, index, bits};
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  Enclosure value = Enclosure::from_interval(rotation_basis_probability(state, index, bits));
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace(key, value);
  return value;
}

}  // namespace qcfa
