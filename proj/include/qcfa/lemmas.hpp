#pragma once

// Exhaustive and randomized checks of the number-theoretic facts behind the twin recognizer,
// and a certified sweep of the rotation bound sin^2(sqrt2 d pi) > 1/(2d^2+1).

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <unordered_map>
#include <string>
#include <vector>

#include "qcfa/errors.hpp"
#include "qcfa/five_adic.hpp"
#include "qcfa/numerics.hpp"
#include "qcfa/rotation.hpp"

namespace qcfa {

using IntegerVector3 = std::array<BigInt, 3>;

inline std::string to_string(const IntegerVector3& u) {
  return "(" + u[0].get_str() + "," + u[1].get_str() + "," + u[2].get_str() + ")";
}

inline BigInt f_value(const IntegerVector3& u) { return 4 * u[0] + 3 * u[1] + 3 * u[2]; }

namespace detail {
inline bool divisible_by_5(const BigInt& x) { return mpz_divisible_ui_p(x.get_mpz_t(), 5) != 0; }
}  // namespace detail

inline bool in_K(const IntegerVector3& u) {
  return !detail::divisible_by_5(u[0]) && !detail::divisible_by_5(f_value(u)) &&
         detail::divisible_by_5(BigInt(u[1] * u[2]));
}

/// Integer matrix-vector product with one of the generator matrices (no division by 5).
inline IntegerVector3 apply_integer(Generator g, const IntegerVector3& u) {
  const auto& m = generator_matrix(g);
  IntegerVector3 out{0, 0, 0};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) out[i] += m(i, j) * u[j];
  return out;
}

/// Parses a word over {A, B}. Lower case is accepted too.
inline std::vector<Generator> parse_matrix_word(const std::string& text) {
  std::vector<Generator> out;
  for (char c : text) {
    if (c == 'A' || c == 'a') out.push_back(Generator::A);
    else if (c == 'B' || c == 'b') out.push_back(Generator::B);
    else throw UsageError(std::string("matrix words use A and B only, got '") + c + "'");
  }
  return out;
}

struct LemmaReport {
  std::string lemma;
  long cap = 0;
  std::size_t instances_checked = 0;
  std::vector<std::string> counterexamples;
  std::optional<Rational> min_margin;
  /// Extra counts some checks report separately (for example the l = 0 form).
  std::vector<std::pair<std::string, std::size_t>> details;

  bool passed() const { return counterexamples.empty(); }
  void note_margin(const Rational& margin) {
    if (!min_margin || margin < *min_margin) min_margin = margin;
  }
  /// Throws CounterexampleError when anything failed.
  const LemmaReport& require() const {
    if (!passed()) throw CounterexampleError(lemma + ": " + counterexamples.front());
    return *this;
  }
};

inline constexpr long kDefaultLemmaCap = 10;
inline constexpr long kMaxLemmaCap = 16;

namespace detail {

inline void check_cap(long cap, long limit = kMaxLemmaCap) {
  if (cap < 0 || cap > limit) throw UsageError("word-length cap must lie in [0, " + std::to_string(limit) + "]");
}

struct Reached {
  std::string word;  // generators in application order
  IntegerVector3 u;
  unsigned long length = 0;
};

/// Integer images of (1,0,0) under all words of length exactly 0..max_len, breadth first.
inline std::vector<Reached> reachable_vectors(long max_len, Generator first = Generator::A,
                                              Generator second = Generator::B) {
  std::vector<Reached> all{{"", {1, 0, 0}, 0}};
  std::size_t level_begin = 0;
  for (long len = 1; len <= max_len; ++len) {
    const std::size_t level_end = all.size();
    for (std::size_t i = level_begin; i < level_end; ++i)
      for (Generator g : {first, second}) {
        const std::string w = all[i].word + to_string(g);
        all.push_back({w, apply_integer(g, all[i].u), all[i].length + 1});
      }
    level_begin = level_end;
  }
  return all;
}

}  // namespace detail

/// For every u in K reached from (1,0,0) by a word shorter than max_len, Au and Bu stay in K.
inline LemmaReport verify_k_closure(long max_len = kDefaultLemmaCap) {
  detail::check_cap(max_len);
  LemmaReport r{"k_closure", max_len, 0, {}, std::nullopt, {}};
  if (max_len == 0) return r;
  for (const auto& [word, u, len] : detail::reachable_vectors(max_len - 1)) {
    if (!in_K(u)) {
      r.counterexamples.push_back("reachable " + to_string(u) + " via \"" + word + "\" is outside K");
      continue;
    }
    for (Generator g : {Generator::A, Generator::B}) {
      const auto v = apply_integer(g, u);
      ++r.instances_checked;
      if (!in_K(v))
        r.counterexamples.push_back(std::string(to_string(g)) + to_string(u) + " = " + to_string(v) + " is outside K");
    }
  }
  return r;
}

namespace detail {

/// v with u = M v, when M^T u is divisible by 25 (M^T M = 25 I for both generators).
inline std::optional<IntegerVector3> integer_preimage(Generator g, const IntegerVector3& u) {
  const Generator inverse = g == Generator::A ? Generator::A_inverse : Generator::B_inverse;
  IntegerVector3 t = apply_integer(inverse, u);
  for (auto& x : t) {
    if (mpz_divisible_ui_p(x.get_mpz_t(), 25) == 0) return std::nullopt;
    x /= 25;
  }
  return t;
}

inline std::string key(const IntegerVector3& u) { return to_string(u); }

}  // namespace detail

/// A vector of the form Av = Bw is never in K. Checked on every coincidence among images of
/// reachable vectors, and on `random_trials` random u with entries in [-625, 625] together
/// with the same number of vectors u = Av built from random v, so the premise is actually hit.
inline LemmaReport verify_no_collision(long max_len = kDefaultLemmaCap, std::size_t random_trials = 100000,
                                       std::uint64_t seed = 1) {
  detail::check_cap(max_len);
  LemmaReport r{"no_collision", max_len, 0, {}, std::nullopt, {}};
  if (max_len == 0) return r;
  const auto reached = detail::reachable_vectors(max_len);
  std::unordered_map<std::string, std::string> images_a;
  for (const auto& [word, v, len] : reached) images_a.emplace(detail::key(apply_integer(Generator::A, v)), word);
  std::size_t coincidences = 0;
  for (const auto& [word, w, len] : reached) {
    const auto u = apply_integer(Generator::B, w);
    ++r.instances_checked;
    auto it = images_a.find(detail::key(u));
    if (it == images_a.end()) continue;
    ++coincidences;
    if (in_K(u))
      r.counterexamples.push_back("A(\"" + it->second + "\") = B(\"" + word + "\") = " + to_string(u) + " lies in K");
  }
  r.details.emplace_back("reachable_coincidences", coincidences);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<long> entry(-625, 625);
  std::size_t premise_hits = 0;
  auto check = [&](const IntegerVector3& u) {
    ++r.instances_checked;
    if (!detail::integer_preimage(Generator::A, u) || !detail::integer_preimage(Generator::B, u)) return;
    ++premise_hits;
    if (in_K(u)) r.counterexamples.push_back("random " + to_string(u) + " is in the image of A and B and lies in K");
  };
  for (std::size_t t = 0; t < random_trials; ++t) check({entry(rng), entry(rng), entry(rng)});
  for (std::size_t t = 0; t < random_trials; ++t)
    check(apply_integer(Generator::A, IntegerVector3{entry(rng), entry(rng), entry(rng)}));
  r.details.emplace_back("random_premise_hits", premise_hits);
  return r;
}

/// No nonempty word maps (1,0,0) onto the axis: X(1,0,0) != +-5^l (1,0,0) for l >= 1, for
/// words over {A, B} and over the transposes. The unitary form with l = 0, where
/// (X/5^|X|)(1,0,0) = +-(1,0,0), is tallied separately.
inline LemmaReport verify_basis_avoidance(long max_len = 8) {
  detail::check_cap(max_len);
  LemmaReport r{"basis_avoidance", max_len, 0, {}, std::nullopt, {}};
  std::size_t forward = 0, inverse = 0, hits_l_positive = 0, hits_l_zero = 0;
  for (int pass = 0; pass < 2; ++pass) {
    const bool inv = pass == 1;
    const auto reached = inv ? detail::reachable_vectors(max_len, Generator::A_inverse, Generator::B_inverse)
                             : detail::reachable_vectors(max_len);
    for (const auto& [word, u, len] : reached) {
      if (word.empty()) continue;
      ++r.instances_checked;
      ++(inv ? inverse : forward);
      if (u[1] != 0 || u[2] != 0) continue;
      const std::string where = std::string(inv ? "inverse" : "forward") + " word \"" + word + "\" sends (1,0,0) to " +
                                to_string(u);
      BigInt magnitude = abs(u[0]);
      unsigned long l = 0;
      while (magnitude > 1 && detail::divisible_by_5(magnitude)) {
        magnitude /= 5;
        ++l;
      }
      if (magnitude == 1 && l >= 1) {
        ++hits_l_positive;
        r.counterexamples.push_back(where + " = +-5^" + std::to_string(l) + " (1,0,0)");
      }
      // The integer image has norm 5^|X|; reaching +-5^|X| (1,0,0) is the normalised l = 0 case.
      if (abs(u[0]) == pow_ui(5, len)) {
        ++hits_l_zero;
        r.counterexamples.push_back(where + ", the unitary image is +-(1,0,0)");
      }
    }
  }
  r.details.emplace_back("forward_words", forward);
  r.details.emplace_back("inverse_words", inverse);
  r.details.emplace_back("hits_l_at_least_1", hits_l_positive);
  r.details.emplace_back("hits_l_0", hits_l_zero);
  return r;
}

inline constexpr std::size_t kXyQueryCap = 64;

/// Off-axis mass u[2]^2 + u[3]^2 of u = (Y_1^T/5)...(Y_m^T/5)(X_n/5)...(X_1/5)(1,0,0).
inline Rational xy_gap(const std::vector<Generator>& x, const std::vector<Generator>& y) {
  if (x.size() + y.size() > kXyQueryCap)
    throw UsageError("xy_gap supports n+m <= " + std::to_string(kXyQueryCap));
  FiveAdicVector v = FiveAdicVector::unit(3, 0);
  for (Generator g : x) v = five_adic_apply(g, v);
  for (auto it = y.rbegin(); it != y.rend(); ++it)
    v = five_adic_apply(*it == Generator::A ? Generator::A_inverse : Generator::B_inverse, v);
  return v.component_square(1) + v.component_square(2);
}

inline Rational xy_gap(const std::string& x, const std::string& y) {
  return xy_gap(parse_matrix_word(x), parse_matrix_word(y));
}

/// All pairs of words with n+m <= cap: the gap vanishes exactly for equal words and
/// otherwise exceeds 5^-(n+m). min_margin is the smallest gap - 5^-(n+m) over unequal pairs.
inline LemmaReport verify_xy(long cap = 8) {
  detail::check_cap(cap, 12);
  LemmaReport r{"xy_gap", cap, 0, {}, std::nullopt, {}};
  std::vector<std::vector<std::string>> by_length(static_cast<std::size_t>(cap) + 1);
  by_length[0].push_back("");
  for (long len = 1; len <= cap; ++len)
    for (const auto& w : by_length[len - 1])
      for (char c : std::string("AB")) by_length[len].push_back(w + c);
  for (long n = 0; n <= cap; ++n)
    for (long m = 0; n + m <= cap; ++m) {
      const Rational bound = make_rational(1, pow_ui(5, static_cast<unsigned long>(n + m)));
      for (const auto& x : by_length[n])
        for (const auto& y : by_length[m]) {
          ++r.instances_checked;
          const Rational gap = xy_gap(x, y);
          if (x == y) {
            if (gap != 0) r.counterexamples.push_back("equal words \"" + x + "\" leave gap " + to_string(gap));
            continue;
          }
          if (!(gap > bound))
            r.counterexamples.push_back("\"" + x + "\" vs \"" + y + "\": gap " + to_string(gap) + " <= " + to_string(bound));
          r.note_margin(gap - bound);
        }
    }
  return r;
}

/// Certifies sin^2(sqrt2 d pi) > 1/(2d^2+1) for d = 1..d_max, escalating precision as needed.
/// min_margin is a rigorous lower bound on the smallest difference.
inline LemmaReport rotation_bound_audit(long d_max = 100) {
  if (d_max < 1) throw UsageError("rotation audit needs d_max >= 1");
  LemmaReport r{"rotation_bound", d_max, 0, {}, std::nullopt, {}};
  for (long d = 1; d <= d_max; ++d) {
    const Rational bound = make_rational(1, BigInt(2 * d * d + 1));
    Rational lower;
    const Certainty c = certify_with_escalation(
        [&](mpfr_prec_t bits) {
          const Enclosure e = Enclosure::from_interval(rotation_reject_probability(d, bits));
          lower = e.lo();
          return certify_greater(e, bound);
        },
        "sin^2(sqrt2*" + std::to_string(d) + "*pi) > " + to_string(bound));
    ++r.instances_checked;
    if (c == Certainty::no)
      r.counterexamples.push_back("d=" + std::to_string(d) + ": sin^2 value lies at or below " + to_string(bound));
    else
      r.note_margin(lower - bound);
  }
  return r;
}

}  // namespace qcfa
