#pragma once

// Classical side of the succinctness comparisons: explicit DFAs, fooling-set certificates,
// the equality protocol audit, the absorbing walk and the two-way simulation bounds.

#include <cmath>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qcfa/dfa.hpp"
#include "qcfa/errors.hpp"
#include "qcfa/machines.hpp"
#include "qcfa/numerics.hpp"

namespace qcfa {

/// The (2m+2)-state DFA for the promise problem A^eq(m): a counting chain p0..pm over a,
/// a chain q1..qm over b, and a sink r.
inline Dfa build_figure_dfa(long m) {
  if (m < 1) throw UsageError("figure DFA needs m >= 1");
  Dfa d;
  d.alphabet = "ab";
  std::vector<std::size_t> p, q;
  for (long i = 0; i <= m; ++i) p.push_back(d.add_state("p" + std::to_string(i)));
  q.push_back(0);  // q0 is unused, keeps indices aligned with the state names
  for (long i = 1; i <= m; ++i) q.push_back(d.add_state("q" + std::to_string(i), i == m));
  const std::size_t r = d.add_state("r");
  for (long i = 0; i < m; ++i) {
    d.set(p[i], 'a', p[i + 1]);
    d.set(p[i], 'b', r);
  }
  d.set(p[m], 'a', r);
  d.set(p[m], 'b', q[1]);
  for (long i = 1; i <= m; ++i) {
    d.set(q[i], 'a', r);
    d.set(q[i], 'b', i < m ? q[i + 1] : r);
  }
  d.set(r, 'a', r);
  d.set(r, 'b', r);
  d.start = p[0];
  d.check_total();
  return d;
}

inline constexpr long kTwinDfaCap = 5;

/// Trie automaton for {wcw : w in {a,b}^m}. Before the c it remembers the prefix read so
/// far; after it, the part of w that still has to be matched.
inline Dfa build_twin_dfa(long m) {
  if (m < 1 || m > kTwinDfaCap)
    throw UsageError("twin DFA is limited to 1 <= m <= " + std::to_string(kTwinDfaCap));
  Dfa d;
  d.alphabet = "abc";
  const std::size_t dead = d.add_state("dead");
  // prefix[len][bits]: the prefix of length len whose letters are the low bits (a = 0).
  std::vector<std::vector<std::size_t>> prefix(m + 1);
  for (long len = 0; len <= m; ++len)
    for (unsigned long bits = 0; bits < (1ul << len); ++bits) {
      std::string name = "<";
      for (long i = 0; i < len; ++i) name += (bits >> (len - 1 - i)) & 1 ? 'b' : 'a';
      prefix[len].push_back(d.add_state(name + ">"));
    }
  for (auto a = 0ul; a < 3; ++a) d.set(dead, d.alphabet[a], dead);
  for (long len = 0; len <= m; ++len)
    for (unsigned long bits = 0; bits < (1ul << len); ++bits) {
      const auto s = prefix[len][bits];
      if (len < m) {
        d.set(s, 'a', prefix[len + 1][bits << 1]);
        d.set(s, 'b', prefix[len + 1][(bits << 1) | 1]);
        d.set(s, 'c', dead);
        continue;
      }
      d.set(s, 'a', dead);
      d.set(s, 'b', dead);
      // After the c: a chain matching w letter by letter.
      const std::string w = d.states[s].substr(1, static_cast<std::size_t>(m));
      std::size_t prev = s;
      char via = 'c';
      for (long j = 0; j <= m; ++j) {
        const auto next = d.add_state(w + "c" + w.substr(0, static_cast<std::size_t>(j)), j == m);
        d.set(prev, via, next);
        for (char other : std::string("abc"))
          if (other != via) d.set(prev, other, dead);
        prev = next;
        if (j < m) via = w[static_cast<std::size_t>(j)];
      }
      for (char c : std::string("abc")) d.set(prev, c, dead);
    }
  d.start = prefix[0][0];
  d.check_total();
  return d;
}

struct DistinguishingWitness {
  std::string left;
  std::string right;
  std::string extension;  // left+extension and right+extension get different answers
  bool left_accepted = false;
};

struct NerodeCertificate {
  std::string family;
  long m = 0;
  std::vector<std::string> strings;
  std::vector<DistinguishingWitness> witnesses;
  /// The extra state forced by a^m b^(m+1), which no string of the set can reach.
  std::optional<std::string> unreachable_word;
  std::size_t implied_states = 0;
  std::vector<std::string> proof_lines() const {
    std::vector<std::string> out;
    out.push_back(family + "(m=" + std::to_string(m) + "): " + std::to_string(strings.size()) +
                  " pairwise distinguishable prefixes");
    for (const auto& w : witnesses)
      out.push_back("  \"" + w.left + "\" vs \"" + w.right + "\" by extension \"" + w.extension + "\" (" +
                    (w.left_accepted ? "first" : "second") + " completion is a yes-instance)");
    if (unreachable_word)
      out.push_back("  every string above has an accepting completion, \"" + *unreachable_word +
                    "\" has none, so a total DFA needs one more state");
    out.push_back("  => at least " + std::to_string(implied_states) + " states");
    return out;
  }
};

namespace detail {

inline std::string repeat(char c, long n) { return std::string(static_cast<std::size_t>(n), c); }

/// All words over `alphabet` of length exactly `len`, lexicographic.
inline std::vector<std::string> words_of_length(const std::string& alphabet, std::size_t len) {
  std::vector<std::string> out{""};
  for (std::size_t i = 0; i < len; ++i) {
    std::vector<std::string> next;
    next.reserve(out.size() * alphabet.size());
    for (const auto& w : out)
      for (char c : alphabet) next.push_back(w + c);
    out = std::move(next);
  }
  return out;
}

/// Shortest extension z such that both u+z and v+z lie inside the promise and exactly one
/// of them is a yes-instance.
inline std::optional<DistinguishingWitness> find_witness(PromiseFamily f, long m, const std::string& u,
                                                         const std::string& v, std::size_t max_len) {
  const std::string alphabet = promise_alphabet(f);
  for (std::size_t len = 0; len <= max_len; ++len)
    for (const auto& z : words_of_length(alphabet, len)) {
      const auto cu = classify({f, m, u + z});
      const auto cv = classify({f, m, v + z});
      if (cu == Classification::outside || cv == Classification::outside || cu == cv) continue;
      return DistinguishingWitness{u, v, z, cu == Classification::yes};
    }
  return std::nullopt;
}

}  // namespace detail

/// Fooling-set certificate. For aeq the set is {a^i} u {a^m b^j} plus the dead word
/// a^m b^(m+1); for twin it is {a,b}^m separated by the suffix c.x.
inline NerodeCertificate nerode_distinguishability(const std::string& family, long m) {
  NerodeCertificate cert;
  cert.family = family;
  cert.m = m;
  if (family == "aeq") {
    if (m < 1 || m > 12) throw UsageError("aeq certificate needs 1 <= m <= 12");
    for (long i = 0; i <= m; ++i) cert.strings.push_back(detail::repeat('a', i));
    for (long j = 1; j <= m; ++j) cert.strings.push_back(detail::repeat('a', m) + detail::repeat('b', j));
    const std::size_t max_len = static_cast<std::size_t>(2 * m + 1);
    for (std::size_t i = 0; i < cert.strings.size(); ++i)
      for (std::size_t j = i + 1; j < cert.strings.size(); ++j) {
        auto w = detail::find_witness(PromiseFamily::aeq, m, cert.strings[i], cert.strings[j], max_len);
        if (!w)
          throw CertificationError("no promise-consistent extension separates \"" + cert.strings[i] + "\" and \"" +
                                   cert.strings[j] + "\"");
        cert.witnesses.push_back(*w);
      }
    // Each member of the set completes to a^m b^m; the dead word only has no-instance completions.
    const std::string dead = detail::repeat('a', m) + detail::repeat('b', m + 1);
    const std::string yes = detail::repeat('a', m) + detail::repeat('b', m);
    for (const auto& s : cert.strings)
      if (yes.compare(0, s.size(), s) != 0)
        throw CertificationError("\"" + s + "\" is not a prefix of the yes-instance");
    cert.unreachable_word = dead;
    cert.implied_states = cert.strings.size() + 1;
    return cert;
  }
  if (family == "twin") {
    if (m < 1 || m > 10) throw UsageError("twin certificate needs 1 <= m <= 10");
    cert.strings = detail::words_of_length("ab", static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < cert.strings.size(); ++i)
      for (std::size_t j = i + 1; j < cert.strings.size(); ++j) {
        const auto& x = cert.strings[i];
        const auto& y = cert.strings[j];
        const std::string z = "c" + x;
        const bool ok = classify({PromiseFamily::twin_m, m, x + z}) == Classification::yes &&
                        classify({PromiseFamily::twin_m, m, y + z}) == Classification::no;
        if (!ok) throw CertificationError("suffix \"" + z + "\" fails to separate \"" + x + "\" and \"" + y + "\"");
        cert.witnesses.push_back(DistinguishingWitness{x, y, z, true});
      }
    cert.implied_states = cert.strings.size();
    return cert;
  }
  throw UsageError("distinguishability certificates exist for families aeq and twin, not '" + family + "'");
}

struct ProtocolAudit {
  long m = 0;
  std::size_t dfa_states = 0;
  std::size_t pairs_checked = 0;
  std::size_t distinct_messages = 0;  // states Alice actually sends
  unsigned cost_bits = 0;             // ceil(log2 |S|) + 1
  BigInt implied_state_bound;         // 2^m, from D(EQ) = m + 1 <= cost
};

/// Alice reads x, sends the DFA state; Bob continues on c.y and announces the verdict.
/// A DFA recognising the twin language makes this a correct protocol for EQ on m bits.
inline ProtocolAudit eq_protocol_audit(const Dfa& dfa, long m) {
  if (m < 1 || m > 12) throw UsageError("protocol audit needs 1 <= m <= 12");
  dfa.check_total();
  ProtocolAudit out;
  out.m = m;
  out.dfa_states = dfa.size();
  const auto words = detail::words_of_length("ab", static_cast<std::size_t>(m));
  std::set<std::size_t> messages;
  for (const auto& x : words) {
    const std::size_t message = dfa.run(x);
    messages.insert(message);
    for (const auto& y : words) {
      const bool bob = dfa.accepting[dfa.run("c" + y, message)];
      if (bob != (x == y))
        throw CounterexampleError("protocol says EQ(" + x + ", " + y + ") = " + (bob ? "1" : "0") +
                                  "; the DFA does not recognise the twin language");
      ++out.pairs_checked;
    }
  }
  out.distinct_messages = messages.size();
  unsigned bits = 0;
  while ((std::size_t{1} << bits) < dfa.size()) ++bits;
  out.cost_bits = bits + 1;
  out.implied_state_bound = pow_ui(2, static_cast<unsigned long>(m));
  return out;
}

/// Probability that the symmetric +-1 walk started at 1 reaches n+1 before 0, by an exact
/// tridiagonal solve of x_i = (x_{i-1} + x_{i+1}) / 2 with x_0 = 0 and x_{n+1} = 1.
inline Rational random_walk_absorption(long n) {
  if (n < 1) throw UsageError("walk length must be >= 1");
  // Unknowns x_1..x_n, row i: -x_{i-1}/2 + x_i - x_{i+1}/2 = rhs_i. Thomas algorithm.
  const Rational half(1, 2);
  std::vector<Rational> c_prime(static_cast<std::size_t>(n)), d_prime(static_cast<std::size_t>(n));
  for (long i = 0; i < n; ++i) {
    const Rational rhs = i == n - 1 ? half : Rational(0);
    const Rational sub = i == 0 ? Rational(0) : Rational(-half);
    const Rational denom = Rational(1) - sub * (i == 0 ? Rational(0) : c_prime[i - 1]);
    c_prime[i] = (i == n - 1 ? Rational(0) : Rational(-half)) / denom;
    d_prime[i] = (rhs - sub * (i == 0 ? Rational(0) : d_prime[i - 1])) / denom;
    c_prime[i].canonicalize();
    d_prime[i].canonicalize();
  }
  std::vector<Rational> x(static_cast<std::size_t>(n));
  x[n - 1] = d_prime[n - 1];
  for (long i = n - 2; i >= 0; --i) {
    x[i] = d_prime[i] - c_prime[i] * x[i + 1];
    x[i].canonicalize();
  }
  return x[0];
}

enum class TwoWayModel { dfa2, nfa2, pfa2 };

inline const char* to_string(TwoWayModel model) {
  switch (model) {
    case TwoWayModel::dfa2: return "2DFA";
    case TwoWayModel::nfa2: return "2NFA";
    case TwoWayModel::pfa2: return "2PFA";
  }
  return "?";
}

inline TwoWayModel parse_two_way_model(const std::string& s) {
  if (s == "2DFA" || s == "2dfa") return TwoWayModel::dfa2;
  if (s == "2NFA" || s == "2nfa") return TwoWayModel::nfa2;
  if (s == "2PFA" || s == "2pfa") return TwoWayModel::pfa2;
  throw UsageError("unknown model '" + s + "' (expected 2DFA, 2NFA or 2PFA)");
}

/// Size of the one-way DFA produced from an n-state two-way machine of the given kind.
inline BigInt simulation_size(TwoWayModel model, unsigned long n, unsigned long b = 1) {
  switch (model) {
    case TwoWayModel::dfa2: return pow_ui(n + 1, n + 1);
    case TwoWayModel::nfa2: return pow_ui(2, (n - 1) * (n - 1) + n);
    case TwoWayModel::pfa2: return pow_ui(n, b * n * n);
  }
  return 0;
}

inline std::string simulation_formula(TwoWayModel model, unsigned long b) {
  switch (model) {
    case TwoWayModel::dfa2: return "(n+1)^(n+1)";
    case TwoWayModel::nfa2: return "2^((n-1)^2+n)";
    case TwoWayModel::pfa2: return "n^(" + std::to_string(b) + "*n^2)";
  }
  return "?";
}

struct BoundReport {
  TwoWayModel model = TwoWayModel::dfa2;
  unsigned long b = 1;
  BigInt dfa_bound;
  unsigned long n = 0;
  BigInt size_at_n;
  BigInt size_below;  // at n-1; zero when n = 1
  std::vector<std::string> trace;
};

/// Smallest n whose simulating DFA could reach `dfa_bound` states.
inline BoundReport lower_bound_calculator(const BigInt& dfa_bound, TwoWayModel model, unsigned long b = 1) {
  if (dfa_bound < 2) throw UsageError("DFA lower bound must be >= 2, got " + dfa_bound.get_str());
  if (b < 1) throw UsageError("2PFA constant b must be >= 1");
  BoundReport r;
  r.model = model;
  r.b = b;
  r.dfa_bound = dfa_bound;
  const std::string formula = simulation_formula(model, b);
  BigInt previous = 0;
  for (unsigned long n = 1;; ++n) {
    const BigInt size = simulation_size(model, n, b);
    r.trace.push_back("n=" + std::to_string(n) + ": " + formula + " = " + size.get_str() +
                      (size >= dfa_bound ? " >= " : " < ") + dfa_bound.get_str());
    if (size >= dfa_bound) {
      r.n = n;
      r.size_at_n = size;
      r.size_below = previous;
      return r;
    }
    previous = size;
  }
}

/// One cell of a bound table: the calculator's n for a family and the closed-form floor.
struct FloorCheck {
  std::string family;
  BigInt m;
  BoundReport report;
  std::string floor_text;
  double floor_value = 0.0;
  bool meets_floor = false;       // n >= floor, decided in integers
  bool strictly_exceeds = false;  // n > floor
};

/// Family lower bounds on one-way DFAs: 2m+2 for aeq (m >= 2) and 2^m for twin.
inline BigInt family_dfa_bound(const std::string& family, const BigInt& m) {
  if (family == "aeq") return 2 * m + 2;
  if (family == "twin") {
    if (m > 4096) throw UsageError("twin bound table supports m <= 4096");
    return pow_ui(2, m.get_ui());
  }
  throw UsageError("bound tables exist for families aeq and twin, not '" + family + "'");
}

inline FloorCheck floor_check(const std::string& family, const BigInt& m, TwoWayModel model, unsigned long b = 1) {
  if (m < 1) throw UsageError("bound tables need m >= 1");
  FloorCheck f;
  f.family = family;
  f.m = m;
  f.report = lower_bound_calculator(family_dfa_bound(family, m), model, b);
  const unsigned long n = f.report.n;
  const bool cube = model == TwoWayModel::pfa2;
  // power = n^2, or b*n^3 for the probabilistic floor.
  const unsigned long power = cube ? b * n * n * n : n * n;
  const std::string bs = std::to_string(b);
  if (family == "aeq") {
    // n >= sqrt(log m) iff 2^(n^2) >= m; the cube root case likewise with b*n^3.
    const BigInt lhs = pow_ui(2, power);
    f.meets_floor = lhs >= m;
    f.strictly_exceeds = lhs > m;
    const double lg = std::log2(m.get_d());
    f.floor_text = cube ? "cbrt(log m / " + bs + ")" : "sqrt(log m)";
    f.floor_value = cube ? std::cbrt(lg / static_cast<double>(b)) : std::sqrt(lg);
  } else {
    f.meets_floor = BigInt(power) >= m;
    f.strictly_exceeds = BigInt(power) > m;
    f.floor_text = cube ? "cbrt(m / " + bs + ")" : "sqrt(m)";
    f.floor_value = cube ? std::cbrt(m.get_d() / static_cast<double>(b)) : std::sqrt(m.get_d());
  }
  return f;
}

}  // namespace qcfa
