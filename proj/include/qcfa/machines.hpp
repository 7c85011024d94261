#pragma once

// Builders for the concrete recognisers, the sequential intersection combinator,
// and promise classification.

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "qcfa/builder.hpp"
#include "qcfa/engine.hpp"

namespace qcfa {

/// A restart configuration, addressed by names so it survives composition.
struct MarkerSpec {
  std::string state;
  std::size_t head = 0;
  std::size_t quantum = 0;  // global basis index
};

struct MachineCard {
  QcfaMachine machine;
  std::string family;
  long m = 0;
  Rational eps;
  std::vector<unsigned> coin_flips;  // k of each rotation/twin component, in build order
  std::size_t qs = 0;
  std::size_t cs = 0;
  std::optional<std::size_t> remark_cs;  // QS/CS accounting of the composition remark
  std::string runtime_class;
  std::vector<MarkerSpec> markers;

  std::vector<Config> restart_configs() const {
    std::vector<Config> out;
    for (const auto& mk : markers) {
      auto [b, local] = machine.locate(mk.quantum);
      out.push_back(Config{machine.state(mk.state), mk.head, Amplitude::basis(machine.blocks[b], b, local)});
    }
    return out;
  }
};

namespace detail {

inline void check_eps(const Rational& eps) {
  if (eps <= 0 || eps >= Rational(1, 2)) throw UsageError("epsilon must lie strictly between 0 and 1/2");
}
inline void check_m(long m) {
  if (m < 1) throw UsageError("m must be at least 1");
}

inline MachineCard finish_card(QcfaMachine machine, std::string family, long m, Rational eps,
                               std::vector<unsigned> coins, std::string runtime, std::vector<MarkerSpec> markers) {
  validate(machine);
  MachineCard c;
  c.qs = machine.quantum_states.size();
  c.cs = machine.classical_states.size();
  c.machine = std::move(machine);
  c.family = std::move(family);
  c.m = m;
  c.eps = std::move(eps);
  c.coin_flips = std::move(coins);
  c.runtime_class = std::move(runtime);
  c.markers = std::move(markers);
  return c;
}

/// k coin flips with a Hadamard on (0, 1) of `block` and a {q0} / rest measurement.
/// All heads continues with `on_heads`; any tail goes to `on_tail`.
inline void add_coins(MachineBuilder& b, const std::string& prefix, unsigned k, const std::string& symbols,
                      std::size_t block, std::size_t q0_global, std::size_t qn, const std::string& on_heads,
                      int heads_move, const std::string& on_tail) {
  std::vector<std::size_t> rest;
  for (std::size_t g = 0; g < qn; ++g)
    if (g != q0_global) rest.push_back(g);
  const Measurement coin = basis_measurement({{q0_global}, rest});
  for (unsigned i = 1; i <= k; ++i) {
    const std::string h = prefix + "_h" + std::to_string(i), me = prefix + "_m" + std::to_string(i);
    b.unitary(h, symbols, Hadamard{block, 0, 1}, me, 0);
    const bool last = i == k;
    b.measure(me, symbols, coin,
              {{last ? on_heads : prefix + "_h" + std::to_string(i + 1), last ? heads_move : 0}, {on_tail, 0}});
  }
}

/// Moves left to the left endmarker, measures the rotation qubit and restores |q0>.
inline void add_rotation_reset(MachineBuilder& b, const std::string& restart) {
  b.identity("reset", b.sigma_and_right(), "reset", -1);
  b.measure("reset", "<", basis_measurement({{0}, {1}}), {{restart, 0}, {"reset_flip", 0}});
  b.unitary("reset_flip", "<", Reflect{0, 0, 2}, restart, 0);
}

/// Steps 2 to 5 of the length test, shared by the length and equality checkers: from
/// `scan` at the first symbol, apply `per_symbol` rotations, measure at the right endmarker,
/// then two random walks and k coin flips.
inline void add_rotation_round(MachineBuilder& b, const std::vector<std::pair<char, long>>& per_symbol, unsigned k) {
  for (const auto& [c, turns] : per_symbol) b.unitary("scan", std::string(1, c), Rotate{0, turns, 0}, "scan", 1);
  b.measure("scan", ">", basis_measurement({{0}, {1}}), {{"rewind1", -1}, {"reject", 0}});
  for (int w = 1; w <= 2; ++w) {
    const std::string rewind = "rewind" + std::to_string(w), h = "walk" + std::to_string(w) + "_h",
                      me = "walk" + std::to_string(w) + "_m";
    b.identity(rewind, b.sigma_and_right(), rewind, -1);
    b.identity(rewind, "<", h, 1);
    b.unitary(h, b.alphabet(), Hadamard{0, 0, 1}, me, 0);
    b.measure(me, b.alphabet(), basis_measurement({{0}, {1}}), {{h, -1}, {h, 1}});
    b.identity(h, "<", "reset", 0);
  }
  b.identity("walk1_h", ">", "rewind2", -1);
  b.identity("walk2_h", ">", "coin_h1", 0);
  add_coins(b, "coin", k, ">", 0, 0, 2, "accept", 0, "reset");
  add_rotation_reset(b, "rot_start");
}

}  // namespace detail

/// Coin flips used by the length and equality checkers: 1 + ceil(log2(1/eps)).
inline unsigned rotation_coin_flips(const Rational& eps) { return 1 + ceil_log2_inverse(eps); }

/// Coin flips per cell of the twin recogniser: max(3, ceil(log2(1/eps))), 3 = ceil(log2 5).
inline unsigned twin_coin_flips(const Rational& eps) { return std::max(3u, ceil_log2_inverse(eps)); }

/// Promise A(m): accept |w| = m with certainty, reject |w| != m, |w| >= m/2 with probability >= 1 - eps.
inline MachineCard build_length_checker(long m, const Rational& eps, const std::string& alphabet = "ab") {
  detail::check_m(m);
  detail::check_eps(eps);
  const unsigned k = rotation_coin_flips(eps);
  MachineBuilder b("length(m=" + std::to_string(m) + ",eps=" + to_string(eps) + ")", alphabet);
  b.add_block(BlockKind::rotation, 2);
  b.state("rot_start");
  b.accepting("accept");
  b.rejecting("reject");
  b.unitary("rot_start", "<", Rotate{0, m, 0}, "scan", 1);
  std::vector<std::pair<char, long>> per;
  for (char c : alphabet) per.emplace_back(c, -1);
  detail::add_rotation_round(b, per, k);
  return detail::finish_card(b.finish("rot_start", 0, "reject"), "length", m, eps, {k}, "O(|w|^4)",
                             {MarkerSpec{"rot_start", 0, 0}});
}

/// L^eq = {a^n b^n}: classical a*b* check, then +alpha per a and -alpha per b.
inline MachineCard build_eq_checker(const Rational& eps) {
  detail::check_eps(eps);
  const unsigned k = rotation_coin_flips(eps);
  MachineBuilder b("eq(eps=" + to_string(eps) + ")", "ab");
  b.add_block(BlockKind::rotation, 2);
  b.state("chk_a");
  b.accepting("accept");
  b.rejecting("reject");
  b.identity("chk_a", "<a", "chk_a", 1);
  b.identity("chk_a", "b", "chk_b", 1);
  b.identity("chk_a", ">", "chk_back", -1);
  b.identity("chk_b", "b", "chk_b", 1);
  b.identity("chk_b", "a", "reject", 0);
  b.identity("chk_b", ">", "chk_back", -1);
  b.identity("chk_back", "ab", "chk_back", -1);
  b.identity("chk_back", "<", "rot_start", 0);
  b.identity("rot_start", "<", "scan", 1);
  detail::add_rotation_round(b, {{'a', 1}, {'b', -1}}, k);
  return detail::finish_card(b.finish("chk_a", 0, "reject"), "eq", 0, eps, {k}, "O(|w|^4)",
                             {MarkerSpec{"rot_start", 0, 0}});
}

/// L^twin = {wcw}: forward pass with A/5, B/5 over x, backward pass with the inverses over y,
/// measure at c, then k coin flips on every input cell.
inline MachineCard build_twin_recognizer(const Rational& eps) {
  detail::check_eps(eps);
  const unsigned k = twin_coin_flips(eps);
  MachineBuilder b("twin(eps=" + to_string(eps) + ")", "abc");
  b.add_block(BlockKind::five_adic, 3);
  b.state("fc_x");
  b.accepting("accept");
  b.rejecting("reject");
  b.identity("fc_x", "<ab", "fc_x", 1);
  b.identity("fc_x", "c", "fc_y", 1);
  b.identity("fc_x", ">", "reject", 0);
  b.identity("fc_y", "ab", "fc_y", 1);
  b.identity("fc_y", "c", "reject", 0);
  b.identity("fc_y", ">", "reset", -1);

  b.identity("reset", "abc>", "reset", -1);
  b.measure("reset", "<", basis_measurement({{0}, {1}, {2}}), {{"start", 0}, {"reset_swap1", 0}, {"reset_swap2", 0}});
  b.unitary("reset_swap1", "<", BlockSwap{0, 1}, "start", 0);
  b.unitary("reset_swap2", "<", BlockSwap{0, 2}, "start", 0);

  b.identity("start", "<", "fwd", 1);
  b.unitary("fwd", "a", ScaledMatrix{0, generator_matrix(Generator::A), 5}, "fwd", 1);
  b.unitary("fwd", "b", ScaledMatrix{0, generator_matrix(Generator::B), 5}, "fwd", 1);
  b.identity("fwd", "c", "seek", 1);
  b.identity("seek", "ab", "seek", 1);
  b.identity("seek", ">", "back", -1);
  b.unitary("back", "a", ScaledMatrix{0, generator_matrix(Generator::A_inverse), 5}, "back", -1);
  b.unitary("back", "b", ScaledMatrix{0, generator_matrix(Generator::B_inverse), 5}, "back", -1);
  b.measure("back", "c", basis_measurement({{0}, {1, 2}}), {{"seek2", 1}, {"reject", 0}});
  b.identity("seek2", "ab", "seek2", 1);
  b.identity("seek2", ">", "coin_h1", -1);
  detail::add_coins(b, "coin", k, "abc", 0, 0, 3, "coin_h1", -1, "reset");
  b.identity("coin_h1", "<", "accept", 0);
  return detail::finish_card(b.finish("fc_x", 0, "reject"), "twin", 0, eps, {k}, "O(|w| 2^{k|w|})",
                             {MarkerSpec{"start", 0, 0}});
}

/// L(m) = {w : |w| = m} without a promise: the rotation test, then k coin flips on each of the
/// |w| + 1 cells from the right endmarker down to the first symbol. k starts at
/// 1 + ceil(log2(1/eps)) and grows until every length in the certification range passes.
inline MachineCard build_exact_length_checker(long m, const Rational& eps, const std::string& alphabet = "ab",
                                              unsigned k_cap = 64) {
  detail::check_m(m);
  detail::check_eps(eps);
  const long horizon = std::max(2 * m + 8, 24L);
  for (unsigned k = rotation_coin_flips(eps); k <= k_cap; ++k) {
    MachineBuilder b("exact_length(m=" + std::to_string(m) + ",eps=" + to_string(eps) + ")", alphabet);
    b.add_block(BlockKind::rotation, 2);
    b.state("rot_start");
    b.accepting("accept");
    b.rejecting("reject");
    b.unitary("rot_start", "<", Rotate{0, m, 0}, "scan", 1);
    for (char c : alphabet) b.unitary("scan", std::string(1, c), Rotate{0, -1, 0}, "scan", 1);
    b.measure("scan", ">", basis_measurement({{0}, {1}}), {{"coin_h1", 0}, {"reject", 0}});
    detail::add_coins(b, "coin", k, b.sigma_and_right(), 0, 0, 2, "coin_h1", -1, "reset");
    b.identity("coin_h1", "<", "accept", 0);
    detail::add_rotation_reset(b, "rot_start");
    MachineCard card = detail::finish_card(b.finish("rot_start", 0, "reject"), "exact_length", m, eps, {k},
                                           "O(|w| 2^{k|w|})", {MarkerSpec{"rot_start", 0, 0}});

    bool ok = true;
    const Rational target = 1 - eps;
    for (long n = 0; n <= horizon && ok; ++n) {
      if (n == m) continue;
      const std::string word(static_cast<std::size_t>(n), alphabet.at(0));
      auto c = certify_with_escalation(
          [&](mpfr_prec_t) {
            return certify_greater(closed_form_total(round_analysis(card.machine, word, card.restart_configs()[0])).reject,
                                   target);
          },
          "exact-length reject bound at |w| = " + std::to_string(n));
      ok = c == Certainty::yes;
    }
    if (ok) return card;
  }
  throw CertificationError("exact-length checker: no k up to " + std::to_string(k_cap) + " certifies the error bound");
}

namespace detail {

inline std::vector<std::size_t> shifted(const std::vector<std::size_t>& v, std::size_t by) {
  std::vector<std::size_t> out;
  for (auto x : v) out.push_back(x + by);
  return out;
}

inline Unitary shift_unitary(const Unitary& u, std::size_t block_shift, std::size_t index_shift) {
  return std::visit(
      [&](const auto& op) -> Unitary {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Identity>) {
          return op;
        } else if constexpr (std::is_same_v<T, BlockSwap>) {
          return BlockSwap{op.i + index_shift, op.j + index_shift};
        } else {
          T copy = op;
          copy.block += block_shift;
          return copy;
        }
      },
      u);
}

}  // namespace detail

/// Sequential composition: run the first machine; when it accepts, return the head to the
/// left endmarker, move the quantum state into the second machine's register, and run the
/// second machine. Any rejection rejects. One-sided error budgets combine to e1 + e2 - e1 e2.
inline MachineCard intersect(const MachineCard& c1, const MachineCard& c2) {
  const QcfaMachine& m1 = c1.machine;
  const QcfaMachine& m2 = c2.machine;
  if (m1.alphabet != m2.alphabet) throw UsageError("intersect: machines have different input alphabets");
  const std::size_t qs1 = m1.quantum_dimension(), qs2 = m2.quantum_dimension();
  const std::size_t blocks1 = m1.blocks.size();

  MachineBuilder b("(" + m1.id + ")&(" + m2.id + ")", m1.alphabet);
  for (const auto& blk : m1.blocks) b.add_block(blk.kind, blk.dim);
  for (const auto& blk : m2.blocks) b.add_block(blk.kind, blk.dim);
  std::vector<std::string> qnames;
  for (const auto& q : m1.quantum_states) qnames.push_back("1." + q);
  for (const auto& q : m2.quantum_states) qnames.push_back("2." + q);
  b.name_quantum_states(qnames);

  b.state("1." + m1.classical_states[m1.initial_classical]);
  b.accepting("accept");
  b.rejecting("reject");

  auto copy = [&](const QcfaMachine& src, const std::string& prefix, std::size_t block_shift, std::size_t index_shift,
                  std::size_t other_lo, std::size_t other_hi, const std::string& on_accept) {
    for (std::size_t s = 0; s < src.classical_states.size(); ++s) {
      if (src.halt(s) != Halt::none) continue;
      const std::size_t from = b.state(prefix + src.classical_states[s]);
      for (std::size_t sym = 0; sym < src.tape_width(); ++sym) {
        const auto& t = src.transition(s, sym);
        Transition out;
        if (auto* u = std::get_if<Unitary>(&t->op)) {
          out.op = detail::shift_unitary(*u, block_shift, index_shift);
        } else {
          Measurement meas = std::get<Measurement>(t->op);
          for (auto& o : meas.outcomes) o.basis = detail::shifted(o.basis, index_shift);
          for (std::size_t g = other_lo; g < other_hi; ++g) meas.outcomes[0].basis.push_back(g);
          out.op = meas;
        }
        for (const auto& tg : t->targets) {
          std::string to;
          switch (src.halt(tg.state)) {
            case Halt::accept: to = on_accept; break;
            case Halt::reject: to = "reject"; break;
            case Halt::none: to = prefix + src.classical_states[tg.state]; break;
          }
          out.targets.push_back(Target{b.state(to), tg.move});
        }
        b.set(from, sym, std::move(out));
      }
    }
  };
  copy(m1, "1.", 0, 0, qs1, qs1 + qs2, "h.rewind");
  copy(m2, "2.", blocks1, qs1, 0, qs1, "accept");

  // Hand-off: back to the left endmarker, then swap whichever basis state of the first register
  // we hold into the second machine's initial state.
  b.identity("h.rewind", b.sigma_and_right(), "h.rewind", -1);
  std::vector<std::vector<std::size_t>> groups;
  std::vector<std::pair<std::string, int>> targets;
  const std::string start2 = "2." + m2.classical_states[m2.initial_classical];
  for (std::size_t i = 0; i < qs1; ++i) {
    groups.push_back({i});
    targets.emplace_back("h.xfer" + std::to_string(i), 0);
  }
  for (std::size_t g = qs1; g < qs1 + qs2; ++g) groups[0].push_back(g);
  b.measure("h.rewind", "<", basis_measurement(groups), targets);
  for (std::size_t i = 0; i < qs1; ++i)
    b.unitary("h.xfer" + std::to_string(i), "<", BlockSwap{i, qs1 + m2.initial_quantum}, start2, 0);

  std::vector<MarkerSpec> markers;
  for (const auto& mk : c1.markers) markers.push_back(MarkerSpec{"1." + mk.state, mk.head, mk.quantum});
  for (const auto& mk : c2.markers) markers.push_back(MarkerSpec{"2." + mk.state, mk.head, mk.quantum + qs1});

  std::vector<unsigned> coins = c1.coin_flips;
  coins.insert(coins.end(), c2.coin_flips.begin(), c2.coin_flips.end());
  MachineCard card = detail::finish_card(b.finish("1." + m1.classical_states[m1.initial_classical], m1.initial_quantum, "reject"),
                                         "intersect", 0, c1.eps + c2.eps - c1.eps * c2.eps, std::move(coins),
                                         c1.runtime_class == c2.runtime_class ? c1.runtime_class
                                                                              : c1.runtime_class + " + " + c2.runtime_class,
                                         std::move(markers));
  card.remark_cs = c1.cs + c2.cs + c1.qs;
  return card;
}

/// A^eq(m) = L^eq intersected with A(2m).
inline MachineCard build_aeq_solver(long m, const Rational& eps) {
  detail::check_m(m);
  detail::check_eps(eps);
  MachineCard card = intersect(build_eq_checker(eps / 2), build_length_checker(2 * m, eps / 2));
  card.family = "aeq";
  card.m = m;
  return card;
}

/// L^twin(m) = L^twin intersected with L(2m + 1).
inline MachineCard build_twin_m_recognizer(long m, const Rational& eps) {
  detail::check_m(m);
  detail::check_eps(eps);
  MachineCard card = intersect(build_twin_recognizer(eps / 2), build_exact_length_checker(2 * m + 1, eps / 2, "abc"));
  card.family = "twin_m";
  card.m = m;
  return card;
}

inline const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names{"length", "eq", "aeq", "twin", "twin_m", "exact_length"};
  return names;
}

inline MachineCard build_family(const std::string& family, long m, const Rational& eps) {
  if (family == "length") return build_length_checker(m, eps);
  if (family == "eq") return build_eq_checker(eps);
  if (family == "aeq") return build_aeq_solver(m, eps);
  if (family == "twin") return build_twin_recognizer(eps);
  if (family == "twin_m") return build_twin_m_recognizer(m, eps);
  if (family == "exact_length") return build_exact_length_checker(m, eps);
  throw UsageError("unknown family '" + family + "'");
}

// ---------------------------------------------------------------------------
// Promise classification

enum class PromiseFamily { length, aeq, eq, twin, twin_m };
enum class Classification { yes, no, outside };

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::yes: return "yes";
    case Classification::no: return "no";
    case Classification::outside: return "outside-promise";
  }
  return "?";
}

struct PromiseInstance {
  PromiseFamily family = PromiseFamily::length;
  long m = 0;
  std::string word;
};

inline std::string promise_alphabet(PromiseFamily f) {
  switch (f) {
    case PromiseFamily::length:
    case PromiseFamily::aeq:
    case PromiseFamily::eq: return "ab";
    case PromiseFamily::twin:
    case PromiseFamily::twin_m: return "abc";
  }
  return "";
}

inline std::optional<PromiseFamily> promise_family_of(const std::string& family) {
  if (family == "length") return PromiseFamily::length;
  if (family == "aeq") return PromiseFamily::aeq;
  if (family == "eq") return PromiseFamily::eq;
  if (family == "twin") return PromiseFamily::twin;
  if (family == "twin_m") return PromiseFamily::twin_m;
  if (family == "exact_length") return std::nullopt;
  throw UsageError("unknown family '" + family + "'");
}

/// wcw with w over {a, b}; returns |w| or nullopt.
inline std::optional<std::size_t> twin_half(const std::string& word) {
  const auto c = word.find('c');
  if (c == std::string::npos || word.find('c', c + 1) != std::string::npos) return std::nullopt;
  if (word.substr(0, c) != word.substr(c + 1)) return std::nullopt;
  return c;
}

inline Classification classify(const PromiseInstance& inst) {
  const std::string alphabet = promise_alphabet(inst.family);
  for (char ch : inst.word)
    if (alphabet.find(ch) == std::string::npos)
      throw UsageError(std::string("symbol '") + ch + "' is not in the family alphabet \"" + alphabet + "\"");
  const long n = static_cast<long>(inst.word.size());
  switch (inst.family) {
    case PromiseFamily::length:
      if (n == inst.m) return Classification::yes;
      return 2 * n >= inst.m ? Classification::no : Classification::outside;
    case PromiseFamily::aeq: {
      const std::string yes = std::string(static_cast<std::size_t>(inst.m), 'a') + std::string(static_cast<std::size_t>(inst.m), 'b');
      if (inst.word == yes) return Classification::yes;
      return n >= inst.m ? Classification::no : Classification::outside;
    }
    case PromiseFamily::eq: {
      const auto as = inst.word.find_first_not_of('a');
      const std::size_t na = as == std::string::npos ? inst.word.size() : as;
      const bool form = inst.word.find('a', na) == std::string::npos;
      return form && 2 * na == inst.word.size() ? Classification::yes : Classification::no;
    }
    case PromiseFamily::twin: return twin_half(inst.word) ? Classification::yes : Classification::no;
    case PromiseFamily::twin_m: {
      auto h = twin_half(inst.word);
      return h && static_cast<long>(*h) == inst.m ? Classification::yes : Classification::no;
    }
  }
  return Classification::outside;
}

}  // namespace qcfa
