#pragma once

// The 2QCFA 9-tuple (Q, S, Sigma, Theta, delta, q0, s0, S_acc, S_rej), validation,
// and the one-step semantics.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "qcfa/amplitude.hpp"

namespace qcfa {

inline constexpr char kLeftEnd = '<';
inline constexpr char kRightEnd = '>';

// ---------------------------------------------------------------------------
// Quantum operations. Block-local operators name their block; indices inside
// them are local to that block. BlockSwap uses global indices of Q.

struct Identity {};
/// theta -> theta + turns*alpha + eighths*pi/4 on a rotation block.
struct Rotate {
  std::size_t block = 0;
  std::int64_t turns = 0;
  int eighths = 0;
};
/// theta -> (turns*alpha + eighths*pi/4) - theta on a rotation block.
struct Reflect {
  std::size_t block = 0;
  std::int64_t turns = 0;
  int eighths = 0;
};
/// matrix / denominator, applied to a five_adic or dense block.
struct ScaledMatrix {
  std::size_t block = 0;
  IntegerMatrix matrix;
  BigInt denominator = 1;
};
/// Hadamard on local coordinates (i, j): (x_i, x_j) -> ((x_i + x_j), (x_i - x_j)) / sqrt(2).
struct Hadamard {
  std::size_t block = 0;
  std::size_t i = 0;
  std::size_t j = 1;
};
/// Rational real matrix on a dense block, row major.
struct DenseMatrix {
  std::size_t block = 0;
  std::size_t n = 0;
  std::vector<Rational> entries;
};
/// Exchanges the global basis vectors i and j.
struct BlockSwap {
  std::size_t i = 0;
  std::size_t j = 0;
};

using Unitary = std::variant<Identity, Rotate, Reflect, ScaledMatrix, Hadamard, DenseMatrix, BlockSwap>;

struct Outcome {
  std::string label;
  std::vector<std::size_t> basis;  // global indices spanned by the projector
};

struct Measurement {
  std::vector<Outcome> outcomes;
};

struct Target {
  std::size_t state = 0;
  int move = 0;
};

/// Theta(s, sigma) together with delta(s, sigma): one target for a unitary,
/// one target per outcome (same order) for a measurement.
struct Transition {
  std::variant<Unitary, Measurement> op;
  std::vector<Target> targets;
};

enum class Halt : std::uint8_t { none, accept, reject };

class QcfaMachine {
 public:
  std::string id;
  std::vector<QuantumBlock> blocks;
  std::vector<std::string> quantum_states;    // Q, in global index order
  std::vector<std::string> classical_states;  // S
  std::string alphabet;                       // Sigma, one char per symbol
  std::size_t initial_quantum = 0;
  std::size_t initial_classical = 0;
  std::vector<std::size_t> accepting;
  std::vector<std::size_t> rejecting;
  /// Indexed by state * tape_width() + symbol_index.
  std::vector<std::optional<Transition>> transitions;

  std::size_t tape_width() const { return alphabet.size() + 2; }
  std::size_t quantum_dimension() const {
    std::size_t n = 0;
    for (const auto& b : blocks) n += b.dim;
    return n;
  }
  std::size_t block_offset(std::size_t b) const {
    std::size_t off = 0;
    for (std::size_t i = 0; i < b; ++i) off += blocks.at(i).dim;
    return off;
  }
  /// (block, local index) of a global basis index.
  std::pair<std::size_t, std::size_t> locate(std::size_t global) const {
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (global < blocks[b].dim) return {b, global};
      global -= blocks[b].dim;
    }
    throw Error("quantum basis index out of range");
  }

  /// Symbol index on the tape: 0 is the left endmarker, then Sigma in order, then the right endmarker.
  std::optional<std::size_t> symbol_index(char c) const {
    if (c == kLeftEnd) return 0;
    if (c == kRightEnd) return alphabet.size() + 1;
    auto pos = alphabet.find(c);
    if (pos == std::string::npos) return std::nullopt;
    return pos + 1;
  }
  char symbol_char(std::size_t index) const {
    if (index == 0) return kLeftEnd;
    if (index == alphabet.size() + 1) return kRightEnd;
    return alphabet.at(index - 1);
  }

  const std::optional<Transition>& transition(std::size_t state, std::size_t symbol) const {
    return transitions.at(state * tape_width() + symbol);
  }

  Halt halt(std::size_t state) const {
    if (halt_cache_.size() != classical_states.size()) rebuild_cache();
    return halt_cache_[state];
  }
  std::optional<std::size_t> find_state(const std::string& name) const {
    auto it = std::find(classical_states.begin(), classical_states.end(), name);
    if (it == classical_states.end()) return std::nullopt;
    return static_cast<std::size_t>(it - classical_states.begin());
  }
  std::size_t state(const std::string& name) const {
    auto s = find_state(name);
    if (!s) throw Error("machine '" + id + "' has no classical state '" + name + "'");
    return *s;
  }

  Amplitude initial_amplitude() const {
    auto [b, local] = locate(initial_quantum);
    return Amplitude::basis(blocks[b], b, local);
  }

  /// "<" + word + ">", after checking every symbol belongs to Sigma.
  std::string tape(const std::string& word) const {
    for (char c : word)
      if (alphabet.find(c) == std::string::npos)
        throw UsageError(std::string("symbol '") + c + "' is not in the input alphabet \"" + alphabet + "\"");
    return kLeftEnd + word + kRightEnd;
  }

  void invalidate_cache() const { halt_cache_.clear(); }

 private:
  void rebuild_cache() const {
    halt_cache_.assign(classical_states.size(), Halt::none);
    for (auto s : accepting)
      if (s < halt_cache_.size()) halt_cache_[s] = Halt::accept;
    for (auto s : rejecting)
      if (s < halt_cache_.size()) halt_cache_[s] = Halt::reject;
  }
  mutable std::vector<Halt> halt_cache_;
};

// ---------------------------------------------------------------------------
// Validation

namespace detail {

inline std::string where(const QcfaMachine& m, std::size_t s, std::size_t sym) {
  return "state '" + m.classical_states[s] + "' on '" + std::string(1, m.symbol_char(sym)) + "'";
}

inline bool rational_orthogonal(std::size_t n, const std::vector<Rational>& u) {
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      Rational dot = 0;
      for (std::size_t k = 0; k < n; ++k) dot += u[k * n + i] * u[k * n + j];
      if (dot != (i == j ? 1 : 0)) return false;
    }
  return true;
}

inline void check_unitary(const QcfaMachine& m, const Unitary& u, const std::string& at,
                          std::vector<std::string>& out) {
  auto block_ok = [&](std::size_t b, std::initializer_list<BlockKind> kinds) -> bool {
    if (b >= m.blocks.size()) {
      out.push_back(at + ": operator addresses missing quantum block " + std::to_string(b));
      return false;
    }
    if (std::find(kinds.begin(), kinds.end(), m.blocks[b].kind) == kinds.end()) {
      out.push_back(at + ": operator not supported on a " + std::string(to_string(m.blocks[b].kind)) + " block");
      return false;
    }
    return true;
  };
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Rotate> || std::is_same_v<T, Reflect>) {
          block_ok(op.block, {BlockKind::rotation});
        } else if constexpr (std::is_same_v<T, ScaledMatrix>) {
          if (!block_ok(op.block, {BlockKind::five_adic, BlockKind::dense})) return;
          if (op.matrix.n != m.blocks[op.block].dim) {
            out.push_back(at + ": matrix dimension does not match its block");
            return;
          }
          const IntegerMatrix prod = op.matrix.transposed() * op.matrix;
          const BigInt d2 = op.denominator * op.denominator;
          for (std::size_t i = 0; i < prod.n; ++i)
            for (std::size_t j = 0; j < prod.n; ++j)
              if (prod(i, j) != (i == j ? d2 : BigInt(0))) {
                out.push_back(at + ": U†U ≠ I");
                return;
              }
          if (m.blocks[op.block].kind == BlockKind::five_adic) {
            BigInt d = op.denominator;
            while (d % 5 == 0) d /= 5;
            if (d != 1) out.push_back(at + ": five_adic block needs a power-of-5 denominator");
          }
        } else if constexpr (std::is_same_v<T, Hadamard>) {
          if (!block_ok(op.block, {BlockKind::rotation, BlockKind::five_adic, BlockKind::dense})) return;
          const auto dim = m.blocks[op.block].dim;
          if (op.i == op.j || op.i >= dim || op.j >= dim) out.push_back(at + ": bad Hadamard coordinates");
          if (m.blocks[op.block].kind == BlockKind::rotation && !(op.i == 0 && op.j == 1))
            out.push_back(at + ": Hadamard on a rotation block must act on (0, 1)");
        } else if constexpr (std::is_same_v<T, DenseMatrix>) {
          if (!block_ok(op.block, {BlockKind::dense})) return;
          if (op.n != m.blocks[op.block].dim || op.entries.size() != op.n * op.n) {
            out.push_back(at + ": matrix dimension does not match its block");
            return;
          }
          if (!rational_orthogonal(op.n, op.entries)) out.push_back(at + ": U†U ≠ I");
        } else if constexpr (std::is_same_v<T, BlockSwap>) {
          const auto n = m.quantum_dimension();
          if (op.i >= n || op.j >= n) out.push_back(at + ": block swap index out of range");
        }
      },
      u);
}

inline void check_measurement(const QcfaMachine& m, const Measurement& meas, const std::string& at,
                              std::vector<std::string>& out) {
  const auto n = m.quantum_dimension();
  if (meas.outcomes.empty()) {
    out.push_back(at + ": measurement without outcomes");
    return;
  }
  std::vector<int> covered(n, 0);
  std::set<std::string> labels;
  for (const auto& o : meas.outcomes) {
    if (!labels.insert(o.label).second) out.push_back(at + ": duplicate outcome label '" + o.label + "'");
    for (auto g : o.basis) {
      if (g >= n) {
        out.push_back(at + ": projector index out of range");
        return;
      }
      ++covered[g];
    }
  }
  for (std::size_t g = 0; g < n; ++g) {
    if (covered[g] > 1) {
      out.push_back(at + ": projectors are not orthogonal (basis state " + m.quantum_states.at(g) + " repeated)");
      return;
    }
    if (covered[g] == 0) {
      out.push_back(at + ": incomplete measurement (projectors do not sum to I)");
      return;
    }
  }
}

}  // namespace detail

/// Every violated invariant, empty when the machine is well formed.
inline std::vector<std::string> validation_errors(const QcfaMachine& m) {
  std::vector<std::string> out;
  m.invalidate_cache();
  const auto S = m.classical_states.size();
  const auto Qn = m.quantum_dimension();
  if (m.blocks.empty()) out.push_back("no quantum states");
  if (m.quantum_states.size() != Qn) out.push_back("quantum state names do not match the block dimensions");
  for (const auto& b : m.blocks)
    if (b.kind == BlockKind::rotation && b.dim != 2) out.push_back("rotation blocks must have dimension 2");
  if (m.initial_quantum >= Qn) out.push_back("initial quantum state out of range");
  if (m.initial_classical >= S) out.push_back("initial classical state out of range");
  {
    std::set<char> seen;
    for (char c : m.alphabet)
      if (c == kLeftEnd || c == kRightEnd || !seen.insert(c).second)
        out.push_back(std::string("bad input symbol '") + c + "'");
  }
  std::set<std::size_t> acc(m.accepting.begin(), m.accepting.end());
  for (auto s : m.rejecting)
    if (acc.count(s)) {
      out.push_back("halting sets overlap");
      break;
    }
  for (auto s : m.accepting)
    if (s >= S) out.push_back("accepting state out of range");
  for (auto s : m.rejecting)
    if (s >= S) out.push_back("rejecting state out of range");
  if (m.transitions.size() != S * m.tape_width()) {
    out.push_back("transition table has the wrong size");
    return out;
  }
  if (!out.empty()) return out;

  for (std::size_t s = 0; s < S; ++s) {
    if (m.halt(s) != Halt::none) continue;
    for (std::size_t sym = 0; sym < m.tape_width(); ++sym) {
      const auto at = detail::where(m, s, sym);
      const auto& t = m.transition(s, sym);
      if (!t) {
        out.push_back("partial transition: " + at + " has no rule");
        continue;
      }
      std::size_t expected_targets = 1;
      if (auto* u = std::get_if<Unitary>(&t->op)) {
        detail::check_unitary(m, *u, at, out);
      } else {
        const auto& meas = std::get<Measurement>(t->op);
        detail::check_measurement(m, meas, at, out);
        expected_targets = meas.outcomes.size();
      }
      if (t->targets.size() != expected_targets) {
        out.push_back(at + ": missing classical transition for some outcome");
        continue;
      }
      for (const auto& tg : t->targets) {
        if (tg.state >= S) out.push_back(at + ": target state out of range");
        if (tg.move < -1 || tg.move > 1) out.push_back(at + ": head move must be -1, 0 or +1");
        if (sym == 0 && tg.move == -1) out.push_back(at + ": head would move left of the left endmarker");
        if (sym == m.tape_width() - 1 && tg.move == 1)
          out.push_back(at + ": head would move right of the right endmarker");
      }
    }
  }
  return out;
}

/// Returns the machine when valid, otherwise throws ValidationError with the full list.
inline const QcfaMachine& validate(const QcfaMachine& m) {
  auto errors = validation_errors(m);
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return m;
}

// ---------------------------------------------------------------------------
// Single-step semantics

struct Branch {
  std::size_t classical = 0;
  std::size_t head = 0;
  Amplitude quantum;
  Enclosure weight = Enclosure(1L);
  std::uint64_t steps = 0;
};

namespace detail {

inline FiveAdicVector ray(FiveAdicVector v) { return v.sign_normalized(); }

inline IntervalVector apply_rational(const std::vector<Rational>& u, std::size_t n, const IntervalVector& v) {
  std::vector<Enclosure> out(n, Enclosure(0L));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      if (u[i * n + k] != 0) out[i] += Enclosure(u[i * n + k]) * v.amplitudes[k];
  return IntervalVector::make(std::move(out));
}

inline Amplitude apply_unitary(const QcfaMachine& m, const Unitary& u, const Amplitude& a) {
  return std::visit(
      [&](const auto& op) -> Amplitude {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Identity>) {
          return a;
        } else if constexpr (std::is_same_v<T, BlockSwap>) {
          const auto off = m.block_offset(a.block);
          const auto dim = m.blocks[a.block].dim;
          const bool has_i = op.i >= off && op.i < off + dim;
          const bool has_j = op.j >= off && op.j < off + dim;
          if (!has_i && !has_j) return a;
          auto local = a.basis_index();
          if (!local) throw AnalysisError("block swap applied to a superposed state");
          const std::size_t g = off + *local;
          std::size_t dest;
          if (g == op.i) dest = op.j;
          else if (g == op.j) dest = op.i;
          else return a;
          auto [b, l] = m.locate(dest);
          return Amplitude::basis(m.blocks[b], b, l);
        } else {
          if (op.block != a.block) return a;
          if constexpr (std::is_same_v<T, Rotate>) {
            return {a.block, std::get<RotationIndex>(a.value).rotated(op.turns, op.eighths)};
          } else if constexpr (std::is_same_v<T, Reflect>) {
            return {a.block, std::get<RotationIndex>(a.value).reflected(op.turns, op.eighths)};
          } else if constexpr (std::is_same_v<T, Hadamard>) {
            if (auto* r = std::get_if<RotationIndex>(&a.value)) return {a.block, r->reflected(0, 1)};
            if (auto* f = std::get_if<FiveAdicVector>(&a.value)) {
              if (auto h = f->hadamard(op.i, op.j)) return {a.block, ray(*h)};
              return apply_unitary(m, u, Amplitude{a.block, to_interval(*f)});
            }
            const auto& iv = std::get<IntervalVector>(a.value);
            std::vector<Enclosure> out = iv.amplitudes;
            const Enclosure s = inverse_sqrt2_power(1);
            out[op.i] = (iv.amplitudes[op.i] + iv.amplitudes[op.j]) * s;
            out[op.j] = (iv.amplitudes[op.i] - iv.amplitudes[op.j]) * s;
            return {a.block, IntervalVector::make(std::move(out))};
          } else if constexpr (std::is_same_v<T, ScaledMatrix>) {
            if (auto* f = std::get_if<FiveAdicVector>(&a.value)) return {a.block, ray(f->apply(op.matrix, op.denominator))};
            std::vector<Rational> r;
            r.reserve(op.matrix.a.size());
            for (const auto& x : op.matrix.a) r.push_back(make_rational(x, op.denominator));
            return {a.block, apply_rational(r, op.matrix.n, std::get<IntervalVector>(a.value))};
          } else if constexpr (std::is_same_v<T, DenseMatrix>) {
            return {a.block, apply_rational(op.entries, op.n, std::get<IntervalVector>(a.value))};
          }
        }
      },
      u);
}

/// Probability of `outcome` and the renormalised post-measurement state, if the probability is not exactly 0.
inline std::optional<std::pair<Enclosure, Amplitude>> measure(const QcfaMachine& m, const Outcome& outcome,
                                                              const Amplitude& a) {
  const auto off = m.block_offset(a.block);
  const auto dim = m.blocks[a.block].dim;
  std::vector<bool> keep(dim, false);
  std::size_t kept = 0;
  for (auto g : outcome.basis)
    if (g >= off && g < off + dim) {
      keep[g - off] = true;
      ++kept;
    }
  if (kept == 0) return std::nullopt;
  if (kept == dim) return std::make_pair(Enclosure(1L), a);

  if (auto* r = std::get_if<RotationIndex>(&a.value)) {
    const int idx = keep[0] ? 0 : 1;
    Enclosure p = rotation_basis_enclosure(*r, idx);
    if (p.is_zero()) return std::nullopt;
    return std::make_pair(p, Amplitude{a.block, RotationIndex::basis(idx)});
  }
  if (auto* f = std::get_if<FiveAdicVector>(&a.value)) {
    Rational p = 0;
    for (std::size_t i = 0; i < dim; ++i)
      if (keep[i]) p += f->component_square(i);
    if (p == 0) return std::nullopt;
    if (auto c = f->collapsed(keep)) return std::make_pair(Enclosure(p), Amplitude{a.block, ray(*c)});
    std::vector<BigInt> projected = f->entries();
    for (std::size_t i = 0; i < dim; ++i)
      if (!keep[i]) projected[i] = 0;
    IntervalVector iv = to_interval(FiveAdicVector(std::move(projected), f->scale(), f->root2()));
    const Enclosure norm = inverse_sqrt(Enclosure(p));
    for (auto& x : iv.amplitudes) x = x * norm;
    return std::make_pair(Enclosure(p), Amplitude{a.block, std::move(iv)});
  }
  const auto& iv = std::get<IntervalVector>(a.value);
  Enclosure p(0L);
  bool drops_mass = false;
  for (std::size_t i = 0; i < dim; ++i) {
    if (keep[i]) p += iv.amplitudes[i] * iv.amplitudes[i];
    else if (!iv.amplitudes[i].is_zero()) drops_mass = true;
  }
  if (p.is_zero()) return std::nullopt;
  p = p.clamped_unit();
  if (!drops_mass) return std::make_pair(Enclosure(1L), a);
  const Enclosure norm = inverse_sqrt(p);
  std::vector<Enclosure> out(dim, Enclosure(0L));
  for (std::size_t i = 0; i < dim; ++i)
    if (keep[i]) out[i] = iv.amplitudes[i] * norm;
  return std::make_pair(p, Amplitude{a.block, IntervalVector::make(std::move(out))});
}

}  // namespace detail

/// One computation step. Returns each successor with its transition probability; branch weights
/// are multiplied through. Outcomes with probability exactly 0 are omitted.
inline std::vector<std::pair<Branch, Enclosure>> step(const Branch& branch, const QcfaMachine& m,
                                                      const std::string& tape) {
  if (m.halt(branch.classical) != Halt::none) throw Error("step called on a halting branch");
  if (branch.head >= tape.size()) throw Error("head position outside the tape");
  const auto sym = m.symbol_index(tape[branch.head]);
  if (!sym) throw UsageError(std::string("symbol '") + tape[branch.head] + "' is not in the tape alphabet");
  const auto& t = m.transition(branch.classical, *sym);
  if (!t) throw ValidationError({"partial transition: " + detail::where(m, branch.classical, *sym) + " has no rule"});

  auto successor = [&](const Target& tg, Amplitude amp, const Enclosure& p) {
    const long head = static_cast<long>(branch.head) + tg.move;
    if (head < 0 || head >= static_cast<long>(tape.size())) throw Error("head move leaves the tape");
    Branch b{tg.state, static_cast<std::size_t>(head), std::move(amp), branch.weight * p, branch.steps + 1};
    return std::make_pair(std::move(b), p);
  };

  std::vector<std::pair<Branch, Enclosure>> out;
  if (auto* u = std::get_if<Unitary>(&t->op)) {
    out.push_back(successor(t->targets.at(0), detail::apply_unitary(m, *u, branch.quantum), Enclosure(1L)));
    return out;
  }
  const auto& meas = std::get<Measurement>(t->op);
  for (std::size_t i = 0; i < meas.outcomes.size(); ++i) {
    auto r = detail::measure(m, meas.outcomes[i], branch.quantum);
    if (!r) continue;
    out.push_back(successor(t->targets.at(i), std::move(r->second), r->first));
  }
  return out;
}

}  // namespace qcfa
