#pragma once

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "qcfa/machine.hpp"

namespace qcfa {

/// Incremental construction of a QcfaMachine with named classical states.
class MachineBuilder {
 public:
  MachineBuilder(std::string id, std::string alphabet) {
    m_.id = std::move(id);
    m_.alphabet = std::move(alphabet);
  }

  const std::string& alphabet() const { return m_.alphabet; }
  /// Sigma followed by the right endmarker.
  std::string sigma_and_right() const { return m_.alphabet + kRightEnd; }
  std::string everything() const { return kLeftEnd + m_.alphabet + kRightEnd; }

  std::size_t add_block(BlockKind kind, std::size_t dim, const std::string& prefix = "q") {
    const std::size_t first = m_.quantum_states.size();
    m_.blocks.push_back(QuantumBlock{kind, dim});
    for (std::size_t i = 0; i < dim; ++i) m_.quantum_states.push_back(prefix + std::to_string(first + i));
    return m_.blocks.size() - 1;
  }
  void name_quantum_states(std::vector<std::string> names) { m_.quantum_states = std::move(names); }

  std::size_t state(const std::string& name) {
    auto [it, fresh] = ids_.try_emplace(name, m_.classical_states.size());
    if (fresh) m_.classical_states.push_back(name);
    return it->second;
  }
  void accepting(const std::string& name) { m_.accepting.push_back(state(name)); }
  void rejecting(const std::string& name) { m_.rejecting.push_back(state(name)); }

  void unitary(const std::string& from, const std::string& symbols, const Unitary& u, const std::string& to, int move) {
    for (char c : symbols) put(from, c, Transition{u, {Target{state(to), move}}});
  }
  void identity(const std::string& from, const std::string& symbols, const std::string& to, int move) {
    unitary(from, symbols, Identity{}, to, move);
  }
  void measure(const std::string& from, const std::string& symbols, const Measurement& meas,
               const std::vector<std::pair<std::string, int>>& targets) {
    std::vector<Target> tg;
    for (const auto& [to, move] : targets) tg.push_back(Target{state(to), move});
    for (char c : symbols) put(from, c, Transition{meas, tg});
  }
  void set(std::size_t from, std::size_t symbol, Transition t) {
    grow();
    m_.transitions[from * m_.tape_width() + symbol] = std::move(t);
  }

  /// Completes the table: every unset (non-halting state, symbol) pair gets the identity,
  /// no move, and goes to `fallback`. Those pairs are unreachable in the built-in families.
  QcfaMachine finish(const std::string& initial_state, std::size_t initial_quantum, const std::string& fallback) {
    m_.initial_classical = state(initial_state);
    m_.initial_quantum = initial_quantum;
    const std::size_t fb = state(fallback);
    grow();
    m_.invalidate_cache();
    for (std::size_t s = 0; s < m_.classical_states.size(); ++s) {
      if (m_.halt(s) != Halt::none) continue;
      for (std::size_t sym = 0; sym < m_.tape_width(); ++sym) {
        auto& t = m_.transitions[s * m_.tape_width() + sym];
        if (!t) t = Transition{Unitary{Identity{}}, {Target{fb, 0}}};
      }
    }
    m_.invalidate_cache();
    return m_;
  }

 private:
  void grow() { m_.transitions.resize(m_.classical_states.size() * m_.tape_width()); }
  void put(const std::string& from, char c, Transition t) {
    const std::size_t s = state(from);
    grow();
    auto sym = m_.symbol_index(c);
    if (!sym) throw Error(std::string("builder used symbol '") + c + "' outside the tape alphabet");
    m_.transitions[s * m_.tape_width() + *sym] = std::move(t);
  }

  QcfaMachine m_;
  std::unordered_map<std::string, std::size_t> ids_;
};

/// Measurement with one outcome per listed group of global basis indices, labelled "0", "1", ...
inline Measurement basis_measurement(std::vector<std::vector<std::size_t>> groups) {
  Measurement m;
  for (std::size_t i = 0; i < groups.size(); ++i) m.outcomes.push_back(Outcome{std::to_string(i), std::move(groups[i])});
  return m;
}

}  // namespace qcfa
