#pragma once

// Total deterministic finite automata, with Hopcroft minimisation.

#include <algorithm>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "qcfa/errors.hpp"

namespace qcfa {

struct Dfa {
  std::vector<std::string> states;
  std::string alphabet;
  /// delta[state * alphabet.size() + symbol]
  std::vector<std::size_t> delta;
  std::size_t start = 0;
  std::vector<bool> accepting;

  std::size_t size() const { return states.size(); }
  std::size_t symbol(char c) const {
    auto pos = alphabet.find(c);
    if (pos == std::string::npos)
      throw UsageError(std::string("symbol '") + c + "' is not in the DFA alphabet \"" + alphabet + "\"");
    return pos;
  }
  std::size_t next(std::size_t q, char c) const { return delta[q * alphabet.size() + symbol(c)]; }
  /// Extended transition function.
  std::size_t run(const std::string& word, std::size_t from) const {
    for (char c : word) from = next(from, c);
    return from;
  }
  std::size_t run(const std::string& word) const { return run(word, start); }

  std::size_t add_state(std::string name, bool accept = false) {
    states.push_back(std::move(name));
    accepting.push_back(accept);
    delta.resize(states.size() * alphabet.size(), 0);
    return states.size() - 1;
  }
  void set(std::size_t q, char c, std::size_t to) { delta[q * alphabet.size() + symbol(c)] = to; }

  void check_total() const {
    if (delta.size() != states.size() * alphabet.size() || accepting.size() != states.size())
      throw Error("DFA tables do not match its state count");
    for (auto t : delta)
      if (t >= states.size()) throw Error("DFA transition into a missing state");
    if (start >= states.size()) throw Error("DFA start state out of range");
  }
};

inline bool run_dfa(const Dfa& dfa, const std::string& word) { return dfa.accepting[dfa.run(word)]; }

/// States reachable from the start state, in BFS order.
inline std::vector<std::size_t> reachable_states(const Dfa& dfa) {
  std::vector<bool> seen(dfa.size(), false);
  std::vector<std::size_t> order{dfa.start};
  seen[dfa.start] = true;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t a = 0; a < dfa.alphabet.size(); ++a) {
      auto t = dfa.delta[order[i] * dfa.alphabet.size() + a];
      if (!seen[t]) {
        seen[t] = true;
        order.push_back(t);
      }
    }
  return order;
}

/// Removes unreachable states and merges equivalent ones (Hopcroft's partition refinement).
inline Dfa minimize_dfa(const Dfa& input) {
  input.check_total();
  const auto k = input.alphabet.size();

  // Restrict to reachable states, renumbered in BFS order.
  const auto order = reachable_states(input);
  std::vector<std::size_t> index(input.size(), static_cast<std::size_t>(-1));
  for (std::size_t i = 0; i < order.size(); ++i) index[order[i]] = i;
  const std::size_t n = order.size();
  std::vector<std::size_t> delta(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < k; ++a) delta[i * k + a] = index[input.delta[order[i] * k + a]];

  // Inverse transitions.
  std::vector<std::vector<std::size_t>> inverse(n * k);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < k; ++a) inverse[delta[i * k + a] * k + a].push_back(i);

  std::vector<std::size_t> block_of(n);
  std::vector<std::vector<std::size_t>> blocks;
  {
    std::vector<std::size_t> acc, rej;
    for (std::size_t i = 0; i < n; ++i) (input.accepting[order[i]] ? acc : rej).push_back(i);
    for (auto* part : {&acc, &rej})
      if (!part->empty()) {
        for (auto s : *part) block_of[s] = blocks.size();
        blocks.push_back(*part);
      }
  }

  std::deque<std::pair<std::size_t, std::size_t>> work;  // (splitter block, symbol)
  std::vector<std::vector<bool>> queued;
  auto enqueue = [&](std::size_t b, std::size_t a) {
    if (queued.size() <= b) queued.resize(b + 1, std::vector<bool>(k, false));
    if (!queued[b][a]) {
      queued[b][a] = true;
      work.emplace_back(b, a);
    }
  };
  if (blocks.size() == 2) {
    const std::size_t smaller = blocks[0].size() <= blocks[1].size() ? 0 : 1;
    for (std::size_t a = 0; a < k; ++a) enqueue(smaller, a);
  }

  std::vector<std::size_t> hits(n, 0);
  std::vector<bool> marked(n, false);
  while (!work.empty()) {
    auto [splitter, a] = work.front();
    work.pop_front();
    queued[splitter][a] = false;

    std::vector<std::size_t> pre;
    for (auto s : blocks[splitter])
      for (auto p : inverse[s * k + a])
        if (!marked[p]) {
          marked[p] = true;
          pre.push_back(p);
        }
    std::vector<std::size_t> touched;
    for (auto p : pre)
      if (hits[block_of[p]]++ == 0) touched.push_back(block_of[p]);

    for (auto b : touched) {
      if (hits[b] == blocks[b].size()) {
        hits[b] = 0;
        continue;
      }
      std::vector<std::size_t> in, out;
      for (auto s : blocks[b]) (marked[s] ? in : out).push_back(s);
      hits[b] = 0;
      const std::size_t fresh = blocks.size();
      blocks[b] = std::move(out);
      blocks.push_back(std::move(in));
      for (auto s : blocks[fresh]) block_of[s] = fresh;
      for (std::size_t c = 0; c < k; ++c) {
        if (queued.size() > b && queued[b][c]) enqueue(fresh, c);
        else enqueue(blocks[b].size() <= blocks[fresh].size() ? b : fresh, c);
      }
    }
    for (auto p : pre) marked[p] = false;
  }

  // Number blocks by first appearance in BFS order for a deterministic result.
  std::vector<std::size_t> rename(blocks.size(), static_cast<std::size_t>(-1));
  std::size_t next_id = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (rename[block_of[i]] == static_cast<std::size_t>(-1)) rename[block_of[i]] = next_id++;

  Dfa out;
  out.alphabet = input.alphabet;
  out.states.resize(next_id);
  out.accepting.assign(next_id, false);
  out.delta.assign(next_id * k, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto b = rename[block_of[i]];
    if (out.states[b].empty()) out.states[b] = input.states[order[i]];
    out.accepting[b] = input.accepting[order[i]];
    for (std::size_t a = 0; a < k; ++a) out.delta[b * k + a] = rename[block_of[delta[i * k + a]]];
  }
  out.start = rename[block_of[0]];
  return out;
}

}  // namespace qcfa
