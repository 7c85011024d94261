#pragma once

// Lazily expanded configuration graph of a machine on a fixed input word.

#include <cstddef>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qcfa/machine.hpp"

namespace qcfa {

struct Config {
  std::size_t classical = 0;
  std::size_t head = 0;
  Amplitude quantum;
};

struct Edge {
  std::size_t to = 0;
  Enclosure p;
  double approx = 0.0;
};

/// Nodes are configurations (classical state, head, quantum state). Halting configurations
/// collapse to their classical state. Equal configurations share a node, which is how
/// branches get merged.
class ConfigGraph {
 public:
  static constexpr std::size_t kDefaultNodeCap = 4'000'000;

  ConfigGraph(const QcfaMachine& machine, const std::string& word, std::size_t node_cap = kDefaultNodeCap)
      : machine_(machine), tape_(machine.tape(word)), node_cap_(node_cap) {}

  const QcfaMachine& machine() const { return machine_; }
  const std::string& tape() const { return tape_; }
  std::size_t size() const { return nodes_.size(); }

  std::size_t initial() {
    return intern(Config{machine_.initial_classical, 0, machine_.initial_amplitude()});
  }

  std::size_t intern(const Config& c) {
    const Halt h = machine_.halt(c.classical);
    const std::size_t hash = hash_of(c, h);
    if (auto hit = lookup(c, h, hash)) return *hit;
    if (nodes_.size() >= node_cap_)
      throw AnalysisError("configuration-space cap of " + std::to_string(node_cap_) + " nodes exceeded");
    index_.emplace(hash, nodes_.size());
    nodes_.push_back(Node{c, h, false, {}});
    return nodes_.size() - 1;
  }

  /// Looks a configuration up without adding it.
  std::optional<std::size_t> find(const Config& c) const {
    const Halt h = machine_.halt(c.classical);
    return lookup(c, h, hash_of(c, h));
  }

  Halt halt(std::size_t node) const { return nodes_[node].halt; }
  const Config& config(std::size_t node) const { return nodes_[node].config; }

  const std::vector<Edge>& edges(std::size_t node) {
    if (!nodes_[node].expanded) expand(node);
    return nodes_[node].edges;
  }

  std::string describe(std::size_t node) const {
    const auto& c = nodes_[node].config;
    std::string s = machine_.classical_states[c.classical];
    if (nodes_[node].halt != Halt::none) return s;
    return s + " @" + std::to_string(c.head) + " " + c.quantum.to_string();
  }

 private:
  struct Node {
    Config config;
    Halt halt;
    bool expanded;
    std::vector<Edge> edges;
  };

  void expand(std::size_t node) {
    std::vector<Edge> out;
    if (nodes_[node].halt == Halt::none) {
      Branch b{nodes_[node].config.classical, nodes_[node].config.head, nodes_[node].config.quantum, Enclosure(1L), 0};
      for (auto& [succ, p] : step(b, machine_, tape_)) {
        std::size_t to = intern(Config{succ.classical, succ.head, std::move(succ.quantum)});
        bool merged = false;
        for (auto& e : out)
          if (e.to == to) {
            e.p += p;
            e.approx = e.p.approx();
            merged = true;
          }
        if (!merged) out.push_back(Edge{to, p, p.approx()});
      }
    }
    nodes_[node].edges = std::move(out);
    nodes_[node].expanded = true;
  }

  // Halting configurations collapse to their classical state.
  static std::size_t hash_of(const Config& c, Halt h) {
    std::size_t x = c.classical * 0x9e3779b97f4a7c15ull;
    if (h == Halt::none) x ^= (c.head + 0x7f4a7c15ull + (x << 6) + (x >> 2)) ^ c.quantum.identity_hash();
    return x;
  }

  std::optional<std::size_t> lookup(const Config& c, Halt h, std::size_t hash) const {
    auto [first, last] = index_.equal_range(hash);
    for (auto it = first; it != last; ++it) {
      const Config& d = nodes_[it->second].config;
      if (d.classical != c.classical) continue;
      if (h != Halt::none) return it->second;
      if (d.head == c.head && d.quantum.same_identity(c.quantum)) return it->second;
    }
    return std::nullopt;
  }

  const QcfaMachine& machine_;
  std::string tape_;
  std::size_t node_cap_;
  std::vector<Node> nodes_;
  std::unordered_multimap<std::size_t, std::size_t> index_;
};

}  // namespace qcfa
