#pragma once

// Evaluation strategies: truncated evolution, segment/round analysis with exact
// absorbing-chain solves, closed-form totals, and Monte-Carlo sampling.

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "qcfa/graph.hpp"

namespace qcfa {

struct HaltingSummary {
  std::string strategy;
  Enclosure accept;
  Enclosure reject;
  Enclosure residual;
  /// Expected number of steps, conditioned on halting.
  Enclosure expected_steps;
  std::optional<Enclosure> expected_rounds;
  std::uint64_t steps_analyzed = 0;
  std::uint64_t rounds_analyzed = 0;
};

/// Per-round quantities. p_reject is the chance a round rejects; p_accept is the chance it
/// accepts given that it did not reject. The true per-round masses are then
/// p_reject, (1 - p_reject) * p_accept and continue_mass = (1 - p_reject) * (1 - p_accept).
struct RoundOutcome {
  Enclosure p_accept;
  Enclosure p_reject;
  Enclosure accept_mass;
  Enclosure continue_mass;
  Enclosure expected_steps;

  Enclosure p_continue() const { return continue_mass; }
};

// ---------------------------------------------------------------------------
// Truncated evolution

inline HaltingSummary evolve_truncated(const QcfaMachine& machine, const std::string& word, std::uint64_t max_steps,
                                       std::size_t branch_cap = 1'000'000) {
  ConfigGraph g(machine, word);
  std::map<std::size_t, Enclosure> live{{g.initial(), Enclosure(1L)}};
  Enclosure accept(0L), reject(0L), weighted_steps(0L);
  auto absorb = [&](std::size_t node, const Enclosure& w, std::uint64_t t) -> bool {
    const Halt h = g.halt(node);
    if (h == Halt::none) return false;
    (h == Halt::accept ? accept : reject) += w;
    weighted_steps += w * Enclosure(static_cast<long>(t));
    return true;
  };
  if (absorb(g.initial(), Enclosure(1L), 0)) live.clear();

  for (std::uint64_t t = 1; t <= max_steps && !live.empty(); ++t) {
    std::map<std::size_t, Enclosure> next;
    for (const auto& [node, w] : live)
      for (const auto& e : g.edges(node)) {
        Enclosure mass = w * e.p;
        if (absorb(e.to, mass, t)) continue;
        auto [it, fresh] = next.try_emplace(e.to, mass);
        if (!fresh) it->second += mass;
      }
    if (next.size() > branch_cap)
      throw AnalysisError("branch count " + std::to_string(next.size()) + " exceeds the cap of " +
                          std::to_string(branch_cap));
    live = std::move(next);
  }
  Enclosure residual(0L);
  for (const auto& [node, w] : live) residual += w;

  HaltingSummary s;
  s.strategy = "truncated";
  s.accept = accept;
  s.reject = reject;
  s.residual = residual;
  const Enclosure halted = accept + reject;
  s.expected_steps = halted.certainly_positive() ? weighted_steps / halted : Enclosure(0L);
  s.steps_analyzed = max_steps;
  return s;
}

// ---------------------------------------------------------------------------
// Exact linear algebra over the rationals

namespace detail {

/// Solves (I - Q^T) x = b for each right-hand side, where q[u] lists (v, Q[u][v]).
/// I - Q^T is a nonsingular M-matrix for a transient class, so no pivoting is needed.
inline std::vector<std::vector<Rational>> solve_visits(const std::vector<std::vector<std::pair<std::size_t, Rational>>>& q,
                                                       std::vector<std::vector<Rational>> rhs) {
  const std::size_t n = q.size();
  std::vector<std::map<std::size_t, Rational>> rows(n);
  std::vector<std::set<std::size_t>> col_rows(n);
  for (std::size_t v = 0; v < n; ++v) {
    rows[v][v] += 1;
    col_rows[v].insert(v);
  }
  for (std::size_t u = 0; u < n; ++u)
    for (const auto& [v, p] : q[u]) {
      rows[v][u] -= p;
      col_rows[u].insert(v);
    }
  for (std::size_t i = 0; i < n; ++i) {
    const Rational pivot = rows[i].at(i);
    if (pivot == 0) throw AnalysisError("singular absorbing-chain system (a cycle never exits)");
    for (auto it = col_rows[i].upper_bound(i); it != col_rows[i].end(); ++it) {
      const std::size_t j = *it;
      auto found = rows[j].find(i);
      if (found == rows[j].end() || found->second == 0) continue;
      const Rational f = found->second / pivot;
      for (const auto& [c, val] : rows[i]) {
        if (c == i) continue;
        auto [cell, fresh] = rows[j].try_emplace(c, 0);
        cell->second -= f * val;
        if (fresh) col_rows[c].insert(j);
      }
      rows[j].erase(i);
      for (auto& b : rhs) b[j] -= f * b[i];
    }
  }
  for (auto& b : rhs) {
    for (std::size_t ii = n; ii-- > 0;) {
      Rational acc = b[ii];
      for (const auto& [c, val] : rows[ii])
        if (c > ii) acc -= val * b[c];
      b[ii] = acc / rows[ii].at(ii);
    }
  }
  return rhs;
}

/// Strongly connected components in reverse topological order (Tarjan, iterative).
inline std::vector<std::vector<std::size_t>> strongly_connected(const std::vector<std::vector<std::size_t>>& adj) {
  const std::size_t n = adj.size();
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> index(n, kNone), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  std::size_t counter = 0;
  std::vector<std::pair<std::size_t, std::size_t>> call;  // (node, next child position)
  for (std::size_t root = 0; root < n; ++root) {
    if (index[root] != kNone) continue;
    call.emplace_back(root, 0);
    while (!call.empty()) {
      auto& [u, pos] = call.back();
      if (pos == 0 && index[u] == kNone) {
        index[u] = low[u] = counter++;
        stack.push_back(u);
        on_stack[u] = true;
      }
      if (pos < adj[u].size()) {
        const std::size_t v = adj[u][pos++];
        if (index[v] == kNone) {
          call.emplace_back(v, 0);
        } else if (on_stack[v]) {
          low[u] = std::min(low[u], index[v]);
        }
        continue;
      }
      if (low[u] == index[u]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != u);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
      const std::size_t finished = u;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Segment analysis

struct SegmentResult {
  Enclosure accept = Enclosure(0L);
  Enclosure reject = Enclosure(0L);
  std::map<std::size_t, Enclosure> exits;  // restart node -> mass leaving towards it
  Enclosure expected_steps = Enclosure(0L);
  std::size_t transient_nodes = 0;
};

/// Runs from `start` until the computation halts or enters a node in `markers`
/// (`start` itself counts as an exit once left). Visits are solved exactly on every
/// cycle; transitions with irrational probability may only appear outside cycles.
///
/// With `conditioned`, edges into rejecting configurations are removed and the
/// remaining edges of each node renormalised, which yields acceptance conditioned on
/// never rejecting.
inline SegmentResult analyze_segment(ConfigGraph& g, std::size_t start, const std::set<std::size_t>& markers,
                                     bool conditioned = false) {
  SegmentResult result;
  if (g.halt(start) != Halt::none) {
    (g.halt(start) == Halt::accept ? result.accept : result.reject) = Enclosure(1L);
    return result;
  }

  // Discover the transient part.
  std::vector<std::size_t> nodes{start};
  std::unordered_map<std::size_t, std::size_t> local{{start, 0}};
  auto is_exit = [&](std::size_t v) { return g.halt(v) != Halt::none || markers.count(v) > 0; };
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (const auto& e : g.edges(nodes[i]))
      if (!is_exit(e.to) && !local.count(e.to)) {
        local.emplace(e.to, nodes.size());
        nodes.push_back(e.to);
      }
  const std::size_t n = nodes.size();
  result.transient_nodes = n;

  // Effective out-edges per local node.
  std::vector<std::vector<Edge>> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& e : g.edges(nodes[i])) {
      if (conditioned && g.halt(e.to) == Halt::reject) continue;
      out[i].push_back(e);
    }
    if (conditioned && out[i].size() != g.edges(nodes[i]).size() && !out[i].empty()) {
      if (out[i].size() == 1) {
        out[i][0].p = Enclosure(1L);
      } else {
        Enclosure total(0L);
        for (const auto& e : out[i]) total += e.p;
        for (auto& e : out[i]) e.p = (e.p / total).clamped_unit();
      }
    }
  }

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& e : out[i])
      if (!is_exit(e.to)) adj[i].push_back(local.at(e.to));
  auto comps = detail::strongly_connected(adj);

  std::vector<Enclosure> inflow(n, Enclosure(0L)), visits(n, Enclosure(0L));
  inflow[0] = Enclosure(1L);
  std::vector<std::size_t> comp_of(n);
  for (std::size_t c = 0; c < comps.size(); ++c)
    for (auto u : comps[c]) comp_of[u] = c;

  for (std::size_t c = comps.size(); c-- > 0;) {
    const auto& comp = comps[c];
    bool cyclic = comp.size() > 1;
    if (!cyclic)
      for (auto v : adj[comp[0]])
        if (v == comp[0]) cyclic = true;
    if (!cyclic) {
      visits[comp[0]] = inflow[comp[0]];
    } else {
      std::unordered_map<std::size_t, std::size_t> pos;
      for (std::size_t k = 0; k < comp.size(); ++k) pos.emplace(comp[k], k);
      std::vector<std::vector<std::pair<std::size_t, Rational>>> q(comp.size());
      for (std::size_t k = 0; k < comp.size(); ++k)
        for (const auto& e : out[comp[k]]) {
          if (is_exit(e.to)) continue;
          auto it = pos.find(local.at(e.to));
          if (it == pos.end()) continue;
          if (!e.p.is_exact())
            throw AnalysisError("irrational transition inside a cycle at " + g.describe(comp[k] == 0 ? start : nodes[comp[k]]));
          q[k].emplace_back(it->second, e.p.exact());
        }
      bool exact_in = true;
      for (auto u : comp) exact_in = exact_in && inflow[u].is_exact();
      std::vector<std::vector<Rational>> rhs(exact_in ? 1 : 2, std::vector<Rational>(comp.size()));
      for (std::size_t k = 0; k < comp.size(); ++k) {
        rhs[0][k] = inflow[comp[k]].lo();
        if (!exact_in) rhs[1][k] = inflow[comp[k]].hi();
      }
      auto x = detail::solve_visits(q, std::move(rhs));
      for (std::size_t k = 0; k < comp.size(); ++k)
        visits[comp[k]] = exact_in ? Enclosure(x[0][k]) : Enclosure::between(x[0][k], x[1][k]).compact();
    }
    // Push flow out of this component.
    for (auto u : comp)
      for (const auto& e : out[u]) {
        if (is_exit(e.to)) continue;
        const std::size_t v = local.at(e.to);
        if (comp_of[v] == c) continue;
        inflow[v] += visits[u] * e.p;
      }
  }

  for (std::size_t i = 0; i < n; ++i) {
    result.expected_steps += visits[i];
    for (const auto& e : out[i]) {
      if (!is_exit(e.to)) continue;
      const Enclosure mass = visits[i] * e.p;
      if (g.halt(e.to) == Halt::accept) result.accept += mass;
      else if (g.halt(e.to) == Halt::reject) result.reject += mass;
      else {
        auto [it, fresh] = result.exits.try_emplace(e.to, mass);
        if (!fresh) it->second += mass;
      }
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Rounds and closed forms

namespace detail {

inline std::optional<std::size_t> reach(ConfigGraph& g, const Config& target) {
  std::size_t goal = g.intern(target);
  std::vector<std::size_t> todo{g.initial()};
  std::set<std::size_t> seen{todo[0]};
  while (!todo.empty()) {
    std::size_t u = todo.back();
    todo.pop_back();
    if (u == goal) return goal;
    for (const auto& e : g.edges(u))
      if (seen.insert(e.to).second) todo.push_back(e.to);
  }
  return std::nullopt;
}

}  // namespace detail

/// One round from `marker` back to `marker`.
inline RoundOutcome round_analysis(ConfigGraph& g, std::size_t marker) {
  auto seg = analyze_segment(g, marker, {marker});
  for (const auto& [node, mass] : seg.exits)
    if (node != marker) throw AnalysisError("round leaves through a different restart configuration");
  auto cond = analyze_segment(g, marker, {marker}, true);
  RoundOutcome r;
  r.p_reject = seg.reject;
  r.p_accept = cond.accept;
  r.accept_mass = seg.accept;
  r.continue_mass = seg.exits.count(marker) ? seg.exits.at(marker) : Enclosure(0L);
  r.expected_steps = seg.expected_steps;
  return r;
}

inline RoundOutcome round_analysis(const QcfaMachine& machine, const std::string& word, const Config& marker) {
  ConfigGraph g(machine, word);
  auto node = detail::reach(g, marker);
  if (!node) throw AnalysisError("round structure not detected: the restart configuration is never reached");
  return round_analysis(g, *node);
}

/// reject = P_r / (P_a + P_r - P_a P_r), accept = 1 - reject, rounds = 1 / (P_a + P_r - P_a P_r).
inline HaltingSummary closed_form_total(const RoundOutcome& o) {
  auto denominator = [](const Rational& pa, const Rational& pr) -> Rational { return pa + pr - pa * pr; };
  auto reject_at = [&](const Rational& pa, const Rational& pr) -> Rational {
    const Rational d = denominator(pa, pr);
    if (d == 0) throw AnalysisError("machine never halts: P_a + P_r = 0");
    return pr / d;
  };
  const Enclosure pa = o.p_accept.clamped_unit();
  const Enclosure pr = o.p_reject.clamped_unit();
  if (pa.hi() == 0 && pr.hi() == 0) throw AnalysisError("machine never halts: P_a + P_r = 0");

  HaltingSummary s;
  s.strategy = "closed_form";
  // Increasing in P_r, decreasing in P_a.
  if (pa.is_exact() && pr.is_exact()) {
    s.reject = Enclosure(reject_at(pa.lo(), pr.lo()));
  } else {
    if (denominator(pa.lo(), pr.lo()) <= 0) throw AnalysisError("P_a + P_r is not certified positive");
    s.reject = Enclosure::between(reject_at(pa.hi(), pr.lo()), reject_at(pa.lo(), pr.hi())).compact();
  }
  s.accept = (Enclosure(1L) - s.reject).clamped_unit();
  s.residual = Enclosure(0L);
  // 1 - continue = P_a + P_r - P_a P_r is increasing in both arguments.
  Enclosure d = pa.is_exact() && pr.is_exact() ? Enclosure(denominator(pa.lo(), pr.lo()))
                                                : Enclosure::between(denominator(pa.lo(), pr.lo()), denominator(pa.hi(), pr.hi()));
  s.expected_rounds = Enclosure(1L) / d;
  s.expected_steps = o.expected_steps * *s.expected_rounds;
  return s;
}

// ---------------------------------------------------------------------------
// Whole-run analysis through a chain of restart configurations

/// Exact analysis of a machine whose run is cut into segments by `restarts`: each segment
/// either halts or enters a restart configuration; restart configurations may loop to
/// themselves and otherwise must form an acyclic chain.
inline HaltingSummary analyze_exact(ConfigGraph& g, const std::vector<Config>& restarts) {
  std::set<std::size_t> markers;
  for (const auto& c : restarts) markers.insert(g.intern(c));
  const std::size_t init = g.initial();

  SegmentResult prefix;
  if (markers.count(init)) prefix.exits[init] = Enclosure(1L);
  else prefix = analyze_segment(g, init, markers);

  struct Totals {
    Enclosure accept, reject, steps;
  };
  std::map<std::size_t, Totals> done;
  std::set<std::size_t> active;
  std::uint64_t rounds_nodes = 0;
  std::function<const Totals&(std::size_t)> solve = [&](std::size_t marker) -> const Totals& {
    if (auto it = done.find(marker); it != done.end()) return it->second;
    if (!active.insert(marker).second)
      throw AnalysisError("restart configurations form a cycle; only self-loops are supported");
    auto seg = analyze_segment(g, marker, markers);
    ++rounds_nodes;
    Enclosure loop = seg.exits.count(marker) ? seg.exits.at(marker) : Enclosure(0L);
    Enclosure acc = seg.accept, rej = seg.reject, steps = seg.expected_steps;
    for (const auto& [next, mass] : seg.exits) {
      if (next == marker) continue;
      const Totals& t = solve(next);
      acc += mass * t.accept;
      rej += mass * t.reject;
      steps += mass * t.steps;
    }
    const Enclosure leave = (Enclosure(1L) - loop);
    if (leave.hi() <= 0) throw AnalysisError("machine never halts from restart configuration " + g.describe(marker));
    if (!leave.certainly_positive()) throw AnalysisError("halting probability per round is not certified positive");
    active.erase(marker);
    return done[marker] = Totals{acc / leave, rej / leave, steps / leave};
  };

  HaltingSummary s;
  s.strategy = "closed_form";
  Enclosure acc = prefix.accept, rej = prefix.reject, steps = prefix.expected_steps;
  for (const auto& [marker, mass] : prefix.exits) {
    const Totals& t = solve(marker);
    acc += mass * t.accept;
    rej += mass * t.reject;
    steps += mass * t.steps;
  }
  // The halting events partition the run; tighten each side with the other.
  auto tighten = [](const Enclosure& x, const Enclosure& other) {
    Enclosure y = (Enclosure(1L) - other).clamped_unit();
    Rational lo = std::max(x.lo(), y.lo()), hi = std::min(x.hi(), y.hi());
    if (lo > hi) return x.clamped_unit();
    return lo == hi ? Enclosure(lo) : Enclosure::between(lo, hi);
  };
  s.accept = tighten(acc, rej);
  s.reject = tighten(rej, acc);
  s.residual = Enclosure(0L);
  s.expected_steps = steps;
  s.rounds_analyzed = rounds_nodes;
  return s;
}

inline HaltingSummary analyze_exact(const QcfaMachine& machine, const std::string& word,
                                    const std::vector<Config>& restarts) {
  ConfigGraph g(machine, word);
  return analyze_exact(g, restarts);
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct Proportion {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double estimate = 0.0;
  double half_width = 0.0;  // 99% confidence
  std::string method;       // "normal" or "clopper-pearson"
};

/// 99% interval: normal approximation when both hits and misses reach 100, exact binomial otherwise.
inline Proportion proportion_ci(std::uint64_t hits, std::uint64_t trials) {
  Proportion p;
  p.hits = hits;
  p.trials = trials;
  if (trials == 0) return p;
  const double n = static_cast<double>(trials), x = static_cast<double>(hits);
  p.estimate = x / n;
  if (hits >= 100 && trials - hits >= 100) {
    p.method = "normal";
    p.half_width = 2.5758293035489 * std::sqrt(p.estimate * (1 - p.estimate) / n);
    return p;
  }
  p.method = "clopper-pearson";
  const double lo = hits == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1, 0.005);
  const double hi = hits == trials ? 1.0 : boost::math::ibeta_inv(x + 1, n - x, 0.995);
  p.half_width = std::max(p.estimate - lo, hi - p.estimate);
  return p;
}

struct SampledSummary {
  Proportion accept;
  Proportion reject;
  Proportion residual;
  double mean_steps = 0.0;  // over halted trials
  std::uint64_t seed = 0;
  std::uint64_t step_cap = 0;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// Samples trajectories. Trial i draws from its own generator seeded from (seed, i),
/// so the result does not depend on evaluation order.
inline SampledSummary monte_carlo(const QcfaMachine& machine, const std::string& word, std::uint64_t trials,
                                  std::uint64_t seed, std::uint64_t step_cap) {
  if (trials == 0) throw UsageError("trials must be at least 1");
  ConfigGraph g(machine, word);
  const std::size_t init = g.initial();
  std::uint64_t acc = 0, rej = 0, live = 0;
  double steps_sum = 0;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(t)));
    std::size_t node = init;
    std::uint64_t steps = 0;
    while (g.halt(node) == Halt::none && steps < step_cap) {
      const auto& edges = g.edges(node);
      std::size_t pick = edges.size() - 1;
      if (edges.size() > 1) {
        double u = unit(rng), cum = 0;
        for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
          cum += edges[k].approx;
          if (u < cum) {
            pick = k;
            break;
          }
        }
      }
      node = edges[pick].to;
      ++steps;
    }
    switch (g.halt(node)) {
      case Halt::accept: ++acc; steps_sum += static_cast<double>(steps); break;
      case Halt::reject: ++rej; steps_sum += static_cast<double>(steps); break;
      case Halt::none: ++live; break;
    }
  }
  SampledSummary s;
  s.accept = proportion_ci(acc, trials);
  s.reject = proportion_ci(rej, trials);
  s.residual = proportion_ci(live, trials);
  s.mean_steps = acc + rej ? steps_sum / static_cast<double>(acc + rej) : 0.0;
  s.seed = seed;
  s.step_cap = step_cap;
  return s;
}

}  // namespace qcfa
