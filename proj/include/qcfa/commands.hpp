#pragma once

// The command layer behind the qcfa tool. Each command turns options into a document;
// rendering to JSON or CSV is separate so output is deterministic for fixed flags.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "qcfa/serialize.hpp"

namespace qcfa {

struct CommandOptions {
  std::string family;
  std::string machine_file;
  std::optional<long> m;
  std::string m_range;  // "a..b" or a comma list
  std::string eps = "1/4";
  std::string input;
  std::uint64_t trials = 10000;
  std::uint64_t seed = 1;
  std::optional<std::uint64_t> max_rounds;
  std::optional<std::uint64_t> max_steps;
  long precision = kDefaultPrecision;
  std::string format = "json";
  std::string out;
  // verify
  std::string lemma = "all";
  long max_len = 8;
  long d_max = 100;
  std::uint64_t random_trials = 100000;
  // bounds
  unsigned long b = 1;
};

struct CommandOutput {
  Json document;
  Json rows = Json::array();  // CSV view
  int exit_code = 0;
};

namespace detail {

inline Rational parse_eps(const std::string& text) {
  Rational eps;
  try {
    eps = parse_rational(text);
  } catch (const Error&) {
    throw UsageError("--eps must be a rational or decimal number, got '" + text + "'");
  }
  return eps;
}

inline long require_m(const CommandOptions& o) {
  if (!o.m) throw UsageError("--m is required for family '" + o.family + "'");
  return *o.m;
}

inline bool family_needs_m(const std::string& family) { return family != "eq" && family != "twin"; }

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// The machine selected by --family or --machine-file, with markers when built from a family.
inline MachineCard select_machine(const CommandOptions& o) {
  if (!o.machine_file.empty() && !o.family.empty()) throw UsageError("give either --family or --machine-file, not both");
  if (!o.machine_file.empty()) {
    const std::string text = read_file(o.machine_file);
    Json j;
    try {
      j = Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw UsageError("machine file is not valid JSON: " + std::string(e.what()));
    }
    if (j.contains("machine")) {
      MachineCard c = card_from_json(j);
      validate(c.machine);
      return c;
    }
    MachineCard c;
    c.machine = machine_from_json(j);
    validate(c.machine);
    c.family = "file";
    return c;
  }
  if (o.family.empty()) throw UsageError("--family or --machine-file is required");
  const auto& names = family_names();
  if (std::find(names.begin(), names.end(), o.family) == names.end())
    throw UsageError("unknown family '" + o.family + "'");
  const long m = family_needs_m(o.family) ? require_m(o) : o.m.value_or(0);
  return build_family(o.family, m, parse_eps(o.eps));
}

inline Json card_summary(const MachineCard& c) {
  Json j;
  j["machine_id"] = c.machine.id;
  j["family"] = c.family;
  j["m"] = c.m;
  j["eps"] = to_string(c.eps);
  j["qs"] = c.qs ? c.qs : c.machine.quantum_states.size();
  j["cs"] = c.cs ? c.cs : c.machine.classical_states.size();
  if (c.remark_cs) j["remark_cs"] = *c.remark_cs;
  j["coin_flips"] = c.coin_flips;
  j["runtime_class"] = c.runtime_class;
  return j;
}

inline RunParams params_of(const CommandOptions& o) {
  RunParams p;
  p.precision = o.precision;
  p.max_steps = o.max_steps;
  p.max_rounds = o.max_rounds;
  return p;
}

/// Classification of the input under the family's promise, when the family has one.
inline Json promise_json(const MachineCard& c, const std::string& word) {
  if (c.family.empty() || c.family == "file") return nullptr;
  const auto f = promise_family_of(c.family);
  if (!f) return nullptr;
  return to_string(classify({*f, c.m, word}));
}

}  // namespace detail

inline CommandOutput command_simulate(const CommandOptions& o) {
  PrecisionScope scope(o.precision);
  const MachineCard card = detail::select_machine(o);
  const std::uint64_t cap = o.max_steps.value_or(100'000'000);
  const SampledSummary s = monte_carlo(card.machine, o.input, o.trials, o.seed, cap);
  RunParams p = detail::params_of(o);
  p.seed = o.seed;
  p.trials = o.trials;
  p.max_steps = cap;
  CommandOutput out;
  out.document = result_json(card.machine.id, o.input, s, p);
  out.document["promise"] = detail::promise_json(card, o.input);
  out.document["machine"] = detail::card_summary(card);
  out.rows = result_rows(out.document);
  return out;
}

/// Exact analysis through the machine's restart configurations. Machines without markers,
/// or runs without usable round structure, fall back to truncated evolution.
inline CommandOutput command_exact(const CommandOptions& o) {
  PrecisionScope scope(o.precision);
  const MachineCard card = detail::select_machine(o);
  CommandOutput out;
  HaltingSummary s;
  std::optional<RoundOutcome> round;
  std::string fallback_reason;
  if (!card.markers.empty()) {
    try {
      ConfigGraph g(card.machine, o.input);
      const auto restarts = card.restart_configs();
      s = analyze_exact(g, restarts);
      if (restarts.size() == 1)
        if (auto node = detail::reach(g, restarts.front())) round = round_analysis(g, *node);
    } catch (const AnalysisError& e) {
      fallback_reason = e.what();
    }
  } else {
    fallback_reason = "machine has no restart configurations";
  }
  if (!fallback_reason.empty()) s = evolve_truncated(card.machine, o.input, o.max_steps.value_or(10000));
  out.document = result_json(card.machine.id, o.input, s, detail::params_of(o));
  if (round) out.document["round"] = round_json(*round);
  if (!fallback_reason.empty()) out.document["fallback_reason"] = fallback_reason;
  out.document["promise"] = detail::promise_json(card, o.input);
  out.document["machine"] = detail::card_summary(card);
  out.rows = result_rows(out.document);
  return out;
}

/// Builds the family's DFA (minimised for twin), its distinguishability certificate, and
/// for twin the equality protocol audit. --input runs the DFA on a word.
inline CommandOutput command_dfa(const CommandOptions& o) {
  const long m = detail::require_m(o);
  CommandOutput out;
  Json& j = out.document;
  j["family"] = o.family;
  j["m"] = m;
  Dfa dfa;
  if (o.family == "aeq") {
    dfa = build_figure_dfa(m);
    j["construction"] = "explicit";
    j["states"] = dfa.size();
    j["lower_bound"] = 2 * m + 2;
  } else if (o.family == "twin") {
    const Dfa trie = build_twin_dfa(m);
    dfa = minimize_dfa(trie);
    j["construction"] = "trie+minimization";
    j["trie_states"] = trie.size();
    j["states"] = dfa.size();
    j["lower_bound"] = pow_ui(2, static_cast<unsigned long>(m)).get_str();
    j["protocol_audit"] = audit_json(eq_protocol_audit(dfa, m));
  } else {
    throw UsageError("dfa supports families aeq and twin");
  }
  j["certificate"] = certificate_json(nerode_distinguishability(o.family, m));
  if (!o.input.empty()) j["input"] = {{"word", o.input}, {"accepted", run_dfa(dfa, o.input)}};
  j["dfa"] = dfa_to_json(dfa);
  out.rows.push_back({{"family", o.family},
                      {"m", m},
                      {"states", j["states"]},
                      {"lower_bound", j["lower_bound"]},
                      {"certified_states", j["certificate"]["implied_states"]}});
  return out;
}

inline CommandOutput command_verify(const CommandOptions& o) {
  PrecisionScope scope(o.precision);
  std::vector<LemmaReport> reports;
  const std::string& l = o.lemma;
  const bool all = l == "all";
  bool known = all;
  auto want = [&](const char* name) {
    const bool hit = all || l == name;
    known = known || hit;
    return hit;
  };
  if (want("k_closure")) reports.push_back(verify_k_closure(o.max_len));
  if (want("no_collision")) reports.push_back(verify_no_collision(o.max_len, o.random_trials, o.seed));
  if (want("basis_avoidance")) reports.push_back(verify_basis_avoidance(o.max_len));
  if (want("xy")) reports.push_back(verify_xy(o.max_len));
  if (want("rotation")) reports.push_back(rotation_bound_audit(o.d_max));
  if (!known)
    throw UsageError("unknown lemma '" + l + "' (expected all, k_closure, no_collision, basis_avoidance, xy or rotation)");
  CommandOutput out;
  out.document["reports"] = Json::array();
  for (const auto& r : reports) {
    out.document["reports"].push_back(lemma_json(r));
    out.rows.push_back({{"lemma", r.lemma},
                        {"cap", r.cap},
                        {"instances_checked", r.instances_checked},
                        {"counterexamples", r.counterexamples.size()},
                        {"min_margin", r.min_margin ? Json(r.min_margin->get_d()) : Json(nullptr)}});
    if (!r.passed()) out.exit_code = 4;
  }
  out.document["passed"] = out.exit_code == 0;
  return out;
}

namespace detail {

inline std::vector<long> parse_m_values(const CommandOptions& o) {
  std::vector<long> values;
  if (!o.m_range.empty()) {
    try {
      const auto dots = o.m_range.find("..");
      if (dots != std::string::npos) {
        const long lo = std::stol(o.m_range.substr(0, dots)), hi = std::stol(o.m_range.substr(dots + 2));
        if (lo > hi || hi - lo > 10000) throw UsageError("--m-range must be an increasing range of at most 10000 values");
        for (long m = lo; m <= hi; ++m) values.push_back(m);
      } else {
        std::stringstream ss(o.m_range);
        for (std::string item; std::getline(ss, item, ',');) values.push_back(std::stol(item));
      }
    } catch (const std::logic_error&) {
      throw UsageError("cannot parse --m-range '" + o.m_range + "'");
    }
  } else if (o.m) {
    values.push_back(*o.m);
  }
  if (values.empty()) throw UsageError("--m or --m-range is required");
  for (long m : values)
    if (m < 1) throw UsageError("m must be >= 1");
  return values;
}

inline Json bound_row(const std::string& family, long m, unsigned long b) {
  Json row;
  row["family"] = family;
  row["m"] = m;
  row["dfa_lower_bound"] = value_json(family_dfa_bound(family, m));
  for (auto model : {TwoWayModel::dfa2, TwoWayModel::nfa2, TwoWayModel::pfa2})
    row[to_string(model)] = floor_json(floor_check(family, m, model, b));
  return row;
}

}  // namespace detail

/// For each m: the DFA lower bound and the smallest 2DFA/2NFA/2PFA consistent with it.
inline CommandOutput command_bounds(const CommandOptions& o) {
  if (o.family != "aeq" && o.family != "twin") throw UsageError("bounds supports families aeq and twin");
  CommandOutput out;
  out.document["family"] = o.family;
  out.document["b"] = o.b;
  out.document["rows"] = Json::array();
  for (long m : detail::parse_m_values(o)) {
    Json row = detail::bound_row(o.family, m, o.b);
    out.document["rows"].push_back(row);
    Json flat{{"family", o.family}, {"m", m}, {"dfa_lower_bound", row["dfa_lower_bound"]["value"]}};
    for (const char* model : {"2DFA", "2NFA", "2PFA"}) {
      flat[std::string(model) + "_n"] = row[model]["n"];
      flat[std::string(model) + "_floor"] = row[model]["floor_approx"];
      flat[std::string(model) + "_meets_floor"] = row[model]["meets_floor"];
    }
    out.rows.push_back(flat);
  }
  return out;
}

/// The succinctness table: 2QCFA QS and CS next to the DFA bound and the two-way bounds.
/// For twin the 2QCFA is the recognizer of L^twin(m).
inline CommandOutput command_report(const CommandOptions& o) {
  if (o.family != "aeq" && o.family != "twin") throw UsageError("report supports families aeq and twin");
  PrecisionScope scope(o.precision);
  const Rational eps = detail::parse_eps(o.eps);
  CommandOutput out;
  out.document["family"] = o.family;
  out.document["eps"] = to_string(eps);
  out.document["b"] = o.b;
  out.document["rows"] = Json::array();
  for (long m : detail::parse_m_values(o)) {
    const MachineCard card = build_family(o.family == "aeq" ? "aeq" : "twin_m", m, eps);
    Json row = detail::bound_row(o.family, m, o.b);
    row["qcfa_qs"] = value_json(BigInt(static_cast<unsigned long>(card.qs)));
    row["qcfa_cs"] = value_json(BigInt(static_cast<unsigned long>(card.cs)));
    // CS(A) = CS(A1) + CS(A2) + QS(A1) for intersections; null otherwise.
    row["qcfa_cs_formula"] = card.remark_cs ? value_json(BigInt(static_cast<unsigned long>(*card.remark_cs))) : Json(nullptr);
    row["machine_id"] = card.machine.id;
    out.document["rows"].push_back(row);
    Json flat{{"m", m},
              {"qcfa_qs", card.qs},
              {"qcfa_cs", card.cs},
              {"qcfa_cs_formula", card.remark_cs ? Json(*card.remark_cs) : Json(nullptr)},
              {"dfa", row["dfa_lower_bound"]["value"]}};
    for (const char* model : {"2DFA", "2NFA", "2PFA"}) {
      flat[std::string(model)] = row[model]["n"];
      flat[std::string(model) + "_floor"] = row[model]["floor_approx"];
      flat[std::string(model) + "_meets_floor"] = row[model]["meets_floor"];
    }
    flat["provenance"] = "exact";
    out.rows.push_back(flat);
  }
  return out;
}

inline std::string render(const CommandOutput& out, const std::string& format) {
  if (format == "json") return out.document.dump(2) + "\n";
  if (format == "csv") return json_rows_to_csv(out.rows);
  throw UsageError("--format must be json or csv");
}

/// Runs a command by name and writes the rendered document to --out or `stream`.
inline int run_command(const std::string& name, const CommandOptions& o, std::ostream& stream) {
  if (o.format != "json" && o.format != "csv") throw UsageError("--format must be json or csv");
  CommandOutput out;
  if (name == "simulate") out = command_simulate(o);
  else if (name == "exact") out = command_exact(o);
  else if (name == "dfa") out = command_dfa(o);
  else if (name == "verify") out = command_verify(o);
  else if (name == "bounds") out = command_bounds(o);
  else if (name == "report") out = command_report(o);
  else throw UsageError("unknown command '" + name + "'");
  const std::string text = render(out, o.format);
  if (o.out.empty()) {
    stream << text;
  } else {
    std::ofstream f(o.out);
    if (!f) throw UsageError("cannot write '" + o.out + "'");
    f << text;
  }
  return out.exit_code;
}

}  // namespace qcfa
