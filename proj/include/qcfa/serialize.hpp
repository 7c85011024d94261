#pragma once

// JSON documents for machines, machine cards, DFAs and results. Exact numbers travel as
// decimal strings; a machine written and read back is identical.

#include <sstream>
#include <string>
#include <unordered_map>

#include <json.hpp>

#include "qcfa/baselines.hpp"
#include "qcfa/engine.hpp"
#include "qcfa/lemmas.hpp"
#include "qcfa/machines.hpp"

namespace qcfa {

using Json = nlohmann::ordered_json;

inline constexpr const char* kMachineFormat = "qcfa-machine/1";

namespace detail {

inline Json big_json(const BigInt& x) { return x.get_str(); }
inline BigInt big_from(const Json& j) {
  if (j.is_number_integer()) return BigInt(j.get<long>());
  BigInt out;
  if (!j.is_string() || out.set_str(j.get<std::string>(), 10) != 0)
    throw UsageError("expected an integer string, got " + j.dump());
  return out;
}

inline Json unitary_json(const Unitary& u) {
  return std::visit(
      [](const auto& op) -> Json {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, Identity>) {
          return {{"type", "identity"}};
        } else if constexpr (std::is_same_v<T, Rotate> || std::is_same_v<T, Reflect>) {
          return {{"type", std::is_same_v<T, Rotate> ? "rotate" : "reflect"},
                  {"block", op.block},
                  {"turns", op.turns},
                  {"eighths", op.eighths}};
        } else if constexpr (std::is_same_v<T, ScaledMatrix>) {
          Json rows = Json::array();
          for (std::size_t i = 0; i < op.matrix.n; ++i) {
            Json row = Json::array();
            for (std::size_t k = 0; k < op.matrix.n; ++k) row.push_back(big_json(op.matrix(i, k)));
            rows.push_back(row);
          }
          return {{"type", "scaled_matrix"}, {"block", op.block}, {"matrix", rows},
                  {"denominator", big_json(op.denominator)}};
        } else if constexpr (std::is_same_v<T, Hadamard>) {
          return {{"type", "hadamard"}, {"block", op.block}, {"i", op.i}, {"j", op.j}};
        } else if constexpr (std::is_same_v<T, DenseMatrix>) {
          Json entries = Json::array();
          for (const auto& q : op.entries) entries.push_back(to_string(q));
          return {{"type", "dense_matrix"}, {"block", op.block}, {"n", op.n}, {"entries", entries}};
        } else {
          return {{"type", "block_swap"}, {"i", op.i}, {"j", op.j}};
        }
      },
      u);
}

inline Unitary unitary_from(const Json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "identity") return Identity{};
  if (type == "rotate")
    return Rotate{j.at("block").get<std::size_t>(), j.at("turns").get<std::int64_t>(), j.at("eighths").get<int>()};
  if (type == "reflect")
    return Reflect{j.at("block").get<std::size_t>(), j.at("turns").get<std::int64_t>(), j.at("eighths").get<int>()};
  if (type == "scaled_matrix") {
    const auto& rows = j.at("matrix");
    std::vector<BigInt> entries;
    for (const auto& row : rows) {
      if (row.size() != rows.size()) throw UsageError("scaled_matrix must be square");
      for (const auto& x : row) entries.push_back(big_from(x));
    }
    return ScaledMatrix{j.at("block").get<std::size_t>(), IntegerMatrix(rows.size(), std::move(entries)),
                        big_from(j.at("denominator"))};
  }
  if (type == "hadamard")
    return Hadamard{j.at("block").get<std::size_t>(), j.at("i").get<std::size_t>(), j.at("j").get<std::size_t>()};
  if (type == "dense_matrix") {
    DenseMatrix d{j.at("block").get<std::size_t>(), j.at("n").get<std::size_t>(), {}};
    for (const auto& x : j.at("entries")) d.entries.push_back(parse_rational(x.get<std::string>()));
    if (d.entries.size() != d.n * d.n) throw UsageError("dense_matrix entry count does not match n");
    return d;
  }
  if (type == "block_swap") return BlockSwap{j.at("i").get<std::size_t>(), j.at("j").get<std::size_t>()};
  throw UsageError("unknown unitary type '" + type + "'");
}

template <class Names>
std::unordered_map<std::string, std::size_t> name_index(const Names& names, const char* what) {
  std::unordered_map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < names.size(); ++i)
    if (!out.emplace(names[i], i).second) throw UsageError(std::string("duplicate ") + what + " name '" + names[i] + "'");
  return out;
}

inline std::size_t lookup(const std::unordered_map<std::string, std::size_t>& index, const Json& j, const char* what) {
  auto it = index.find(j.get<std::string>());
  if (it == index.end()) throw UsageError(std::string("unknown ") + what + " '" + j.get<std::string>() + "'");
  return it->second;
}

}  // namespace detail

inline Json machine_to_json(const QcfaMachine& m) {
  Json j;
  j["format"] = kMachineFormat;
  j["id"] = m.id;
  j["alphabet"] = m.alphabet;
  j["blocks"] = Json::array();
  for (const auto& b : m.blocks) j["blocks"].push_back({{"kind", to_string(b.kind)}, {"dim", b.dim}});
  j["quantum_states"] = m.quantum_states;
  j["classical_states"] = m.classical_states;
  j["initial_quantum"] = m.quantum_states.at(m.initial_quantum);
  j["initial_classical"] = m.classical_states.at(m.initial_classical);
  j["accepting"] = Json::array();
  for (auto s : m.accepting) j["accepting"].push_back(m.classical_states.at(s));
  j["rejecting"] = Json::array();
  for (auto s : m.rejecting) j["rejecting"].push_back(m.classical_states.at(s));
  j["transitions"] = Json::array();
  for (std::size_t s = 0; s < m.classical_states.size(); ++s)
    for (std::size_t sym = 0; sym < m.tape_width(); ++sym) {
      const auto& t = m.transitions.at(s * m.tape_width() + sym);
      if (!t) continue;
      Json tj;
      tj["state"] = m.classical_states[s];
      tj["symbol"] = std::string(1, m.symbol_char(sym));
      if (const auto* u = std::get_if<Unitary>(&t->op)) {
        tj["unitary"] = detail::unitary_json(*u);
      } else {
        Json outcomes = Json::array();
        for (const auto& o : std::get<Measurement>(t->op).outcomes)
          outcomes.push_back({{"label", o.label}, {"basis", o.basis}});
        tj["measurement"] = {{"outcomes", outcomes}};
      }
      tj["targets"] = Json::array();
      for (const auto& tg : t->targets)
        tj["targets"].push_back({{"state", m.classical_states.at(tg.state)}, {"move", tg.move}});
      j["transitions"].push_back(tj);
    }
  return j;
}

/// Reads a machine document. The result is not validated; call validate() on it.
inline QcfaMachine machine_from_json(const Json& j) {
  try {
    if (j.value("format", std::string(kMachineFormat)) != kMachineFormat)
      throw UsageError("unsupported machine format '" + j.at("format").get<std::string>() + "'");
    QcfaMachine m;
    m.id = j.at("id").get<std::string>();
    m.alphabet = j.at("alphabet").get<std::string>();
    for (char c : m.alphabet)
      if (c == kLeftEnd || c == kRightEnd) throw UsageError("endmarkers cannot be input symbols");
    for (const auto& b : j.at("blocks"))
      m.blocks.push_back(QuantumBlock{parse_block_kind(b.at("kind").get<std::string>()), b.at("dim").get<std::size_t>()});
    m.quantum_states = j.at("quantum_states").get<std::vector<std::string>>();
    m.classical_states = j.at("classical_states").get<std::vector<std::string>>();
    if (m.quantum_states.size() != m.quantum_dimension())
      throw UsageError("quantum_states does not match the block dimensions");
    const auto qidx = detail::name_index(m.quantum_states, "quantum state");
    const auto sidx = detail::name_index(m.classical_states, "classical state");
    m.initial_quantum = detail::lookup(qidx, j.at("initial_quantum"), "quantum state");
    m.initial_classical = detail::lookup(sidx, j.at("initial_classical"), "classical state");
    for (const auto& s : j.at("accepting")) m.accepting.push_back(detail::lookup(sidx, s, "classical state"));
    for (const auto& s : j.at("rejecting")) m.rejecting.push_back(detail::lookup(sidx, s, "classical state"));
    m.transitions.resize(m.classical_states.size() * m.tape_width());
    for (const auto& tj : j.at("transitions")) {
      const std::size_t s = detail::lookup(sidx, tj.at("state"), "classical state");
      const std::string sym = tj.at("symbol").get<std::string>();
      auto idx = sym.size() == 1 ? m.symbol_index(sym[0]) : std::nullopt;
      if (!idx) throw UsageError("transition on unknown symbol '" + sym + "'");
      Transition t;
      if (tj.contains("unitary")) {
        t.op = detail::unitary_from(tj.at("unitary"));
      } else {
        Measurement meas;
        for (const auto& o : tj.at("measurement").at("outcomes"))
          meas.outcomes.push_back(Outcome{o.at("label").get<std::string>(), o.at("basis").get<std::vector<std::size_t>>()});
        t.op = std::move(meas);
      }
      for (const auto& tg : tj.at("targets"))
        t.targets.push_back(Target{detail::lookup(sidx, tg.at("state"), "classical state"), tg.at("move").get<int>()});
      auto& slot = m.transitions[s * m.tape_width() + *idx];
      if (slot) throw UsageError("duplicate transition for (" + m.classical_states[s] + ", " + sym + ")");
      slot = std::move(t);
    }
    m.invalidate_cache();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed machine document: ") + e.what());
  }
}

inline std::string machine_to_text(const QcfaMachine& m) { return machine_to_json(m).dump(2) + "\n"; }

inline QcfaMachine machine_from_text(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("machine file is not valid JSON: ") + e.what());
  }
  return machine_from_json(j);
}

inline Json card_to_json(const MachineCard& c) {
  Json j;
  j["format"] = "qcfa-card/1";
  j["family"] = c.family;
  j["m"] = c.m;
  j["eps"] = to_string(c.eps);
  j["coin_flips"] = c.coin_flips;
  j["qs"] = c.qs;
  j["cs"] = c.cs;
  j["remark_cs"] = c.remark_cs ? Json(*c.remark_cs) : Json(nullptr);
  j["runtime_class"] = c.runtime_class;
  j["markers"] = Json::array();
  for (const auto& mk : c.markers) j["markers"].push_back({{"state", mk.state}, {"head", mk.head}, {"quantum", mk.quantum}});
  j["machine"] = machine_to_json(c.machine);
  return j;
}

inline MachineCard card_from_json(const Json& j) {
  try {
    MachineCard c;
    c.family = j.at("family").get<std::string>();
    c.m = j.at("m").get<long>();
    c.eps = parse_rational(j.at("eps").get<std::string>());
    c.coin_flips = j.at("coin_flips").get<std::vector<unsigned>>();
    c.qs = j.at("qs").get<std::size_t>();
    c.cs = j.at("cs").get<std::size_t>();
    if (!j.at("remark_cs").is_null()) c.remark_cs = j.at("remark_cs").get<std::size_t>();
    c.runtime_class = j.at("runtime_class").get<std::string>();
    for (const auto& mk : j.at("markers"))
      c.markers.push_back(MarkerSpec{mk.at("state").get<std::string>(), mk.at("head").get<std::size_t>(),
                                     mk.at("quantum").get<std::size_t>()});
    c.machine = machine_from_json(j.at("machine"));
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed card document: ") + e.what());
  }
}

inline Json dfa_to_json(const Dfa& d) {
  Json j;
  j["format"] = "qcfa-dfa/1";
  j["alphabet"] = d.alphabet;
  j["states"] = d.states;
  j["start"] = d.states.at(d.start);
  j["accepting"] = Json::array();
  for (std::size_t q = 0; q < d.size(); ++q)
    if (d.accepting[q]) j["accepting"].push_back(d.states[q]);
  j["delta"] = Json::array();
  for (std::size_t q = 0; q < d.size(); ++q)
    for (std::size_t a = 0; a < d.alphabet.size(); ++a)
      j["delta"].push_back({{"from", d.states[q]},
                            {"symbol", std::string(1, d.alphabet[a])},
                            {"to", d.states[d.delta[q * d.alphabet.size() + a]]}});
  return j;
}

inline Dfa dfa_from_json(const Json& j) {
  try {
    Dfa d;
    d.alphabet = j.at("alphabet").get<std::string>();
    for (const auto& s : j.at("states")) d.add_state(s.get<std::string>());
    const auto idx = detail::name_index(d.states, "DFA state");
    d.start = detail::lookup(idx, j.at("start"), "DFA state");
    for (const auto& s : j.at("accepting")) d.accepting[detail::lookup(idx, s, "DFA state")] = true;
    std::vector<bool> seen(d.delta.size(), false);
    for (const auto& e : j.at("delta")) {
      const auto from = detail::lookup(idx, e.at("from"), "DFA state");
      const std::string sym = e.at("symbol").get<std::string>();
      if (sym.size() != 1) throw UsageError("DFA symbol must be one character");
      const auto slot = from * d.alphabet.size() + d.symbol(sym[0]);
      d.delta[slot] = detail::lookup(idx, e.at("to"), "DFA state");
      seen[slot] = true;
    }
    for (bool s : seen)
      if (!s) throw UsageError("DFA document is not total");
    d.check_total();
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("malformed DFA document: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Result cells. Each carries its provenance: exact, certified-interval or sampled.

inline Json value_json(const Enclosure& e) {
  Json j;
  if (e.is_exact()) {
    j["provenance"] = "exact";
    j["value"] = to_string(e.exact());
  } else {
    j["provenance"] = "certified-interval";
    j["lo"] = to_string(e.lo());
    j["hi"] = to_string(e.hi());
  }
  j["approx"] = e.approx();
  return j;
}

inline Json value_json(const Proportion& p) {
  return {{"provenance", "sampled"},     {"estimate", p.estimate}, {"ci99_half_width", p.half_width},
          {"hits", p.hits},              {"trials", p.trials},     {"method", p.method}};
}

inline Json value_json(const BigInt& x) { return {{"provenance", "exact"}, {"value", x.get_str()}, {"approx", x.get_d()}}; }

struct RunParams {
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  long precision = kDefaultPrecision;
  std::optional<std::uint64_t> max_steps;
  std::optional<std::uint64_t> max_rounds;
};

inline Json params_json(const RunParams& p) {
  auto opt = [](const auto& o) { return o ? Json(*o) : Json(nullptr); };
  return {{"seed", opt(p.seed)},
          {"trials", opt(p.trials)},
          {"precision", p.precision},
          {"max_steps", opt(p.max_steps)},
          {"max_rounds", opt(p.max_rounds)}};
}

inline Json result_json(const std::string& machine_id, const std::string& word, const HaltingSummary& s,
                        const RunParams& params) {
  Json j;
  j["machine_id"] = machine_id;
  j["word"] = word;
  j["strategy"] = s.strategy;
  j["accept"] = value_json(s.accept);
  j["reject"] = value_json(s.reject);
  j["residual"] = value_json(s.residual);
  j["expected_steps"] = value_json(s.expected_steps);
  if (s.expected_rounds) j["expected_rounds"] = value_json(*s.expected_rounds);
  if (s.steps_analyzed) j["steps_analyzed"] = s.steps_analyzed;
  if (s.rounds_analyzed) j["rounds_analyzed"] = s.rounds_analyzed;
  j["params"] = params_json(params);
  return j;
}

inline Json round_json(const RoundOutcome& r) {
  return {{"p_accept_per_round", value_json(r.p_accept)},
          {"p_reject_per_round", value_json(r.p_reject)},
          {"p_continue", value_json(r.p_continue())},
          {"accept_mass_per_round", value_json(r.accept_mass)},
          {"expected_steps_per_round", value_json(r.expected_steps)}};
}

inline Json result_json(const std::string& machine_id, const std::string& word, const SampledSummary& s,
                        const RunParams& params) {
  Json j;
  j["machine_id"] = machine_id;
  j["word"] = word;
  j["strategy"] = "monte_carlo";
  j["accept"] = value_json(s.accept);
  j["reject"] = value_json(s.reject);
  j["residual"] = value_json(s.residual);
  j["expected_steps"] = {{"provenance", "sampled"}, {"estimate", s.mean_steps}};
  j["params"] = params_json(params);
  return j;
}

// ---------------------------------------------------------------------------
// Reports from the baselines and the lemma oracles.

inline Json lemma_json(const LemmaReport& r) {
  Json j;
  j["lemma"] = r.lemma;
  j["cap"] = r.cap;
  j["instances_checked"] = r.instances_checked;
  j["counterexamples"] = r.counterexamples;
  if (r.min_margin)
    j["min_margin"] = value_json(Enclosure(*r.min_margin));
  else
    j["min_margin"] = nullptr;
  for (const auto& [k, v] : r.details) j["details"][k] = v;
  j["passed"] = r.passed();
  return j;
}

inline Json certificate_json(const NerodeCertificate& c) {
  Json j;
  j["family"] = c.family;
  j["m"] = c.m;
  j["strings"] = c.strings;
  j["witnesses"] = Json::array();
  for (const auto& w : c.witnesses)
    j["witnesses"].push_back({{"left", w.left}, {"right", w.right}, {"extension", w.extension},
                              {"accepted", w.left_accepted ? "left" : "right"}});
  j["unreachable_word"] = c.unreachable_word ? Json(*c.unreachable_word) : Json(nullptr);
  j["implied_states"] = c.implied_states;
  j["proof"] = c.proof_lines();
  return j;
}

inline Json audit_json(const ProtocolAudit& a) {
  return {{"m", a.m},
          {"dfa_states", a.dfa_states},
          {"pairs_checked", a.pairs_checked},
          {"distinct_messages", a.distinct_messages},
          {"cost_bits", a.cost_bits},
          {"implied_state_bound", value_json(a.implied_state_bound)}};
}

inline Json bound_json(const BoundReport& r) {
  return {{"model", to_string(r.model)},
          {"b", r.b},
          {"dfa_bound", value_json(r.dfa_bound)},
          {"n", r.n},
          {"simulation_size_at_n", r.size_at_n.get_str()},
          {"simulation_size_below", r.size_below.get_str()},
          {"trace", r.trace}};
}

inline Json floor_json(const FloorCheck& f) {
  Json j = bound_json(f.report);
  j["family"] = f.family;
  j["m"] = f.m.get_str();
  j["floor"] = f.floor_text;
  j["floor_approx"] = f.floor_value;
  j["meets_floor"] = f.meets_floor;
  j["strictly_exceeds_floor"] = f.strictly_exceeds;
  return j;
}

// ---------------------------------------------------------------------------
// CSV

namespace detail {
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Json& j) {
  if (j.is_null()) return "";
  if (j.is_string()) return j.get<std::string>();
  return j.dump();
}
}  // namespace detail

/// Header row plus one row per object in `rows`; columns are taken in order of first appearance.
inline std::string json_rows_to_csv(const Json& rows) {
  std::vector<std::string> columns;
  for (const auto& row : rows)
    for (const auto& [k, v] : row.items())
      if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
  std::ostringstream out;
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << detail::csv_field(columns[i]);
  out << "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << detail::csv_field(row.contains(columns[i]) ? detail::cell_text(row[columns[i]]) : "");
    out << "\n";
  }
  return out.str();
}

/// One row per quantity of a result document (accept, reject, ...), with its provenance.
inline Json result_rows(const Json& result) {
  Json rows = Json::array();
  for (const char* q : {"accept", "reject", "residual", "expected_steps", "expected_rounds"}) {
    if (!result.contains(q)) continue;
    Json row;
    row["machine_id"] = result.value("machine_id", "");
    row["word"] = result.value("word", "");
    row["strategy"] = result.value("strategy", "");
    row["quantity"] = q;
    for (const auto& [k, v] : result[q].items()) row[k] = v;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qcfa
