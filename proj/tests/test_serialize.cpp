#include <gtest/gtest.h>

#include "qcfa/baselines.hpp"
#include "qcfa/engine.hpp"
#include "qcfa/machines.hpp"
#include "qcfa/serialize.hpp"

using namespace qcfa;

TEST(MachineFormat, RoundTripIsExactForEveryFamily) {
  for (const auto& family : family_names()) {
    const auto card = build_family(family, 2, Rational(1, 8));
    const std::string text = machine_to_text(card.machine);
    const QcfaMachine back = machine_from_text(text);
    EXPECT_EQ(machine_to_text(back), text) << family;
    EXPECT_TRUE(validation_errors(back).empty()) << family;
  }
}

TEST(MachineFormat, ReloadedMachineGivesTheSameAnswers) {
  const auto card = build_family("twin", 0, Rational(1, 4));
  const auto back = machine_from_text(machine_to_text(card.machine));
  const auto a = analyze_exact(card.machine, "abcab", card.restart_configs());
  const auto b = analyze_exact(back, "abcab", card.restart_configs());
  EXPECT_EQ(a.accept, b.accept);
  EXPECT_EQ(a.expected_steps, b.expected_steps);
}

TEST(MachineFormat, MalformedDocumentsAreUsageErrors) {
  const Json good = machine_to_json(build_family("length", 2, Rational(1, 4)).machine);
  EXPECT_THROW(machine_from_text("{not json"), UsageError);
  EXPECT_THROW(machine_from_json(Json::object()), UsageError);

  Json wrong_format = good;
  wrong_format["format"] = "qcfa-machine/9";
  EXPECT_THROW(machine_from_json(wrong_format), UsageError);

  Json bad_state = good;
  bad_state["transitions"][0]["targets"][0]["state"] = "nowhere";
  EXPECT_THROW(machine_from_json(bad_state), UsageError);

  Json bad_unitary = good;
  bad_unitary["transitions"][0]["unitary"] = {{"type", "warp"}};
  EXPECT_THROW(machine_from_json(bad_unitary), UsageError);
}

TEST(CardFormat, RoundTrip) {
  const auto card = build_family("aeq", 2, Rational(1, 4));
  const Json j = card_to_json(card);
  EXPECT_EQ(j["format"], "qcfa-card/1");
  const auto back = card_from_json(j);
  EXPECT_EQ(card_to_json(back).dump(), j.dump());
  EXPECT_EQ(back.restart_configs().size(), card.restart_configs().size());
  Json broken = j;
  broken.erase("qs");
  EXPECT_THROW(card_from_json(broken), UsageError);
}

TEST(DfaFormat, RoundTrip) {
  const Dfa d = build_figure_dfa(3);
  const Json j = dfa_to_json(d);
  const Dfa back = dfa_from_json(j);
  EXPECT_EQ(back.delta, d.delta);
  EXPECT_EQ(back.states, d.states);
  EXPECT_EQ(dfa_to_json(back).dump(), j.dump());
  Json broken = j;
  broken["delta"][0]["to"] = "missing";
  EXPECT_THROW(dfa_from_json(broken), UsageError);
}

TEST(Values, ProvenanceTags) {
  EXPECT_EQ(value_json(Enclosure(Rational(1, 3)))["provenance"], "exact");
  EXPECT_EQ(value_json(Enclosure(Rational(1, 3)))["value"], "1/3");
  EXPECT_EQ(value_json(Enclosure(Rational(1)))["value"], "1/1");
  const Json iv = value_json(Enclosure::between(Rational(1, 4), Rational(1, 2)));
  EXPECT_EQ(iv["provenance"], "certified-interval");
  EXPECT_EQ(iv["lo"], "1/4");
  EXPECT_EQ(value_json(proportion_ci(30, 100))["provenance"], "sampled");
  EXPECT_EQ(value_json(BigInt(12))["value"], "12");
}

TEST(Values, ResultDocumentAndCsv) {
  const auto card = build_family("length", 2, Rational(1, 4));
  const auto s = analyze_exact(card.machine, "ab", card.restart_configs());
  RunParams p;
  const Json r = result_json(card.machine.id, "ab", s, p);
  EXPECT_EQ(r["accept"]["value"], "1/1");
  EXPECT_TRUE(r["params"]["seed"].is_null());
  const std::string csv = json_rows_to_csv(result_rows(r));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "machine_id,word,strategy,quantity,provenance,value,approx");
  EXPECT_EQ(json_rows_to_csv(Json::array({{{"a", "x,y"}}})), "a\n\"x,y\"\n");
}
