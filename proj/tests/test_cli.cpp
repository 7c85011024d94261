#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <sstream>

#include "qcfa/commands.hpp"

using namespace qcfa;

namespace {

std::string run(const std::string& name, const CommandOptions& o, int* code = nullptr) {
  std::ostringstream s;
  const int c = run_command(name, o, s);
  if (code) *code = c;
  return s.str();
}

struct Process {
  int status = -1;
  std::string output;
};

Process shell(const std::string& args) {
  Process p;
  const std::string cmd = std::string(QCFA_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return p;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) p.output.append(buf.data(), n);
  const int raw = pclose(pipe);
  p.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return p;
}

}  // namespace

TEST(Commands, ExactOnAeqYesInstance) {
  CommandOptions o;
  o.family = "aeq";
  o.m = 2;
  o.eps = "0.25";
  o.input = "aabb";
  const Json j = Json::parse(run("exact", o));
  EXPECT_EQ(j["accept"]["value"], "1/1");
  EXPECT_EQ(j["reject"]["value"], "0/1");
  EXPECT_EQ(j["accept"]["provenance"], "exact");
}

TEST(Commands, SimulateIsDeterministicPerSeed) {
  CommandOptions o;
  o.family = "length";
  o.m = 3;
  o.input = "aa";
  o.trials = 300;
  o.seed = 42;
  EXPECT_EQ(run("simulate", o), run("simulate", o));
  o.format = "csv";
  EXPECT_EQ(run("simulate", o), run("simulate", o));
}

TEST(Commands, ReportDfaColumn) {
  CommandOptions o;
  o.family = "aeq";
  o.m_range = "1..4";
  const Json j = Json::parse(run("report", o));
  ASSERT_TRUE(j.contains("rows"));
  std::vector<std::string> dfa;
  for (const auto& row : j["rows"]) dfa.push_back(row["dfa_lower_bound"]["value"].get<std::string>());
  EXPECT_EQ(dfa, (std::vector<std::string>{"4", "6", "8", "10"}));
}

TEST(Commands, BoundsTable) {
  CommandOptions o;
  o.family = "twin";
  o.m = 9;
  const Json j = Json::parse(run("bounds", o));
  EXPECT_EQ(j["rows"][0]["2NFA"]["n"], 4);
}

TEST(Commands, VerifyExitCodeIsZeroWhenClean) {
  CommandOptions o;
  o.lemma = "xy";
  o.max_len = 4;
  int code = -1;
  const Json j = Json::parse(run("verify", o, &code));
  EXPECT_EQ(code, 0);
  EXPECT_TRUE(j["passed"].get<bool>());
}

TEST(Commands, UsageErrors) {
  CommandOptions o;
  EXPECT_THROW(run("exact", o), UsageError);  // no family
  o.family = "nope";
  EXPECT_THROW(run("exact", o), UsageError);
  o.family = "aeq";
  o.input = "ab";
  EXPECT_THROW(run("exact", o), UsageError);  // aeq needs --m
  o.m = 2;
  o.format = "xml";
  EXPECT_THROW(run("exact", o), UsageError);
  CommandOptions v;
  v.lemma = "riemann";
  EXPECT_THROW(run("verify", v), UsageError);
}

TEST(Binary, ExitCodes) {
  const auto ok = shell("exact --family length --m 2 --input ab");
  EXPECT_EQ(ok.status, 0);
  EXPECT_NE(ok.output.find("\"1/1\""), std::string::npos);
  EXPECT_EQ(shell("exact --family nope --input ab").status, 1);
  EXPECT_EQ(shell("frobnicate").status, 1);
  EXPECT_EQ(shell("exact --family aeq --m 2 --input abc").status, 1);
}

TEST(Binary, SameFlagsSameBytes) {
  const std::string args = "simulate --family twin --input abcab --trials 200 --seed 9 --format csv";
  const auto a = shell(args), b = shell(args);
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.output, b.output);
  EXPECT_EQ(a.output.substr(0, 11), "machine_id,");
}
