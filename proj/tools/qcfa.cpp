#include <iostream>

#include <CLI11.hpp>

#include "qcfa/commands.hpp"

namespace {

void add_machine_options(CLI::App* cmd, qcfa::CommandOptions& o) {
  cmd->add_option("--family", o.family, "machine family: length, eq, aeq, twin, twin_m, exact_length");
  cmd->add_option("--machine,--machine-file", o.machine_file, "machine or card document (JSON)");
  cmd->add_option("--m", o.m, "family parameter m");
  cmd->add_option("--eps", o.eps, "error bound, 0 < eps < 1/2 (rational or decimal)")->capture_default_str();
  cmd->add_option("--input", o.input, "input word over the machine alphabet");
}

void add_output_options(CLI::App* cmd, qcfa::CommandOptions& o) {
  cmd->add_option("--format", o.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  cmd->add_option("--out", o.out, "write the document here instead of stdout");
  cmd->add_option("--precision", o.precision, "working precision in bits")
      ->check(CLI::Range(32L, static_cast<long>(qcfa::kMaxPrecision)))
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and verification toolkit for two-way finite automata with quantum and classical states"};
  app.require_subcommand(1);
  qcfa::CommandOptions o;

  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo estimate of acceptance and rejection");
  add_machine_options(simulate, o);
  simulate->add_option("--trials", o.trials, "number of sampled runs")->capture_default_str();
  simulate->add_option("--seed", o.seed, "random seed")->capture_default_str();
  simulate->add_option("--max-steps", o.max_steps, "step cap per run");

  auto* exact = app.add_subcommand("exact", "exact halting probabilities through the round structure");
  add_machine_options(exact, o);
  exact->add_option("--max-steps", o.max_steps, "horizon of the truncated fallback");
  exact->add_option("--max-rounds", o.max_rounds, "recorded in the parameters");

  auto* dfa = app.add_subcommand("dfa", "classical DFA, minimisation, certificate and protocol audit");
  dfa->add_option("--family", o.family, "aeq or twin")->required();
  dfa->add_option("--m", o.m, "family parameter m")->required();
  dfa->add_option("--input", o.input, "optional word to run through the DFA");

  auto* verify = app.add_subcommand("verify", "exhaustive checks of the number-theoretic lemmas");
  verify->add_option("--lemma", o.lemma, "all, k_closure, no_collision, basis_avoidance, xy, rotation")
      ->capture_default_str();
  verify->add_option("--max-len", o.max_len, "word length cap")->capture_default_str();
  verify->add_option("--d-max", o.d_max, "largest d for the rotation bound")->capture_default_str();
  verify->add_option("--trials", o.random_trials, "random vectors for the collision check")->capture_default_str();
  verify->add_option("--seed", o.seed, "random seed")->capture_default_str();

  auto* bounds = app.add_subcommand("bounds", "two-way state lower bounds from the DFA bound");
  auto* report = app.add_subcommand("report", "succinctness table for a range of m");
  for (auto* cmd : {bounds, report}) {
    cmd->add_option("--family", o.family, "aeq or twin")->required();
    cmd->add_option("--m", o.m, "a single m");
    cmd->add_option("--m-range", o.m_range, "a..b or a comma separated list");
    cmd->add_option("--b", o.b, "constant in the 2PFA simulation bound")->capture_default_str();
  }
  report->add_option("--eps", o.eps, "error bound of the 2QCFA")->capture_default_str();

  for (auto* cmd : {simulate, exact, dfa, verify, bounds, report}) add_output_options(cmd, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    return qcfa::run_command(app.get_subcommands().front()->get_name(), o, std::cout);
  } catch (const qcfa::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
