// Acceptance run: one PASS/FAIL line per criterion, nonzero exit status if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "qcfa/baselines.hpp"
#include "qcfa/commands.hpp"
#include "qcfa/engine.hpp"
#include "qcfa/lemmas.hpp"
#include "qcfa/machines.hpp"

using namespace qcfa;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
  std::vector<std::string> problems;

  void fail(const std::string& why) {
    pass = false;
    if (problems.size() < 5) problems.push_back(why);
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::vector<std::string> words_upto(const std::string& alphabet, std::size_t max_len) {
  std::vector<std::string> out;
  for (std::size_t len = 0; len <= max_len; ++len)
    for (auto& w : detail::words_of_length(alphabet, len)) out.push_back(std::move(w));
  return out;
}

const std::vector<Rational>& epsilons() {
  static const std::vector<Rational> e{Rational(1, 4), Rational(1, 8)};
  return e;
}

std::string rstr(const Rational& q) { return to_string(q); }

// ---------------------------------------------------------------------------

// Criterion 1. Reject mass at a horizon is nondecreasing in the horizon and bounded by the
// total, so an exact zero total together with one long truncated run covers every horizon.
Verdict certainty_on_yes_instances() {
  Verdict v;
  std::vector<std::pair<MachineCard, std::string>> cases;
  for (const auto& eps : epsilons()) {
    for (long m = 1; m <= 7; ++m) {
      const auto c = build_family("length", m, eps);
      for (const auto& w : detail::words_of_length("ab", static_cast<std::size_t>(m))) cases.emplace_back(c, w);
    }
    for (long m = 1; m <= 5; ++m)
      cases.emplace_back(build_family("aeq", m, eps), std::string(m, 'a') + std::string(m, 'b'));
    const auto eq = build_family("eq", 0, eps);
    for (long n = 0; n <= 7; ++n) cases.emplace_back(eq, std::string(n, 'a') + std::string(n, 'b'));
    const auto twin = build_family("twin", 0, eps);
    for (std::size_t len = 0; len <= 4; ++len)
      for (const auto& x : detail::words_of_length("ab", len)) cases.emplace_back(twin, x + "c" + x);
    for (long m = 1; m <= 3; ++m) {
      const auto c = build_family("twin_m", m, eps);
      for (const auto& x : detail::words_of_length("ab", static_cast<std::size_t>(m))) cases.emplace_back(c, x + "c" + x);
    }
  }
  std::size_t truncated_runs = 0;
  for (const auto& [card, w] : cases) {
    const auto where = card.machine.id + " on \"" + w + "\"";
    const auto s = analyze_exact(card.machine, w, card.restart_configs());
    if (!s.reject.is_zero()) v.fail(where + ": total reject " + std::to_string(s.reject.approx()));
    if (!s.accept.is_exact() || s.accept.exact() != 1) v.fail(where + ": accept is not exactly 1");
    const auto t = evolve_truncated(card.machine, w, 1024);
    ++truncated_runs;
    if (!t.reject.is_zero()) v.fail(where + ": reject mass after 1024 steps is nonzero");
  }
  v.detail = std::to_string(cases.size()) + " yes-instances, exact accept = 1 and reject = 0; " +
             std::to_string(truncated_runs) + " truncated runs to 1024 steps with reject mass 0";
  return v;
}

// Criterion 2: every no-instance with |w| <= 12 of length, aeq, eq and twin.
Verdict one_sided_error() {
  Verdict v;
  std::size_t checked = 0;
  Rational worst_margin = 1;
  std::string worst;
  auto sweep = [&](const MachineCard& card, PromiseFamily f, long m, const std::string& alphabet, const Rational& eps) {
    const Rational need = 1 - eps;
    for (const auto& w : words_upto(alphabet, 12)) {
      if (classify({f, m, w}) != Classification::no) continue;
      const auto s = analyze_exact(card.machine, w, card.restart_configs());
      ++checked;
      if (!(s.reject.lo() > need)) {
        v.fail(card.machine.id + " on \"" + w + "\": reject lo " + std::to_string(s.reject.lo().get_d()));
        continue;
      }
      const Rational margin = s.reject.lo() - need;
      if (margin < worst_margin) {
        worst_margin = margin;
        worst = card.machine.id + " on \"" + w + "\"";
      }
    }
  };
  for (const auto& eps : epsilons()) {
    for (long m = 1; m <= 7; ++m) sweep(build_family("length", m, eps), PromiseFamily::length, m, "ab", eps);
    for (long m = 1; m <= 5; ++m) sweep(build_family("aeq", m, eps), PromiseFamily::aeq, m, "ab", eps);
    sweep(build_family("eq", 0, eps), PromiseFamily::eq, 0, "ab", eps);
    sweep(build_family("twin", 0, eps), PromiseFamily::twin, 0, "abc", eps);
  }
  std::ostringstream d;
  d << checked << " no-instances, every certified reject > 1 - eps; smallest margin " << std::setprecision(3)
    << worst_margin.get_d() << " (" << worst << ")";
  v.detail = d.str();
  return v;
}

// Criterion 3.
Verdict rotation_sweep() {
  Verdict v;
  const auto r = rotation_bound_audit(100);
  if (!r.passed()) v.fail(r.counterexamples.front());
  if (r.instances_checked != 100) v.fail("expected 100 values of d");
  std::ostringstream d;
  d << "d = 1..100 certified (29, 70 and 99 included); smallest margin >= " << std::setprecision(3)
    << (r.min_margin ? r.min_margin->get_d() : 0.0);
  v.detail = d.str();
  return v;
}

// Criterion 4.
Verdict random_walk() {
  Verdict v;
  for (long n = 1; n <= 100; ++n) {
    const Rational p = random_walk_absorption(n);
    if (p != make_rational(1, BigInt(n + 1))) v.fail("n=" + std::to_string(n) + ": got " + rstr(p));
  }
  v.detail = "absorption = 1/(n+1) exactly for n = 1..100";
  return v;
}

// Criterion 5. Two words per length: a^n and a fixed pseudo-random word.
Verdict length_round_probabilities() {
  Verdict v;
  std::mt19937_64 rng(5);
  std::size_t checked = 0;
  for (const auto& eps : epsilons())
    for (long m = 1; m <= 7; ++m) {
      const auto card = build_family("length", m, eps);
      const unsigned k = card.coin_flips.at(0);
      for (long n = 0; n <= 14; ++n) {
        std::string mixed;
        for (long i = 0; i < n; ++i) mixed += (rng() & 1) ? 'a' : 'b';
        const Rational expected = make_rational(1, pow_ui(2, k) * BigInt((n + 1) * (n + 1)));
        for (const auto& w : {std::string(static_cast<std::size_t>(n), 'a'), mixed}) {
          const auto r = round_analysis(card.machine, w, card.restart_configs().front());
          ++checked;
          if (!r.p_accept.is_exact() || r.p_accept.exact() != expected)
            v.fail(card.machine.id + " on \"" + w + "\": P_a " + std::to_string(r.p_accept.approx()) + ", want " + rstr(expected));
        }
      }
    }
  v.detail = std::to_string(checked) + " rounds with P_a = 1/(2^k (n+1)^2) exactly (m <= 7, n <= 14)";
  return v;
}

// Criterion 6.
Verdict k_machinery() {
  Verdict v;
  const auto closure = verify_k_closure(8);
  const auto collision = verify_no_collision(8, 100000, 1);
  const auto avoidance = verify_basis_avoidance(8);
  for (const auto* r : {&closure, &collision, &avoidance})
    if (!r->passed()) v.fail(r->lemma + ": " + r->counterexamples.front());
  v.detail = "closure " + std::to_string(closure.instances_checked) + ", no-collision " +
             std::to_string(collision.instances_checked) + " (incl. 10^5 random vectors), basis avoidance " +
             std::to_string(avoidance.instances_checked) + " words; 0 counterexamples";
  return v;
}

// Criterion 7.
Verdict xy_lemma() {
  Verdict v;
  const auto r = verify_xy(8);
  if (!r.passed()) v.fail(r.counterexamples.front());
  if (r.instances_checked != 4097) v.fail("expected 4097 word pairs, saw " + std::to_string(r.instances_checked));
  std::ostringstream d;
  d << r.instances_checked << " pairs with n+m <= 8; smallest gap - 5^-(n+m) = " << std::setprecision(3)
    << (r.min_margin ? r.min_margin->get_d() : 0.0);
  v.detail = d.str();
  return v;
}

// Criterion 8. Certificates are rechecked here against the promise classifier.
Verdict classical_baselines() {
  Verdict v;
  for (long m = 1; m <= 6; ++m) {
    const Dfa d = build_figure_dfa(m);
    if (d.size() != static_cast<std::size_t>(2 * m + 2)) v.fail("a^m b^m DFA m=" + std::to_string(m) + " has " + std::to_string(d.size()) + " states");
    for (const auto& w : words_upto("ab", static_cast<std::size_t>(2 * m + 3))) {
      const auto c = classify({PromiseFamily::aeq, m, w});
      if (c != Classification::outside && run_dfa(d, w) != (c == Classification::yes))
        v.fail("a^m b^m DFA m=" + std::to_string(m) + " disagrees on \"" + w + "\"");
    }
  }
  std::string twin_sizes;
  for (long m = 1; m <= 4; ++m) {
    const std::size_t n = minimize_dfa(build_twin_dfa(m)).size();
    twin_sizes += (m > 1 ? "," : "") + std::to_string(n);
    if (n < (std::size_t{1} << m)) v.fail("minimal twin DFA m=" + std::to_string(m) + " has only " + std::to_string(n) + " states");
  }
  auto recheck = [&](const NerodeCertificate& cert, PromiseFamily f, std::size_t want) {
    if (cert.implied_states < want)
      v.fail(cert.family + " m=" + std::to_string(cert.m) + ": certificate implies only " + std::to_string(cert.implied_states));
    for (const auto& w : cert.witnesses) {
      const bool l = classify({f, cert.m, w.left + w.extension}) == Classification::yes;
      const bool r = classify({f, cert.m, w.right + w.extension}) == Classification::yes;
      if (l == r) v.fail(cert.family + " witness \"" + w.extension + "\" does not separate \"" + w.left + "\" and \"" + w.right + "\"");
    }
  };
  for (long m = 1; m <= 6; ++m) recheck(nerode_distinguishability("aeq", m), PromiseFamily::aeq, static_cast<std::size_t>(2 * m + 2));
  for (long m = 1; m <= 4; ++m) recheck(nerode_distinguishability("twin", m), PromiseFamily::twin_m, std::size_t{1} << m);
  v.detail = "a^m b^m DFA has 2m+2 states and agrees with the classifier (m <= 6); minimal twin DFA sizes " + twin_sizes +
             " (m = 1..4); Nerode certificates hold for aeq m <= 6 and twin m <= 4";
  return v;
}

// Criterion 9. Instances are drawn at random and kept when their exact expected running time
// is at most 3000 steps, so that 10^5 sampled runs stay cheap.
Verdict strategy_agreement() {
  Verdict v;
  std::mt19937_64 rng(20261019);
  const std::vector<std::pair<std::string, long>> pool{{"length", 4}, {"eq", 0}, {"aeq", 3}, {"twin", 0}, {"twin_m", 2}};
  std::size_t accepted = 0, drawn = 0, mixed = 0;
  double worst_ratio = 0.0;
  const std::vector<std::uint64_t> horizons{2, 8, 32, 128, 512, 2048};
  while (accepted < 30) {
    ++drawn;
    const auto& [family, max_m] = pool[rng() % pool.size()];
    const long m = max_m == 0 ? 0 : 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(max_m));
    const Rational eps = epsilons()[rng() % 2];
    const auto card = build_family(family, m, eps);
    const std::string alphabet = card.machine.alphabet;
    std::string w;
    for (std::uint64_t i = 0, len = rng() % 7; i < len; ++i) w += alphabet[rng() % alphabet.size()];
    const auto exact = analyze_exact(card.machine, w, card.restart_configs());
    if (exact.expected_steps.approx() > 3000.0) continue;
    ++accepted;
    if (!(exact.accept.is_exact() && (exact.accept.exact() == 0 || exact.accept.exact() == 1))) ++mixed;
    const std::string where = card.machine.id + " on \"" + w + "\"";

    const auto mc = monte_carlo(card.machine, w, 100000, rng(), 10'000'000);
    for (const auto& [name, sampled, truth] : {std::tuple{"accept", mc.accept, exact.accept}, std::tuple{"reject", mc.reject, exact.reject}}) {
      const double err = std::abs(sampled.estimate - truth.approx());
      const double allowed = 4.0 * sampled.half_width + truth.width().get_d();
      worst_ratio = std::max(worst_ratio, sampled.half_width > 0 ? err / sampled.half_width : 0.0);
      if (err > allowed)
        v.fail(where + ": sampled " + name + " " + std::to_string(sampled.estimate) + " vs " + std::to_string(truth.approx()));
    }

    Enclosure prev_acc(0L), prev_rej(0L);
    for (auto h : horizons) {
      const auto t = evolve_truncated(card.machine, w, h);
      // With interval masses only a certified decrease or overshoot counts as a violation.
      if (t.accept.hi() < prev_acc.lo() || t.reject.hi() < prev_rej.lo())
        v.fail(where + ": truncated mass decreased at horizon " + std::to_string(h));
      if (t.accept.lo() > exact.accept.hi() || t.reject.lo() > exact.reject.hi())
        v.fail(where + ": truncated mass exceeds the closed form at horizon " + std::to_string(h));
      prev_acc = t.accept;
      prev_rej = t.reject;
    }
  }
  std::ostringstream d;
  d << accepted << " instances (" << drawn << " drawn, " << mixed << " with accept strictly between 0 and 1), 10^5 trials each; largest |error| = " << std::setprecision(2)
    << worst_ratio << " half-widths; truncated masses monotone and below the closed form";
  v.detail = d.str();
  return v;
}

// Criterion 10. Least-squares slope of log(expected steps) against log |w| on yes-instances
// a^m b^m, which run longest; twin rounds must grow by a constant factor per length step.
Verdict runtime_class() {
  Verdict v;
  std::vector<double> xs, ys;
  std::string steps_text;
  for (long m : {4L, 6L, 8L, 10L}) {
    const auto card = build_family("aeq", m, Rational(1, 4));
    const auto s = analyze_exact(card.machine, std::string(m, 'a') + std::string(m, 'b'), card.restart_configs());
    xs.push_back(std::log(2.0 * static_cast<double>(m)));
    ys.push_back(std::log(s.expected_steps.approx()));
    steps_text += (steps_text.empty() ? "" : ",") + std::to_string(static_cast<long long>(s.expected_steps.approx()));
  }
  const double mx = (xs[0] + xs[1] + xs[2] + xs[3]) / 4, my = (ys[0] + ys[1] + ys[2] + ys[3]) / 4;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < 4; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  if (slope > 4.5) v.fail("aeq power-law exponent " + std::to_string(slope) + " > 4.5");

  const auto twin = build_family("twin", 0, Rational(1, 4));
  std::vector<Rational> rounds;
  for (const char* x : {"a", "ab", "aba", "abab"}) {
    const auto round = round_analysis(twin.machine, std::string(x) + "c" + x, twin.restart_configs().front());
    const auto s = closed_form_total(round);
    if (!s.expected_rounds || !s.expected_rounds->is_exact()) {
      v.fail(std::string("no exact expected rounds for twin x=") + x);
      return v;
    }
    rounds.push_back(s.expected_rounds->exact());
  }
  double min_ratio = 1e300;
  for (std::size_t i = 1; i < rounds.size(); ++i) {
    const Rational ratio = rounds[i] / rounds[i - 1];
    min_ratio = std::min(min_ratio, ratio.get_d());
    if (ratio < 2) v.fail("twin expected rounds grew by only " + rstr(ratio) + " between lengths");
  }
  std::ostringstream d;
  d << "aeq expected steps " << steps_text << " at |w| = 8,12,16,20, exponent " << std::setprecision(3) << slope
    << "; twin expected rounds at |w| = 3,5,7,9 grow by factors >= " << min_ratio;
  v.detail = d.str();
  return v;
}

// Criterion 11. A cell passes when the calculator's n is at least the floor, decided in integers.
Verdict bound_tables() {
  Verdict v;
  std::ostringstream d;
  std::vector<std::string> equalities;
  for (const auto& [family, range] : {std::pair{"aeq", "16,512,65536"}, std::pair{"twin", "4,9,16"}}) {
    CommandOptions o;
    o.family = family;
    o.m_range = range;
    std::ostringstream sink;
    run_command("report", o, sink);
    const Json doc = Json::parse(sink.str());
    for (const auto& row : doc.at("rows")) {
      d << family << " m=" << row.at("m").dump() << ":";
      for (const char* model : {"2DFA", "2NFA", "2PFA"}) {
        const auto& cell = row.at(model);
        d << " " << model << "=" << cell.at("n").dump();
        if (!cell.at("meets_floor").get<bool>())
          v.fail(std::string(family) + " m=" + row.at("m").dump() + " " + model + ": n below " + cell.at("floor").get<std::string>());
        else if (!cell.at("strictly_exceeds_floor").get<bool>())
          equalities.push_back(std::string(family) + " m=" + row.at("m").dump() + " " + model);
      }
      d << "; ";
    }
  }
  d << "all cells >= floor";
  if (!equalities.empty()) {
    d << " (equal to the floor:";
    for (const auto& e : equalities) d << " " << e;
    d << ")";
  }
  v.detail = d.str();
  return v;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Verdict()> run;
  double budget_seconds;  // 0 when no runtime limit applies
};

}  // namespace

// With arguments, only the listed criterion numbers run.
int main(int argc, char** argv) {
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  const std::vector<Criterion> criteria{
      {1, "certainty on yes-instances", certainty_on_yes_instances, 300},
      {2, "one-sided error bound", one_sided_error, 600},
      {3, "rotation lemma sweep", rotation_sweep, 60},
      {4, "random-walk absorption", random_walk, 0},
      {5, "length-checker round probabilities", length_round_probabilities, 0},
      {6, "K-set machinery", k_machinery, 300},
      {7, "xy gap lemma", xy_lemma, 300},
      {8, "classical baselines", classical_baselines, 0},
      {9, "strategy agreement", strategy_agreement, 0},
      {10, "runtime class", runtime_class, 0},
      {11, "bound tables", bound_tables, 0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = Clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.fail(std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(start);
    if (c.budget_seconds > 0 && secs > c.budget_seconds)
      v.fail("took " + std::to_string(secs) + " s, budget " + std::to_string(static_cast<int>(c.budget_seconds)) + " s");
    std::cout << (v.pass ? "PASS" : "FAIL") << " " << c.id << " " << c.name << ": " << v.detail << " [" << std::fixed
              << std::setprecision(1) << secs << " s]" << std::defaultfloat << "\n";
    for (const auto& p : v.problems) std::cout << "    " << p << "\n";
    std::cout.flush();
    if (!v.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
