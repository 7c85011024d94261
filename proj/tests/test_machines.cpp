#include <gtest/gtest.h>

#include "qcfa/engine.hpp"
#include "qcfa/machines.hpp"

using namespace qcfa;

namespace {

HaltingSummary exact(const MachineCard& c, const std::string& w) { return analyze_exact(c.machine, w, c.restart_configs()); }

void expect_certain_accept(const MachineCard& c, const std::string& w) {
  const auto s = exact(c, w);
  EXPECT_EQ(s.accept.exact(), Rational(1)) << c.machine.id << " on " << w;
  EXPECT_TRUE(s.reject.is_zero()) << c.machine.id << " on " << w;
}

void expect_reject_beyond(const MachineCard& c, const std::string& w, const Rational& bound) {
  const auto s = exact(c, w);
  EXPECT_TRUE(s.reject.lo() > bound) << c.machine.id << " on " << w << ": reject lo " << s.reject.lo().get_d();
}

// Follows the deterministic first pass of a rotation machine up to the measurement on the right
// endmarker and returns the rotation index found there.
RotationIndex index_at_right_end(const QcfaMachine& m, const std::string& word) {
  const std::string tape = m.tape(word);
  Branch b{m.initial_classical, 0, m.initial_amplitude(), Enclosure(1L), 0};
  for (int guard = 0; guard < 1000; ++guard) {
    if (b.head == tape.size() - 1 && m.classical_states[b.classical] == "scan")
      return std::get<RotationIndex>(b.quantum.value);
    auto next = step(b, m, tape);
    if (next.size() != 1) throw std::runtime_error("first pass is not deterministic");
    b = next.front().first;
  }
  throw std::runtime_error("never reached the right endmarker");
}

}  // namespace

TEST(LengthChecker, Card) {
  const auto c = build_length_checker(3, Rational(1, 4));
  EXPECT_EQ(c.qs, 2u);
  EXPECT_EQ(c.coin_flips, std::vector<unsigned>{3});  // 1 + ceil(log2 4)
  EXPECT_EQ(c.cs, 12u + 2 * 3);  // 12 fixed states plus two per coin flip
  EXPECT_THROW(build_length_checker(3, Rational(1, 2)), UsageError);
  EXPECT_THROW(build_length_checker(3, Rational(0)), UsageError);
}

TEST(LengthChecker, Examples) {
  const auto c = build_length_checker(3, Rational(1, 4));
  expect_certain_accept(c, "aaa");
  const auto r = round_analysis(c.machine, "aaaa", c.restart_configs().front());
  EXPECT_TRUE(r.p_reject.lo() >= Rational(1, 3));
  expect_reject_beyond(build_length_checker(4, Rational(1, 4)), "aa", Rational(3, 4));
}

TEST(LengthChecker, RotationCancelsExactlyWhenLengthsMatch) {
  for (long m = 1; m <= 6; ++m) {
    const auto c = build_length_checker(m, Rational(1, 4));
    for (long n = 0; n <= 8; ++n) {
      const auto idx = index_at_right_end(c.machine, std::string(static_cast<std::size_t>(n), n % 2 ? 'a' : 'b'));
      EXPECT_EQ(idx.turns, m - n);
      if (n == m) EXPECT_TRUE(idx.is_basis());
    }
  }
}

TEST(EqChecker, Examples) {
  const auto c = build_eq_checker(Rational(1, 4));
  EXPECT_EQ(c.qs, 2u);
  expect_certain_accept(c, "aabb");
  expect_certain_accept(c, "");
  EXPECT_EQ(exact(c, "aba").reject.exact(), Rational(1));
  expect_reject_beyond(c, "aab", Rational(3, 4));
}

TEST(Intersect, ErrorBudgetAndAccounting) {
  const auto c = build_aeq_solver(2, Rational(1, 4));
  EXPECT_EQ(c.eps, Rational(15, 64));
  EXPECT_EQ(c.qs, 4u);
  ASSERT_TRUE(c.remark_cs);
  // Reported formula: CS1 + CS2 + QS1.
  const auto e = build_eq_checker(Rational(1, 8));
  const auto l = build_length_checker(4, Rational(1, 8));
  EXPECT_EQ(*c.remark_cs, e.cs + l.cs + e.qs);
  EXPECT_EQ(c.cs, c.machine.classical_states.size());
}

TEST(Intersect, SelfIntersectionKeepsYesInstances) {
  const auto m = build_length_checker(2, Rational(1, 4));
  const auto mm = intersect(m, m);
  validate(mm.machine);
  expect_certain_accept(mm, "ab");
  expect_reject_beyond(mm, "abb", Rational(3, 4));
}

TEST(Intersect, AlphabetMismatch) {
  EXPECT_THROW(intersect(build_length_checker(2, Rational(1, 4)), build_twin_recognizer(Rational(1, 4))), UsageError);
}

TEST(AeqSolver, Examples) {
  const auto c = build_aeq_solver(2, Rational(1, 4));
  expect_certain_accept(c, "aabb");
  expect_reject_beyond(c, "abab", Rational(3, 4));
  EXPECT_EQ(classify({PromiseFamily::aeq, 2, "a"}), Classification::outside);
}

TEST(TwinRecognizer, Examples) {
  const auto c = build_twin_recognizer(Rational(1, 8));
  EXPECT_EQ(c.qs, 3u);
  EXPECT_EQ(c.coin_flips, std::vector<unsigned>{3});
  EXPECT_EQ(build_twin_recognizer(Rational(1, 100)).coin_flips, std::vector<unsigned>{7});
  expect_certain_accept(c, "abcab");
  expect_certain_accept(c, "c");
  const auto r = round_analysis(c.machine, "acb", c.restart_configs().front());
  EXPECT_TRUE(r.p_reject.is_exact());
  EXPECT_GE(r.p_reject.exact(), Rational(1, 25));
  EXPECT_EQ(exact(c, "ab").reject.exact(), Rational(1));
  EXPECT_EQ(exact(c, "acbc").reject.exact(), Rational(1));
}

TEST(TwinRecognizer, ReturnPassRestoresTheStart) {
  // For each x, (A or B)/5 per symbol forward then the transposes in reverse gives (1,0,0).
  for (std::size_t len = 0; len <= 6; ++len)
    for (unsigned long bits = 0; bits < (1ul << len); ++bits) {
      FiveAdicVector v = FiveAdicVector::unit(3, 0);
      std::vector<Generator> word;
      for (std::size_t i = 0; i < len; ++i) word.push_back((bits >> i) & 1 ? Generator::B : Generator::A);
      for (Generator g : word) v = five_adic_apply(g, v);
      for (auto it = word.rbegin(); it != word.rend(); ++it)
        v = five_adic_apply(*it == Generator::A ? Generator::A_inverse : Generator::B_inverse, v);
      ASSERT_EQ(v, FiveAdicVector::unit(3, 0));
      ASSERT_EQ(v.scale(), 0u);
    }
}

TEST(ExactLength, Examples) {
  const auto c = build_exact_length_checker(3, Rational(1, 4));
  expect_certain_accept(c, "abb");
  expect_reject_beyond(c, "abba", Rational(3, 4));
  expect_reject_beyond(c, std::string(100, 'a'), Rational(3, 4));
  expect_reject_beyond(c, "", Rational(3, 4));
}

TEST(TwinM, Examples) {
  const auto c = build_twin_m_recognizer(1, Rational(1, 4));
  expect_certain_accept(c, "aca");
  expect_reject_beyond(c, "acb", Rational(3, 4));
  expect_reject_beyond(build_twin_m_recognizer(2, Rational(1, 4)), "acaca", Rational(3, 4));
  expect_reject_beyond(c, "abcab", Rational(3, 4));
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify({PromiseFamily::aeq, 3, "aaabbb"}), Classification::yes);
  EXPECT_EQ(classify({PromiseFamily::length, 4, "aa"}), Classification::no);
  EXPECT_EQ(classify({PromiseFamily::length, 4, "a"}), Classification::outside);
  EXPECT_EQ(classify({PromiseFamily::twin_m, 2, "abcab"}), Classification::yes);
  EXPECT_EQ(classify({PromiseFamily::twin_m, 2, "acaca"}), Classification::no);
  EXPECT_EQ(classify({PromiseFamily::twin, 0, "c"}), Classification::yes);
  EXPECT_THROW(classify({PromiseFamily::aeq, 2, "abc"}), UsageError);
  EXPECT_STREQ(to_string(Classification::outside), "outside-promise");
}

TEST(Cards, CountsMatchTheMachine) {
  for (const auto& family : family_names())
    for (long m : {1L, 2L, 3L}) {
      const auto c = build_family(family, m, Rational(1, 8));
      EXPECT_EQ(c.qs, c.machine.quantum_states.size()) << family << m;
      EXPECT_EQ(c.cs, c.machine.classical_states.size()) << family << m;
    }
}
