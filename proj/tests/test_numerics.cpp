#include <gtest/gtest.h>

#include <random>

#include "qcfa/numerics.hpp"
#include "qcfa/rotation.hpp"

using namespace qcfa;

TEST(Rational, ParsesFractionsIntegersAndDecimals) {
  EXPECT_EQ(parse_rational("3/6"), Rational(1, 2));
  EXPECT_EQ(parse_rational("-7"), Rational(-7));
  EXPECT_EQ(parse_rational("0.125"), Rational(1, 8));
  EXPECT_EQ(to_string(make_rational(-3, 9)), "-1/3");
  EXPECT_THROW(parse_rational("1/0"), UsageError);
  EXPECT_THROW(parse_rational("x"), UsageError);
}

TEST(Rational, CeilLog2Inverse) {
  EXPECT_EQ(ceil_log2_inverse(Rational(1, 4)), 2u);
  EXPECT_EQ(ceil_log2_inverse(Rational(1, 5)), 3u);
  EXPECT_EQ(ceil_log2_inverse(Rational(1, 8)), 3u);
  EXPECT_EQ(ceil_log2_inverse(Rational(3, 10)), 2u);
}

TEST(RotationProbability, ZeroTurnsIsZero) {
  auto i = rotation_reject_probability(0);
  EXPECT_TRUE(i.contains(Rational(0)));
  EXPECT_LE(i.hi().to_double(), 1e-70);
}

TEST(RotationProbability, OneTurnValue) {
  // Oracle: sin^2(sqrt(2)*pi) = 0.929108...; reference digits from an independent
  // 50-digit evaluation.
  auto i = rotation_reject_probability(1);
  const Rational ref = parse_rational("0.92910809283441");
  EXPECT_TRUE(i.certainly_greater(ref - parse_rational("1/100000000000000")));
  EXPECT_TRUE(i.certainly_less(ref + parse_rational("1/100000000000000")));
  EXPECT_LT(i.width().to_double(), 1e-12);
  EXPECT_TRUE(i.certainly_greater(Rational(1, 3)));
}

TEST(RotationProbability, FiveTurnsAboveBound) {
  EXPECT_TRUE(rotation_reject_probability(5).certainly_greater(Rational(1, 51)));
}

TEST(RotationProbability, WidthShrinksWithPrecision) {
  for (long t : {1L, 7L, 99L, -40L}) {
    auto a = rotation_reject_probability(t, 128);
    auto b = rotation_reject_probability(t, 512);
    EXPECT_LE(a.width().to_double(), std::ldexp(1.0, -(128 - 8)));
    EXPECT_LE(b.width().to_double(), std::ldexp(1.0, -(512 - 8)) + 1e-300);
    EXPECT_TRUE(a.contains(b)) << t;
  }
}

TEST(RotationProbability, EvenInTurns) {
  for (long t = 1; t <= 60; ++t) {
    auto p = rotation_reject_probability(t);
    auto q = rotation_reject_probability(-t);
    EXPECT_TRUE(compare(p.lo(), q.hi()) <= 0 && compare(q.lo(), p.hi()) <= 0) << t;
    EXPECT_LE(std::abs(p.midpoint() - q.midpoint()), 2 * std::ldexp(1.0, -(256 - 8)));
    EXPECT_LE(p.width().to_double(), std::ldexp(1.0, -(256 - 8)));
  }
}

TEST(RotationProbability, RejectsLowPrecision) { EXPECT_THROW(rotation_reject_probability(1, 32), UsageError); }

TEST(RotationIndex, AdditiveAndReflective) {
  RotationIndex r(3);
  EXPECT_EQ(r.rotated(-3, 0), RotationIndex(0));
  EXPECT_EQ(RotationIndex(0).reflected(0, 1).reflected(0, 1), RotationIndex(0));
  EXPECT_EQ(RotationIndex::basis(1), RotationIndex(0, 2));
  EXPECT_EQ(RotationIndex(0, 6), RotationIndex(0, 2));
}

TEST(RotationIndex, BasisEnclosuresAreExactWithoutTurns) {
  EXPECT_EQ(rotation_basis_enclosure(RotationIndex(0, 1), 0), Enclosure(Rational(1, 2)));
  EXPECT_EQ(rotation_basis_enclosure(RotationIndex(0, 2), 1), Enclosure(1L));
  EXPECT_EQ(rotation_basis_enclosure(RotationIndex(0, 0), 1), Enclosure(0L));
  auto a = rotation_basis_enclosure(RotationIndex(2), 0);
  auto b = rotation_basis_enclosure(RotationIndex(2), 1);
  auto sum = a + b;
  EXPECT_TRUE(sum.contains(Rational(1)));
}

TEST(Enclosure, ArithmeticIsExactOnExactInputs) {
  Enclosure a(Rational(1, 3)), b(Rational(1, 6));
  EXPECT_EQ((a + b).exact(), Rational(1, 2));
  EXPECT_EQ((a * b).exact(), Rational(1, 18));
  EXPECT_EQ((a / b).exact(), Rational(2));
  EXPECT_THROW(a / Enclosure(0L), Error);
}

TEST(Enclosure, IntervalDivisionContainsPointQuotients) {
  auto x = Enclosure::between(Rational(1, 4), Rational(1, 2));
  auto y = Enclosure::between(Rational(2), Rational(3));
  auto q = x / y;
  EXPECT_EQ(q.lo(), Rational(1, 12));
  EXPECT_EQ(q.hi(), Rational(1, 4));
}

TEST(Enclosure, CertifyWithEscalationThrowsWhenUndecidable) {
  EXPECT_THROW(certify_with_escalation([](mpfr_prec_t) { return Certainty::inconclusive; }, "never", 64, 256),
               CertificationError);
  int calls = 0;
  auto c = certify_with_escalation(
      [&](mpfr_prec_t bits) {
        ++calls;
        return bits >= 1024 ? Certainty::yes : Certainty::inconclusive;
      },
      "late");
  EXPECT_EQ(c, Certainty::yes);
  EXPECT_EQ(calls, 3);
}

// Soundness under refinement: a random expression evaluated at doubled precision
// lands inside the coarser enclosure.
TEST(CertifiedInterval, RandomExpressionsRefineMonotonically) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<long> num(-1000, 1000), den(1, 997), pick(0, 3), turn(-50, 50);
  for (int trial = 0; trial < 1000; ++trial) {
    auto eval = [&](mpfr_prec_t p, std::mt19937_64 g) {
      auto local = [&](auto& d) { return d(g); };
      CertifiedInterval acc = CertifiedInterval::from_rational(Rational(local(num), local(den)), p);
      for (int op = 0; op < 6; ++op) {
        CertifiedInterval rhs = local(pick) == 0 ? rotation_reject_probability(local(turn), p)
                                                 : CertifiedInterval::from_rational(Rational(local(num), local(den)), p);
        switch (local(pick)) {
          case 0: acc = acc + rhs; break;
          case 1: acc = acc - rhs; break;
          case 2: acc = acc * rhs; break;
          default: acc = square(acc) + rhs; break;
        }
      }
      return acc;
    };
    std::mt19937_64 fork = rng;
    rng.discard(64);
    auto coarse = eval(128, fork);
    auto fine = eval(256, fork);
    ASSERT_TRUE(coarse.contains(fine)) << "trial " << trial;
  }
}
