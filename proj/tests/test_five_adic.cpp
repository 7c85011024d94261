#include <gtest/gtest.h>

#include <array>
#include <functional>

#include "qcfa/five_adic.hpp"

using namespace qcfa;

namespace {

// Independent oracle: plain 3x3 integer arithmetic on long long.
using V3 = std::array<long long, 3>;
using M3 = std::array<std::array<long long, 3>, 3>;
constexpr M3 kA{{{4, 3, 0}, {-3, 4, 0}, {0, 0, 5}}};
constexpr M3 kB{{{4, 0, 3}, {0, 5, 0}, {-3, 0, 4}}};

V3 mul(const M3& m, const V3& v, bool transpose = false) {
  V3 out{0, 0, 0};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out[i] += (transpose ? m[j][i] : m[i][j]) * v[j];
  return out;
}

FiveAdicVector fav(std::initializer_list<long> xs, unsigned scale) {
  std::vector<BigInt> e;
  for (long x : xs) e.emplace_back(x);
  return FiveAdicVector(e, scale);
}

}  // namespace

TEST(FiveAdic, FirstColumnOfA) {
  auto v = five_adic_apply(Generator::A, FiveAdicVector::unit(3, 0));
  EXPECT_EQ(v, fav({4, -3, 0}, 1));
}

TEST(FiveAdic, InverseBOnFirstColumnOfA) {
  // Oracle: B^T * (4,-3,0) with plain integers, over 5^2.
  V3 o = mul(kB, V3{4, -3, 0}, true);
  EXPECT_EQ((V3{16, -15, 12}), o);
  auto v = five_adic_apply(Generator::B_inverse, fav({4, -3, 0}, 1));
  EXPECT_EQ(v, fav({16, -15, 12}, 2));
}

TEST(FiveAdic, InverseCancels) {
  FiveAdicVector v = fav({16, -15, 12}, 2);
  EXPECT_EQ(five_adic_apply(Generator::B, five_adic_apply(Generator::B_inverse, v)), v);
  EXPECT_EQ(five_adic_apply(Generator::A_inverse, five_adic_apply(Generator::A, v)), v);
}

TEST(FiveAdic, MatrixOverloadRejectsOtherMatrices) {
  IntegerMatrix bad{{5, 0, 0}, {0, 5, 0}, {0, 0, 5}};
  EXPECT_THROW(five_adic_apply(bad, FiveAdicVector::unit(3, 0)), Error);
  EXPECT_EQ(five_adic_apply(generator_matrix(Generator::A), FiveAdicVector::unit(3, 0)), fav({4, -3, 0}, 1));
}

TEST(FiveAdic, Canonicalization) {
  auto v = fav({20, -15, 0}, 2);
  EXPECT_EQ(v.scale(), 1u);
  EXPECT_EQ(v.entries()[0], 4);
  auto z = fav({0, 0, 0}, 4);
  EXPECT_EQ(z.scale(), 0u);
  auto noscale = fav({5, 0, 0}, 0);
  EXPECT_EQ(noscale.entries()[0], 5);
}

// Every word of length <= 10 keeps sum of squares = 5^(2*length), matching the oracle entrywise.
TEST(FiveAdic, UnitarityOverAllShortWords) {
  std::size_t checked = 0;
  std::function<void(const FiveAdicVector&, const V3&, int)> walk = [&](const FiveAdicVector& v, const V3& o,
                                                                        int depth) {
    BigInt sum = 0;
    for (const auto& x : v.entries()) sum += x * x;
    EXPECT_EQ(v.squared_norm(), Rational(1));
    ++checked;
    if (depth == 10) return;
    for (int g = 0; g < 2; ++g) {
      V3 next = mul(g == 0 ? kA : kB, o);
      auto w = five_adic_apply(g == 0 ? Generator::A : Generator::B, v);
      // The reachable vectors never pick up a common factor 5, so the scale equals the depth.
      ASSERT_EQ(w.scale(), static_cast<unsigned>(depth + 1));
      for (int i = 0; i < 3; ++i) ASSERT_EQ(w.entries()[i], BigInt(std::to_string(next[i])));
      BigInt sq = 0;
      for (const auto& x : w.entries()) sq += x * x;
      ASSERT_EQ(sq, pow_ui(25, depth + 1));
      walk(w, next, depth + 1);
    }
  };
  walk(FiveAdicVector::unit(3, 0), V3{1, 0, 0}, 0);
  EXPECT_EQ(checked, (1u << 11) - 1);
}

TEST(FiveAdic, HadamardAndCollapse) {
  auto h = FiveAdicVector::unit(3, 0).hadamard(0, 1);
  ASSERT_TRUE(h);
  EXPECT_EQ(h->root2(), 1u);
  EXPECT_EQ(h->component_square(0), Rational(1, 2));
  EXPECT_EQ(h->component_square(1), Rational(1, 2));
  auto again = h->hadamard(0, 1);
  ASSERT_TRUE(again);
  EXPECT_EQ(*again, FiveAdicVector::unit(3, 0));
  EXPECT_FALSE(fav({4, -3, 0}, 1).hadamard(1, 2));

  auto c = fav({4, -3, 0}, 1).collapsed({true, false, false});
  ASSERT_TRUE(c);
  EXPECT_EQ(*c, FiveAdicVector::unit(3, 0));
  EXPECT_FALSE(fav({16, -15, 12}, 2).collapsed({false, true, true}));
  EXPECT_TRUE(fav({4, -3, 0}, 1).same_ray(fav({-4, 3, 0}, 1)));
}
