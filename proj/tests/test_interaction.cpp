#include <cmath>

#include <gtest/gtest.h>

#include "interdyn/error.hpp"
#include "interdyn/interaction.hpp"
#include "interdyn/oracle.hpp"
#include "test_helpers.hpp"

namespace interdyn {
namespace {

using testing::random_gamma;
using testing::random_table;
using testing::table_of;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  EXPECT_EQ(a.size(), b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

TEST(SplitOutputs, SymmetricAndExactSums) {
  const auto t = table_of({0, 1, 1, 3});
  const auto s0 = split_outputs(t, GammaVector::zeros(2));
  EXPECT_EQ(s0.o_and, (std::vector<double>{0, 0.5, 0.5, 1.5}));
  EXPECT_EQ(s0.o_or, s0.o_and);

  Rng rng(1);
  const auto g = random_gamma(2, rng);
  const auto s = split_outputs(t, g);
  for (std::size_t m = 0; m < 4; ++m) EXPECT_NEAR(s.o_and[m] + s.o_or[m], t.values[m], 1e-15);

  const auto pure = table_of({0, 0, 0, 1});
  const auto sp = split_outputs(pure, GammaVector{{0, 0, 0, 0.5}});
  EXPECT_EQ(sp.o_and, pure.values);
  EXPECT_EQ(sp.o_or, (std::vector<double>{0, 0, 0, 0}));

  EXPECT_THROW(split_outputs(t, GammaVector::zeros(3)), DimensionError);
}

TEST(MobiusAnd, Fixtures) {
  EXPECT_EQ(mobius_and(std::vector<double>{0, 0, 0, 1}), (std::vector<double>{0, 0, 0, 1}));
  EXPECT_EQ(mobius_and(std::vector<double>{0, 0.5, 0.5, 1.5}), (std::vector<double>{0, 0.5, 0.5, 0.5}));
  EXPECT_EQ(mobius_and(std::vector<double>{2.5, 4.0}), (std::vector<double>{0, 1.5}));
  for (double v : mobius_and(std::vector<double>(8, 1.7))) EXPECT_EQ(v, 0.0);
}

TEST(MobiusOr, Fixtures) {
  EXPECT_EQ(mobius_or(std::vector<double>{0, 1, 1, 1}), (std::vector<double>{0, 0, 0, 1}));
  EXPECT_EQ(mobius_or(std::vector<double>{0, 0.5, 0.5, 1.5}), (std::vector<double>{0, 1.0, 1.0, -0.5}));
  for (double v : mobius_or(std::vector<double>(16, -0.4))) EXPECT_EQ(v, 0.0);
}

TEST(Oracle, SmallCases) {
  EXPECT_EQ(oracle::mobius_and_bruteforce(std::vector<double>{2.0, 5.0}), (std::vector<double>{0, 3.0}));
  EXPECT_EQ(oracle::mobius_and_bruteforce(std::vector<double>{4.0}), (std::vector<double>{0}));
  EXPECT_EQ(oracle::mobius_or_bruteforce(std::vector<double>{4.0}), (std::vector<double>{0}));
  EXPECT_THROW(oracle::mobius_and_bruteforce(std::vector<double>(1 << 13)), LimitError);
  EXPECT_THROW(oracle::mobius_or_bruteforce(std::vector<double>(3)), DimensionError);
}

TEST(Decompose, HandVerifiedFixture) {
  const auto t = table_of({0, 1, 1, 3});
  const auto d = decompose(t, GammaVector::zeros(2));
  EXPECT_EQ(d.bias, 0.0);
  EXPECT_EQ(d.i_and, (std::vector<double>{0, 0.5, 0.5, 0.5}));
  EXPECT_EQ(d.i_or, (std::vector<double>{0, 1.0, 1.0, -0.5}));
  EXPECT_EQ(reconstruct(d, SubsetMask(0, 2)), 0.0);
  EXPECT_EQ(reconstruct(d, SubsetMask(0b01, 2)), 1.0);
  EXPECT_EQ(reconstruct(d, SubsetMask(0b10, 2)), 1.0);
  EXPECT_EQ(reconstruct(d, SubsetMask(0b11, 2)), 3.0);
}

TEST(Decompose, ConstantTableHasNoInteractions) {
  const auto d = decompose(table_of(std::vector<double>(16, 2.25)), GammaVector::zeros(4));
  EXPECT_EQ(d.bias, 2.25);
  for (std::size_t t = 1; t < 16; ++t) {
    EXPECT_EQ(d.i_and[t], 0.0);
    EXPECT_EQ(d.i_or[t], 0.0);
  }
}

TEST(Decompose, LinearInTableAtZeroGamma) {
  Rng rng(5);
  const auto t = random_table(5, rng);
  auto scaled = t;
  for (double& v : scaled.values) v *= -2.5;
  const auto d = decompose(t, GammaVector::zeros(5));
  const auto ds = decompose(scaled, GammaVector::zeros(5));
  for (std::size_t i = 0; i < d.i_and.size(); ++i) {
    EXPECT_NEAR(ds.i_and[i], -2.5 * d.i_and[i], 1e-12);
    EXPECT_NEAR(ds.i_or[i], -2.5 * d.i_or[i], 1e-12);
  }
}

// Property: fast transforms agree with the literal alternating sums.
TEST(Properties, FastTransformsMatchOracle) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(10);
    const auto o = testing::random_vector(subset_count(n), rng, 3.0);
    EXPECT_LT(max_abs_diff(mobius_and(o), oracle::mobius_and_bruteforce(o)), 1e-9) << "n=" << n;
    EXPECT_LT(max_abs_diff(mobius_or(o), oracle::mobius_or_bruteforce(o)), 1e-9) << "n=" << n;
  }
}

// Property: universal matching for any table and any gamma.
TEST(Properties, UniversalMatchingForRandomGamma) {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = rng.below(9);
    const auto t = random_table(n, rng, 5.0);
    const auto g = random_gamma(n, rng, 10.0);
    const auto d = decompose(t, g);
    EXPECT_LT(max_reconstruction_error(d, t), 1e-8);
    for (std::uint32_t s = 0; s < t.values.size(); s += 1 + static_cast<std::uint32_t>(rng.below(7))) {
      EXPECT_NEAR(reconstruct(d, SubsetMask(s, n)), t.values[s], 1e-8);
    }
    EXPECT_LT(max_abs_diff(reconstruct_all(d), oracle::reconstruct_bruteforce(d.i_and, d.i_or, d.bias)), 1e-9);
  }
}

// Property: partial sums of I_and / I_or recover the channel outputs.
TEST(Properties, PartialSumIdentities) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(6);
    const auto t = random_table(n, rng);
    const auto g = random_gamma(n, rng);
    const auto split = split_outputs(t, g);
    const auto d = decompose(t, g);
    for (std::uint32_t s = 0; s < t.values.size(); ++s) {
      double and_sum = 0.0, or_sum = 0.0;
      for (std::uint32_t m = 1; m < t.values.size(); ++m) {
        if ((m & s) == m) and_sum += d.i_and[m];
        if ((m & s) != 0) or_sum += d.i_or[m];
      }
      EXPECT_NEAR(and_sum, split.o_and[s] - split.o_and[0], 1e-10);
      EXPECT_NEAR(or_sum, split.o_or[s] - split.o_or[0], 1e-10);
    }
  }
}

// Property: subset zeta inverts the Mobius transform; superset transforms
// are the transposes.
TEST(Properties, ZetaMobiusInverseAndTranspose) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = rng.below(9);
    const auto o = testing::random_vector(subset_count(n), rng);
    auto i_and = mobius_and(o);
    subset_zeta(i_and);
    for (std::size_t s = 0; s < o.size(); ++s) EXPECT_NEAR(i_and[s], o[s] - o[0], 1e-10);

    auto a = o;
    superset_mobius(a);
    superset_zeta(a);
    EXPECT_LT(max_abs_diff(a, o), 1e-10);

    // <M x, y> == <x, M^T y>
    const auto y = testing::random_vector(o.size(), rng);
    auto mx = o;
    subset_mobius(mx);
    auto mty = y;
    superset_mobius(mty);
    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < o.size(); ++i) {
      lhs += mx[i] * y[i];
      rhs += o[i] * mty[i];
    }
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(Reconstruct, EmptyMaskIsBias) {
  Rng rng(10);
  const auto t = random_table(4, rng);
  const auto d = decompose(t, random_gamma(4, rng));
  EXPECT_EQ(reconstruct(d, SubsetMask::empty(4)), d.bias);
  EXPECT_THROW(reconstruct(d, SubsetMask::empty(3)), DimensionError);
}

TEST(Decompose, JsonRoundTrip) {
  Rng rng(11);
  const auto t = random_table(3, rng);
  const auto d = decompose(t, random_gamma(3, rng));
  const auto back = decomposition_from_json(decomposition_to_json(d));
  EXPECT_EQ(back.i_and, d.i_and);
  EXPECT_EQ(back.i_or, d.i_or);
  EXPECT_EQ(back.gamma.values, d.gamma.values);
  EXPECT_EQ(back.bias, d.bias);
}

TEST(Decompose, RejectsBadLengths) {
  EXPECT_THROW(mobius_and(std::vector<double>(3)), DimensionError);
  EXPECT_THROW(mobius_or(std::vector<double>{}), DimensionError);
  EXPECT_THROW(decompose(table_of({0, 1, 1, 3}), GammaVector::zeros(1)), DimensionError);
  MaskedOutputTable bad = table_of({0, 1});
  bad.values[1] = NAN;
  EXPECT_THROW(decompose(bad, GammaVector::zeros(1)), NumericError);
}

}  // namespace
}  // namespace interdyn
