#include <bit>
#include <cmath>

#include <gtest/gtest.h>

#include "interdyn/error.hpp"
#include "interdyn/synthetic.hpp"

namespace interdyn {
namespace {

PlantedSpec two_var(std::vector<PlantedTerm> terms, double bias = 0.0) {
  PlantedSpec s;
  s.n = 2;
  s.planted = std::move(terms);
  s.bias = bias;
  s.num_train = 1;
  s.num_test = 1;
  return s;
}

TEST(PlantedScore, Fixtures) {
  const auto none = two_var({}, 0.7);
  for (std::uint32_t m = 0; m < 4; ++m) EXPECT_EQ(planted_score(none, m), 0.7);
  EXPECT_EQ(planted_table(two_var({{0b11, InteractionKind::kAnd, 1.0}})).values,
            (std::vector<double>{0, 0, 0, 1}));
  EXPECT_EQ(planted_table(two_var({{0b11, InteractionKind::kAnd, 1.0}, {0b11, InteractionKind::kOr, 1.0}})).values,
            (std::vector<double>{0, 1, 1, 2}));
}

TEST(RandomPlanted, RespectsOptions) {
  PlantedOptions o;
  o.n = 8;
  o.num_terms = 5;
  o.seed = 3;
  const auto terms = random_planted_terms(o);
  ASSERT_EQ(terms.size(), 5u);
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const int order = std::popcount(terms[i].mask);
    EXPECT_GE(order, 2);
    EXPECT_LE(order, 4);
    EXPECT_GE(std::abs(terms[i].coefficient), 0.5);
    EXPECT_LE(std::abs(terms[i].coefficient), 2.0);
    EXPECT_EQ(terms[i].kind, InteractionKind::kAnd);
    if (i > 0) EXPECT_LT(terms[i - 1].mask, terms[i].mask);
  }
  o.num_terms = 1000;
  EXPECT_THROW(random_planted_terms(o), InvalidArgument);
}

TEST(GenDataset, DeterministicAndDisjointSizes) {
  PlantedSpec spec;
  spec.n = 6;
  PlantedOptions o;
  o.n = 6;
  o.kinds = PlantedOptions::Kinds::kMixed;
  spec.planted = random_planted_terms(o);
  spec.num_train = 50;
  spec.num_test = 30;
  spec.seed = 9;
  const auto a = gen_dataset(spec), b = gen_dataset(spec);
  ASSERT_EQ(a.train.size(), 50u);
  ASSERT_EQ(a.test.size(), 30u);
  EXPECT_EQ(a.train.role, Split::kTrain);
  EXPECT_EQ(a.test.role, Split::kTest);
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_EQ(a.train.samples[i].x, b.train.samples[i].x);
    EXPECT_EQ(a.train.samples[i].label, b.train.samples[i].label);
  }
  spec.seed = 10;
  EXPECT_NE(gen_dataset(spec).train.samples[0].x, a.train.samples[0].x);
}

TEST(GenDataset, RejectsEmptySplits) {
  PlantedSpec spec;
  spec.n = 3;
  spec.num_train = 0;
  spec.num_test = 5;
  EXPECT_THROW(gen_dataset(spec), InvalidArgument);
  spec.num_train = 5;
  spec.planted = {{0b1, InteractionKind::kAnd, 0.2}};
  EXPECT_THROW(gen_dataset(spec), InvalidArgument);
  spec.planted = {{0b1000, InteractionKind::kAnd, 1.0}};
  EXPECT_THROW(gen_dataset(spec), InvalidArgument);
}

// Monte Carlo check: with no label noise, the positive rate matches the
// expected sigmoid link, computed by exact enumeration of presence patterns.
TEST(GenDataset, ClassBalanceMatchesSigmoidLink) {
  PlantedSpec spec;
  spec.n = 6;
  spec.planted = {{0b000011, InteractionKind::kAnd, 1.5},
                  {0b001100, InteractionKind::kOr, -1.0},
                  {0b110001, InteractionKind::kAnd, 2.0}};
  spec.bias = 0.3;
  spec.num_train = 60000;
  spec.num_test = 1;
  spec.seed = 4;
  double expected = 0.0;
  for (std::uint32_t z = 0; z < 64; ++z) expected += 1.0 / (1.0 + std::exp(-planted_score(spec, z)));
  expected /= 64.0;
  const auto task = gen_dataset(spec);
  double positives = 0.0;
  for (const Sample& s : task.train.samples) positives += static_cast<double>(s.label);
  EXPECT_NEAR(positives / static_cast<double>(spec.num_train), expected, 0.02);
}

TEST(GenDataset, FeaturesEncodePresence) {
  PlantedSpec spec;
  spec.n = 4;
  spec.num_train = 200;
  spec.num_test = 1;
  spec.feature_jitter = 0.0;
  const auto task = gen_dataset(spec);
  double sum = 0.0;
  for (const Sample& s : task.train.samples) {
    for (double v : s.x) {
      EXPECT_TRUE(v == 0.0 || std::abs(v) == kPresenceOffset);
      sum += v;
    }
  }
  // Absent level and feature mean agree up to sampling error.
  EXPECT_NEAR(sum / (4.0 * 200.0), 0.0, 0.1);
}

TEST(PlantedJson, RoundTrip) {
  PlantedSpec spec;
  spec.n = 5;
  spec.planted = {{0b101, InteractionKind::kOr, -0.75}, {0b11000, InteractionKind::kAnd, 1.25}};
  spec.bias = 0.1;
  spec.num_train = 10;
  spec.num_test = 4;
  spec.seed = 99;
  const auto back = planted_from_json(planted_to_json(spec));
  EXPECT_EQ(back.n, 5u);
  ASSERT_EQ(back.planted.size(), 2u);
  EXPECT_EQ(back.planted[0].kind, InteractionKind::kOr);
  EXPECT_EQ(back.planted[1].coefficient, 1.25);
  EXPECT_EQ(back.seed, 99u);
  auto doc = planted_to_json(spec);
  doc["planted"][0]["kind"] = "XOR";
  EXPECT_THROW(planted_from_json(doc), ParseError);
}

}  // namespace
}  // namespace interdyn
