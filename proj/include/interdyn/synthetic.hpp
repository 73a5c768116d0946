#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "interdyn/dataset.hpp"
#include "interdyn/masking.hpp"
#include "interdyn/saliency.hpp"

namespace interdyn {

struct PlantedTerm {
  std::uint32_t mask = 0;
  InteractionKind kind = InteractionKind::kAnd;
  double coefficient = 0.0;
};

// Smallest planted |coefficient|; keeps planted effects clear of any
// reasonable saliency threshold.
inline constexpr double kMinPlantedCoefficient = 0.5;
// A present variable sits this far from its absent level, on either side.
inline constexpr double kPresenceOffset = 1.0;

// Ground-truth AND-OR labelling function plus the sampling parameters.
struct PlantedSpec {
  std::size_t n = 0;
  std::vector<PlantedTerm> planted;
  double bias = 0.0;
  // Gaussian noise added to the score before the sigmoid link.
  double noise_std = 0.0;
  std::size_t num_train = 0;
  std::size_t num_test = 0;
  std::uint64_t seed = 0;
  // Probability that a variable is present in a generated sample.
  double presence_prob = 0.5;
  // Gaussian jitter on every feature so that samples are continuous.
  double feature_jitter = 0.1;

  void validate() const;
};

// bias + planted AND coefficients whose mask is fully present + planted OR
// coefficients whose mask is at least partly present.
double planted_score(const PlantedSpec& spec, std::uint32_t present);

// planted_score over all 2^n presence patterns.
MaskedOutputTable planted_table(const PlantedSpec& spec);

struct PlantedOptions {
  std::size_t n = 8;
  std::size_t num_terms = 5;
  enum class Kinds { kAnd, kOr, kMixed } kinds = Kinds::kAnd;
  std::size_t min_order = 2;
  std::size_t max_order = 4;
  double min_coefficient = kMinPlantedCoefficient;
  double max_coefficient = 2.0;
  std::uint64_t seed = 0;
};

// Draws distinct planted masks with orders in [min_order, max_order] and
// coefficients of random sign with magnitude in [min, max].
std::vector<PlantedTerm> random_planted_terms(const PlantedOptions& options);

struct SyntheticTask {
  Dataset train;
  Dataset test;
  PlantedSpec truth;
};

// Samples presence patterns z, features x_i = s_i * kPresenceOffset * z_i +
// jitter with a random sign s_i, so absent variables sit at the expected
// feature mean and masking to the training mean reads as absence. Labels
// are y ~ Bernoulli(sigmoid(planted_score(z) + noise)). The first
// num_train draws form the train split, the rest the test split.
SyntheticTask gen_dataset(const PlantedSpec& spec);

nlohmann::json planted_to_json(const PlantedSpec& spec);
PlantedSpec planted_from_json(const nlohmann::json& doc);

}  // namespace interdyn
