#include "interdyn/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <set>

#include "interdyn/error.hpp"
#include "interdyn/random.hpp"

namespace interdyn {

void PlantedSpec::validate() const {
  if (n < 1) throw InvalidArgument("planted spec needs n >= 1");
  check_variable_count(n);
  for (const PlantedTerm& t : planted) {
    if (t.mask == 0 || t.mask >= subset_count(n)) {
      throw InvalidArgument("planted mask " + std::to_string(t.mask) + " is empty or out of range");
    }
    if (!(std::abs(t.coefficient) >= kMinPlantedCoefficient)) {
      throw InvalidArgument("planted coefficients need |c| >= 0.5");
    }
  }
  if (num_train == 0) throw InvalidArgument("num_train must be >= 1");
  if (num_test == 0) throw InvalidArgument("num_test must be >= 1");
  if (!(noise_std >= 0.0)) throw InvalidArgument("noise_std must be >= 0");
  if (!(presence_prob > 0.0 && presence_prob < 1.0)) throw InvalidArgument("presence_prob must lie in (0,1)");
  if (!(feature_jitter >= 0.0)) throw InvalidArgument("feature_jitter must be >= 0");
}

double planted_score(const PlantedSpec& spec, std::uint32_t present) {
  double total = spec.bias;
  for (const PlantedTerm& t : spec.planted) {
    const bool fires = t.kind == InteractionKind::kAnd ? (present & t.mask) == t.mask
                                                       : (present & t.mask) != 0;
    if (fires) total += t.coefficient;
  }
  return total;
}

MaskedOutputTable planted_table(const PlantedSpec& spec) {
  return tabulate(spec.n, [&](std::uint32_t m) { return planted_score(spec, m); }, "planted");
}

std::vector<PlantedTerm> random_planted_terms(const PlantedOptions& options) {
  check_variable_count(options.n);
  const std::size_t max_order = std::min(options.max_order, options.n);
  if (options.min_order < 1 || options.min_order > max_order) {
    throw InvalidArgument("planted orders must satisfy 1 <= min_order <= max_order <= n");
  }
  if (options.min_coefficient < kMinPlantedCoefficient || options.max_coefficient < options.min_coefficient) {
    throw InvalidArgument("planted coefficient range must lie in [0.5, max] with max >= min");
  }
  std::vector<std::uint32_t> candidates;
  for (std::uint32_t m = 1; m < subset_count(options.n); ++m) {
    const auto order = static_cast<std::size_t>(std::popcount(m));
    if (order >= options.min_order && order <= max_order) candidates.push_back(m);
  }
  if (candidates.size() < options.num_terms) {
    throw InvalidArgument("not enough subsets of the requested orders for " +
                          std::to_string(options.num_terms) + " planted terms");
  }
  Rng rng(derive_seed(options.seed, 11));
  rng.shuffle(std::span<std::uint32_t>(candidates));
  std::vector<PlantedTerm> terms;
  for (std::size_t k = 0; k < options.num_terms; ++k) {
    PlantedTerm t;
    t.mask = candidates[k];
    switch (options.kinds) {
      case PlantedOptions::Kinds::kAnd: t.kind = InteractionKind::kAnd; break;
      case PlantedOptions::Kinds::kOr: t.kind = InteractionKind::kOr; break;
      case PlantedOptions::Kinds::kMixed:
        t.kind = rng.bernoulli(0.5) ? InteractionKind::kAnd : InteractionKind::kOr;
        break;
    }
    const double magnitude = rng.uniform(options.min_coefficient, options.max_coefficient);
    t.coefficient = rng.bernoulli(0.5) ? magnitude : -magnitude;
    terms.push_back(t);
  }
  std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) { return a.mask < b.mask; });
  return terms;
}

SyntheticTask gen_dataset(const PlantedSpec& spec) {
  spec.validate();
  SyntheticTask task;
  task.truth = spec;
  task.train.role = Split::kTrain;
  task.test.role = Split::kTest;
  Rng rng(derive_seed(spec.seed, 17));
  const std::size_t total = spec.num_train + spec.num_test;
  for (std::size_t k = 0; k < total; ++k) {
    std::uint32_t present = 0;
    Sample s;
    s.x.resize(spec.n);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const bool on = rng.bernoulli(spec.presence_prob);
      const double side = rng.bernoulli(0.5) ? 1.0 : -1.0;
      if (on) present |= std::uint32_t{1} << i;
      s.x[i] = (on ? side * kPresenceOffset : 0.0) + spec.feature_jitter * rng.normal();
    }
    const double logit = planted_score(spec, present) + spec.noise_std * rng.normal();
    const double p = 1.0 / (1.0 + std::exp(-logit));
    s.label = rng.bernoulli(p) ? 1 : 0;
    (k < spec.num_train ? task.train : task.test).samples.push_back(std::move(s));
  }
  return task;
}

nlohmann::json planted_to_json(const PlantedSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const PlantedTerm& t : spec.planted) {
    terms.push_back({{"mask", t.mask}, {"kind", to_string(t.kind)}, {"coefficient", t.coefficient}});
  }
  return {{"n", spec.n},
          {"planted", std::move(terms)},
          {"bias", spec.bias},
          {"noise_std", spec.noise_std},
          {"num_train", spec.num_train},
          {"num_test", spec.num_test},
          {"seed", spec.seed},
          {"presence_prob", spec.presence_prob},
          {"feature_jitter", spec.feature_jitter}};
}

PlantedSpec planted_from_json(const nlohmann::json& doc) {
  PlantedSpec spec;
  try {
    spec.n = doc.at("n").get<std::size_t>();
    for (const auto& t : doc.at("planted")) {
      const std::string kind = t.at("kind").get<std::string>();
      if (kind != "AND" && kind != "OR") throw ParseError("planted kind must be AND or OR");
      spec.planted.push_back({t.at("mask").get<std::uint32_t>(),
                              kind == "AND" ? InteractionKind::kAnd : InteractionKind::kOr,
                              t.at("coefficient").get<double>()});
    }
    spec.bias = doc.at("bias").get<double>();
    spec.noise_std = doc.at("noise_std").get<double>();
    spec.num_train = doc.at("num_train").get<std::size_t>();
    spec.num_test = doc.at("num_test").get<std::size_t>();
    spec.seed = doc.at("seed").get<std::uint64_t>();
    spec.presence_prob = doc.value("presence_prob", 0.5);
    spec.feature_jitter = doc.value("feature_jitter", 0.1);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed truth file: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace interdyn
