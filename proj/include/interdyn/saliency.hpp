#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "interdyn/interaction.hpp"
#include "interdyn/masking.hpp"

namespace interdyn {

enum class InteractionKind { kAnd, kOr };

std::string to_string(InteractionKind kind);

struct SalientInteraction {
  SubsetMask mask;
  InteractionKind kind = InteractionKind::kAnd;
  double effect = 0.0;
  std::size_t order = 0;
};

struct ThresholdPolicy {
  enum class Mode { kRelative, kAbsolute };

  Mode mode = Mode::kRelative;
  // Relative mode: tau = alpha * max |effect| over both kinds.
  double alpha = 0.05;
  double absolute_tau = 0.0;

  static ThresholdPolicy relative(double alpha) { return {Mode::kRelative, alpha, 0.0}; }
  static ThresholdPolicy absolute(double tau) { return {Mode::kAbsolute, 0.0, tau}; }

  void validate() const;
  double tau_for(const InteractionDecomposition& decomp) const;
};

struct SalientSet {
  std::vector<SalientInteraction> items;
  double tau = 0.0;
};

// Every nonempty subset of either kind with |effect| > tau, sorted by
// descending |effect|; ties go AND before OR, then by ascending mask. A zero
// threshold in relative mode (all effects zero) yields an empty set.
SalientSet extract_salient(const InteractionDecomposition& decomp, const ThresholdPolicy& policy);

// max_S |d'(x_S) - v(x_S)| where d' keeps only the salient terms plus bias.
double salient_approximation_error(const InteractionDecomposition& decomp, const SalientSet& salient,
                                   const MaskedOutputTable& table);

// Sum of |effect| over nonempty interactions left out of `salient`; bounds
// salient_approximation_error from above.
double discarded_mass(const InteractionDecomposition& decomp, const SalientSet& salient);

// 1 iff |base_effect| > tau_base and effect * base_effect > 0.
bool generalizes(double effect, double base_effect, double tau_base);

struct MatchedInteraction {
  SalientInteraction interaction;
  double base_effect = 0.0;
  bool generalizes = false;
};

struct OrderStats {
  std::size_t count = 0;
  double mean_g = 0.0;
};

struct GeneralizationReport {
  std::string sample_id;
  double tau_v = 0.0;
  double tau_base = 0.0;
  std::vector<MatchedInteraction> per_interaction;
  // Mean generalization bit; absent when nothing was salient.
  std::optional<double> h_bar;
  double n_bar = 0.0;
  std::map<std::size_t, OrderStats> per_order;
};

// Transfers each salient interaction of the analysed model onto the baseline
// model's decomposition of the same sample. Throws DimensionError on n
// mismatch.
GeneralizationReport match_generalization(const SalientSet& salient_v,
                                          const InteractionDecomposition& decomp_base,
                                          double tau_base, std::string sample_id = {});

struct OrderSummary {
  std::map<std::size_t, OrderStats> per_order;
  std::optional<double> h_bar;
  double n_bar = 0.0;
  std::size_t total_salient = 0;
  std::size_t num_reports = 0;
  std::optional<double> mean_order;
};

// Pools reports: H̄ over all salient interactions of all samples, N̄ as the
// mean salient count per sample. Throws InvalidArgument on an empty list.
OrderSummary aggregate_orders(const std::vector<GeneralizationReport>& reports);

nlohmann::json report_to_json(const GeneralizationReport& report);
nlohmann::json summary_to_json(const OrderSummary& summary);

}  // namespace interdyn
