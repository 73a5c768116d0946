#include "interdyn/saliency.hpp"

#include <algorithm>
#include <cmath>

#include "interdyn/error.hpp"

namespace interdyn {

std::string to_string(InteractionKind kind) { return kind == InteractionKind::kAnd ? "AND" : "OR"; }

void ThresholdPolicy::validate() const {
  if (mode == Mode::kRelative && !(alpha > 0.0)) throw InvalidArgument("relative threshold needs alpha > 0");
  if (mode == Mode::kAbsolute && !(absolute_tau > 0.0)) {
    throw InvalidArgument("absolute threshold needs tau > 0");
  }
}

double ThresholdPolicy::tau_for(const InteractionDecomposition& decomp) const {
  validate();
  if (mode == Mode::kAbsolute) return absolute_tau;
  double largest = 0.0;
  for (std::size_t t = 1; t < decomp.i_and.size(); ++t) {
    largest = std::max({largest, std::abs(decomp.i_and[t]), std::abs(decomp.i_or[t])});
  }
  return alpha * largest;
}

SalientSet extract_salient(const InteractionDecomposition& decomp, const ThresholdPolicy& policy) {
  SalientSet set;
  set.tau = policy.tau_for(decomp);
  if (policy.mode == ThresholdPolicy::Mode::kRelative && set.tau == 0.0) return set;
  for (std::size_t t = 1; t < decomp.i_and.size(); ++t) {
    const SubsetMask mask(static_cast<std::uint32_t>(t), decomp.n);
    const double e_and = decomp.i_and[t];
    const double e_or = decomp.i_or[t];
    if (!std::isfinite(e_and) || !std::isfinite(e_or)) {
      throw NumericError("extract_salient: non-finite interaction effect");
    }
    if (std::abs(e_and) > set.tau) set.items.push_back({mask, InteractionKind::kAnd, e_and, mask.order()});
    if (std::abs(e_or) > set.tau) set.items.push_back({mask, InteractionKind::kOr, e_or, mask.order()});
  }
  std::stable_sort(set.items.begin(), set.items.end(), [](const auto& a, const auto& b) {
    const double ma = std::abs(a.effect), mb = std::abs(b.effect);
    if (ma != mb) return ma > mb;
    if (a.kind != b.kind) return a.kind == InteractionKind::kAnd;
    return a.mask.bits < b.mask.bits;
  });
  return set;
}

double salient_approximation_error(const InteractionDecomposition& decomp, const SalientSet& salient,
                                   const MaskedOutputTable& table) {
  if (table.n != decomp.n || table.values.size() != decomp.i_and.size()) {
    throw DimensionError("salient_approximation_error: table and decomposition differ in n");
  }
  InteractionDecomposition concise = decomp;
  std::fill(concise.i_and.begin(), concise.i_and.end(), 0.0);
  std::fill(concise.i_or.begin(), concise.i_or.end(), 0.0);
  for (const SalientInteraction& s : salient.items) {
    if (s.mask.n != decomp.n) throw DimensionError("salient mask n differs from decomposition n");
    auto& target = s.kind == InteractionKind::kAnd ? concise.i_and : concise.i_or;
    target[s.mask.bits] = s.effect;
  }
  return max_reconstruction_error(concise, table);
}

double discarded_mass(const InteractionDecomposition& decomp, const SalientSet& salient) {
  std::vector<char> kept_and(decomp.i_and.size(), 0), kept_or(decomp.i_or.size(), 0);
  for (const SalientInteraction& s : salient.items) {
    (s.kind == InteractionKind::kAnd ? kept_and : kept_or)[s.mask.bits] = 1;
  }
  double mass = 0.0;
  for (std::size_t t = 1; t < decomp.i_and.size(); ++t) {
    if (!kept_and[t]) mass += std::abs(decomp.i_and[t]);
    if (!kept_or[t]) mass += std::abs(decomp.i_or[t]);
  }
  return mass;
}

bool generalizes(double effect, double base_effect, double tau_base) {
  return std::abs(base_effect) > tau_base && effect * base_effect > 0.0;
}

namespace {

void finish_order_means(std::map<std::size_t, OrderStats>& per_order,
                        const std::map<std::size_t, std::size_t>& hits) {
  for (auto& [order, stats] : per_order) {
    const auto it = hits.find(order);
    const std::size_t h = it == hits.end() ? 0 : it->second;
    stats.mean_g = static_cast<double>(h) / static_cast<double>(stats.count);
  }
}

}  // namespace

GeneralizationReport match_generalization(const SalientSet& salient_v,
                                          const InteractionDecomposition& decomp_base,
                                          double tau_base, std::string sample_id) {
  GeneralizationReport report;
  report.sample_id = std::move(sample_id);
  report.tau_v = salient_v.tau;
  report.tau_base = tau_base;
  std::size_t hits = 0;
  std::map<std::size_t, std::size_t> order_hits;
  for (const SalientInteraction& s : salient_v.items) {
    if (s.mask.n != decomp_base.n) {
      throw DimensionError("match_generalization: salient set n = " + std::to_string(s.mask.n) +
                           " but baseline decomposition n = " + std::to_string(decomp_base.n));
    }
    const auto& base = s.kind == InteractionKind::kAnd ? decomp_base.i_and : decomp_base.i_or;
    const double base_effect = base[s.mask.bits];
    const bool g = generalizes(s.effect, base_effect, tau_base);
    report.per_interaction.push_back({s, base_effect, g});
    hits += g ? 1 : 0;
    report.per_order[s.order].count += 1;
    if (g) order_hits[s.order] += 1;
  }
  finish_order_means(report.per_order, order_hits);
  report.n_bar = static_cast<double>(report.per_interaction.size());
  if (!report.per_interaction.empty()) {
    report.h_bar = static_cast<double>(hits) / static_cast<double>(report.per_interaction.size());
  }
  return report;
}

OrderSummary aggregate_orders(const std::vector<GeneralizationReport>& reports) {
  if (reports.empty()) throw InvalidArgument("aggregate_orders needs at least one report");
  OrderSummary summary;
  summary.num_reports = reports.size();
  std::size_t hits = 0;
  std::size_t order_total = 0;
  std::map<std::size_t, std::size_t> order_hits;
  for (const GeneralizationReport& r : reports) {
    for (const MatchedInteraction& m : r.per_interaction) {
      const std::size_t order = m.interaction.order;
      summary.per_order[order].count += 1;
      order_total += order;
      if (m.generalizes) {
        ++hits;
        order_hits[order] += 1;
      }
    }
    summary.total_salient += r.per_interaction.size();
  }
  finish_order_means(summary.per_order, order_hits);
  summary.n_bar = static_cast<double>(summary.total_salient) / static_cast<double>(reports.size());
  if (summary.total_salient > 0) {
    const auto total = static_cast<double>(summary.total_salient);
    summary.h_bar = static_cast<double>(hits) / total;
    summary.mean_order = static_cast<double>(order_total) / total;
  }
  return summary;
}

namespace {

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json per_order_json(const std::map<std::size_t, OrderStats>& per_order) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [order, stats] : per_order) {
    out.push_back({{"order", order}, {"count", stats.count}, {"mean_g", stats.mean_g}});
  }
  return out;
}

}  // namespace

nlohmann::json report_to_json(const GeneralizationReport& report) {
  nlohmann::json interactions = nlohmann::json::array();
  for (const MatchedInteraction& m : report.per_interaction) {
    interactions.push_back({{"mask", m.interaction.mask.bits},
                            {"kind", to_string(m.interaction.kind)},
                            {"order", m.interaction.order},
                            {"effect_v", m.interaction.effect},
                            {"effect_base", m.base_effect},
                            {"g", m.generalizes ? 1 : 0}});
  }
  return {{"sample_id", report.sample_id},
          {"tau_v", report.tau_v},
          {"tau_base", report.tau_base},
          {"interactions", std::move(interactions)},
          {"H_bar", optional_json(report.h_bar)},
          {"N_bar", report.n_bar},
          {"per_order", per_order_json(report.per_order)}};
}

nlohmann::json summary_to_json(const OrderSummary& summary) {
  return {{"num_samples", summary.num_reports},
          {"total_salient", summary.total_salient},
          {"H_bar", optional_json(summary.h_bar)},
          {"N_bar", summary.n_bar},
          {"mean_order", optional_json(summary.mean_order)},
          {"per_order", per_order_json(summary.per_order)}};
}

}  // namespace interdyn
