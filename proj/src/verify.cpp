#include "interdyn/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "interdyn/error.hpp"
#include "interdyn/interaction.hpp"
#include "interdyn/oracle.hpp"
#include "interdyn/parallel.hpp"
#include "interdyn/random.hpp"
#include "interdyn/synthetic.hpp"

namespace interdyn {
namespace {

constexpr double kMatchingTolerance = 1e-8;
constexpr double kOracleTolerance = 1e-9;
constexpr std::size_t kMaxOracleVariables = 10;
constexpr std::size_t kSparsifyTrials = 20;
constexpr std::size_t kPlantedTrials = 10;
constexpr std::size_t kRepeatTrials = 3;

std::vector<double> random_values(std::size_t count, Rng& rng, double scale) {
  std::vector<double> v(count);
  for (double& x : v) x = rng.uniform(-scale, scale);
  return v;
}

MaskedOutputTable random_table(std::size_t n, Rng& rng) {
  MaskedOutputTable t;
  t.n = n;
  t.values = random_values(subset_count(n), rng, 4.0);
  return t;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

std::string format_error(const char* label, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%s=%.3g", label, value);
  return buffer;
}

// Runs `trial` for every index and reports the largest value it returns.
double worst_over(std::size_t trials, std::size_t jobs, const std::function<double(std::size_t)>& trial) {
  std::vector<double> results(trials, 0.0);
  parallel_for(trials, jobs, [&](std::size_t i) { results[i] = trial(i); });
  double worst = 0.0;
  for (double r : results) worst = std::isnan(r) ? INFINITY : std::max(worst, r);
  return worst;
}

// Brute-force reconstruction where it is affordable; 0 error otherwise.
double oracle_reconstruction_error(const InteractionDecomposition& d, const MaskedOutputTable& table) {
  if (d.n > kMaxOracleVariables) return 0.0;
  return max_abs_diff(oracle::reconstruct_bruteforce(d.i_and, d.i_or, d.bias), table.values);
}

CheckResult tolerance_check(std::string name, double worst, double tolerance, std::size_t trials) {
  return {std::move(name), worst < tolerance,
          "trials=" + std::to_string(trials) + " " + format_error("max_error", worst)};
}

}  // namespace

std::vector<CheckResult> run_verify(const VerifyConfig& config) {
  check_variable_count(config.n);
  if (config.n == 0) throw InvalidArgument("verify needs n >= 1");
  if (config.trials == 0) throw InvalidArgument("verify needs trials >= 1");
  config.sparsify.validate();

  const std::size_t n = config.n;
  const std::size_t size = subset_count(n);
  auto rng_for = [&](std::uint64_t stream, std::size_t i) {
    return Rng(derive_seed(config.seed, stream * 1000003 + i));
  };
  std::vector<CheckResult> checks;

  checks.push_back(tolerance_check(
      "universal_matching_random_gamma",
      worst_over(config.trials, config.jobs,
                 [&](std::size_t i) {
                   Rng rng = rng_for(1, i);
                   const auto table = random_table(n, rng);
                   const GammaVector gamma{random_values(size, rng, 10.0)};
                   const auto d = decompose(table, gamma);
                   return std::max(max_reconstruction_error(d, table),
                                   oracle_reconstruction_error(d, table));
                 }),
      kMatchingTolerance, config.trials));

  checks.push_back(tolerance_check(
      "universal_matching_zero_gamma",
      worst_over(config.trials, config.jobs,
                 [&](std::size_t i) {
                   Rng rng = rng_for(2, i);
                   const auto table = random_table(n, rng);
                   return max_reconstruction_error(decompose(table, GammaVector::zeros(n)), table);
                 }),
      kMatchingTolerance, config.trials));

  checks.push_back(tolerance_check(
      "partial_sum_identities",
      worst_over(config.trials, config.jobs,
                 [&](std::size_t i) {
                   Rng rng = rng_for(3, i);
                   const auto table = random_table(n, rng);
                   const GammaVector gamma{random_values(size, rng, 2.0)};
                   const auto split = split_outputs(table, gamma);
                   const auto d = decompose(table, gamma);
                   std::vector<double> and_sums = d.i_and;
                   subset_zeta(and_sums);
                   // Terms meeting S = all terms minus those inside the complement of S.
                   std::vector<double> or_inside = d.i_or;
                   subset_zeta(or_inside);
                   const double or_total = or_inside[size - 1];
                   double worst = 0.0;
                   for (std::size_t s = 0; s < size; ++s) {
                     worst = std::max(worst, std::abs(and_sums[s] - (split.o_and[s] - split.o_and[0])));
                     const double or_meeting = or_total - or_inside[(size - 1) ^ s];
                     worst = std::max(worst, std::abs(or_meeting - (split.o_or[s] - split.o_or[0])));
                   }
                   return worst;
                 }),
      kOracleTolerance, config.trials));

  const std::size_t oracle_n = std::min(n, kMaxOracleVariables);
  checks.push_back(tolerance_check(
      "fast_transform_matches_bruteforce",
      worst_over(config.trials, config.jobs,
                 [&](std::size_t i) {
                   Rng rng = rng_for(4, i);
                   const std::size_t m = 1 + i % oracle_n;
                   const auto o = random_values(subset_count(m), rng, 4.0);
                   return std::max(max_abs_diff(mobius_and(o), oracle::mobius_and_bruteforce(o)),
                                   max_abs_diff(mobius_or(o), oracle::mobius_or_bruteforce(o)));
                 }),
      kOracleTolerance, config.trials));

  checks.push_back(tolerance_check(
      "zeta_inverts_mobius",
      worst_over(config.trials, config.jobs,
                 [&](std::size_t i) {
                   Rng rng = rng_for(5, i);
                   const auto o = random_values(size, rng, 4.0);
                   std::vector<double> sums = mobius_and(o);
                   subset_zeta(sums);
                   std::vector<double> shifted = o;
                   for (double& v : shifted) v -= o[0];
                   std::vector<double> round_trip = o;
                   superset_mobius(round_trip);
                   superset_zeta(round_trip);
                   return std::max(max_abs_diff(sums, shifted), max_abs_diff(round_trip, o));
                 }),
      kOracleTolerance, config.trials));

  const std::size_t sparse_trials = std::min(config.trials, kSparsifyTrials);
  std::vector<double> sparse_error(sparse_trials), sparse_excess(sparse_trials);
  std::vector<char> sparse_repeatable(sparse_trials, 0);
  parallel_for(sparse_trials, config.jobs, [&](std::size_t i) {
    Rng rng = rng_for(6, i);
    const auto table = random_table(n, rng);
    const auto first = sparsify(table, config.sparsify);
    sparse_error[i] = max_reconstruction_error(decompose(table, first.gamma), table);
    sparse_excess[i] = first.final_objective - objective(table, GammaVector::zeros(n));
    if (i >= kRepeatTrials) {
      sparse_repeatable[i] = 1;
      return;
    }
    const auto second = sparsify(table, config.sparsify);
    sparse_repeatable[i] = first.gamma.values == second.gamma.values &&
                           first.objective_trace == second.objective_trace;
  });
  checks.push_back(tolerance_check("sparsify_preserves_matching",
                                   *std::max_element(sparse_error.begin(), sparse_error.end()),
                                   kMatchingTolerance, sparse_trials));
  const double worst_excess = *std::max_element(sparse_excess.begin(), sparse_excess.end());
  checks.push_back({"sparsify_never_worse_than_symmetric_split", worst_excess <= 0.0,
                    "trials=" + std::to_string(sparse_trials) + " " + format_error("max_excess", worst_excess)});
  const bool repeatable = std::all_of(sparse_repeatable.begin(), sparse_repeatable.end(), [](char c) { return c; });
  checks.push_back({"sparsify_deterministic", repeatable,
                    "trials=" + std::to_string(std::min(sparse_trials, kRepeatTrials))});

  if (n >= 4) {
    const std::size_t planted_trials = std::min(config.trials, kPlantedTrials);
    const std::size_t terms = std::min<std::size_t>(5, n - 2);
    std::vector<char> recovered(planted_trials, 0);
    parallel_for(planted_trials, config.jobs, [&](std::size_t i) {
      PlantedOptions options;
      options.n = n;
      options.num_terms = terms;
      options.max_order = std::min<std::size_t>(4, n);
      options.seed = derive_seed(config.seed, 7000 + i);
      PlantedSpec spec;
      spec.n = n;
      spec.planted = random_planted_terms(options);
      const auto d = decompose_sparse(planted_table(spec), config.sparsify);
      double largest = 0.0;
      for (std::size_t m = 1; m < size; ++m) largest = std::max({largest, std::abs(d.i_and[m]), std::abs(d.i_or[m])});
      const double tau = 0.05 * largest;
      bool ok = true;
      for (std::size_t m = 1; m < size; ++m) {
        const auto term = std::find_if(spec.planted.begin(), spec.planted.end(),
                                       [&](const PlantedTerm& p) { return p.mask == m; });
        if (term != spec.planted.end()) {
          ok = ok && d.i_and[m] * term->coefficient > 0.0 && std::abs(d.i_and[m]) > tau;
        } else {
          ok = ok && std::abs(d.i_and[m]) < tau;
        }
        ok = ok && std::abs(d.i_or[m]) < tau;
      }
      recovered[i] = ok;
    });
    const auto hits = static_cast<std::size_t>(std::count(recovered.begin(), recovered.end(), 1));
    checks.push_back({"planted_and_recovery", hits == planted_trials,
                      "recovered=" + std::to_string(hits) + "/" + std::to_string(planted_trials)});
  }
  return checks;
}

}  // namespace interdyn
