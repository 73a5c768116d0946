#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "interdyn/dataset.hpp"
#include "interdyn/interaction.hpp"
#include "interdyn/masking.hpp"
#include "interdyn/model.hpp"
#include "interdyn/saliency.hpp"
#include "interdyn/sparsify.hpp"

namespace interdyn {

struct LossGap {
  double train_loss = 0.0;
  double test_loss = 0.0;
  double gap = 0.0;  // test_loss - train_loss
};

LossGap loss_gap(const Model& model, const Dataset& train, const Dataset& test);

// One sample chosen for interaction analysis; the same set is reused at every
// checkpoint.
struct AnalysisSample {
  std::string id;
  std::size_t index = 0;  // position in the source dataset
  std::vector<double> x;
  std::size_t label = 0;
};

// k distinct samples drawn from `data` by seed (all of them if k >= size),
// returned in ascending dataset order.
std::vector<AnalysisSample> select_samples(const Dataset& data, std::size_t k, std::uint64_t seed);

struct SampleAnalysis {
  MaskedOutputTable table;
  SparsifyResult sparsify;
  InteractionDecomposition decomposition;
  SalientSet salient;
};

// masked_output_table -> sparsify -> decompose -> extract_salient.
SampleAnalysis analyze_sample(const Model& model, const AnalysisSample& sample,
                              const BaselineVector& baseline, const SparsifyConfig& sparsify_config,
                              const ThresholdPolicy& policy);

std::vector<SampleAnalysis> analyze_samples(const Model& model, const std::vector<AnalysisSample>& samples,
                                            const BaselineVector& baseline,
                                            const SparsifyConfig& sparsify_config,
                                            const ThresholdPolicy& policy, std::size_t jobs);

// Matches each sample's salient set against the baseline model's analysis of
// the same sample, using the baseline's own tau.
std::vector<GeneralizationReport> match_analyses(const std::vector<SampleAnalysis>& analysed,
                                                 const std::vector<SampleAnalysis>& base);

struct DynamicsRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double test_loss = 0.0;
  double loss_gap = 0.0;
  double n_bar = 0.0;
  std::optional<double> h_bar;
  std::map<std::size_t, std::size_t> order_hist;
  std::optional<double> mean_order;
  std::string checkpoint;
};

// Record for one checkpoint given the fixed samples and baseline analyses.
DynamicsRecord evaluate_checkpoint(const Model& model, const std::vector<AnalysisSample>& samples,
                                   const std::vector<SampleAnalysis>& base, const BaselineVector& baseline,
                                   const Dataset& train, const Dataset& test,
                                   const SparsifyConfig& sparsify_config, const ThresholdPolicy& policy,
                                   std::size_t jobs);

struct SweepConfig {
  std::size_t num_samples = 20;
  ThresholdPolicy policy;
  SparsifyConfig sparsify;
  std::filesystem::path baseline_ckpt;
  std::uint64_t seed = 0;
  std::size_t jobs = 0;  // 0 = all cores
  // Receives one line per skipped checkpoint; defaults to standard error.
  std::function<void(const std::string&)> on_warning;
};

struct SweepResult {
  std::size_t n = 0;
  std::size_t num_samples = 0;
  std::vector<DynamicsRecord> records;
  std::vector<std::string> skipped;
};

// Loads every checkpoint (unreadable ones are skipped with a warning), orders
// them by epoch and evaluates each against baseline analyses computed once.
// Throws InvalidArgument on duplicate epochs and IoError/ParseError if the
// baseline checkpoint cannot be loaded.
SweepResult sweep(const std::vector<std::filesystem::path>& checkpoints, const SweepConfig& config,
                  const Dataset& train, const Dataset& test);

// Checkpoint files (*.json other than manifest.json) in a directory, sorted
// by name.
std::vector<std::filesystem::path> list_checkpoints(const std::filesystem::path& dir);

// epoch,train_loss,test_loss,loss_gap,N_bar,H_bar,mean_order,order_1..order_n
std::string dynamics_csv(const SweepResult& result);
nlohmann::json dynamics_json(const SweepResult& result);

// Writes dynamics.csv, dynamics.json and four SVG charts (losses, N_bar,
// H_bar, mean order against epoch). Returns the written paths.
std::vector<std::filesystem::path> emit(const SweepResult& result, const std::filesystem::path& out_dir);

// Means of each curve over the first, middle and last third of the records;
// a descriptive aid for reading the curves, not a phase detector.
struct TrendSummary {
  std::vector<std::pair<std::string, std::vector<std::optional<double>>>> thirds;
  std::string text() const;
};

TrendSummary summarize_trends(const std::vector<DynamicsRecord>& records);

}  // namespace interdyn
