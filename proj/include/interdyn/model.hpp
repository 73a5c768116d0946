#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "interdyn/dataset.hpp"

namespace interdyn {

enum class Activation { kRelu, kTanh };

std::string to_string(Activation activation);
Activation parse_activation(const std::string& name);

struct ModelSpec {
  std::size_t input_dim = 0;
  std::vector<std::size_t> hidden_dims;
  std::size_t num_classes = 2;
  std::uint64_t seed = 0;
  Activation activation = Activation::kRelu;

  // Throws InvalidArgument on input_dim == 0, num_classes < 2 or an empty
  // hidden layer.
  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

// Fully connected layer; weights are row-major with shape (in x out).
struct DenseLayer {
  std::size_t in = 0;
  std::size_t out = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double weight(std::size_t row, std::size_t col) const { return weights[row * out + col]; }

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct LossEntry {
  std::size_t epoch = 0;
  double train_loss = 0.0;

  friend bool operator==(const LossEntry&, const LossEntry&) = default;
};

// A feedforward classifier. Immutable once loaded; every const member is safe
// to call from several threads.
struct Model {
  ModelSpec spec;
  std::vector<DenseLayer> layers;
  std::size_t epoch = 0;
  std::vector<LossEntry> loss_history;

  // Class logits. Throws DimensionError if x has the wrong length.
  std::vector<double> logits(std::span<const double> x) const;

  friend bool operator==(const Model&, const Model&) = default;
};

// Probability clamp applied before taking log-odds.
inline constexpr double kScoreEpsilon = 1e-7;

Model init_model(const ModelSpec& spec);

std::vector<double> predict_proba(const Model& model, std::span<const double> x);

// log(p / (1 - p)) with p clamped to [kScoreEpsilon, 1 - kScoreEpsilon].
double log_odds(double p);

// Log-odds of `label` under the model. Evaluated from logits as
// z_label - logsumexp(other logits), then clamped to the same bound log_odds
// applies, which avoids cancellation in 1 - p when p is close to one.
double score(const Model& model, std::span<const double> x, std::size_t label);

// Mean cross-entropy over the dataset.
double cross_entropy(const Model& model, const Dataset& data);

struct TrainConfig {
  std::size_t epochs = 0;
  double learning_rate = 0.05;
  std::size_t batch_size = 32;
  std::size_t checkpoint_every = 10;
  std::filesystem::path out_dir;
};

// Mini-batch SGD on softmax cross-entropy. Writes a checkpoint at the
// starting epoch, every `checkpoint_every` epochs and at the final epoch, and
// returns their paths in epoch order. Shuffling is seeded from the model spec,
// so the run is deterministic. Throws NumericError naming the epoch if the
// training loss becomes non-finite.
std::vector<std::filesystem::path> train(Model& model, const Dataset& data,
                                         const TrainConfig& config);

inline constexpr int kCheckpointFormatVersion = 1;

std::string checkpoint_filename(std::size_t epoch);

nlohmann::json checkpoint_to_json(const Model& model);
Model checkpoint_from_json(const nlohmann::json& doc);

void save_checkpoint(const Model& model, const std::filesystem::path& path);
// Throws ParseError on malformed content or a format_version mismatch.
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace interdyn
