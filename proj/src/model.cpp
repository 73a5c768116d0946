#include "interdyn/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "interdyn/error.hpp"
#include "interdyn/io.hpp"
#include "interdyn/random.hpp"

namespace interdyn {

namespace fs = std::filesystem;
using nlohmann::json;

std::string to_string(Activation activation) {
  return activation == Activation::kRelu ? "relu" : "tanh";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw InvalidArgument("unknown activation '" + name + "' (expected relu or tanh)");
}

void ModelSpec::validate() const {
  if (input_dim < 1) throw InvalidArgument("input_dim must be >= 1");
  if (num_classes < 2) throw InvalidArgument("num_classes must be >= 2");
  for (std::size_t h : hidden_dims) {
    if (h < 1) throw InvalidArgument("hidden layer widths must be >= 1");
  }
}

namespace {

double activate(Activation a, double z) {
  return a == Activation::kRelu ? std::max(0.0, z) : std::tanh(z);
}

// Derivative expressed through the activation output.
double activate_grad(Activation a, double z, double out) {
  return a == Activation::kRelu ? (z > 0.0 ? 1.0 : 0.0) : 1.0 - out * out;
}

double log_sum_exp(std::span<const double> z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  return mx + std::log(sum);
}

void affine(const DenseLayer& layer, std::span<const double> in, std::span<double> out) {
  std::copy(layer.bias.begin(), layer.bias.end(), out.begin());
  for (std::size_t i = 0; i < layer.in; ++i) {
    const double xi = in[i];
    if (xi == 0.0) continue;
    const double* row = &layer.weights[i * layer.out];
    for (std::size_t j = 0; j < layer.out; ++j) out[j] += xi * row[j];
  }
}

void check_input(const Model& model, std::span<const double> x) {
  if (x.size() != model.spec.input_dim) {
    throw DimensionError("input has " + std::to_string(x.size()) +
                         " features but the model expects " +
                         std::to_string(model.spec.input_dim));
  }
}

}  // namespace

std::vector<double> Model::logits(std::span<const double> x) const {
  check_input(*this, x);
  std::vector<double> current(x.begin(), x.end());
  std::vector<double> next;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    next.assign(layers[l].out, 0.0);
    affine(layers[l], current, next);
    if (l + 1 < layers.size()) {
      for (double& v : next) v = activate(spec.activation, v);
    }
    current.swap(next);
  }
  return current;
}

Model init_model(const ModelSpec& spec) {
  spec.validate();
  Model model;
  model.spec = spec;
  Rng rng(derive_seed(spec.seed, 0));
  std::vector<std::size_t> widths{spec.input_dim};
  widths.insert(widths.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
  widths.push_back(spec.num_classes);
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    DenseLayer layer;
    layer.in = widths[l];
    layer.out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
    layer.weights.resize(layer.in * layer.out);
    for (double& w : layer.weights) w = rng.uniform(-bound, bound);
    layer.bias.resize(layer.out);
    for (double& b : layer.bias) b = rng.uniform(-bound, bound);
    model.layers.push_back(std::move(layer));
  }
  return model;
}

std::vector<double> predict_proba(const Model& model, std::span<const double> x) {
  std::vector<double> z = model.logits(x);
  const double lse = log_sum_exp(z);
  for (double& v : z) v = std::exp(v - lse);
  return z;
}

namespace {

double score_bound() {
  static const double bound = std::log((1.0 - kScoreEpsilon) / kScoreEpsilon);
  return bound;
}

}  // namespace

double log_odds(double p) {
  const double bound = score_bound();
  if (!(p > kScoreEpsilon)) return -bound;
  if (!(p < 1.0 - kScoreEpsilon)) return bound;
  return std::clamp(std::log(p / (1.0 - p)), -bound, bound);
}

double score(const Model& model, std::span<const double> x, std::size_t label) {
  if (label >= model.spec.num_classes) {
    throw InvalidArgument("label " + std::to_string(label) + " >= num_classes");
  }
  const std::vector<double> z = model.logits(x);
  std::vector<double> others;
  others.reserve(z.size() - 1);
  for (std::size_t k = 0; k < z.size(); ++k) {
    if (k != label) others.push_back(z[k]);
  }
  const double raw = z[label] - log_sum_exp(others);
  return std::clamp(raw, -score_bound(), score_bound());
}

double cross_entropy(const Model& model, const Dataset& data) {
  if (data.empty()) throw InvalidArgument("cross_entropy on an empty dataset");
  double total = 0.0;
  for (const Sample& s : data.samples) {
    const std::vector<double> z = model.logits(s.x);
    if (s.label >= z.size()) throw InvalidArgument("label out of range");
    total += log_sum_exp(z) - z[s.label];
  }
  return total / static_cast<double>(data.size());
}

namespace {

// Gradient accumulators mirroring the layer list.
struct Gradients {
  std::vector<std::vector<double>> weights;
  std::vector<std::vector<double>> bias;

  explicit Gradients(const Model& m) {
    for (const DenseLayer& layer : m.layers) {
      weights.emplace_back(layer.weights.size(), 0.0);
      bias.emplace_back(layer.bias.size(), 0.0);
    }
  }

  void clear() {
    for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : bias) std::fill(b.begin(), b.end(), 0.0);
  }
};

void accumulate_sample(const Model& model, const Sample& sample, Gradients& grads) {
  const std::size_t depth = model.layers.size();
  // pre[l] / post[l]: pre-activation and output of layer l; post[-1] is x.
  std::vector<std::vector<double>> pre(depth), post(depth);
  std::span<const double> input = sample.x;
  for (std::size_t l = 0; l < depth; ++l) {
    const DenseLayer& layer = model.layers[l];
    pre[l].assign(layer.out, 0.0);
    affine(layer, input, pre[l]);
    post[l] = pre[l];
    if (l + 1 < depth) {
      for (double& v : post[l]) v = activate(model.spec.activation, v);
    }
    input = post[l];
  }
  // Softmax cross-entropy: dL/dz = softmax(z) - onehot(label).
  std::vector<double> delta = post[depth - 1];
  const double lse = log_sum_exp(delta);
  for (double& v : delta) v = std::exp(v - lse);
  delta[sample.label] -= 1.0;

  for (std::size_t l = depth; l-- > 0;) {
    const DenseLayer& layer = model.layers[l];
    std::span<const double> in = l == 0 ? std::span<const double>(sample.x)
                                         : std::span<const double>(post[l - 1]);
    auto& gw = grads.weights[l];
    for (std::size_t i = 0; i < layer.in; ++i) {
      const double xi = in[i];
      if (xi == 0.0) continue;
      double* row = &gw[i * layer.out];
      for (std::size_t j = 0; j < layer.out; ++j) row[j] += xi * delta[j];
    }
    for (std::size_t j = 0; j < layer.out; ++j) grads.bias[l][j] += delta[j];
    if (l == 0) break;
    std::vector<double> prev(layer.in, 0.0);
    for (std::size_t i = 0; i < layer.in; ++i) {
      const double* row = &layer.weights[i * layer.out];
      double acc = 0.0;
      for (std::size_t j = 0; j < layer.out; ++j) acc += row[j] * delta[j];
      prev[i] = acc * activate_grad(model.spec.activation, pre[l - 1][i], post[l - 1][i]);
    }
    delta.swap(prev);
  }
}

double checked_loss(const Model& model, const Dataset& data, std::size_t epoch) {
  const double loss = cross_entropy(model, data);
  if (!std::isfinite(loss)) {
    throw NumericError("training loss became non-finite at epoch " + std::to_string(epoch));
  }
  return loss;
}

}  // namespace

std::string checkpoint_filename(std::size_t epoch) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "ckpt_epoch_%06zu.json", epoch);
  return buf;
}

std::vector<fs::path> train(Model& model, const Dataset& data, const TrainConfig& config) {
  if (data.role != Split::kTrain) throw InvalidArgument("train() requires a train-role dataset");
  data.validate(model.spec.num_classes);
  if (data.input_dim() != model.spec.input_dim) {
    throw DimensionError("dataset has " + std::to_string(data.input_dim()) +
                         " features but the model expects " +
                         std::to_string(model.spec.input_dim));
  }
  if (config.checkpoint_every == 0) throw InvalidArgument("checkpoint_every must be >= 1");
  if (config.batch_size == 0) throw InvalidArgument("batch_size must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw InvalidArgument("learning rate must be positive");
  }

  std::vector<fs::path> written;
  auto checkpoint = [&] {
    fs::path path = config.out_dir / checkpoint_filename(model.epoch);
    save_checkpoint(model, path);
    written.push_back(std::move(path));
  };

  if (model.loss_history.empty() || model.loss_history.back().epoch != model.epoch) {
    model.loss_history.push_back({model.epoch, checked_loss(model, data, model.epoch)});
  }
  checkpoint();

  std::vector<std::size_t> order(data.size());
  Gradients grads(model);
  const std::size_t final_epoch = model.epoch + config.epochs;

  while (model.epoch < final_epoch) {
    // Each epoch's shuffle depends only on (seed, epoch), so resuming from a
    // checkpoint and training in one go agree.
    Rng rng(derive_seed(model.spec.seed, 1 + model.epoch));
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      grads.clear();
      for (std::size_t k = start; k < stop; ++k) accumulate_sample(model, data.samples[order[k]], grads);
      const double step = config.learning_rate / static_cast<double>(stop - start);
      for (std::size_t l = 0; l < model.layers.size(); ++l) {
        DenseLayer& layer = model.layers[l];
        for (std::size_t i = 0; i < layer.weights.size(); ++i) layer.weights[i] -= step * grads.weights[l][i];
        for (std::size_t j = 0; j < layer.bias.size(); ++j) layer.bias[j] -= step * grads.bias[l][j];
      }
    }
    ++model.epoch;
    model.loss_history.push_back({model.epoch, checked_loss(model, data, model.epoch)});
    if (model.epoch % config.checkpoint_every == 0 || model.epoch == final_epoch) checkpoint();
  }
  return written;
}

json checkpoint_to_json(const Model& model) {
  json spec = {
      {"input_dim", model.spec.input_dim},
      {"hidden_dims", model.spec.hidden_dims},
      {"num_classes", model.spec.num_classes},
      {"seed", model.spec.seed},
      {"activation", to_string(model.spec.activation)},
  };
  json history = json::array();
  for (const LossEntry& e : model.loss_history) history.push_back({e.epoch, e.train_loss});
  json weights = json::array();
  for (const DenseLayer& layer : model.layers) {
    json rows = json::array();
    for (std::size_t i = 0; i < layer.in; ++i) {
      rows.push_back(std::vector<double>(layer.weights.begin() + static_cast<std::ptrdiff_t>(i * layer.out),
                                         layer.weights.begin() + static_cast<std::ptrdiff_t>((i + 1) * layer.out)));
    }
    weights.push_back({{"W", std::move(rows)}, {"b", layer.bias}});
  }
  return {
      {"format_version", kCheckpointFormatVersion},
      {"spec", std::move(spec)},
      {"epoch", model.epoch},
      {"loss_history", std::move(history)},
      {"weights", std::move(weights)},
  };
}

Model checkpoint_from_json(const json& doc) {
  try {
    if (!doc.is_object()) throw ParseError("checkpoint is not a JSON object");
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw ParseError("checkpoint format_version " + std::to_string(version) +
                       " is not supported (expected " +
                       std::to_string(kCheckpointFormatVersion) + ")");
    }
    Model model;
    const json& spec = doc.at("spec");
    model.spec.input_dim = spec.at("input_dim").get<std::size_t>();
    model.spec.hidden_dims = spec.at("hidden_dims").get<std::vector<std::size_t>>();
    model.spec.num_classes = spec.at("num_classes").get<std::size_t>();
    model.spec.seed = spec.at("seed").get<std::uint64_t>();
    model.spec.activation = parse_activation(spec.at("activation").get<std::string>());
    model.spec.validate();
    model.epoch = doc.at("epoch").get<std::size_t>();
    for (const json& e : doc.at("loss_history")) {
      model.loss_history.push_back({e.at(0).get<std::size_t>(), e.at(1).get<double>()});
    }

    std::vector<std::size_t> widths{model.spec.input_dim};
    widths.insert(widths.end(), model.spec.hidden_dims.begin(), model.spec.hidden_dims.end());
    widths.push_back(model.spec.num_classes);
    const json& weights = doc.at("weights");
    if (weights.size() != widths.size() - 1) throw ParseError("checkpoint layer count does not match spec");
    for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
      DenseLayer layer;
      layer.in = widths[l];
      layer.out = widths[l + 1];
      const json& rows = weights[l].at("W");
      if (rows.size() != layer.in) throw ParseError("checkpoint weight matrix has wrong row count");
      for (const json& row : rows) {
        if (row.size() != layer.out) throw ParseError("checkpoint weight matrix has wrong column count");
        for (const json& v : row) layer.weights.push_back(v.get<double>());
      }
      layer.bias = weights[l].at("b").get<std::vector<double>>();
      if (layer.bias.size() != layer.out) throw ParseError("checkpoint bias has wrong length");
      model.layers.push_back(std::move(layer));
    }
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed checkpoint: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ParseError(std::string("invalid checkpoint: ") + e.what());
  }
}

void save_checkpoint(const Model& model, const fs::path& path) {
  write_file_atomic(path, checkpoint_to_json(model).dump() + "\n");
}

Model load_checkpoint(const fs::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  try {
    return checkpoint_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace interdyn
