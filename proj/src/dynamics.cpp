#include "interdyn/dynamics.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <sstream>

#include "interdyn/error.hpp"
#include "interdyn/io.hpp"
#include "interdyn/parallel.hpp"
#include "interdyn/random.hpp"
#include "svg_chart.hpp"

namespace interdyn {

namespace fs = std::filesystem;

LossGap loss_gap(const Model& model, const Dataset& train, const Dataset& test) {
  if (train.empty() || test.empty()) throw InvalidArgument("loss_gap needs nonempty datasets");
  LossGap out;
  out.train_loss = cross_entropy(model, train);
  out.test_loss = cross_entropy(model, test);
  out.gap = out.test_loss - out.train_loss;
  return out;
}

std::vector<AnalysisSample> select_samples(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (data.empty()) throw InvalidArgument("cannot select analysis samples from an empty dataset");
  if (k == 0) throw InvalidArgument("num_samples must be >= 1");
  std::vector<std::size_t> indices(data.size());
  std::iota(indices.begin(), indices.end(), 0);
  Rng rng(derive_seed(seed, 23));
  rng.shuffle(std::span<std::size_t>(indices));
  indices.resize(std::min(k, indices.size()));
  std::sort(indices.begin(), indices.end());
  std::vector<AnalysisSample> out;
  for (std::size_t idx : indices) {
    out.push_back({std::string(to_string(data.role)) + "-" + std::to_string(idx), idx, data.samples[idx].x,
                   data.samples[idx].label});
  }
  return out;
}

SampleAnalysis analyze_sample(const Model& model, const AnalysisSample& sample,
                              const BaselineVector& baseline, const SparsifyConfig& sparsify_config,
                              const ThresholdPolicy& policy) {
  SampleAnalysis a;
  a.table = masked_output_table(model, sample.x, sample.label, baseline, sample.id);
  a.decomposition = decompose_sparse(a.table, sparsify_config, &a.sparsify);
  a.salient = extract_salient(a.decomposition, policy);
  return a;
}

std::vector<SampleAnalysis> analyze_samples(const Model& model, const std::vector<AnalysisSample>& samples,
                                            const BaselineVector& baseline,
                                            const SparsifyConfig& sparsify_config,
                                            const ThresholdPolicy& policy, std::size_t jobs) {
  std::vector<SampleAnalysis> out(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    out[i] = analyze_sample(model, samples[i], baseline, sparsify_config, policy);
  });
  return out;
}

std::vector<GeneralizationReport> match_analyses(const std::vector<SampleAnalysis>& analysed,
                                                 const std::vector<SampleAnalysis>& base) {
  if (analysed.size() != base.size()) throw DimensionError("analysed and baseline sample counts differ");
  std::vector<GeneralizationReport> reports;
  reports.reserve(analysed.size());
  for (std::size_t i = 0; i < analysed.size(); ++i) {
    if (analysed[i].table.sample_id != base[i].table.sample_id) {
      throw InvalidArgument("analysed and baseline samples are not aligned");
    }
    reports.push_back(match_generalization(analysed[i].salient, base[i].decomposition, base[i].salient.tau,
                                           analysed[i].table.sample_id));
  }
  return reports;
}

DynamicsRecord evaluate_checkpoint(const Model& model, const std::vector<AnalysisSample>& samples,
                                   const std::vector<SampleAnalysis>& base, const BaselineVector& baseline,
                                   const Dataset& train, const Dataset& test,
                                   const SparsifyConfig& sparsify_config, const ThresholdPolicy& policy,
                                   std::size_t jobs) {
  const std::vector<SampleAnalysis> analysed =
      analyze_samples(model, samples, baseline, sparsify_config, policy, jobs);
  const OrderSummary summary = aggregate_orders(match_analyses(analysed, base));
  const LossGap losses = loss_gap(model, train, test);
  DynamicsRecord r;
  r.epoch = model.epoch;
  r.train_loss = losses.train_loss;
  r.test_loss = losses.test_loss;
  r.loss_gap = losses.gap;
  r.n_bar = summary.n_bar;
  r.h_bar = summary.h_bar;
  r.mean_order = summary.mean_order;
  for (const auto& [order, stats] : summary.per_order) r.order_hist[order] = stats.count;
  return r;
}

SweepResult sweep(const std::vector<fs::path>& checkpoints, const SweepConfig& config, const Dataset& train,
                  const Dataset& test) {
  config.sparsify.validate();
  config.policy.validate();
  if (config.num_samples == 0) throw InvalidArgument("num_samples must be >= 1");
  if (checkpoints.empty()) throw InvalidArgument("sweep needs at least one checkpoint");
  auto warn = [&](const std::string& message) {
    if (config.on_warning) {
      config.on_warning(message);
    } else {
      std::cerr << "warning: " << message << "\n";
    }
  };

  const Model base_model = load_checkpoint(config.baseline_ckpt);
  const std::size_t n = base_model.spec.input_dim;
  check_variable_count(n);
  train.validate(base_model.spec.num_classes);
  test.validate(base_model.spec.num_classes);
  if (train.input_dim() != n || test.input_dim() != n) {
    throw DimensionError("datasets do not match the baseline model's input_dim");
  }

  SweepResult result;
  result.n = n;
  std::vector<std::pair<Model, std::string>> models;
  for (const fs::path& path : checkpoints) {
    try {
      Model m = load_checkpoint(path);
      if (m.spec.input_dim != n || m.spec.num_classes != base_model.spec.num_classes) {
        throw DimensionError("checkpoint shape differs from the baseline model");
      }
      models.emplace_back(std::move(m), path.filename().string());
    } catch (const Error& e) {
      warn("skipping checkpoint " + path.string() + ": " + e.what());
      result.skipped.push_back(path.filename().string());
    }
  }
  std::stable_sort(models.begin(), models.end(),
                   [](const auto& a, const auto& b) { return a.first.epoch < b.first.epoch; });
  for (std::size_t i = 1; i < models.size(); ++i) {
    if (models[i].first.epoch == models[i - 1].first.epoch) {
      throw InvalidArgument("two checkpoints share epoch " + std::to_string(models[i].first.epoch));
    }
  }

  const BaselineVector baseline = compute_baseline(train);
  const std::vector<AnalysisSample> samples = select_samples(test, config.num_samples, config.seed);
  result.num_samples = samples.size();
  const std::vector<SampleAnalysis> base =
      analyze_samples(base_model, samples, baseline, config.sparsify, config.policy, config.jobs);

  for (const auto& [model, name] : models) {
    DynamicsRecord r = evaluate_checkpoint(model, samples, base, baseline, train, test, config.sparsify,
                                           config.policy, config.jobs);
    r.checkpoint = name;
    result.records.push_back(std::move(r));
  }
  return result;
}

std::vector<fs::path> list_checkpoints(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("checkpoint directory not found: " + dir.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const fs::path& path = entry.path();
    if (entry.is_regular_file() && path.extension() == ".json" && path.filename() != "manifest.json") {
      out.push_back(path);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

std::string dynamics_csv(const SweepResult& result) {
  std::string out = "epoch,train_loss,test_loss,loss_gap,N_bar,H_bar,mean_order";
  for (std::size_t k = 1; k <= result.n; ++k) out += ",order_" + std::to_string(k);
  out += '\n';
  for (const DynamicsRecord& r : result.records) {
    out += std::to_string(r.epoch) + "," + format_double(r.train_loss) + "," + format_double(r.test_loss) + "," +
           format_double(r.loss_gap) + "," + format_double(r.n_bar) + "," + optional_cell(r.h_bar) + "," +
           optional_cell(r.mean_order);
    for (std::size_t k = 1; k <= result.n; ++k) {
      const auto it = r.order_hist.find(k);
      out += "," + std::to_string(it == r.order_hist.end() ? 0 : it->second);
    }
    out += '\n';
  }
  return out;
}

nlohmann::json dynamics_json(const SweepResult& result) {
  nlohmann::json records = nlohmann::json::array();
  for (const DynamicsRecord& r : result.records) {
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [order, count] : r.order_hist) hist[std::to_string(order)] = count;
    records.push_back({{"epoch", r.epoch},
                       {"checkpoint", r.checkpoint},
                       {"train_loss", r.train_loss},
                       {"test_loss", r.test_loss},
                       {"loss_gap", r.loss_gap},
                       {"N_bar", r.n_bar},
                       {"H_bar", optional_json(r.h_bar)},
                       {"mean_order", optional_json(r.mean_order)},
                       {"order_hist", std::move(hist)}});
  }
  return {{"n", result.n},
          {"num_samples", result.num_samples},
          {"skipped", result.skipped},
          {"records", std::move(records)}};
}

std::vector<fs::path> emit(const SweepResult& result, const fs::path& out_dir) {
  if (result.records.empty()) throw InvalidArgument("emit needs at least one record");
  std::vector<double> epochs;
  std::vector<std::optional<double>> train, test, gap, n_bar, h_bar, mean_order;
  for (const DynamicsRecord& r : result.records) {
    epochs.push_back(static_cast<double>(r.epoch));
    train.emplace_back(r.train_loss);
    test.emplace_back(r.test_loss);
    gap.emplace_back(r.loss_gap);
    n_bar.emplace_back(r.n_bar);
    h_bar.push_back(r.h_bar);
    mean_order.push_back(r.mean_order);
  }
  std::vector<std::pair<fs::path, std::string>> files;
  files.emplace_back(out_dir / "dynamics.csv", dynamics_csv(result));
  files.emplace_back(out_dir / "dynamics.json", dynamics_json(result).dump(2) + "\n");
  files.emplace_back(out_dir / "loss.svg",
                     detail::line_chart_svg("Training and testing loss", "cross-entropy", epochs,
                                            {{"train", "#1f77b4", train},
                                             {"test", "#d62728", test},
                                             {"gap (test-train)", "#2ca02c", gap}}));
  files.emplace_back(out_dir / "n_bar.svg",
                     detail::line_chart_svg("Salient interactions per sample", "N_bar", epochs,
                                            {{"N_bar", "#9467bd", n_bar}}));
  files.emplace_back(out_dir / "h_bar.svg",
                     detail::line_chart_svg("Generalization power of interactions", "H_bar", epochs,
                                            {{"H_bar", "#ff7f0e", h_bar}}));
  files.emplace_back(out_dir / "mean_order.svg",
                     detail::line_chart_svg("Mean interaction order", "order", epochs,
                                            {{"mean order", "#8c564b", mean_order}}));
  std::vector<fs::path> written;
  for (const auto& [path, content] : files) {
    write_file_atomic(path, content);
    written.push_back(path);
  }
  return written;
}

TrendSummary summarize_trends(const std::vector<DynamicsRecord>& records) {
  TrendSummary summary;
  const std::size_t count = records.size();
  auto third_means = [&](auto&& get) {
    std::vector<std::optional<double>> means;
    for (std::size_t t = 0; t < 3; ++t) {
      const std::size_t lo = count * t / 3, hi = count * (t + 1) / 3;
      double sum = 0.0;
      std::size_t used = 0;
      for (std::size_t i = lo; i < hi; ++i) {
        const std::optional<double> v = get(records[i]);
        if (v) {
          sum += *v;
          ++used;
        }
      }
      means.push_back(used ? std::optional<double>(sum / static_cast<double>(used)) : std::nullopt);
    }
    return means;
  };
  summary.thirds.emplace_back("train_loss", third_means([](const auto& r) { return std::optional(r.train_loss); }));
  summary.thirds.emplace_back("test_loss", third_means([](const auto& r) { return std::optional(r.test_loss); }));
  summary.thirds.emplace_back("loss_gap", third_means([](const auto& r) { return std::optional(r.loss_gap); }));
  summary.thirds.emplace_back("N_bar", third_means([](const auto& r) { return std::optional(r.n_bar); }));
  summary.thirds.emplace_back("H_bar", third_means([](const auto& r) { return r.h_bar; }));
  summary.thirds.emplace_back("mean_order", third_means([](const auto& r) { return r.mean_order; }));
  return summary;
}

std::string TrendSummary::text() const {
  std::ostringstream out;
  out << "curve means over early / middle / late thirds of the checkpoints\n";
  for (const auto& [name, values] : thirds) {
    char line[160];
    auto cell = [](const std::optional<double>& v) {
      char buf[32];
      if (v) {
        std::snprintf(buf, sizeof buf, "%10.4f", *v);
      } else {
        std::snprintf(buf, sizeof buf, "%10s", "-");
      }
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "  %-11s %s %s %s\n", name.c_str(), cell(values[0]).c_str(),
                  cell(values[1]).c_str(), cell(values[2]).c_str());
    out << line;
  }
  return out.str();
}

}  // namespace interdyn
