#include "interdyn/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "interdyn/dataset.hpp"
#include "interdyn/dynamics.hpp"
#include "interdyn/error.hpp"
#include "interdyn/io.hpp"
#include "interdyn/model.hpp"
#include "interdyn/random.hpp"
#include "interdyn/synthetic.hpp"
#include "interdyn/verify.hpp"

#ifndef INTERDYN_VERSION
#define INTERDYN_VERSION "0.0.0"
#endif

namespace interdyn::cli {
namespace {

namespace fs = std::filesystem;

// Raised for a required flag that is absent after the config file is merged.
struct MissingFlag : InvalidArgument {
  using InvalidArgument::InvalidArgument;
};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::size_t> parse_arch(const std::string& text) {
  std::vector<std::size_t> dims;
  std::stringstream stream(text);
  std::string part;
  while (std::getline(stream, part, ',')) {
    part = trim(part);
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
    if (part.empty() || ec != std::errc() || end != part.data() + part.size() || value == 0) {
      throw InvalidArgument("--arch: expected positive integers separated by commas, got '" + text + "'");
    }
    dims.push_back(value);
  }
  if (dims.size() < 2) throw InvalidArgument("--arch needs at least input and output sizes");
  return dims;
}

PlantedOptions::Kinds parse_kinds(const std::string& name) {
  if (name == "and") return PlantedOptions::Kinds::kAnd;
  if (name == "or") return PlantedOptions::Kinds::kOr;
  if (name == "mixed") return PlantedOptions::Kinds::kMixed;
  throw InvalidArgument("--kind must be and, or or mixed, got '" + name + "'");
}

nlohmann::json manifest_value(const std::string& text) {
  const char* begin = text.data();
  const char* end = begin + text.size();
  std::int64_t integer = 0;
  if (auto r = std::from_chars(begin, end, integer); r.ec == std::errc() && r.ptr == end) return integer;
  std::uint64_t unsigned_integer = 0;
  if (auto r = std::from_chars(begin, end, unsigned_integer); r.ec == std::errc() && r.ptr == end) {
    return unsigned_integer;
  }
  double real = 0.0;
  if (auto r = std::from_chars(begin, end, real); r.ec == std::errc() && r.ptr == end) return real;
  return text;
}

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::vector<std::string> required;
  std::function<int(std::ostream&, std::ostream&)> action;
};

class Runner {
 public:
  Runner();

  int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

 private:
  Command& add_command(const std::string& name, const std::string& description);
  void apply_config(Command& command);
  void check_required(const Command& command) const;
  void write_manifest(const Command& command, const fs::path& out_dir) const;

  void add_sparsify_options(CLI::App* app);
  ThresholdPolicy policy() const;

  int synth(std::ostream& out);
  int train(std::ostream& out);
  int extract(std::ostream& out);
  int match(std::ostream& out);
  int sweep(std::ostream& out, std::ostream& err);
  int verify(std::ostream& out);

  CLI::App app_{"Sparse AND-OR interaction analysis of small classifiers"};
  std::map<std::string, Command> commands_;
  Command* active_ = nullptr;

  std::size_t jobs_ = 0;
  std::string out_dir_;
  std::uint64_t seed_ = 0;

  // synth
  std::size_t n_ = 8;
  std::size_t planted_ = 5;
  std::string kind_ = "and";
  std::size_t min_order_ = 2;
  std::size_t max_order_ = 4;
  double bias_ = 0.0;
  double noise_ = 0.0;
  double jitter_ = 0.1;
  std::size_t num_train_ = 2000;
  std::size_t num_test_ = 1000;

  // train
  std::string data_;
  std::string arch_;
  std::size_t epochs_ = 100;
  double lr_ = 0.05;
  std::size_t batch_ = 32;
  std::size_t ckpt_every_ = 10;
  std::string activation_ = "relu";

  // analysis
  std::string ckpt_;
  std::string base_ckpt_;
  std::string ckpt_dir_;
  std::string train_data_;
  std::string test_data_;
  std::size_t samples_ = 20;
  double alpha_ = 0.05;
  SparsifyConfig sparsify_;
  std::string sparsify_method_ = "admm";

  // verify
  std::size_t trials_ = 100;
  std::size_t verify_iters_ = 500;
};

Command& Runner::add_command(const std::string& name, const std::string& description) {
  Command& command = commands_[name];
  command.app = app_.add_subcommand(name, description);
  command.app->add_option("--config", command.config_path, "Flat key=value file supplying flag defaults")
      ->check(CLI::ExistingFile);
  return command;
}

void Runner::add_sparsify_options(CLI::App* app) {
  app->add_option("--sparsify-iters", sparsify_.max_iters, "Sparsifier iteration cap")
      ->check(CLI::PositiveNumber);
  app->add_option("--sparsify-method", sparsify_method_, "admm or subgradient")
      ->check(CLI::IsMember({"admm", "subgradient"}));
  app->add_option("--alpha", alpha_, "Relative saliency threshold")->check(CLI::Range(0.0, 1.0));
  app->add_option("--jobs", jobs_, "Worker threads (0 = all cores)");
}

Runner::Runner() {
  app_.name("interdyn");
  app_.option_defaults()->always_capture_default();
  app_.set_version_flag("--version", std::string(version()));
  app_.require_subcommand(1);

  {
    Command& c = add_command("synth", "Generate a planted AND-OR dataset");
    auto* a = c.app;
    a->add_option("--n", n_, "Number of input variables")->check(CLI::Range(1, 16));
    a->add_option("--planted", planted_, "Number of planted terms");
    a->add_option("--kind", kind_, "Planted kinds: and, or or mixed")->check(CLI::IsMember({"and", "or", "mixed"}));
    a->add_option("--min-order", min_order_, "Smallest planted order");
    a->add_option("--max-order", max_order_, "Largest planted order");
    a->add_option("--bias", bias_, "Constant score term");
    a->add_option("--noise", noise_, "Label noise standard deviation")->check(CLI::NonNegativeNumber);
    a->add_option("--jitter", jitter_, "Feature jitter standard deviation")->check(CLI::NonNegativeNumber);
    a->add_option("--num-train", num_train_, "Training samples")->check(CLI::PositiveNumber);
    a->add_option("--num-test", num_test_, "Test samples")->check(CLI::PositiveNumber);
    a->add_option("--seed", seed_, "Random seed");
    a->add_option("--out", out_dir_, "Output directory");
    c.required = {"out"};
    c.action = [this](std::ostream& out, std::ostream&) { return synth(out); };
  }
  {
    Command& c = add_command("train", "Train an MLP and write checkpoints");
    auto* a = c.app;
    a->add_option("--data", data_, "Training CSV")->check(CLI::ExistingFile);
    a->add_option("--arch", arch_, "Layer sizes d,h1,...,c");
    a->add_option("--epochs", epochs_, "Training epochs");
    a->add_option("--lr", lr_, "Learning rate")->check(CLI::PositiveNumber);
    a->add_option("--batch", batch_, "Mini-batch size")->check(CLI::PositiveNumber);
    a->add_option("--seed", seed_, "Initialisation and shuffling seed");
    a->add_option("--ckpt-every", ckpt_every_, "Checkpoint interval in epochs")->check(CLI::PositiveNumber);
    a->add_option("--activation", activation_, "relu or tanh")->check(CLI::IsMember({"relu", "tanh"}));
    a->add_option("--out", out_dir_, "Checkpoint directory");
    c.required = {"data", "arch", "out"};
    c.action = [this](std::ostream& out, std::ostream&) { return train(out); };
  }
  {
    Command& c = add_command("extract", "Decompose one checkpoint on sampled inputs");
    auto* a = c.app;
    a->add_option("--ckpt", ckpt_, "Checkpoint JSON")->check(CLI::ExistingFile);
    a->add_option("--data", data_, "CSV to draw samples from")->check(CLI::ExistingFile);
    a->add_option("--train", train_data_, "Training CSV for the baseline vector (default: --data)")
        ->check(CLI::ExistingFile);
    a->add_option("--samples", samples_, "Number of samples")->check(CLI::PositiveNumber);
    a->add_option("--seed", seed_, "Sample selection seed");
    a->add_option("--out", out_dir_, "Output directory");
    add_sparsify_options(a);
    c.required = {"ckpt", "data", "out"};
    c.action = [this](std::ostream& out, std::ostream&) { return extract(out); };
  }
  {
    Command& c = add_command("match", "Score transfer of salient interactions to a baseline model");
    auto* a = c.app;
    a->add_option("--ckpt", ckpt_, "Checkpoint JSON")->check(CLI::ExistingFile);
    a->add_option("--base-ckpt", base_ckpt_, "Baseline model checkpoint")->check(CLI::ExistingFile);
    a->add_option("--data", data_, "CSV to draw samples from")->check(CLI::ExistingFile);
    a->add_option("--train", train_data_, "Training CSV for the baseline vector (default: --data)")
        ->check(CLI::ExistingFile);
    a->add_option("--samples", samples_, "Number of samples")->check(CLI::PositiveNumber);
    a->add_option("--seed", seed_, "Sample selection seed");
    a->add_option("--out", out_dir_, "Output directory");
    add_sparsify_options(a);
    c.required = {"ckpt", "base-ckpt", "data", "out"};
    c.action = [this](std::ostream& out, std::ostream&) { return match(out); };
  }
  {
    Command& c = add_command("sweep", "Interaction dynamics over a checkpoint directory");
    auto* a = c.app;
    a->add_option("--ckpt-dir", ckpt_dir_, "Directory of checkpoints")->check(CLI::ExistingDirectory);
    a->add_option("--base-ckpt", base_ckpt_, "Baseline model checkpoint")->check(CLI::ExistingFile);
    a->add_option("--train", train_data_, "Training CSV")->check(CLI::ExistingFile);
    a->add_option("--test", test_data_, "Test CSV")->check(CLI::ExistingFile);
    a->add_option("--samples", samples_, "Number of analysed test samples")->check(CLI::PositiveNumber);
    a->add_option("--seed", seed_, "Sample selection seed");
    a->add_option("--out", out_dir_, "Output directory");
    add_sparsify_options(a);
    c.required = {"ckpt-dir", "base-ckpt", "train", "test", "out"};
    c.action = [this](std::ostream& out, std::ostream& err) { return sweep(out, err); };
  }
  {
    Command& c = add_command("verify", "Run the randomised invariant suite");
    auto* a = c.app;
    a->add_option("--n", n_, "Number of variables")->check(CLI::Range(1, 16));
    a->add_option("--trials", trials_, "Random trials per check")->check(CLI::PositiveNumber);
    a->add_option("--seed", seed_, "Random seed");
    a->add_option("--sparsify-iters", verify_iters_, "Sparsifier iteration cap")->check(CLI::PositiveNumber);
    a->add_option("--jobs", jobs_, "Worker threads (0 = all cores)");
    c.action = [this](std::ostream& out, std::ostream&) { return verify(out); };
  }
}

void Runner::apply_config(Command& command) {
  if (command.config_path.empty()) return;
  for (const auto& [key, value] : parse_config_text(read_file(command.config_path))) {
    CLI::Option* option = key == "config" ? nullptr : command.app->get_option_no_throw("--" + key);
    if (option == nullptr || key == "help") {
      throw InvalidArgument(command.config_path + ": unknown key '" + key + "' for " + command.app->get_name());
    }
    if (option->count() > 0) continue;
    option->add_result(value);
    option->run_callback();
  }
}

void Runner::check_required(const Command& command) const {
  for (const std::string& name : command.required) {
    if (command.app->get_option("--" + name)->count() == 0) throw MissingFlag("missing required flag --" + name);
  }
}

void Runner::write_manifest(const Command& command, const fs::path& out_dir) const {
  nlohmann::json config = nlohmann::json::object();
  for (const CLI::Option* option : command.app->get_options()) {
    const auto& names = option->get_lnames();
    if (names.empty() || names[0] == "help" || names[0] == "config") continue;
    const std::string text = option->count() > 0 ? option->results().back() : option->get_default_str();
    config[names[0]] = manifest_value(text);
  }
  const nlohmann::json manifest = {
      {"tool", "interdyn"},
      {"version", version()},
      {"subcommand", command.app->get_name()},
      {"config_file", command.config_path.empty() ? nlohmann::json(nullptr) : nlohmann::json(command.config_path)},
      {"config", config},
  };
  write_file_atomic(out_dir / "manifest.json", manifest.dump(2) + "\n");
}

ThresholdPolicy Runner::policy() const {
  ThresholdPolicy p = ThresholdPolicy::relative(alpha_);
  p.validate();
  return p;
}

int Runner::synth(std::ostream& out) {
  if (planted_ == 0) throw InvalidArgument("--planted must be at least 1");
  PlantedOptions options;
  options.n = n_;
  options.num_terms = planted_;
  options.kinds = parse_kinds(kind_);
  options.min_order = min_order_;
  options.max_order = std::min(max_order_, n_);
  options.seed = derive_seed(seed_, 101);

  PlantedSpec spec;
  spec.n = n_;
  spec.planted = random_planted_terms(options);
  spec.bias = bias_;
  spec.noise_std = noise_;
  spec.feature_jitter = jitter_;
  spec.num_train = num_train_;
  spec.num_test = num_test_;
  spec.seed = seed_;
  const SyntheticTask task = gen_dataset(spec);

  const fs::path dir(out_dir_);
  write_dataset_csv(task.train, dir / "train.csv");
  write_dataset_csv(task.test, dir / "test.csv");
  write_file_atomic(dir / "truth.json", planted_to_json(task.truth).dump(2) + "\n");
  write_manifest(*active_, dir);
  out << "wrote " << task.train.size() << " train and " << task.test.size() << " test samples with "
      << spec.planted.size() << " planted terms to " << dir.string() << "\n";
  return kExitOk;
}

int Runner::train(std::ostream& out) {
  const std::vector<std::size_t> dims = parse_arch(arch_);
  const Dataset data = read_dataset_csv(data_, Split::kTrain);
  ModelSpec spec;
  spec.input_dim = dims.front();
  spec.hidden_dims.assign(dims.begin() + 1, dims.end() - 1);
  spec.num_classes = dims.back();
  spec.seed = seed_;
  spec.activation = parse_activation(activation_);
  spec.validate();
  if (spec.input_dim != data.input_dim()) {
    throw DimensionError("--arch input size " + std::to_string(spec.input_dim) + " does not match " +
                         std::to_string(data.input_dim()) + " data columns");
  }
  data.validate(spec.num_classes);

  Model model = init_model(spec);
  TrainConfig config;
  config.epochs = epochs_;
  config.learning_rate = lr_;
  config.batch_size = batch_;
  config.checkpoint_every = ckpt_every_;
  config.out_dir = out_dir_;
  const auto paths = interdyn::train(model, data, config);
  write_manifest(*active_, out_dir_);
  out << "trained " << model.epoch << " epochs, final train loss " << format_double(cross_entropy(model, data))
      << ", " << paths.size() << " checkpoints in " << out_dir_ << "\n";
  return kExitOk;
}

int Runner::extract(std::ostream& out) {
  sparsify_.method = parse_sparsify_method(sparsify_method_);
  sparsify_.validate();
  const ThresholdPolicy p = policy();
  const Model model = load_checkpoint(ckpt_);
  const Dataset data = read_dataset_csv(data_, Split::kTest);
  const Dataset train = train_data_.empty() ? read_dataset_csv(data_, Split::kTrain)
                                            : read_dataset_csv(train_data_, Split::kTrain);
  const BaselineVector baseline = compute_baseline(train);
  const auto samples = select_samples(data, samples_, seed_);
  const auto analyses = analyze_samples(model, samples, baseline, sparsify_, p, jobs_);

  const fs::path dir(out_dir_);
  nlohmann::json index = nlohmann::json::array();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const SampleAnalysis& a = analyses[i];
    nlohmann::json doc = decomposition_to_json(a.decomposition);
    doc["label"] = samples[i].label;
    doc["objective"] = a.sparsify.final_objective;
    doc["converged"] = a.sparsify.converged;
    const std::string file = "decomp_" + samples[i].id + ".json";
    write_file_atomic(dir / file, doc.dump(2) + "\n");
    index.push_back({{"sample_id", samples[i].id}, {"file", file}, {"salient", a.salient.items.size()},
                     {"objective", a.sparsify.final_objective}});
    out << samples[i].id << ": objective " << format_double(a.sparsify.final_objective) << ", "
        << a.salient.items.size() << " salient interactions\n";
  }
  write_file_atomic(dir / "index.json", index.dump(2) + "\n");
  write_manifest(*active_, dir);
  return kExitOk;
}

int Runner::match(std::ostream& out) {
  sparsify_.method = parse_sparsify_method(sparsify_method_);
  sparsify_.validate();
  const ThresholdPolicy p = policy();
  const Model model = load_checkpoint(ckpt_);
  const Model base = load_checkpoint(base_ckpt_);
  if (model.spec.input_dim != base.spec.input_dim) {
    throw DimensionError("checkpoint and baseline checkpoint have different input sizes");
  }
  const Dataset data = read_dataset_csv(data_, Split::kTest);
  const Dataset train = train_data_.empty() ? read_dataset_csv(data_, Split::kTrain)
                                            : read_dataset_csv(train_data_, Split::kTrain);
  const BaselineVector baseline = compute_baseline(train);
  const auto samples = select_samples(data, samples_, seed_);
  const auto analysed = analyze_samples(model, samples, baseline, sparsify_, p, jobs_);
  const auto base_analyses = analyze_samples(base, samples, baseline, sparsify_, p, jobs_);
  const auto reports = match_analyses(analysed, base_analyses);

  const fs::path dir(out_dir_);
  for (const GeneralizationReport& report : reports) {
    write_file_atomic(dir / ("report_" + report.sample_id + ".json"), report_to_json(report).dump(2) + "\n");
  }
  const OrderSummary summary = aggregate_orders(reports);
  write_file_atomic(dir / "summary.json", summary_to_json(summary).dump(2) + "\n");
  write_manifest(*active_, dir);
  out << "samples " << reports.size() << ", N_bar " << format_double(summary.n_bar) << ", H_bar "
      << (summary.h_bar ? format_double(*summary.h_bar) : std::string("n/a")) << "\n";
  return kExitOk;
}

int Runner::sweep(std::ostream& out, std::ostream& err) {
  sparsify_.method = parse_sparsify_method(sparsify_method_);
  sparsify_.validate();
  SweepConfig config;
  config.num_samples = samples_;
  config.policy = policy();
  config.sparsify = sparsify_;
  config.baseline_ckpt = base_ckpt_;
  config.seed = seed_;
  config.jobs = jobs_;
  config.on_warning = [&err](const std::string& line) { err << "warning: " << line << "\n"; };

  std::vector<fs::path> checkpoints;
  std::error_code ec;
  const fs::path base_path = fs::weakly_canonical(base_ckpt_, ec);
  for (const fs::path& path : list_checkpoints(ckpt_dir_)) {
    if (fs::weakly_canonical(path, ec) != base_path) checkpoints.push_back(path);
  }
  if (checkpoints.empty()) throw InvalidArgument("no checkpoints (*.json) in " + ckpt_dir_);

  const Dataset train = read_dataset_csv(train_data_, Split::kTrain);
  const Dataset test = read_dataset_csv(test_data_, Split::kTest);
  const SweepResult result = interdyn::sweep(checkpoints, config, train, test);
  emit(result, out_dir_);
  write_manifest(*active_, out_dir_);
  out << result.records.size() << " checkpoints analysed";
  if (!result.skipped.empty()) out << ", " << result.skipped.size() << " skipped";
  out << "\n" << summarize_trends(result.records).text();
  return kExitOk;
}

int Runner::verify(std::ostream& out) {
  VerifyConfig config;
  config.n = n_;
  config.trials = trials_;
  config.seed = seed_;
  config.jobs = jobs_;
  config.sparsify.max_iters = verify_iters_;
  const auto checks = run_verify(config);
  std::size_t passed = 0;
  for (const CheckResult& check : checks) {
    out << (check.passed ? "PASS " : "FAIL ") << check.name << " (" << check.detail << ")\n";
    passed += check.passed;
  }
  out << passed << "/" << checks.size() << " checks passed\n";
  return passed == checks.size() ? kExitOk : kExitRuntime;
}

int Runner::run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app_.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app_.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }
  for (auto& [name, command] : commands_) {
    if (command.app->parsed()) active_ = &command;
  }
  if (active_ == nullptr) return kExitValidation;

  try {
    apply_config(*active_);
    check_required(*active_);
  } catch (const MissingFlag& e) {
    err << "error: " << e.what() << "\n\n" << active_->app->help();
    return kExitValidation;
  } catch (const CLI::Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  try {
    return active_->action(out, err);
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace

std::vector<std::pair<std::string, std::string>> parse_config_text(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream lines(text);
  std::string line;
  std::size_t number = 0;
  while (std::getline(lines, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw InvalidArgument("config line " + std::to_string(number) + ": expected key=value");
    }
    std::string key = trim(stripped.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    if (key.empty()) throw InvalidArgument("config line " + std::to_string(number) + ": empty key");
    for (const auto& entry : entries) {
      if (entry.first == key) throw InvalidArgument("config line " + std::to_string(number) + ": repeated key '" + key + "'");
    }
    entries.emplace_back(key, trim(stripped.substr(eq + 1)));
  }
  return entries;
}

const char* version() { return INTERDYN_VERSION; }

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Runner runner;
  return runner.run(args, out, err);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace interdyn::cli
