#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "interdyn/dynamics.hpp"
#include "interdyn/error.hpp"
#include "interdyn/io.hpp"
#include "interdyn/synthetic.hpp"
#include "test_helpers.hpp"
#include "xml_check.hpp"

namespace interdyn {
namespace {

using testing::TempDir;

SyntheticTask small_task(std::size_t n, std::uint64_t seed) {
  PlantedSpec spec;
  spec.n = n;
  PlantedOptions o;
  o.n = n;
  o.num_terms = 3;
  o.max_order = 3;
  o.seed = seed;
  spec.planted = random_planted_terms(o);
  spec.num_train = 120;
  spec.num_test = 60;
  spec.seed = seed;
  return gen_dataset(spec);
}

SweepConfig fast_config(const std::filesystem::path& base) {
  SweepConfig c;
  c.num_samples = 4;
  c.sparsify.max_iters = 400;
  c.baseline_ckpt = base;
  c.seed = 3;
  c.jobs = 1;
  c.on_warning = [](const std::string&) {};
  return c;
}

TEST(LossGap, IdentityAndAntisymmetry) {
  const auto task = small_task(4, 1);
  const Model m = init_model({4, {6}, 2, 2});
  const auto same = loss_gap(m, task.train, task.train);
  EXPECT_EQ(same.gap, 0.0);
  const auto ab = loss_gap(m, task.train, task.test);
  const auto ba = loss_gap(m, task.test, task.train);
  EXPECT_EQ(ab.gap, -ba.gap);
  EXPECT_EQ(ab.gap, ab.test_loss - ab.train_loss);
  EXPECT_THROW(loss_gap(m, Dataset{}, task.test), InvalidArgument);
}

TEST(LossGap, MemorisingRandomLabelsOpensGap) {
  TempDir dir("memorise");
  Rng rng(5);
  Dataset train, test;
  test.role = Split::kTest;
  for (int i = 0; i < 40; ++i) train.samples.push_back({testing::random_vector(6, rng), rng.below(2)});
  for (int i = 0; i < 200; ++i) test.samples.push_back({testing::random_vector(6, rng), rng.below(2)});
  Model m = init_model({6, {64, 64}, 2, 5});
  interdyn::train(m, train, {300, 0.1, 8, 300, dir.path()});
  EXPECT_GT(loss_gap(m, train, test).gap, 0.0);
}

TEST(SelectSamples, DeterministicDistinctSorted) {
  const auto task = small_task(4, 2);
  const auto a = select_samples(task.test, 10, 7);
  const auto b = select_samples(task.test, 10, 7);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].index, b[i].index);
    if (i > 0) EXPECT_LT(a[i - 1].index, a[i].index);
    EXPECT_EQ(a[i].id, "test-" + std::to_string(a[i].index));
  }
  EXPECT_EQ(select_samples(task.test, 1000, 7).size(), task.test.size());
  EXPECT_THROW(select_samples(task.test, 0, 7), InvalidArgument);
}

class SweepTest : public ::testing::Test {
 protected:
  void SetUp() override {
    task_ = small_task(4, 11);
    Model analysed = init_model({4, {8}, 2, 1});
    checkpoints_ = train(analysed, task_.train, {20, 0.1, 16, 10, dir_.path() / "ckpt"});
    Model base = init_model({4, {8}, 2, 2});
    Dataset test_as_train = task_.test;
    test_as_train.role = Split::kTrain;
    base_path_ = train(base, test_as_train, {30, 0.1, 16, 30, dir_.path() / "base"}).back();
  }

  TempDir dir_{"sweep"};
  SyntheticTask task_;
  std::vector<std::filesystem::path> checkpoints_;
  std::filesystem::path base_path_;
};

TEST_F(SweepTest, RecordsPerCheckpointAndInvariants) {
  const auto result = sweep(checkpoints_, fast_config(base_path_), task_.train, task_.test);
  ASSERT_EQ(result.records.size(), 3u);
  EXPECT_EQ(result.n, 4u);
  EXPECT_EQ(result.num_samples, 4u);
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    const auto& r = result.records[i];
    if (i > 0) EXPECT_GT(r.epoch, result.records[i - 1].epoch);
    EXPECT_EQ(r.loss_gap, r.test_loss - r.train_loss);
    if (r.h_bar) {
      EXPECT_GE(*r.h_bar, 0.0);
      EXPECT_LE(*r.h_bar, 1.0);
    }
    EXPECT_LE(r.n_bar, 2.0 * 15.0);
    std::size_t total = 0;
    for (const auto& [order, count] : r.order_hist) total += count;
    EXPECT_DOUBLE_EQ(static_cast<double>(total), r.n_bar * 4.0);
  }
  EXPECT_LT(result.records.back().train_loss, result.records.front().train_loss);
}

TEST_F(SweepTest, MatchesSingleCheckpointPipeline) {
  const auto config = fast_config(base_path_);
  const auto result = sweep({checkpoints_[1]}, config, task_.train, task_.test);
  ASSERT_EQ(result.records.size(), 1u);

  const Model model = load_checkpoint(checkpoints_[1]);
  const Model base = load_checkpoint(base_path_);
  const auto baseline = compute_baseline(task_.train);
  const auto samples = select_samples(task_.test, config.num_samples, config.seed);
  const auto base_analyses = analyze_samples(base, samples, baseline, config.sparsify, config.policy, 1);
  const auto manual = evaluate_checkpoint(model, samples, base_analyses, baseline, task_.train, task_.test,
                                          config.sparsify, config.policy, 1);
  EXPECT_EQ(manual.n_bar, result.records[0].n_bar);
  EXPECT_EQ(manual.h_bar, result.records[0].h_bar);
  EXPECT_EQ(manual.order_hist, result.records[0].order_hist);
  EXPECT_EQ(manual.train_loss, result.records[0].train_loss);
}

TEST_F(SweepTest, DeterministicAcrossRunsAndJobs) {
  auto config = fast_config(base_path_);
  const std::string a = dynamics_csv(sweep(checkpoints_, config, task_.train, task_.test));
  config.jobs = 3;
  const std::string b = dynamics_csv(sweep(checkpoints_, config, task_.train, task_.test));
  EXPECT_EQ(a, b);
}

TEST_F(SweepTest, SkipsCorruptCheckpoint) {
  const auto broken = dir_.path() / "ckpt" / "broken.json";
  write_file_atomic(broken, "{\"format_version\": 1");
  auto config = fast_config(base_path_);
  std::vector<std::string> warnings;
  config.on_warning = [&](const std::string& w) { warnings.push_back(w); };
  auto paths = checkpoints_;
  paths.push_back(broken);
  const auto result = sweep(paths, config, task_.train, task_.test);
  EXPECT_EQ(result.records.size(), 3u);
  ASSERT_EQ(result.skipped.size(), 1u);
  EXPECT_EQ(result.skipped[0], "broken.json");
  EXPECT_EQ(warnings.size(), 1u);
}

TEST_F(SweepTest, SortsByEpochAndRejectsDuplicates) {
  std::vector<std::filesystem::path> reversed(checkpoints_.rbegin(), checkpoints_.rend());
  const auto result = sweep(reversed, fast_config(base_path_), task_.train, task_.test);
  EXPECT_EQ(result.records.front().epoch, 0u);
  EXPECT_THROW(sweep({checkpoints_[0], checkpoints_[0]}, fast_config(base_path_), task_.train, task_.test),
               InvalidArgument);
}

TEST_F(SweepTest, MissingBaselineIsError) {
  EXPECT_THROW(sweep(checkpoints_, fast_config(dir_.path() / "nope.json"), task_.train, task_.test), IoError);
}

TEST_F(SweepTest, EmitWritesCsvJsonAndWellFormedSvg) {
  const auto result = sweep(checkpoints_, fast_config(base_path_), task_.train, task_.test);
  const auto out = dir_.path() / "out";
  const auto files = emit(result, out);
  EXPECT_EQ(files.size(), 6u);
  const std::string csv = read_file(out / "dynamics.csv");
  std::istringstream lines(csv);
  std::string header, line;
  std::getline(lines, header);
  EXPECT_EQ(header, "epoch,train_loss,test_loss,loss_gap,N_bar,H_bar,mean_order,order_1,order_2,order_3,order_4");
  std::size_t rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 3u);
  const auto json = nlohmann::json::parse(read_file(out / "dynamics.json"));
  EXPECT_EQ(json.at("records").size(), 3u);
  for (const char* svg : {"loss.svg", "n_bar.svg", "h_bar.svg", "mean_order.svg"}) {
    EXPECT_TRUE(testing::is_well_formed_xml(read_file(out / svg))) << svg;
  }
}

TEST(Emit, MissingHBarConventions) {
  SweepResult result;
  result.n = 2;
  result.num_samples = 1;
  for (std::size_t e : {0, 10, 20, 30}) {
    DynamicsRecord r;
    r.epoch = e;
    r.train_loss = 0.5;
    r.test_loss = 0.75;
    r.loss_gap = 0.25;
    if (e != 10) {
      r.h_bar = 0.5;
      r.mean_order = 1.5;
      r.n_bar = 2;
      r.order_hist = {{1, 1}, {2, 1}};
    }
    result.records.push_back(r);
  }
  const std::string csv = dynamics_csv(result);
  EXPECT_NE(csv.find("\n10,0.5,0.75,0.25,0,,,0,0\n"), std::string::npos) << csv;
  EXPECT_NE(csv.find("\n20,0.5,0.75,0.25,2,0.5,1.5,1,1\n"), std::string::npos) << csv;
  const auto json = dynamics_json(result);
  EXPECT_TRUE(json.at("records").at(1).at("H_bar").is_null());
  EXPECT_THROW(emit(SweepResult{}, "/tmp"), InvalidArgument);
}

TEST(Trends, ThirdsSummary) {
  std::vector<DynamicsRecord> records(6);
  for (std::size_t i = 0; i < 6; ++i) {
    records[i].epoch = i;
    records[i].train_loss = static_cast<double>(6 - i);
    if (i >= 2) records[i].h_bar = 0.5;
  }
  const auto s = summarize_trends(records);
  EXPECT_EQ(s.thirds[0].first, "train_loss");
  EXPECT_EQ(*s.thirds[0].second[0], 5.5);
  EXPECT_FALSE(s.thirds[4].second[0].has_value());
  EXPECT_NE(s.text().find("H_bar"), std::string::npos);
}

}  // namespace
}  // namespace interdyn
