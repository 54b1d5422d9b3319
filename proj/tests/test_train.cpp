#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "citegraph/errors.hpp"
#include "citegraph/train.hpp"
#include "gnn_oracle.hpp"
#include "test_util.hpp"

using namespace citegraph;

namespace {

// Class 1 graphs carry positive features, class 0 negative ones.
std::vector<GraphSample> separable(std::size_t n, unsigned seed) {
  auto g = oracle::random_samples(n, 3, seed, 6);
  for (auto& s : g) s.features = s.features.cwiseAbs() * (s.label ? 1.0 : -1.0);
  return g;
}

GnnConfig quick(Arch arch) {
  GnnConfig c;
  c.arch = arch;
  c.hidden_dim = 8;
  c.n_layers = 2;
  c.learning_rate = 1e-2;
  c.max_epochs = 200;
  c.patience = 200;
  return c;
}

}  // namespace

TEST(Train, SeparableToyReachesPerfectTrainingAccuracy) {
  GraphSample pos{"p", 2, {{0, 1}}, Matrix::Constant(2, 2, 1.0), 1};
  GraphSample neg{"n", 2, {{0, 1}}, Matrix::Constant(2, 2, 0.0), 0};
  neg.features.col(1).setConstant(1.0);
  std::vector<GraphSample> toy = {pos, neg};
  for (Arch a : {Arch::GCN, Arch::GraphSAGE, Arch::GAT, Arch::GIN}) {
    auto c = quick(a);
    c.learning_rate = 5e-2;
    auto m = train_gnn(c, toy, toy);
    EXPECT_DOUBLE_EQ(evaluate_model(m.model, toy).accuracy, 1.0) << to_string(a);
    EXPECT_LE(m.epochs_run, 200);
  }
}

TEST(Train, ZeroLearningRateKeepsParameters) {
  auto data = separable(10, 1);
  auto c = quick(Arch::GCN);
  c.learning_rate = 0;
  c.max_epochs = 5;
  auto m = train_gnn(c, data, data);
  GnnModel init({Arch::GCN, 3, 8, 2}, derive_seed(c.seed, "gnn/model"));
  for (std::size_t i = 0; i < init.params().size(); ++i) EXPECT_EQ(m.model.params()[i], init.params()[i]);
}

TEST(Train, Deterministic) {
  auto data = separable(30, 2);
  for (Arch a : {Arch::GCN, Arch::GAT}) {
    auto c = quick(a);
    c.max_epochs = 20;
    c.dropout = 0.2;
    c.batch_size = 7;
    auto x = train_gnn(c, data, data), y = train_gnn(c, data, data);
    ASSERT_EQ(x.trace.size(), y.trace.size());
    for (std::size_t i = 0; i < x.trace.size(); ++i) EXPECT_EQ(x.trace[i].train_loss, y.trace[i].train_loss);
    for (std::size_t i = 0; i < x.model.params().size(); ++i) EXPECT_EQ(x.model.params()[i], y.model.params()[i]);
  }
}

TEST(Train, EarlyStoppingHonoursPatience) {
  auto data = separable(20, 3);
  auto c = quick(Arch::GCN);
  c.max_epochs = 500;
  c.patience = 5;
  auto m = train_gnn(c, data, data);
  EXPECT_LE(m.epochs_run, m.best_epoch + 5);
  EXPECT_EQ(static_cast<int>(m.trace.size()), m.epochs_run);
  EXPECT_DOUBLE_EQ(evaluate_model(m.model, data).accuracy, m.best_val_accuracy);
}

TEST(Train, InvalidConfigAndNonFiniteLoss) {
  auto data = separable(4, 4);
  auto c = quick(Arch::GCN);
  c.dropout = 1.0;
  EXPECT_THROW(train_gnn(c, data, data), ValidationError);
  c = quick(Arch::GCN);
  EXPECT_THROW(train_gnn(c, {}, data), ValidationError);
  data[0].features(0, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(train_gnn(c, data, data), TrainingFailure);
}

TEST(Train, PredictionRule) {
  GraphSample g{"g", 1, {}, Matrix::Constant(1, 1, 1.0), 1};
  GnnModel m({Arch::GCN, 1, 1, 1}, 0);
  m.params()[0](0, 0) = 1;
  m.params()[1](0, 0) = 1;
  m.params()[2](0, 0) = -1;
  EXPECT_EQ(predict_labels(m, make_batch(std::vector<GraphSample>{g}))[0], 0);
  m.params()[2](0, 0) = -0.5;
  EXPECT_EQ(predict_labels(m, make_batch(std::vector<GraphSample>{g}))[0], 1);
}

TEST(Search, SampledConfigsStayInTheSpace) {
  SearchSpace s;
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    auto c = sample_config(s, Arch::GIN, rng);
    EXPECT_EQ(c.arch, Arch::GIN);
    EXPECT_GE(c.learning_rate, s.lr_lo);
    EXPECT_LE(c.learning_rate, s.lr_hi);
    EXPECT_GE(c.dropout, s.dropout_lo);
    EXPECT_LE(c.dropout, s.dropout_hi);
    EXPECT_NE(std::find(s.layer_counts.begin(), s.layer_counts.end(), c.n_layers), s.layer_counts.end());
  }
}

TEST(Search, SingleTrialIsTheBest) {
  auto data = separable(12, 5);
  SweepOptions o;
  o.max_epochs = 10;
  auto r = random_search("toy", Arch::GCN, SearchSpace{}, 1, 0, data, data, data, o);
  ASSERT_EQ(r.trials.size(), 1u);
  EXPECT_EQ(r.best, 0u);
  EXPECT_DOUBLE_EQ(r.trials[0].val_accuracy, r.best_model.best_val_accuracy);
}

TEST(Search, AllTrialsFailing) {
  auto data = separable(6, 6);
  for (auto& g : data) g.features.setConstant(std::numeric_limits<double>::quiet_NaN());
  SweepOptions o;
  o.max_epochs = 3;
  EXPECT_THROW(random_search("bad", Arch::GCN, SearchSpace{}, 3, 0, data, data, {}, o), NoSuccessfulTrialError);
}

TEST(Search, ThreadedSweepMatchesSerial) {
  auto data = separable(16, 7);
  SweepOptions o;
  o.max_epochs = 8;
  auto a = random_search("t", Arch::GraphSAGE, SearchSpace{}, 4, 2, data, data, data, o);
  o.threads = 3;
  auto b = random_search("t", Arch::GraphSAGE, SearchSpace{}, 4, 2, data, data, data, o);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(a.trials[i].val_accuracy, b.trials[i].val_accuracy);
  EXPECT_EQ(a.best, b.best);
  testutil::TempDir dir("sweep");
  write_sweep_csv(dir.path() / "s.csv", {a});
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "s.csv"));
}
