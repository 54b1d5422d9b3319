#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include "citegraph/errors.hpp"
#include "citegraph/pipeline.hpp"
#include "test_util.hpp"

using namespace citegraph;

namespace {

struct World {
  SynthDataset synth;
  PairSet pairs;
  std::shared_ptr<EmbeddingTable> refs, focals;

  explicit World(SynthParams p) : synth(synth_dataset(p)) {
    pairs = all_pairs(synth.dataset, "gen-a", p.seed);
    refs = std::make_shared<EmbeddingTable>(synth.ref_embeddings);
    focals = std::make_shared<EmbeddingTable>(synth.focal_embeddings);
  }
  FeatureStore store() const { return FeatureStore(pairs, refs, focals); }
};

SynthParams params(std::size_t n, double drift) {
  SynthParams p;
  p.n_focals = n;
  p.drift = drift;
  return p;
}

RunOptions rf_options(std::vector<std::uint64_t> seeds, int trees = 30) {
  RunOptions o;
  o.seeds = std::move(seeds);
  o.forest.n_trees = trees;
  return o;
}

double mean_accuracy(const TaskResult& r) { return r.report.accuracy_summary().mean; }

std::vector<PaperKey> ids(std::size_t n) {
  std::vector<PaperKey> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("f" + std::to_string(i));
  return out;
}

}  // namespace

TEST(Splits, SeventyFifteenFifteen) {
  Folds f = make_splits(ids(100), {});
  EXPECT_EQ(f.train.size(), 70u);
  EXPECT_EQ(f.val.size(), 15u);
  EXPECT_EQ(f.test.size(), 15u);
  std::set<PaperKey> all(f.train.begin(), f.train.end());
  all.insert(f.val.begin(), f.val.end());
  all.insert(f.test.begin(), f.test.end());
  EXPECT_EQ(all.size(), 100u);
}

TEST(Splits, SameSeedSameFolds) {
  SplitPlan p;
  p.seed = 5;
  Folds a = make_splits(ids(57), p), b = make_splits(ids(57), p);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  p.seed = 6;
  EXPECT_NE(make_splits(ids(57), p).train, a.train);
}

TEST(Splits, StrataAreSpreadOverFolds) {
  auto focals = ids(400);
  std::map<PaperKey, std::string> strata;
  for (std::size_t i = 0; i < focals.size(); ++i) strata[focals[i]] = i < 100 ? "small" : "large";
  SplitPlan p;
  p.seed = 2;
  Folds f = make_splits(focals, p, strata);
  std::size_t small_test = 0;
  for (const auto& k : f.test) small_test += strata[k] == "small";
  EXPECT_NEAR(double(small_test), 15.0, 2.0);
  EXPECT_EQ(f.train.size() + f.val.size() + f.test.size(), 400u);
}

TEST(Tasks, NamesAndModeChecks) {
  auto t = make_task("gt-vs-base", "g", FeatureMode::StructuralAggregate, ModelKind::RF);
  EXPECT_EQ(t.name, "gt-vs-base:field");
  EXPECT_EQ(t.class_b, Source::baseline(BaselineKind::FieldShuffle));
  EXPECT_EQ(t.label(), "gt-vs-base:field/structural/rf");
  auto u = parse_task_label("gen-vs-base:temporal/embedding-node/gat", "g");
  EXPECT_EQ(u.class_a, Source::generated("g"));
  EXPECT_EQ(u.model, ModelKind::GAT);
  EXPECT_EQ(parse_task_label(u.label(), "g").label(), u.label());
  EXPECT_THROW(make_task("gt-vs-gen", "g", FeatureMode::EmbeddingNode, ModelKind::RF), ValidationError);
  EXPECT_THROW(make_task("gt-vs-gen", "g", FeatureMode::EmbeddingSum, ModelKind::GCN), ValidationError);
  EXPECT_THROW(make_task("gt-vs-gen:field", "g", FeatureMode::EmbeddingSum, ModelKind::RF), ValidationError);
  EXPECT_THROW(make_task("gt-vs-human", "g", FeatureMode::EmbeddingSum, ModelKind::RF), ValidationError);
}

TEST(FeatureStore, PairingAndFeatureShapes) {
  World w(params(80, 0.8));
  FeatureStore s = w.store();
  auto t = make_task("gt-vs-base", "gen-a", FeatureMode::StructuralAggregate, ModelKind::RF);
  auto focals = s.focals_with(t.class_a, t.class_b);
  ASSERT_FALSE(focals.empty());
  EXPECT_TRUE(std::is_sorted(focals.begin(), focals.end()));
  for (const auto& f : focals) {
    EXPECT_NE(s.graph(f, t.class_a), nullptr);
    EXPECT_NE(s.graph(f, t.class_b), nullptr);
  }
  EXPECT_EQ(s.vector_features(focals[0], t.class_a, FeatureMode::StructuralAggregate).size(), kAggregateDim);
  EXPECT_EQ(s.vector_features(focals[0], t.class_a, FeatureMode::EmbeddingSum).size(), w.refs->dim());
  auto g = s.node_sample(focals[0], t.class_a, FeatureMode::EmbeddingNode, 1);
  EXPECT_EQ(g.features.rows(), static_cast<Eigen::Index>(g.nodes));
  EXPECT_EQ(static_cast<std::size_t>(g.features.cols()), w.refs->dim());
  EXPECT_EQ(g.label, 1);
  auto sn = s.node_sample(focals[0], t.class_a, FeatureMode::StructuralNode5, 0);
  EXPECT_EQ(static_cast<std::size_t>(sn.features.cols()), kNodeFeatureDim);
  EXPECT_EQ(s.graph(focals[0], Source::generated("nope")), nullptr);
}

TEST(RunTask, ReportShapeAndDeterminism) {
  World w(params(200, 0.8));
  auto t = make_task("gt-vs-base", "gen-a", FeatureMode::StructuralAggregate, ModelKind::RF);
  FeatureStore s1 = w.store(), s2 = w.store();
  auto a = run_task(t, s1, rf_options({0, 1, 2}));
  auto b = run_task(t, s2, rf_options({0, 1, 2}));
  EXPECT_EQ(a.report.accuracy, b.report.accuracy);
  EXPECT_EQ(a.report.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  const auto focals = s1.focals_with(t.class_a, t.class_b).size();
  EXPECT_EQ(a.report.train_size + a.report.val_size + a.report.test_size, 2 * focals);
  EXPECT_EQ(a.report.train_size % 2, 0u);
  EXPECT_GE(mean_accuracy(a), 0.85);
  ASSERT_TRUE(a.last_forest.has_value());
}

TEST(RunTask, FoldsFollowFocals) {
  // Every focal's two graphs land in the same fold: fold sizes are even and
  // the split of focal ids matches make_splits.
  World w(params(120, 0.8));
  FeatureStore s = w.store();
  auto t = make_task("gen-vs-base:subfield", "gen-a", FeatureMode::StructuralAggregate, ModelKind::RF);
  auto r = run_task(t, s, rf_options({4}, 5));
  RunOptions o;
  SplitPlan plan = o.plan;
  plan.seed = derive_seed(4, "split");
  Folds f = make_splits(s.focals_with(t.class_a, t.class_b), plan);
  EXPECT_EQ(r.report.train_size, 2 * f.train.size());
  EXPECT_EQ(r.report.test_size, 2 * f.test.size());
}

TEST(RunTask, LabelPermutationIsChance) {
  World w(params(400, 0.8));
  FeatureStore s = w.store();
  auto t = make_task("gt-vs-base", "gen-a", FeatureMode::StructuralAggregate, ModelKind::RF);
  auto o = rf_options({0, 1, 2, 3, 4});
  o.permute_labels = true;
  EXPECT_NEAR(mean_accuracy(run_task(t, s, o)), 0.5, 0.07);
}

TEST(RunTask, NoDriftIsChanceAndLargeDriftSeparates) {
  auto t = make_task("gt-vs-gen", "gen-a", FeatureMode::EmbeddingSum, ModelKind::RF);
  World flat(params(600, 0.0));
  FeatureStore a = flat.store();
  EXPECT_NEAR(mean_accuracy(run_task(t, a, rf_options({0, 1, 2}, 50))), 0.5, 0.05);
  World wide(params(600, 4.0));
  FeatureStore b = wide.store();
  EXPECT_GE(mean_accuracy(run_task(t, b, rf_options({0, 1, 2}, 50))), 0.95);
}

TEST(RunTask, GnnTaskRuns) {
  World w(params(80, 0.8));
  FeatureStore s = w.store();
  auto t = make_task("gt-vs-gen", "gen-a", FeatureMode::EmbeddingNode, ModelKind::GraphSAGE);
  RunOptions o;
  o.seeds = {0};
  o.gnn.hidden_dim = 8;
  o.gnn.max_epochs = 5;
  auto r = run_task(t, s, o);
  ASSERT_TRUE(r.last_model.has_value());
  EXPECT_EQ(r.last_model->model.shape().arch, Arch::GraphSAGE);
  EXPECT_GT(r.report.val_size, 0u);
}

TEST(CrossGenerator, SameGeneratorReducesToRunTask) {
  World w(params(150, 0.8));
  FeatureStore s = w.store(), swap = w.store(), plain = w.store();
  auto t = make_task("gt-vs-gen", "gen-a", FeatureMode::EmbeddingSum, ModelKind::RF);
  auto c = cross_generator(t, s, swap, "gen-a", rf_options({0, 1}));
  auto r = run_task(t, plain, rf_options({0, 1}));
  EXPECT_EQ(c.report.accuracy, r.report.accuracy);
  EXPECT_EQ(c.excluded, 0u);
  EXPECT_EQ(c.report.task, "cross:gen-a:" + t.label());
}

TEST(CrossGenerator, SharedDriftTransfers) {
  World w(params(400, 0.8));
  PairSet b_pairs = all_pairs(w.synth.dataset, "gen-b", 0);
  FeatureStore s = w.store(), swap(b_pairs, w.refs, w.focals);
  auto t = make_task("gt-vs-gen", "gen-a", FeatureMode::EmbeddingSum, ModelKind::RF);
  auto c = cross_generator(t, s, swap, "gen-b", rf_options({0, 1, 2}));
  EXPECT_GT(c.report.accuracy_summary().mean, 0.6);
}

TEST(Controls, RandomAndPcaTables) {
  World w(params(50, 0.8));
  auto [r, f] = random_tables(*w.refs, w.focals.get(), 3);
  EXPECT_EQ(r->size(), w.refs->size());
  EXPECT_EQ(f->size(), w.focals->size());
  auto [p, q] = pca_tables(*w.refs, w.focals.get(), 8);
  EXPECT_EQ(p->dim(), 8u);
  EXPECT_EQ(q->size(), w.focals->size());
  // Projection onto every component preserves inner products.
  auto [full, full_f] = pca_tables(*w.refs, w.focals.get(), w.refs->dim());
  const auto& a = w.refs->ids()[0];
  const auto& b = w.refs->ids()[1];
  EXPECT_NEAR(cosine(full->get(a), full->get(b)), cosine(w.refs->get(a), w.refs->get(b)), 1e-9);
}

TEST(Saturation, Wasserstein) {
  EXPECT_DOUBLE_EQ(wasserstein1({0.5, 0.7, 0.6}, {0.7, 0.5, 0.6}), 0.0);
  EXPECT_DOUBLE_EQ(wasserstein1({0.2}, {0.9}), 0.7);
  EXPECT_NEAR(wasserstein1({0, 1}, {0, 0, 1}), 1.0 / 6, 1e-12);
  // Brute force on a fine grid of the quantile functions.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(3 + trial % 5), b(2 + trial % 7);
    for (auto& x : a) x = u(rng);
    for (auto& x : b) x = u(rng);
    std::vector<double> sa = a, sb = b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const int grid = 420 * 10;  // multiple of every size used
    double area = 0;
    for (int i = 0; i < grid; ++i) {
      const double t = (i + 0.5) / grid;
      area += std::abs(sa[std::size_t(t * sa.size())] - sb[std::size_t(t * sb.size())]) / grid;
    }
    EXPECT_NEAR(wasserstein1(a, b), area, 1e-9);
  }
}

TEST(Saturation, CurveShape) {
  EXPECT_EQ(default_fractions().size(), 9u);
  std::vector<double> same(50, 0.8);
  for (const auto& p : saturation_curve(same, default_fractions(), 100, 1)) EXPECT_DOUBLE_EQ(p.w1, 0.0);
  std::mt19937 rng(1);
  std::normal_distribution<double> nd(0.8, 0.01);
  std::vector<double> runs(50);
  for (auto& r : runs) r = nd(rng);
  auto c = saturation_curve(runs, default_fractions(), 500, 2);
  ASSERT_EQ(c.size(), 8u);
  EXPECT_DOUBLE_EQ(c.front().fraction, 0.3);
  EXPECT_GT(c.front().w1, c.back().w1);
  // Flattens: the late steps are much smaller than the first.
  EXPECT_LT(c[5].w1, 0.5 * c[0].w1);
  auto again = saturation_curve(runs, default_fractions(), 500, 2);
  EXPECT_EQ(again.back().w1, c.back().w1);
}

TEST(Synth, InvariantsAndDeterminism) {
  SynthParams p = params(100, 0.8);
  auto a = synth_dataset(p), b = synth_dataset(p);
  EXPECT_TRUE(a.dataset == b.dataset);
  EXPECT_TRUE(a.ref_embeddings == b.ref_embeddings);
  EXPECT_EQ(a.dataset.focals().size(), 100u);
  for (const auto& gen : p.generators) {
    std::size_t lists = 0;
    for (const auto& f : a.dataset.focals()) lists += a.dataset.list_for(f, Source::generated(gen)) != nullptr;
    EXPECT_EQ(lists, 100u);
  }
  for (const auto& f : a.dataset.focals()) {
    const auto* gt = a.dataset.list_for(f, Source::ground_truth());
    ASSERT_NE(gt, nullptr);
    EXPECT_GE(gt->refs.size(), p.min_refs);
    EXPECT_LE(gt->refs.size(), p.max_refs);
  }
  p.drift = -1;
  EXPECT_THROW(p.validate(), ValidationError);
}

TEST(Pipeline, ConfigParsingAndPresets) {
  auto c = PipelineConfig::from_json(R"({"run_id": "x", "seeds": 3, "synth": {"n_focals": 40, "drift": 0.5},
                                         "tasks": ["gt-vs-gen/embedding/rf"], "n_trees": 7})");
  EXPECT_EQ(c.run_id, "x");
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{0, 1, 2}));
  ASSERT_TRUE(c.synth.has_value());
  EXPECT_EQ(c.synth->n_focals, 40u);
  EXPECT_DOUBLE_EQ(c.synth->drift, 0.5);
  EXPECT_EQ(c.n_trees, 7);
  EXPECT_THROW(PipelineConfig::from_json("[1, 2]"), Error);
  auto preset = gnn_preset("gt-vs-gen", FeatureMode::EmbeddingNode, Arch::GCN);
  ASSERT_TRUE(preset.has_value());
  EXPECT_EQ(preset->arch, Arch::GCN);
  EXPECT_FALSE(gnn_preset("gt-vs-base", FeatureMode::EmbeddingNode, Arch::GCN).has_value());
}

TEST(Pipeline, EndToEndWritesFiles) {
  testutil::TempDir dir("pipe");
  PipelineConfig c;
  c.run_id = "t";
  c.out_dir = dir.path();
  SynthParams p = params(60, 0.8);
  c.synth = p;
  c.seeds = {0, 1, 2, 3, 4};
  c.n_trees = 5;
  c.saturation_perms = 20;
  c.tasks = {"gt-vs-gen/structural/rf", "gt-vs-base/embedding/rf"};
  auto out = run_pipeline(c);
  ASSERT_EQ(out.reports.size(), 2u);
  for (auto f : {"report.csv", "summary.csv", "saturation.csv"}) EXPECT_TRUE(std::filesystem::exists(out.dir / f)) << f;
  std::ifstream in(out.dir / "summary.csv");
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "task,mean_accuracy,std_accuracy,mean_f1,std_f1,runs,train,val,test");
}
