#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "citegraph/errors.hpp"
#include "citegraph/forest.hpp"
#include "test_util.hpp"

using namespace citegraph;

namespace {

ForestConfig single_tree() {
  ForestConfig c;
  c.n_trees = 1;
  c.bootstrap = false;
  c.threads = 1;
  return c;
}

void blobs(std::size_t n, unsigned seed, FeatureRows& x, Labels& y) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % 2);
    const double c = label ? 3.0 : 0.0;
    x.push_back({c + nd(rng), c + nd(rng)});
    y.push_back(label);
  }
}

DecisionTree leaf(double c0, double c1) {
  TreeNode n;
  n.counts[0] = c0;
  n.counts[1] = c1;
  return DecisionTree({n});
}

}  // namespace

TEST(Gini, Values) {
  EXPECT_DOUBLE_EQ(gini(5, 5), 0.5);
  EXPECT_DOUBLE_EQ(gini(3, 0), 0.0);
}

TEST(Forest, SeparableOneDimension) {
  FeatureRows x = {{0.0}, {0.1}, {0.9}, {1.0}};
  Labels y = {0, 0, 1, 1};
  Forest f = train_forest(x, y, single_tree());
  const auto& root = f.trees()[0].nodes()[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_DOUBLE_EQ(root.threshold, 0.5);
  EXPECT_EQ(f.predict_all(x), y);
  EXPECT_EQ(f.predict({0.1}).label, 0);
  const double p = f.predict({0.3}).probability;
  EXPECT_TRUE(p == 0.0 || p == 1.0);
}

TEST(Forest, DegenerateLabels) {
  EXPECT_THROW(train_forest({{0.0}, {1.0}}, {1, 1}, single_tree()), DegenerateLabelsError);
}

TEST(Forest, GaussianBlobs) {
  FeatureRows x, xt;
  Labels y, yt;
  blobs(200, 1, x, y);
  blobs(1000, 2, xt, yt);
  ForestConfig c;
  c.n_trees = 50;
  c.seed = 3;
  Forest f = train_forest(x, y, c);
  EXPECT_GE(evaluate(yt, f.predict_all(xt)).accuracy, 0.95);
}

TEST(Forest, TieGoesToClassZero) {
  Forest f({leaf(1, 0), leaf(0, 1)}, 1);
  auto p = f.predict({0.0});
  EXPECT_EQ(p.label, 0);
  EXPECT_DOUBLE_EQ(p.probability, 0.5);
  EXPECT_EQ(leaf(2, 2).predict({0.0}), 0);
}

TEST(Forest, RowOrderDoesNotMatter) {
  FeatureRows x;
  Labels y;
  blobs(120, 7, x, y);
  std::vector<std::size_t> perm(x.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), std::mt19937(4));
  FeatureRows px;
  Labels py;
  for (auto i : perm) {
    px.push_back(x[i]);
    py.push_back(y[i]);
  }
  ForestConfig c;
  c.n_trees = 20;
  c.seed = 9;
  Forest a = train_forest(x, y, c), b = train_forest(px, py, c);
  FeatureRows probe;
  Labels dummy;
  blobs(300, 8, probe, dummy);
  for (const auto& r : probe) ASSERT_DOUBLE_EQ(a.predict(r).probability, b.predict(r).probability);
}

TEST(Forest, ThreadCountDoesNotMatter) {
  FeatureRows x;
  Labels y;
  blobs(100, 5, x, y);
  ForestConfig c;
  c.n_trees = 16;
  c.threads = 1;
  Forest a = train_forest(x, y, c);
  c.threads = 4;
  Forest b = train_forest(x, y, c);
  for (const auto& r : x) ASSERT_DOUBLE_EQ(a.predict(r).probability, b.predict(r).probability);
}

TEST(Introspection, LeafAndStump) {
  Forest pure({leaf(3, 0)}, 1);
  auto a = forest_introspection(pure);
  EXPECT_DOUBLE_EQ(a.avg_leaf_depth[0], 0.0);
  EXPECT_TRUE(a.cumulative_gini.empty());

  Forest stump = train_forest({{0.0}, {0.1}, {0.9}, {1.0}}, {0, 0, 1, 1}, single_tree());
  auto b = forest_introspection(stump);
  EXPECT_DOUBLE_EQ(b.avg_leaf_depth[0], 1.0);
  ASSERT_EQ(b.cumulative_gini.size(), 1u);
  EXPECT_DOUBLE_EQ(b.cumulative_gini[0], 1.0);
}

TEST(Introspection, CumulativeCurveIsMonotone) {
  FeatureRows x;
  Labels y;
  blobs(300, 11, x, y);
  ForestConfig c;
  c.n_trees = 10;
  auto intro = forest_introspection(train_forest(x, y, c));
  ASSERT_FALSE(intro.cumulative_gini.empty());
  for (std::size_t i = 1; i < intro.cumulative_gini.size(); ++i)
    EXPECT_GE(intro.cumulative_gini[i], intro.cumulative_gini[i - 1] - 1e-12);
  EXPECT_NEAR(intro.cumulative_gini.back(), 1.0, 1e-9);
}

TEST(Forest, MaxDepthIsRespected) {
  FeatureRows x;
  Labels y;
  blobs(300, 12, x, y);
  ForestConfig c;
  c.n_trees = 5;
  c.max_depth = 2;
  Forest f = train_forest(x, y, c);
  for (const auto& t : f.trees())
    for (const auto& n : t.nodes()) EXPECT_LE(n.depth, 2);
}

TEST(ForestFile, RoundTrip) {
  FeatureRows x;
  Labels y;
  blobs(80, 13, x, y);
  ForestConfig c;
  c.n_trees = 7;
  Forest f = train_forest(x, y, c);
  testutil::TempDir dir("forest");
  write_forest(dir.path() / "f.json", f);
  Forest g = read_forest(dir.path() / "f.json");
  ASSERT_EQ(g.trees().size(), 7u);
  for (const auto& r : x) ASSERT_DOUBLE_EQ(f.predict(r).probability, g.predict(r).probability);
}

TEST(Evaluate, Examples) {
  auto perfect = evaluate({0, 1, 1, 0}, {0, 1, 1, 0});
  EXPECT_DOUBLE_EQ(perfect.accuracy, 1.0);
  EXPECT_DOUBLE_EQ(perfect.f1, 1.0);
  auto wrong = evaluate({0, 1, 1, 0}, {1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(wrong.accuracy, 0.0);
  EXPECT_DOUBLE_EQ(wrong.f1, 0.0);
  auto m = evaluate({0, 0, 1, 1}, {0, 1, 1, 1});
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_NEAR(m.f1, (2.0 / 3 + 0.8) / 2, 1e-12);
}

TEST(MeanStd, Population) {
  auto s = mean_std({1, 2, 3, 4});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.25));
}
