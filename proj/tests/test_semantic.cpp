#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "citegraph/errors.hpp"
#include "citegraph/semantic.hpp"
#include "citegraph/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace citegraph;

namespace {

EmbeddingTable table2(std::vector<std::pair<PaperKey, std::vector<double>>> rows) {
  EmbeddingTable t(rows.front().second.size());
  for (auto& [k, v] : rows) t.set(k, v);
  return t;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double brute_cos(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

double brute_eu(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

}  // namespace

TEST(GraphEmbedding, SumOfTwoRefs) {
  auto g = testutil::make_graph(3, {{0, 1}, {0, 2}});
  auto t = table2({{"n0", {0.5, 0.5}}, {"n1", {1, 0}}, {"n2", {0, 1}}});
  auto ge = graph_embedding(g, t);
  EXPECT_EQ(ge.ref_sum, (std::vector<double>{1, 1}));
  EXPECT_EQ(ge.per_ref.size(), 2u);
  EXPECT_FALSE(ge.coverage_warning);
}

TEST(GraphEmbedding, NoResolvableRefsAndMissingFocal) {
  auto g = testutil::make_graph(3, {{0, 1}, {0, 2}});
  auto t = table2({{"n0", {0.5, 0.5}}});
  auto ge = graph_embedding(g, t);
  EXPECT_EQ(ge.ref_sum, (std::vector<double>{0, 0}));
  EXPECT_TRUE(ge.coverage_warning);
  EXPECT_EQ(ge.missing_refs, 2u);
  auto no_focal = table2({{"n1", {1, 0}}});
  EXPECT_THROW(graph_embedding(g, no_focal), MissingEmbeddingError);
}

TEST(GraphEmbedding, SeparateFocalTable) {
  auto g = testutil::make_graph(2, {{0, 1}});
  auto refs = table2({{"n1", {1, 0}}});
  auto focals = table2({{"n0", {0, 3}}});
  auto ge = graph_embedding(g, refs, &focals);
  EXPECT_EQ(ge.focal_vec, (std::vector<double>{0, 3}));
}

TEST(GraphEmbedding, RandomGraphsMatchBruteForceSum) {
  std::mt19937 rng(5);
  std::normal_distribution<double> nd;
  for (unsigned trial = 0; trial < 100; ++trial) {
    auto g = testutil::random_graph(3 + trial % 12, 0.3, trial);
    EmbeddingTable t(6);
    std::vector<double> sum(6, 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (i > 0 && rng() % 5 == 0) continue;
      std::vector<double> v(6);
      for (auto& x : v) x = nd(rng);
      t.set(g.key(i), v);
      if (i > 0)
        for (int d = 0; d < 6; ++d) sum[d] += v[d];
    }
    auto ge = graph_embedding(g, t);
    for (int d = 0; d < 6; ++d) ASSERT_NEAR(ge.ref_sum[d], sum[d], 1e-9 * (1 + std::abs(sum[d])));
  }
}

TEST(Alignment, SingleRefAndOrthogonalRefs) {
  GraphEmbedding one{{1, 0}, {1, 0}, {{"a", {1, 0}}}, 0, 1.0, false};
  auto d = alignment(one);
  EXPECT_DOUBLE_EQ(d.mean_focal_ref_cos, 1.0);
  EXPECT_DOUBLE_EQ(d.mean_focal_ref_eu, 0.0);
  EXPECT_FALSE(d.mean_ref_ref_cos.has_value());

  GraphEmbedding two{{1, 1}, {1, 1}, {{"a", {1, 0}}, {"b", {0, 1}}}, 0, 1.0, false};
  auto e = alignment(two);
  EXPECT_NEAR(*e.mean_ref_ref_cos, 0.0, 1e-12);
  EXPECT_NEAR(*e.mean_ref_ref_eu, std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(e.focal_refsum_cos, 1.0, 1e-12);
}

TEST(Alignment, MatchesPairwiseBruteForce) {
  auto g = testutil::random_graph(20, 0.2, 9);
  std::mt19937 rng(2);
  std::normal_distribution<double> nd;
  EmbeddingTable t(8);
  for (const auto& k : g.nodes()) {
    std::vector<double> v(8);
    for (auto& x : v) x = nd(rng);
    t.set(k, v);
  }
  auto ge = graph_embedding(g, t);
  auto d = alignment(ge);
  std::vector<std::vector<double>> refs;
  for (std::size_t i = 1; i < g.node_count(); ++i) refs.push_back(std::vector<double>(t.get(g.key(i)).begin(), t.get(g.key(i)).end()));
  std::vector<double> focal(t.get("n0").begin(), t.get("n0").end()), sum(8, 0.0);
  double fc = 0, fe = 0, rc = 0, re = 0, pairs = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    fc += brute_cos(focal, refs[i]);
    fe += brute_eu(focal, refs[i]);
    for (int k = 0; k < 8; ++k) sum[k] += refs[i][k];
    for (std::size_t j = i + 1; j < refs.size(); ++j) {
      rc += brute_cos(refs[i], refs[j]);
      re += brute_eu(refs[i], refs[j]);
      pairs += 1;
    }
  }
  const double n = double(refs.size());
  EXPECT_NEAR(d.mean_focal_ref_cos, fc / n, 1e-9);
  EXPECT_NEAR(d.mean_focal_ref_eu, fe / n, 1e-9);
  EXPECT_NEAR(*d.mean_ref_ref_cos, rc / pairs, 1e-9);
  EXPECT_NEAR(*d.mean_ref_ref_eu, re / pairs, 1e-9);
  EXPECT_NEAR(d.focal_refsum_cos, brute_cos(focal, sum), 1e-9);
  EXPECT_NEAR(d.focal_refsum_eu, brute_eu(focal, sum), 1e-9);
}

TEST(Cosine, Bounds) {
  std::vector<double> u = {3, -4, 1}, v = {-1, 2, 7};
  EXPECT_NEAR(cosine(u, u), 1.0, 1e-12);
  EXPECT_LE(std::abs(cosine(u, v)), 1.0);
  EXPECT_NEAR(euclidean(u, u), 0.0, 1e-12);
}

TEST(Pca, RankOneData) {
  RowMatrix rows(5, 3);
  for (int i = 0; i < 5; ++i) rows.row(i) << i, 2.0 * i, -1.0 * i;
  auto fit = pca(rows, 2);
  EXPECT_NEAR(fit.explained_variance_ratio[0], 1.0, 1e-9);
  EXPECT_NEAR(fit.components.row(0).norm(), 1.0, 1e-12);
}

TEST(Pca, IsotropicGaussian) {
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  RowMatrix rows(10000, 2);
  for (int i = 0; i < 10000; ++i) rows.row(i) << nd(rng), nd(rng);
  auto fit = pca(rows, 2);
  EXPECT_NEAR(fit.explained_variance_ratio[0], 0.5, 0.02);
  EXPECT_NEAR(fit.explained_variance_ratio[1], 0.5, 0.02);
  EXPECT_NEAR(fit.components.row(0).dot(fit.components.row(1)), 0.0, 1e-12);
  EXPECT_GE(fit.explained_variance_ratio[0], fit.explained_variance_ratio[1]);
}

TEST(Pca, RatiosSumToOneAndProjection) {
  std::mt19937 rng(4);
  std::normal_distribution<double> nd;
  RowMatrix rows(50, 6);
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 6; ++j) rows(i, j) = nd(rng) * (j + 1);
  auto fit = pca(rows, 3);
  double s = 0;
  for (double r : fit.all_ratios) s += r;
  EXPECT_NEAR(s, 1.0, 1e-9);
  RowMatrix again = fit.transform(rows);
  EXPECT_NEAR((again - fit.projected).norm(), 0.0, 1e-9);
}

TEST(IsolatedSimilarity, Arithmetic) {
  // r=n1: cos 0.9 to the focal and 0.5 to n2.
  auto g = testutil::make_graph(3, {{0, 1}, {0, 2}});
  FullGraph full{g, "g", 1.0, 1.0};
  const double a = std::acos(0.9), b = std::acos(0.5);
  auto t = table2({{"n0", {1, 0, 0}}, {"n1", {std::cos(a), std::sin(a), 0}}, {"n2", {0, 0, 0}}});
  // Put n2 at angle b from n1 in the plane of n1 and the z axis.
  std::vector<double> n1 = {std::cos(a), std::sin(a), 0};
  t.set("n2", std::vector<double>{std::cos(b) * n1[0], std::cos(b) * n1[1], std::sin(b)});
  auto s = isolated_node_similarity(full, t);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].key, "n1");
  EXPECT_NEAR(s[0].score, 0.7, 1e-12);
}

TEST(IsolatedSimilarity, IdenticalVectors) {
  auto g = testutil::random_graph(6, 0.4, 2);
  EmbeddingTable t(3);
  for (const auto& k : g.nodes()) t.set(k, std::vector<double>{1, 2, 3});
  for (const auto& s : isolated_node_similarity({g, "g", 1, 1}, t)) EXPECT_NEAR(s.score, 1.0, 1e-12);
}

TEST(IsolatedSimilarity, SyntheticCategoryOrder) {
  SynthParams p;
  p.n_focals = 150;
  auto s = synth_dataset(p);
  PairBuildOptions o;
  o.generator = "gen-a";
  o.baseline_kinds = {BaselineKind::FieldShuffle};
  PairSet pairs = build_pairs(s.dataset, o);
  std::vector<NodeSimilarity> all;
  KeyFilter keep = [&](const PaperKey& k) { return s.dataset.resolvable(k); };
  for (const auto& pr : pairs.pairs) {
    const auto* g = s.dataset.list_for(pr.focal(), Source::ground_truth());
    const auto* q = s.dataset.list_for(pr.focal(), Source::generated("gen-a"));
    FullGraph full = build_full_graph(pr.focal(), *g, *q, s.dataset.edges(), keep);
    auto part = isolated_node_similarity(full, s.ref_embeddings, {pr.baseline(BaselineKind::FieldShuffle)});
    all.insert(all.end(), part.begin(), part.end());
  }
  auto groups = group_scores(all);
  const double shared = median(groups.at(std::string(to_string(NodeCategory::SharedRef))));
  const double connected = median(groups.at(std::string(to_string(NodeCategory::GeneratedConnected))));
  const double isolated = median(groups.at(std::string(to_string(NodeCategory::GeneratedIsolated))));
  const double random = median(groups.at("baseline"));
  EXPECT_GE(shared, connected);
  EXPECT_GE(connected, isolated);
  EXPECT_GT(isolated, random);
}

TEST(RandomVectors, DeterministicAndCentered) {
  std::vector<PaperKey> ids;
  for (int i = 0; i < 1000; ++i) ids.push_back("p" + std::to_string(i));
  auto a = random_vector_table(ids, 3072, 17), b = random_vector_table(ids, 3072, 17);
  EXPECT_TRUE(a == b);
  std::vector<double> mean(3072, 0.0);
  for (const auto& id : ids) {
    auto v = a.get(id);
    for (std::size_t d = 0; d < 3072; ++d) mean[d] += v[d] / 1000.0;
  }
  // Coordinate means have sd 1/sqrt(1000), so about 0.16% of them pass 0.1.
  std::size_t inside = 0;
  double grand = 0;
  for (double m : mean) {
    inside += std::abs(m) < 0.1;
    grand += m / 3072.0;
  }
  EXPECT_GE(double(inside) / 3072.0, 0.99);
  EXPECT_LT(std::abs(grand), 0.01);
}

TEST(GraphEmbeddingsFile, RoundTripIsFloat32) {
  testutil::TempDir dir("ge");
  std::vector<GraphEmbeddingRow> rows = {{"f1", "ground_truth", {0.25, -1.5, 3}}, {"f2", "generated:g", {1.0 / 3, 0, 0}}};
  write_graph_embeddings(dir.path() / "g.bin", rows);
  auto back = read_graph_embeddings(dir.path() / "g.bin");
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].focal, "f1");
  EXPECT_EQ(back[1].provenance, "generated:g");
  EXPECT_EQ(back[0].ref_sum, rows[0].ref_sum);
  EXPECT_NEAR(back[1].ref_sum[0], 1.0 / 3, 1e-7);
}
