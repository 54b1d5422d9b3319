#include "citegraph/forest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

using nlohmann::json;

double gini(double a, double b) {
  const double n = a + b;
  if (n <= 0) return 0;
  return 1.0 - (a * a + b * b) / (n * n);
}

const TreeNode& DecisionTree::leaf_for(const std::vector<double>& x) const {
  const TreeNode* node = &nodes_.front();
  while (!node->is_leaf())
    node = &nodes_[static_cast<std::size_t>(x[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left
                                                                                                         : node->right)];
  return *node;
}

int DecisionTree::predict(const std::vector<double>& x) const {
  const TreeNode& leaf = leaf_for(x);
  return leaf.counts[1] > leaf.counts[0] ? 1 : 0;
}

Prediction Forest::predict(const std::vector<double>& x) const {
  if (x.size() != dim_)
    throw ValidationError("feature vector has length " + std::to_string(x.size()) + ", forest expects " +
                          std::to_string(dim_));
  std::size_t ones = 0;
  for (const auto& t : trees_) ones += static_cast<std::size_t>(t.predict(x));
  Prediction p;
  p.probability = static_cast<double>(ones) / static_cast<double>(trees_.size());
  p.label = 2 * ones > trees_.size() ? 1 : 0;
  return p;
}

Labels Forest::predict_all(const FeatureRows& rows) const {
  Labels out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(predict(r).label);
  return out;
}

namespace {

constexpr double kGainEps = 1e-12;

struct Split {
  int feature = -1;
  double threshold = 0;
  double gain = -std::numeric_limits<double>::infinity();
};

class TreeGrower {
 public:
  TreeGrower(const FeatureRows& x, const Labels& y, std::vector<double> weights, int k, std::optional<int> max_depth,
             std::uint64_t seed)
      : x_(x), y_(y), w_(std::move(weights)), k_(k), max_depth_(max_depth), rng_(seed) {
    for (double w : w_) root_weight_ += w;
  }

  std::vector<TreeNode> grow() {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < w_.size(); ++i)
      if (w_[i] > 0) idx.push_back(i);
    build(idx, 0);
    return std::move(nodes_);
  }

 private:
  int build(std::vector<std::size_t>& idx, int depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[id].depth = depth;
    double c[2] = {0, 0};
    for (auto i : idx) c[y_[i]] += w_[i];
    nodes_[id].counts[0] = c[0];
    nodes_[id].counts[1] = c[1];
    const double total = c[0] + c[1];
    if (c[0] == 0 || c[1] == 0 || total < 2 || (max_depth_ && depth >= *max_depth_)) return id;

    const std::size_t d = x_.front().size();
    std::vector<int> features(d);
    std::iota(features.begin(), features.end(), 0);
    rng_.shuffle(features);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(k_), d);
    std::vector<int> sampled(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(k));
    std::vector<int> rest(features.begin() + static_cast<std::ptrdiff_t>(k), features.end());
    std::sort(sampled.begin(), sampled.end());
    std::sort(rest.begin(), rest.end());

    const double parent = gini(c[0], c[1]);
    Split best = search(idx, sampled, c, parent);
    if (best.feature < 0) best = search(idx, rest, c, parent);
    if (best.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (auto i : idx) (x_[i][static_cast<std::size_t>(best.feature)] <= best.threshold ? left : right).push_back(i);
    idx.clear();
    idx.shrink_to_fit();
    nodes_[id].feature = best.feature;
    nodes_[id].threshold = best.threshold;
    nodes_[id].impurity_decrease = total / root_weight_ * best.gain;
    const int l = build(left, depth + 1);
    nodes_[id].left = l;
    const int r = build(right, depth + 1);
    nodes_[id].right = r;
    nodes_[id].counts[0] = nodes_[id].counts[1] = 0;
    return id;
  }

  Split search(const std::vector<std::size_t>& idx, const std::vector<int>& features, const double c[2],
               double parent) {
    Split best;
    const double total = c[0] + c[1];
    std::vector<std::size_t> order(idx);
    for (int f : features) {
      const auto fu = static_cast<std::size_t>(f);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x_[a][fu] < x_[b][fu]; });
      double l[2] = {0, 0};
      for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        const std::size_t i = order[p];
        l[y_[i]] += w_[i];
        const double v = x_[i][fu];
        const double next = x_[order[p + 1]][fu];
        if (!(v < next)) continue;
        const double wl = l[0] + l[1];
        const double wr = total - wl;
        const double gain = parent - wl / total * gini(l[0], l[1]) - wr / total * gini(c[0] - l[0], c[1] - l[1]);
        if (gain > best.gain + kGainEps) {
          double t = v + (next - v) / 2;
          if (!(t < next)) t = v;
          best = {f, t, gain};
        }
      }
    }
    return best;
  }

  const FeatureRows& x_;
  const Labels& y_;
  std::vector<double> w_;
  int k_;
  std::optional<int> max_depth_;
  Rng rng_;
  double root_weight_ = 0;
  std::vector<TreeNode> nodes_;
};

}  // namespace

Forest train_forest(const FeatureRows& x, const Labels& y, const ForestConfig& config) {
  if (config.n_trees < 1) throw ValidationError("n_trees must be at least 1");
  if (x.size() != y.size()) throw ValidationError("feature rows and labels differ in length");
  if (x.size() < 2) throw ValidationError("training needs at least two samples");
  const std::size_t d = x.front().size();
  if (d == 0) throw ValidationError("feature vectors are empty");
  std::size_t ones = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != d) throw ValidationError("feature rows differ in dimension");
    for (double v : x[i])
      if (std::isnan(v)) throw ValidationError("feature row " + std::to_string(i) + " contains NaN");
    if (y[i] != 0 && y[i] != 1) throw ValidationError("labels must be 0 or 1");
    ones += static_cast<std::size_t>(y[i]);
  }
  if (ones == 0 || ones == x.size()) throw DegenerateLabelsError("training labels contain a single class");

  int k = config.features_per_split.value_or(static_cast<int>(std::floor(std::sqrt(static_cast<double>(d)))));
  k = std::max(1, std::min(k, static_cast<int>(d)));

  // Canonical row order.
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (x[a] != x[b]) return x[a] < x[b];
    return y[a] < y[b];
  });
  FeatureRows xs(x.size());
  Labels ys(x.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    xs[i] = x[order[i]];
    ys[i] = y[order[i]];
  }

  const auto n_trees = static_cast<std::size_t>(config.n_trees);
  std::vector<DecisionTree> trees(n_trees);
  auto grow_tree = [&](std::size_t t) {
    Rng boot(derive_seed(config.seed, "forest/bootstrap", t));
    std::vector<double> w(xs.size(), config.bootstrap ? 0.0 : 1.0);
    if (config.bootstrap)
      for (std::size_t i = 0; i < xs.size(); ++i) w[boot.uniform_index(xs.size())] += 1;
    TreeGrower g(xs, ys, std::move(w), k, config.max_depth, derive_seed(config.seed, "forest/split", t));
    trees[t] = DecisionTree(g.grow(), config.max_depth);
  };

  unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n_trees));
  if (threads <= 1) {
    for (std::size_t t = 0; t < n_trees; ++t) grow_tree(t);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < n_trees; t += threads) grow_tree(t);
      });
    for (auto& th : pool) th.join();
  }
  return Forest(std::move(trees), d);
}

ForestIntrospection forest_introspection(const Forest& forest) {
  ForestIntrospection out;
  std::vector<double> by_depth;
  for (const auto& tree : forest.trees()) {
    double depth_sum = 0;
    std::size_t leaves = 0;
    for (const auto& n : tree.nodes()) {
      if (n.is_leaf()) {
        depth_sum += n.depth;
        ++leaves;
      } else {
        if (by_depth.size() <= static_cast<std::size_t>(n.depth)) by_depth.resize(static_cast<std::size_t>(n.depth) + 1, 0);
        by_depth[static_cast<std::size_t>(n.depth)] += n.impurity_decrease;
      }
    }
    out.avg_leaf_depth.push_back(leaves ? depth_sum / static_cast<double>(leaves) : 0.0);
  }
  const double total = std::accumulate(by_depth.begin(), by_depth.end(), 0.0);
  double run = 0;
  for (double v : by_depth) {
    run += v;
    out.cumulative_gini.push_back(total > 0 ? run / total : 0.0);
  }
  if (!out.cumulative_gini.empty() && total > 0) out.cumulative_gini.back() = 1.0;
  return out;
}

void write_forest(const std::filesystem::path& path, const Forest& forest) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  json trees = json::array();
  for (const auto& t : forest.trees()) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
      json j;
      j["depth"] = n.depth;
      if (n.is_leaf()) {
        j["counts"] = {n.counts[0], n.counts[1]};
      } else {
        j["feature"] = n.feature;
        j["threshold"] = n.threshold;
        j["left"] = n.left;
        j["right"] = n.right;
        j["decrease"] = n.impurity_decrease;
      }
      nodes.push_back(std::move(j));
    }
    trees.push_back(std::move(nodes));
  }
  json doc;
  doc["dim"] = forest.dim();
  doc["trees"] = std::move(trees);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << doc.dump() << '\n';
}

Forest read_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
    std::vector<DecisionTree> trees;
    for (const auto& jt : doc.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& j : jt) {
        TreeNode n;
        n.depth = j.at("depth").get<int>();
        if (j.contains("counts")) {
          n.counts[0] = j["counts"].at(0).get<double>();
          n.counts[1] = j["counts"].at(1).get<double>();
        } else {
          n.feature = j.at("feature").get<int>();
          n.threshold = j.at("threshold").get<double>();
          n.left = j.at("left").get<int>();
          n.right = j.at("right").get<int>();
          n.impurity_decrease = j.value("decrease", 0.0);
        }
        nodes.push_back(n);
      }
      trees.emplace_back(std::move(nodes));
    }
    return Forest(std::move(trees), doc.at("dim").get<std::size_t>());
  } catch (const json::exception& e) {
    throw ParseError(path.filename().string(), 1, "<forest>", e.what());
  }
}

}  // namespace citegraph
