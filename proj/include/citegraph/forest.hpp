#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace citegraph {

using FeatureRows = std::vector<std::vector<double>>;
using Labels = std::vector<int>;

struct TreeNode {
  // Internal nodes: feature >= 0, samples with x[feature] <= threshold go left.
  int feature = -1;
  double threshold = 0;
  int left = -1, right = -1;
  // Leaves: weighted class counts.
  double counts[2] = {0, 0};
  int depth = 0;
  // Weighted Gini decrease of the split, as a share of the root weight.
  double impurity_decrease = 0;

  bool is_leaf() const noexcept { return feature < 0; }
};

double gini(double a, double b);

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes, std::optional<int> max_depth = std::nullopt)
      : nodes_(std::move(nodes)), max_depth_(max_depth) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  std::optional<int> max_depth() const noexcept { return max_depth_; }
  const TreeNode& leaf_for(const std::vector<double>& x) const;
  // Majority class of the reached leaf; ties go to class 0.
  int predict(const std::vector<double>& x) const;

 private:
  std::vector<TreeNode> nodes_;
  std::optional<int> max_depth_;
};

struct ForestConfig {
  int n_trees = 100;
  bool bootstrap = true;
  // Unset: floor(sqrt(d)), at least 1.
  std::optional<int> features_per_split;
  std::uint64_t seed = 0;
  std::optional<int> max_depth;
  // 0: use every hardware thread.
  unsigned threads = 0;
};

struct Prediction {
  int label = 0;
  double probability = 0;  // share of trees voting class 1
};

class Forest {
 public:
  Forest() = default;
  Forest(std::vector<DecisionTree> trees, std::size_t dim) : trees_(std::move(trees)), dim_(dim) {}

  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }
  std::size_t dim() const noexcept { return dim_; }

  Prediction predict(const std::vector<double>& x) const;
  Labels predict_all(const FeatureRows& rows) const;

 private:
  std::vector<DecisionTree> trees_;
  std::size_t dim_ = 0;
};

// Rows are put in a canonical order before bootstrapping, so the result does
// not depend on the order of the input rows.
Forest train_forest(const FeatureRows& x, const Labels& y, const ForestConfig& config);

struct ForestIntrospection {
  std::vector<double> avg_leaf_depth;     // one entry per tree
  std::vector<double> cumulative_gini;    // index = split depth
};
ForestIntrospection forest_introspection(const Forest& forest);

void write_forest(const std::filesystem::path& path, const Forest& forest);
Forest read_forest(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

struct Metrics {
  double accuracy = 0;
  double f1 = 0;  // macro over both classes
};

Metrics evaluate(const Labels& y_true, const Labels& y_pred);

struct MeanStd {
  double mean = 0, std = 0;  // population standard deviation
};
MeanStd mean_std(const std::vector<double>& values);

struct ClassificationReport {
  std::string task;
  std::vector<std::uint64_t> seeds;
  std::vector<double> accuracy;
  std::vector<double> f1;
  std::size_t train_size = 0, val_size = 0, test_size = 0;

  MeanStd accuracy_summary() const { return mean_std(accuracy); }
  MeanStd f1_summary() const { return mean_std(f1); }
};

// task,seed,accuracy,f1 rows for every run of every report.
void write_report_csv(const std::filesystem::path& path, const std::vector<ClassificationReport>& reports);

}  // namespace citegraph
