#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "citegraph/graph.hpp"

namespace citegraph {

// Per-node values aligned with CitationGraph::nodes().
using NodeValues = std::vector<double>;

NodeValues degree_centrality(const CitationGraph& graph);

// Component-restricted closeness scaled by the reachable fraction:
// (r / sum d) * (r / (|V| - 1)), 0 for nodes that reach nothing.
NodeValues closeness_centrality(const CitationGraph& graph);

struct EigenvectorOptions {
  double tol = 1e-6;
  int max_iter = 1000;
  // Iterates on A + shift * I so bipartite components converge.
  double shift = 1.0;
};

// Power iteration on the dominant component (largest eigenvalue; ties go to
// the component holding the lexicographically smallest key). Nodes outside
// that component get 0. Unit Euclidean norm.
NodeValues eigenvector_centrality(const CitationGraph& graph, const EigenvectorOptions& options = {});

NodeValues clustering_coefficient(const CitationGraph& graph);

// degree, closeness, eigenvector, clustering, total edge count.
inline constexpr std::size_t kNodeFeatureDim = 5;

// Five structural features per node, row-major (node_count x 5).
std::vector<double> node_structural_features(const CitationGraph& graph, const EigenvectorOptions& options = {});

inline constexpr std::size_t kAggregateDim = 20;

struct GraphStructuralAggregate {
  std::array<double, kAggregateDim> values{};
  static const std::array<std::string, kAggregateDim>& column_names();
};

// Summary statistics with linear-interpolation quantiles.
struct Summary {
  double mean = 0, median = 0, iqr = 0, max_to_mean = 0;
};
Summary summarize(std::vector<double> values);
double quantile(const std::vector<double>& sorted, double q);

GraphStructuralAggregate aggregate(const CitationGraph& graph, const EigenvectorOptions& options = {});

struct StructuralRow {
  PaperKey focal;
  std::string provenance;
  GraphStructuralAggregate features;
};

void write_structural_csv(const std::filesystem::path& path, const std::vector<StructuralRow>& rows);
std::vector<StructuralRow> read_structural_csv(const std::filesystem::path& path);

}  // namespace citegraph
