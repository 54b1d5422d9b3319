#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "citegraph/data_model.hpp"
#include "citegraph/graph.hpp"

namespace citegraph {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double cosine(std::span<const double> a, std::span<const double> b);
double euclidean(std::span<const double> a, std::span<const double> b);

struct GraphEmbedding {
  std::vector<double> focal_vec;
  std::vector<double> ref_sum;
  std::vector<std::pair<PaperKey, std::vector<double>>> per_ref;  // graph node order
  std::size_t missing_refs = 0;
  // Share of reference nodes that had a vector.
  double coverage = 1.0;
  bool coverage_warning = false;
};

// Reference vectors come from ref_table; the focal vector from focal_table
// when given, else from ref_table. Missing references are skipped and counted.
GraphEmbedding graph_embedding(const CitationGraph& graph, const EmbeddingTable& ref_table,
                               const EmbeddingTable* focal_table = nullptr);

struct AlignmentDiagnostics {
  double mean_focal_ref_cos = 0;
  std::optional<double> mean_ref_ref_cos;
  double focal_refsum_cos = 0;
  double mean_focal_ref_eu = 0;
  std::optional<double> mean_ref_ref_eu;
  double focal_refsum_eu = 0;
};

// Reference-reference means run over unordered distinct pairs and exclude the
// focal; they are empty with fewer than two reference vectors.
AlignmentDiagnostics alignment(const GraphEmbedding& ge);

struct PcaResult {
  RowMatrix components;  // k x dim, orthonormal rows
  std::vector<double> explained_variance_ratio;  // k entries, nonincreasing
  std::vector<double> all_ratios;  // every retained direction, sums to 1
  RowMatrix projected;  // rows x k
  Eigen::RowVectorXd mean;

  // Centered projection onto the components.
  RowMatrix transform(const RowMatrix& rows) const;
};

// Economy SVD of the mean-centered rows.
PcaResult pca(const RowMatrix& rows, std::size_t k);

// Projects every vector of the table with a fitted PCA.
EmbeddingTable project_table(const EmbeddingTable& table, const PcaResult& fit);
RowMatrix table_matrix(const EmbeddingTable& table);

struct NodeSimilarity {
  PaperKey key;
  std::string group;  // node category name, or "baseline"
  double score = 0;   // mean cosine to every other embedded node of the graph
};

// One score per embedded reference node of the full graph, plus the nodes of
// each baseline graph under the "baseline" group.
std::vector<NodeSimilarity> isolated_node_similarity(const FullGraph& full, const EmbeddingTable& table,
                                                     const std::vector<const CitationGraph*>& baselines = {});
std::map<std::string, std::vector<double>> group_scores(const std::vector<NodeSimilarity>& scores);

// i.i.d. standard-normal vectors, each seeded from (seed, id).
EmbeddingTable random_vector_table(const std::vector<PaperKey>& ids, std::size_t dim, std::uint64_t seed);

struct SemanticRow {
  PaperKey focal;
  std::string provenance;
  AlignmentDiagnostics diagnostics;
  double coverage = 1.0;
};

void write_semantic_csv(const std::filesystem::path& path, const std::vector<SemanticRow>& rows);

struct GraphEmbeddingRow {
  PaperKey focal;
  std::string provenance;
  std::vector<double> ref_sum;
};

// JSON header line {"dim","count","order","provenance"} then little-endian
// float32 rows.
void write_graph_embeddings(const std::filesystem::path& path, const std::vector<GraphEmbeddingRow>& rows);
std::vector<GraphEmbeddingRow> read_graph_embeddings(const std::filesystem::path& path);

}  // namespace citegraph
