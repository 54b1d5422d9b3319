#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "citegraph/data_model.hpp"

namespace citegraph {

enum class NodeCategory { Focal, SharedRef, GeneratedConnected, GeneratedIsolated, GroundTruthOnly };

std::string_view to_string(NodeCategory category);
NodeCategory parse_node_category(std::string_view text);

// Simple undirected graph around one focal paper. Node 0 is always the focal.
class CitationGraph {
 public:
  CitationGraph() = default;
  CitationGraph(PaperKey focal, Provenance provenance);

  const PaperKey& focal() const noexcept { return nodes_.front(); }
  const Provenance& provenance() const noexcept { return provenance_; }
  void set_provenance(Provenance p) { provenance_ = std::move(p); }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t ref_count() const noexcept { return nodes_.empty() ? 0 : nodes_.size() - 1; }
  std::size_t edge_count() const noexcept { return edge_count_; }

  const std::vector<PaperKey>& nodes() const noexcept { return nodes_; }
  const PaperKey& key(std::size_t i) const { return nodes_[i]; }
  NodeCategory category(std::size_t i) const { return categories_[i]; }
  void set_category(std::size_t i, NodeCategory c) { categories_[i] = c; }
  std::optional<std::size_t> index_of(const PaperKey& key) const;

  // Sorted neighbor indices.
  const std::vector<std::size_t>& neighbors(std::size_t i) const { return adjacency_[i]; }
  std::size_t degree(std::size_t i) const { return adjacency_[i].size(); }
  bool has_edge(std::size_t a, std::size_t b) const;

  // Returns the index of the (possibly existing) node.
  std::size_t add_node(const PaperKey& key, NodeCategory category);
  // Ignores self loops and repeated edges; returns true when the edge is new.
  bool add_edge(std::size_t a, std::size_t b);

  // Undirected edges as index pairs (a < b), sorted.
  std::vector<std::pair<std::size_t, std::size_t>> edge_list() const;

  // Subgraph on the nodes for which keep(i) holds; the focal is always kept.
  CitationGraph induced(const std::function<bool(std::size_t)>& keep) const;

  bool operator==(const CitationGraph& other) const;

 private:
  std::vector<PaperKey> nodes_;
  std::vector<NodeCategory> categories_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::unordered_map<PaperKey, std::size_t> index_;
  Provenance provenance_ = Provenance::ground_truth();
  std::size_t edge_count_ = 0;
};

// Full graph of ground-truth and generated references with per-node categories.
struct FullGraph {
  CitationGraph graph;
  std::string generator;
  // Resolved list members over listed members, per list.
  double gt_completeness = 1.0;
  double gen_completeness = 1.0;
};

struct GraphPair {
  CitationGraph ground_truth;
  CitationGraph generated;
  std::vector<CitationGraph> baselines;
  // Set when the generated side was not the smallest and had to be trimmed.
  bool size_anomaly = false;

  const PaperKey& focal() const { return ground_truth.focal(); }
  const CitationGraph* baseline(BaselineKind kind) const;
};

// Keeps a reference if the filter returns true; an empty filter keeps all.
using KeyFilter = std::function<bool(const PaperKey&)>;

// Deduplicated undirected pairs (a < b lexicographically) without self loops.
std::vector<std::pair<PaperKey, PaperKey>> undirected_simple(
    const std::vector<std::pair<PaperKey, PaperKey>>& directed);

FullGraph build_full_graph(const PaperKey& focal, const ReferenceList& gt_refs, const ReferenceList& gen_refs,
                           const CitationEdgeSet& edges, const KeyFilter& keep = {});

// Graph of one reference list (baselines); every reference is categorized
// GroundTruthOnly and the provenance is the list's source.
CitationGraph build_list_graph(const ReferenceList& refs, const CitationEdgeSet& edges,
                               const KeyFilter& keep = {});

GraphPair split_graph(const FullGraph& full);

// Equalizes reference counts across the pair by uniform removal without
// replacement. The target is the generated count unless another member is
// smaller, which is flagged as an anomaly.
GraphPair size_match(const GraphPair& pair, std::uint64_t seed);

struct DroppedGraph {
  PaperKey focal;
  std::string reason;
};

struct PairSet {
  std::string generator;
  std::vector<GraphPair> pairs;  // sorted by focal
  std::vector<DroppedGraph> dropped;
  std::vector<PaperKey> size_anomalies;

  const GraphPair* find(const PaperKey& focal) const;
};

struct PairBuildOptions {
  std::string generator;
  std::vector<BaselineKind> baseline_kinds;
  std::uint64_t seed = 0;
  // Keep references that have no paper record as graph nodes.
  bool keep_unresolved = false;
};

// Builds, splits and size-matches a pair for every focal that has both a
// ground-truth and a generated list. Baseline lists are looked up in the
// dataset under source baseline:<kind>. Pairs whose generated graph has no
// reference node are dropped and recorded.
PairSet build_pairs(const Dataset& dataset, const PairBuildOptions& options);

void write_graphs(const std::filesystem::path& path, const std::vector<const CitationGraph*>& graphs);
std::vector<CitationGraph> read_graphs(const std::filesystem::path& path);

}  // namespace citegraph
