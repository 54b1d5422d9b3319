#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "citegraph/autodiff.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

enum class Arch { GCN, GraphSAGE, GAT, GIN };

// "gcn" | "sage" | "gat" | "gin"
std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view text);

// One graph for graph-level classification.
struct GraphSample {
  std::string id;
  std::size_t nodes = 0;
  std::vector<std::pair<int, int>> edges;  // undirected, each pair once
  Matrix features;                         // nodes x feature dim
  int label = 0;
};

// Block-diagonal union of a list of graphs.
struct BatchedGraphs {
  std::size_t node_count = 0;
  std::size_t graph_count = 0;
  Matrix features;
  std::vector<int> membership;  // graph index per node
  std::vector<int> labels;      // per graph

  SparseMatrix adjacency, adjacency_t;  // open neighborhoods
  SparseMatrix gcn, gcn_t;              // D^-1/2 (A + I) D^-1/2
  SparseMatrix mean, mean_t;            // row-normalized A
  // Directed edge list of A + I (both directions plus self loops).
  std::vector<int> src, dst;
};

BatchedGraphs make_batch(const std::vector<const GraphSample*>& graphs);
BatchedGraphs make_batch(const std::vector<GraphSample>& graphs);

struct ModelShape {
  Arch arch = Arch::GCN;
  std::size_t in_dim = 0;
  std::size_t hidden_dim = 32;
  std::size_t n_layers = 2;
};

// Parameters of the layer stack plus the linear head. Layer l uses the
// parameter block returned by layer_params(l); the head is the last two
// entries (hidden x 1 weight, 1 x 1 bias).
class GnnModel {
 public:
  GnnModel() = default;
  GnnModel(const ModelShape& shape, std::uint64_t seed);

  const ModelShape& shape() const noexcept { return shape_; }
  std::vector<Matrix>& params() noexcept { return params_; }
  const std::vector<Matrix>& params() const noexcept { return params_; }
  const std::vector<std::string>& param_names() const noexcept { return names_; }
  // Indices into params() for one layer.
  std::pair<std::size_t, std::size_t> layer_params(std::size_t layer) const;
  std::size_t parameter_count() const;

  // Logits for every graph of the batch; dropout off.
  std::vector<double> logits(const BatchedGraphs& batch) const;
  // Node representations after the layer stack; dropout off.
  Matrix node_states(const BatchedGraphs& batch) const;

 private:
  ModelShape shape_;
  std::vector<Matrix> params_;
  std::vector<std::string> names_;
  std::vector<std::size_t> layer_begin_;
};

inline constexpr double kGatSlope = 0.2;

// One message-passing layer. `p` holds the layer's parameters as tape
// variables in the order of GnnModel::param_names().
Var layer_forward(Arch arch, Var h, const BatchedGraphs& batch, const std::vector<Var>& p);

struct ForwardOptions {
  double dropout = 0;
  Rng* rng = nullptr;  // dropout masks are drawn when set and dropout > 0
};

// Full forward pass: layers, sum readout, linear head. Returns G x 1 logits.
// `vars` are the tape variables of every model parameter.
Var forward(const GnnModel& model, Tape& tape, const std::vector<Var>& vars, const BatchedGraphs& batch,
            const ForwardOptions& options = {});

// JSON header line (shapes, arch, config) followed by the little-endian
// float64 parameter block.
void write_model(const std::filesystem::path& path, const GnnModel& model, const std::string& config_json = "{}");
GnnModel read_model(const std::filesystem::path& path);

}  // namespace citegraph
