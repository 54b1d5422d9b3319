#include "citegraph/gnn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "citegraph/errors.hpp"

namespace citegraph {

using nlohmann::json;

std::string_view to_string(Arch arch) {
  switch (arch) {
    case Arch::GCN:
      return "gcn";
    case Arch::GraphSAGE:
      return "sage";
    case Arch::GAT:
      return "gat";
    case Arch::GIN:
      return "gin";
  }
  return "gcn";
}

Arch parse_arch(std::string_view text) {
  if (text == "gcn") return Arch::GCN;
  if (text == "sage" || text == "graphsage") return Arch::GraphSAGE;
  if (text == "gat") return Arch::GAT;
  if (text == "gin") return Arch::GIN;
  throw ValidationError("unknown architecture '" + std::string(text) + "'");
}

BatchedGraphs make_batch(const std::vector<GraphSample>& graphs) {
  std::vector<const GraphSample*> ptrs;
  ptrs.reserve(graphs.size());
  for (const auto& g : graphs) ptrs.push_back(&g);
  return make_batch(ptrs);
}

BatchedGraphs make_batch(const std::vector<const GraphSample*>& graphs) {
  BatchedGraphs b;
  if (graphs.empty()) throw ValidationError("batch has no graphs");
  const Eigen::Index dim = graphs.front()->features.cols();
  for (const auto* g : graphs) {
    if (g->nodes == 0) throw ValidationError("graph '" + g->id + "' in batch has no nodes");
    if (static_cast<std::size_t>(g->features.rows()) != g->nodes || g->features.cols() != dim)
      throw ValidationError("graph '" + g->id + "' has a feature matrix of the wrong shape");
    b.node_count += g->nodes;
  }
  b.graph_count = graphs.size();
  const auto n = static_cast<Eigen::Index>(b.node_count);
  b.features.resize(n, dim);
  b.membership.resize(b.node_count);
  b.labels.reserve(graphs.size());

  std::vector<std::vector<int>> adj(b.node_count);
  std::size_t offset = 0;
  for (std::size_t gi = 0; gi < graphs.size(); ++gi) {
    const auto* g = graphs[gi];
    b.features.middleRows(static_cast<Eigen::Index>(offset), static_cast<Eigen::Index>(g->nodes)) = g->features;
    for (std::size_t i = 0; i < g->nodes; ++i) b.membership[offset + i] = static_cast<int>(gi);
    for (auto [u, v] : g->edges) {
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= g->nodes || static_cast<std::size_t>(v) >= g->nodes)
        throw ValidationError("graph '" + g->id + "' has an edge outside its node range");
      if (u == v) continue;
      adj[offset + static_cast<std::size_t>(u)].push_back(static_cast<int>(offset) + v);
      adj[offset + static_cast<std::size_t>(v)].push_back(static_cast<int>(offset) + u);
    }
    b.labels.push_back(g->label);
    offset += g->nodes;
  }
  for (auto& a : adj) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
  }

  using T = Eigen::Triplet<double>;
  std::vector<T> ta, tg, tm;
  for (std::size_t i = 0; i < b.node_count; ++i) {
    const double di = static_cast<double>(adj[i].size());
    const int ii = static_cast<int>(i);
    tg.emplace_back(ii, ii, 1.0 / (di + 1));
    b.src.push_back(ii);
    b.dst.push_back(ii);
    for (int j : adj[i]) {
      const double dj = static_cast<double>(adj[static_cast<std::size_t>(j)].size());
      ta.emplace_back(ii, j, 1.0);
      tg.emplace_back(ii, j, 1.0 / std::sqrt((di + 1) * (dj + 1)));
      tm.emplace_back(ii, j, 1.0 / di);
      b.src.push_back(j);
      b.dst.push_back(ii);
    }
  }
  auto build = [n](SparseMatrix& m, SparseMatrix& mt, const std::vector<T>& t) {
    m.resize(n, n);
    m.setFromTriplets(t.begin(), t.end());
    mt = m.transpose();
  };
  build(b.adjacency, b.adjacency_t, ta);
  build(b.gcn, b.gcn_t, tg);
  build(b.mean, b.mean_t, tm);
  return b;
}

// ---------------------------------------------------------------------------

namespace {

Matrix glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-limit, limit);
  return m;
}

}  // namespace

GnnModel::GnnModel(const ModelShape& shape, std::uint64_t seed) : shape_(shape) {
  if (shape.in_dim == 0 || shape.hidden_dim == 0 || shape.n_layers == 0)
    throw ValidationError("model dimensions must be positive");
  Rng rng(derive_seed(seed, "gnn/init"));
  const std::size_t h = shape.hidden_dim;
  auto add = [&](std::string name, Matrix m) {
    names_.push_back(std::move(name));
    params_.push_back(std::move(m));
  };
  for (std::size_t l = 0; l < shape.n_layers; ++l) {
    const std::size_t in = l == 0 ? shape.in_dim : h;
    const std::string p = "layer" + std::to_string(l) + ".";
    layer_begin_.push_back(params_.size());
    switch (shape.arch) {
      case Arch::GCN:
        add(p + "W", glorot(in, h, rng));
        break;
      case Arch::GraphSAGE:
        add(p + "W", glorot(2 * in, h, rng));
        break;
      case Arch::GAT:
        add(p + "W", glorot(in, h, rng));
        add(p + "a_dst", glorot(h, 1, rng));
        add(p + "a_src", glorot(h, 1, rng));
        break;
      case Arch::GIN:
        add(p + "W1", glorot(in, h, rng));
        add(p + "b1", Matrix::Zero(1, static_cast<Eigen::Index>(h)));
        add(p + "W2", glorot(h, h, rng));
        add(p + "b2", Matrix::Zero(1, static_cast<Eigen::Index>(h)));
        break;
    }
  }
  layer_begin_.push_back(params_.size());
  add("head.w", glorot(h, 1, rng));
  add("head.b", Matrix::Zero(1, 1));
}

std::pair<std::size_t, std::size_t> GnnModel::layer_params(std::size_t layer) const {
  return {layer_begin_.at(layer), layer_begin_.at(layer + 1)};
}

std::size_t GnnModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p.size());
  return n;
}

Var layer_forward(Arch arch, Var h, const BatchedGraphs& batch, const std::vector<Var>& p) {
  if (static_cast<std::size_t>(h.rows()) != batch.node_count)
    throw ValidationError("node feature rows do not match the batch");
  switch (arch) {
    case Arch::GCN:
      return relu(spmm(batch.gcn, batch.gcn_t, matmul(h, p.at(0))));
    case Arch::GraphSAGE: {
      Var neigh = spmm(batch.mean, batch.mean_t, h);
      return relu(matmul(concat_cols(h, neigh), p.at(0)));
    }
    case Arch::GAT: {
      Var wh = matmul(h, p.at(0));
      Var s_dst = gather_rows(matmul(wh, p.at(1)), batch.dst);
      Var s_src = gather_rows(matmul(wh, p.at(2)), batch.src);
      Var alpha = edge_softmax(leaky_relu(add(s_dst, s_src), kGatSlope), batch.dst, batch.node_count);
      return relu(edge_aggregate(alpha, wh, batch.src, batch.dst, batch.node_count));
    }
    case Arch::GIN: {
      Var z = add(h, spmm(batch.adjacency, batch.adjacency_t, h));
      Var hidden = relu(add_row(matmul(z, p.at(0)), p.at(1)));
      return relu(add_row(matmul(hidden, p.at(2)), p.at(3)));
    }
  }
  throw ValidationError("unknown architecture");
}

Var forward(const GnnModel& model, Tape& tape, const std::vector<Var>& vars, const BatchedGraphs& batch,
            const ForwardOptions& options) {
  const auto& shape = model.shape();
  if (static_cast<std::size_t>(batch.features.cols()) != shape.in_dim)
    throw ValidationError("batch feature dimension " + std::to_string(batch.features.cols()) +
                          " does not match model input " + std::to_string(shape.in_dim));
  if (vars.size() != model.params().size()) throw ValidationError("parameter variable count mismatch");
  Var h = tape.constant(batch.features);
  const bool drop = options.rng && options.dropout > 0;
  for (std::size_t l = 0; l < shape.n_layers; ++l) {
    auto [b, e] = model.layer_params(l);
    std::vector<Var> p(vars.begin() + static_cast<std::ptrdiff_t>(b), vars.begin() + static_cast<std::ptrdiff_t>(e));
    h = layer_forward(shape.arch, h, batch, p);
    if (drop) {
      const double keep = 1.0 - options.dropout;
      Matrix m(h.rows(), h.cols());
      for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = options.rng->bernoulli(keep) ? 1.0 / keep : 0.0;
      h = mask(h, m);
    }
  }
  Var pooled = segment_sum(h, batch.membership, batch.graph_count);
  const std::size_t hb = vars.size() - 2;
  return add_row(matmul(pooled, vars[hb]), vars[hb + 1]);
}

std::vector<double> GnnModel::logits(const BatchedGraphs& batch) const {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& p : params_) vars.push_back(tape.constant(p));
  Var out = forward(*this, tape, vars, batch);
  const Matrix& v = out.value();
  return std::vector<double>(v.data(), v.data() + v.size());
}

Matrix GnnModel::node_states(const BatchedGraphs& batch) const {
  Tape tape;
  std::vector<Var> vars;
  for (const auto& p : params_) vars.push_back(tape.constant(p));
  Var h = tape.constant(batch.features);
  for (std::size_t l = 0; l < shape_.n_layers; ++l) {
    auto [b, e] = layer_params(l);
    std::vector<Var> p(vars.begin() + static_cast<std::ptrdiff_t>(b), vars.begin() + static_cast<std::ptrdiff_t>(e));
    h = layer_forward(shape_.arch, h, batch, p);
  }
  return h.value();
}

// ---------------------------------------------------------------------------

void write_model(const std::filesystem::path& path, const GnnModel& model, const std::string& config_json) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  json header;
  header["arch"] = std::string(to_string(model.shape().arch));
  header["in_dim"] = model.shape().in_dim;
  header["hidden_dim"] = model.shape().hidden_dim;
  header["n_layers"] = model.shape().n_layers;
  json shapes = json::array();
  for (std::size_t i = 0; i < model.params().size(); ++i)
    shapes.push_back({{"name", model.param_names()[i]}, {"rows", model.params()[i].rows()}, {"cols", model.params()[i].cols()}});
  header["shapes"] = shapes;
  header["config"] = json::parse(config_json);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << header.dump() << '\n';
  for (const auto& p : model.params())
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      auto bits = std::bit_cast<std::uint64_t>(p.data()[i]);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      char bytes[8];
      std::memcpy(bytes, &bits, 8);
      out.write(bytes, 8);
    }
}

GnnModel read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  json header = json::parse(line);
  ModelShape shape;
  shape.arch = parse_arch(header.at("arch").get<std::string>());
  shape.in_dim = header.at("in_dim").get<std::size_t>();
  shape.hidden_dim = header.at("hidden_dim").get<std::size_t>();
  shape.n_layers = header.at("n_layers").get<std::size_t>();
  GnnModel model(shape, 0);
  auto& params = model.params();
  if (header.at("shapes").size() != params.size()) throw ValidationError("model file parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& s = header["shapes"][i];
    if (s.at("rows").get<Eigen::Index>() != params[i].rows() || s.at("cols").get<Eigen::Index>() != params[i].cols())
      throw ValidationError("model file parameter shape mismatch");
    for (Eigen::Index k = 0; k < params[i].size(); ++k) {
      char bytes[8];
      if (!in.read(bytes, 8)) throw ValidationError("'" + path.string() + "' is truncated");
      std::uint64_t bits;
      std::memcpy(&bits, bytes, 8);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
      params[i].data()[k] = std::bit_cast<double>(bits);
    }
  }
  return model;
}

}  // namespace citegraph
