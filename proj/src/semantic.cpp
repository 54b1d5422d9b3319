#include "citegraph/semantic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

using nlohmann::json;

double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

double euclidean(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

GraphEmbedding graph_embedding(const CitationGraph& graph, const EmbeddingTable& ref_table,
                               const EmbeddingTable* focal_table) {
  const EmbeddingTable& ft = focal_table ? *focal_table : ref_table;
  auto focal = ft.get(graph.focal());
  if (focal.empty()) throw MissingEmbeddingError(graph.focal());
  if (ft.dim() != ref_table.dim()) throw ValidationError("focal and reference embedding tables differ in dimension");

  GraphEmbedding ge;
  ge.focal_vec.assign(focal.begin(), focal.end());
  ge.ref_sum.assign(ref_table.dim(), 0.0);
  for (std::size_t i = 1; i < graph.node_count(); ++i) {
    auto v = ref_table.get(graph.key(i));
    if (v.empty()) {
      ++ge.missing_refs;
      continue;
    }
    for (std::size_t d = 0; d < v.size(); ++d) ge.ref_sum[d] += v[d];
    ge.per_ref.emplace_back(graph.key(i), std::vector<double>(v.begin(), v.end()));
  }
  const std::size_t refs = graph.ref_count();
  ge.coverage = refs ? static_cast<double>(ge.per_ref.size()) / static_cast<double>(refs) : 0.0;
  ge.coverage_warning = ge.per_ref.empty() || 2 * ge.missing_refs > refs;
  return ge;
}

AlignmentDiagnostics alignment(const GraphEmbedding& ge) {
  if (ge.per_ref.empty()) throw InsufficientDataError("alignment needs at least one reference vector");
  AlignmentDiagnostics d;
  const double n = static_cast<double>(ge.per_ref.size());
  for (const auto& [key, v] : ge.per_ref) {
    d.mean_focal_ref_cos += cosine(ge.focal_vec, v);
    d.mean_focal_ref_eu += euclidean(ge.focal_vec, v);
  }
  d.mean_focal_ref_cos /= n;
  d.mean_focal_ref_eu /= n;
  d.focal_refsum_cos = cosine(ge.focal_vec, ge.ref_sum);
  d.focal_refsum_eu = euclidean(ge.focal_vec, ge.ref_sum);
  if (ge.per_ref.size() >= 2) {
    double cs = 0, es = 0;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < ge.per_ref.size(); ++i)
      for (std::size_t j = i + 1; j < ge.per_ref.size(); ++j) {
        cs += cosine(ge.per_ref[i].second, ge.per_ref[j].second);
        es += euclidean(ge.per_ref[i].second, ge.per_ref[j].second);
        ++pairs;
      }
    d.mean_ref_ref_cos = cs / static_cast<double>(pairs);
    d.mean_ref_ref_eu = es / static_cast<double>(pairs);
  }
  return d;
}

// ---------------------------------------------------------------------------

RowMatrix PcaResult::transform(const RowMatrix& rows) const {
  if (rows.cols() != components.cols()) throw ValidationError("PCA input dimension mismatch");
  return (rows.rowwise() - mean) * components.transpose();
}

PcaResult pca(const RowMatrix& rows, std::size_t k) {
  const auto n = static_cast<std::size_t>(rows.rows());
  const auto dim = static_cast<std::size_t>(rows.cols());
  if (n < 2) throw ValidationError("PCA needs at least two rows");
  if (k < 1 || k > std::min(n - 1, dim))
    throw ValidationError("PCA component count " + std::to_string(k) + " outside [1, " +
                          std::to_string(std::min(n - 1, dim)) + "]");
  PcaResult out;
  out.mean = rows.colwise().mean();
  Eigen::MatrixXd centered = rows.rowwise() - out.mean;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();
  const auto retained = static_cast<std::size_t>(s.size());
  out.all_ratios.resize(retained);
  for (std::size_t i = 0; i < retained; ++i) out.all_ratios[i] = total > 0 ? s[i] * s[i] / total : 0.0;
  out.explained_variance_ratio.assign(out.all_ratios.begin(), out.all_ratios.begin() + static_cast<std::ptrdiff_t>(k));

  out.components.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(dim));
  const Eigen::MatrixXd& v = svd.matrixV();
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::VectorXd col = v.col(static_cast<Eigen::Index>(c));
    // Sign convention: largest-magnitude entry positive.
    Eigen::Index arg;
    col.cwiseAbs().maxCoeff(&arg);
    if (col[arg] < 0) col = -col;
    out.components.row(static_cast<Eigen::Index>(c)) = col.transpose();
  }
  out.projected = centered * out.components.transpose();
  return out;
}

RowMatrix table_matrix(const EmbeddingTable& table) {
  RowMatrix m(static_cast<Eigen::Index>(table.size()), static_cast<Eigen::Index>(table.dim()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    auto v = table.get(table.ids()[i]);
    for (std::size_t d = 0; d < v.size(); ++d) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = v[d];
  }
  return m;
}

EmbeddingTable project_table(const EmbeddingTable& table, const PcaResult& fit) {
  RowMatrix projected = fit.transform(table_matrix(table));
  EmbeddingTable out(static_cast<std::size_t>(projected.cols()));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const double* row = projected.data() + static_cast<std::ptrdiff_t>(i) * projected.cols();
    out.set(table.ids()[i], std::span<const double>(row, static_cast<std::size_t>(projected.cols())));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void score_graph(const CitationGraph& g, const EmbeddingTable& table, bool as_baseline,
                 std::vector<NodeSimilarity>& out) {
  std::vector<std::size_t> embedded;
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (table.contains(g.key(i))) embedded.push_back(i);
  if (embedded.size() < 2)
    throw InsufficientDataError("graph of '" + g.focal() + "' has fewer than two embedded nodes");
  for (auto i : embedded) {
    if (i == 0) continue;
    double s = 0;
    for (auto j : embedded)
      if (j != i) s += cosine(table.get(g.key(i)), table.get(g.key(j)));
    out.push_back({g.key(i), as_baseline ? "baseline" : std::string(to_string(g.category(i))),
                   s / static_cast<double>(embedded.size() - 1)});
  }
}

}  // namespace

std::vector<NodeSimilarity> isolated_node_similarity(const FullGraph& full, const EmbeddingTable& table,
                                                     const std::vector<const CitationGraph*>& baselines) {
  std::vector<NodeSimilarity> out;
  score_graph(full.graph, table, false, out);
  for (const auto* b : baselines) score_graph(*b, table, true, out);
  return out;
}

std::map<std::string, std::vector<double>> group_scores(const std::vector<NodeSimilarity>& scores) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& s : scores) out[s.group].push_back(s.score);
  return out;
}

EmbeddingTable random_vector_table(const std::vector<PaperKey>& ids, std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ValidationError("random vector dimension must be positive");
  EmbeddingTable table(dim);
  std::vector<double> v(dim);
  for (const auto& id : ids) {
    if (table.contains(id)) continue;
    Rng rng(derive_seed(seed, "random_vector/" + id));
    for (auto& x : v) x = rng.normal();
    table.set(id, v);
  }
  return table;
}

// ---------------------------------------------------------------------------

void write_semantic_csv(const std::filesystem::path& path, const std::vector<SemanticRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "focal_id,provenance,mean_focal_ref_cos,mean_ref_ref_cos,focal_refsum_cos,mean_focal_ref_eu,"
         "mean_ref_ref_eu,focal_refsum_eu,coverage\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_number(*v) : std::string(); };
  for (const auto& r : rows) {
    const auto& d = r.diagnostics;
    out << r.focal << ',' << r.provenance << ',' << format_number(d.mean_focal_ref_cos) << ','
        << opt(d.mean_ref_ref_cos) << ',' << format_number(d.focal_refsum_cos) << ','
        << format_number(d.mean_focal_ref_eu) << ',' << opt(d.mean_ref_ref_eu) << ','
        << format_number(d.focal_refsum_eu) << ',' << format_number(r.coverage) << '\n';
  }
}

void write_graph_embeddings(const std::filesystem::path& path, const std::vector<GraphEmbeddingRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::size_t dim = rows.empty() ? 0 : rows.front().ref_sum.size();
  json header;
  header["dim"] = dim;
  header["count"] = rows.size();
  json order = json::array(), prov = json::array();
  for (const auto& r : rows) {
    if (r.ref_sum.size() != dim) throw ValidationError("graph embedding rows differ in dimension");
    order.push_back(r.focal);
    prov.push_back(r.provenance);
  }
  header["order"] = order;
  header["provenance"] = prov;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << header.dump() << '\n';
  for (const auto& r : rows)
    for (double v : r.ref_sum) {
      auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      char bytes[4];
      std::memcpy(bytes, &bits, 4);
      out.write(bytes, 4);
    }
}

std::vector<GraphEmbeddingRow> read_graph_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  json header = json::parse(line);
  const auto dim = header.at("dim").get<std::size_t>();
  const auto count = header.at("count").get<std::size_t>();
  std::vector<GraphEmbeddingRow> rows(count);
  for (std::size_t i = 0; i < count; ++i) {
    rows[i].focal = header.at("order").at(i).get<std::string>();
    if (header.contains("provenance")) rows[i].provenance = header["provenance"].at(i).get<std::string>();
    rows[i].ref_sum.resize(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      char bytes[4];
      if (!in.read(bytes, 4)) throw ValidationError("'" + path.string() + "' is truncated");
      std::uint32_t bits;
      std::memcpy(&bits, bytes, 4);
      if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
      rows[i].ref_sum[d] = std::bit_cast<float>(bits);
    }
  }
  return rows;
}

}  // namespace citegraph
