#include "citegraph/structural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <queue>

#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"

namespace citegraph {

namespace {

void require_two_nodes(const CitationGraph& g, const char* what) {
  if (g.node_count() < 2)
    throw DegenerateGraphError(std::string(what) + " needs at least two nodes, graph of '" +
                               (g.node_count() ? g.focal() : std::string()) + "' has " +
                               std::to_string(g.node_count()));
}

// Hop distances from a source; -1 for unreachable nodes.
std::vector<int> bfs(const CitationGraph& g, std::size_t source) {
  std::vector<int> dist(g.node_count(), -1);
  std::queue<std::size_t> q;
  dist[source] = 0;
  q.push(source);
  while (!q.empty()) {
    auto u = q.front();
    q.pop();
    for (auto v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        q.push(v);
      }
    }
  }
  return dist;
}

std::vector<std::vector<std::size_t>> components(const CitationGraph& g) {
  std::vector<std::vector<std::size_t>> out;
  std::vector<char> seen(g.node_count(), 0);
  for (std::size_t s = 0; s < g.node_count(); ++s) {
    if (seen[s]) continue;
    auto dist = bfs(g, s);
    std::vector<std::size_t> comp;
    for (std::size_t i = 0; i < dist.size(); ++i)
      if (dist[i] >= 0) {
        comp.push_back(i);
        seen[i] = 1;
      }
    out.push_back(std::move(comp));
  }
  return out;
}

struct PowerResult {
  std::vector<double> vec;  // aligned with the component's node list
  double eigenvalue = 0;
};

PowerResult power_iteration(const CitationGraph& g, const std::vector<std::size_t>& comp,
                            const EigenvectorOptions& opt) {
  const std::size_t n = comp.size();
  std::vector<std::size_t> local(g.node_count(), 0);
  for (std::size_t i = 0; i < n; ++i) local[comp[i]] = i;

  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n))), y(n);
  double change = 0;
  bool converged = false;
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = opt.shift * x[i];
      for (auto nb : g.neighbors(comp[i])) s += x[local[nb]];
      y[i] = s;
    }
    double norm = std::sqrt(std::inner_product(y.begin(), y.end(), y.begin(), 0.0));
    if (norm == 0) break;
    change = 0;
    for (std::size_t i = 0; i < n; ++i) {
      y[i] /= norm;
      change += std::abs(y[i] - x[i]);
    }
    x.swap(y);
    if (change <= static_cast<double>(n) * opt.tol) {
      converged = true;
      break;
    }
  }
  if (!converged && n > 1)
    throw ConvergenceError("eigenvector centrality did not converge in " + std::to_string(opt.max_iter) +
                               " iterations",
                           change);
  double rayleigh = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double ax = 0;
    for (auto nb : g.neighbors(comp[i])) ax += x[local[nb]];
    rayleigh += x[i] * ax;
  }
  return {std::move(x), rayleigh};
}

}  // namespace

NodeValues degree_centrality(const CitationGraph& g) {
  require_two_nodes(g, "degree centrality");
  NodeValues out(g.node_count());
  const double denom = static_cast<double>(g.node_count() - 1);
  for (std::size_t i = 0; i < g.node_count(); ++i) out[i] = static_cast<double>(g.degree(i)) / denom;
  return out;
}

NodeValues closeness_centrality(const CitationGraph& g) {
  require_two_nodes(g, "closeness centrality");
  NodeValues out(g.node_count(), 0.0);
  const double others = static_cast<double>(g.node_count() - 1);
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    auto dist = bfs(g, v);
    double total = 0;
    double reached = 0;
    for (std::size_t u = 0; u < dist.size(); ++u)
      if (u != v && dist[u] > 0) {
        total += dist[u];
        reached += 1;
      }
    if (reached > 0) out[v] = (reached / total) * (reached / others);
  }
  return out;
}

NodeValues eigenvector_centrality(const CitationGraph& g, const EigenvectorOptions& opt) {
  require_two_nodes(g, "eigenvector centrality");
  if (!(opt.tol > 0)) throw ValidationError("eigenvector tolerance must be positive");
  if (opt.max_iter < 1) throw ValidationError("eigenvector max_iter must be at least 1");

  auto comps = components(g);
  std::size_t best = 0;
  double best_lambda = -1;
  PowerResult best_result;
  const PaperKey* best_key = nullptr;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    PowerResult r = comps[c].size() > 1 ? power_iteration(g, comps[c], opt) : PowerResult{{1.0}, 0.0};
    const PaperKey* min_key = &g.key(comps[c][0]);
    for (auto i : comps[c])
      if (g.key(i) < *min_key) min_key = &g.key(i);
    const double tie = 1e-9 * std::max(1.0, std::abs(best_lambda));
    const bool better = r.eigenvalue > best_lambda + tie ||
                        (std::abs(r.eigenvalue - best_lambda) <= tie && best_key && *min_key < *best_key);
    if (best_key == nullptr || better) {
      best = c;
      best_lambda = r.eigenvalue;
      best_result = std::move(r);
      best_key = min_key;
    }
  }
  NodeValues out(g.node_count(), 0.0);
  for (std::size_t i = 0; i < comps[best].size(); ++i) out[comps[best][i]] = best_result.vec[i];
  return out;
}

NodeValues clustering_coefficient(const CitationGraph& g) {
  NodeValues out(g.node_count(), 0.0);
  for (std::size_t v = 0; v < g.node_count(); ++v) {
    const auto& nb = g.neighbors(v);
    const std::size_t d = nb.size();
    if (d < 2) continue;
    std::size_t links = 0;
    for (std::size_t a = 0; a < d; ++a) {
      // Count neighbors of nb[a] that are also neighbors of v and come later.
      const auto& na = g.neighbors(nb[a]);
      auto it_v = nb.begin() + static_cast<std::ptrdiff_t>(a + 1);
      auto it_a = std::upper_bound(na.begin(), na.end(), nb[a]);
      while (it_v != nb.end() && it_a != na.end()) {
        if (*it_v < *it_a) {
          ++it_v;
        } else if (*it_a < *it_v) {
          ++it_a;
        } else {
          ++links;
          ++it_v;
          ++it_a;
        }
      }
    }
    out[v] = 2.0 * static_cast<double>(links) / (static_cast<double>(d) * static_cast<double>(d - 1));
  }
  return out;
}

std::vector<double> node_structural_features(const CitationGraph& g, const EigenvectorOptions& options) {
  auto deg = degree_centrality(g);
  auto clo = closeness_centrality(g);
  auto eig = eigenvector_centrality(g, options);
  auto clu = clustering_coefficient(g);
  const double edges = static_cast<double>(g.edge_count());
  std::vector<double> out(g.node_count() * kNodeFeatureDim);
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    double* row = out.data() + i * kNodeFeatureDim;
    row[0] = deg[i];
    row[1] = clo[i];
    row[2] = eig[i];
    row[3] = clu[i];
    row[4] = edges;
  }
  return out;
}

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

Summary summarize(std::vector<double> values) {
  Summary s;
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  s.median = quantile(values, 0.5);
  s.iqr = quantile(values, 0.75) - quantile(values, 0.25);
  s.max_to_mean = s.mean == 0 ? 0.0 : values.back() / s.mean;
  return s;
}

const std::array<std::string, kAggregateDim>& GraphStructuralAggregate::column_names() {
  static const std::array<std::string, kAggregateDim> names = {
      "degree_mean",      "degree_median",        "degree_iqr",       "degree_max_to_mean",
      "closeness_mean",   "closeness_median",     "closeness_iqr",    "closeness_max_to_mean",
      "eigenvector_mean", "eigenvector_median",   "eigenvector_iqr",  "eigenvector_max_to_mean",
      "clustering_mean",  "clustering_median",    "clustering_iqr",   "clustering_max_to_mean",
      "edge_count",       "node_count",           "mean_degree",      "max_to_mean_degree_ratio"};
  return names;
}

GraphStructuralAggregate aggregate(const CitationGraph& g, const EigenvectorOptions& options) {
  GraphStructuralAggregate agg;
  const NodeValues metrics[4] = {degree_centrality(g), closeness_centrality(g), eigenvector_centrality(g, options),
                                 clustering_coefficient(g)};
  for (int m = 0; m < 4; ++m) {
    Summary s = summarize(metrics[m]);
    agg.values[4 * m + 0] = s.mean;
    agg.values[4 * m + 1] = s.median;
    agg.values[4 * m + 2] = s.iqr;
    agg.values[4 * m + 3] = s.max_to_mean;
  }
  const double n = static_cast<double>(g.node_count());
  const double e = static_cast<double>(g.edge_count());
  double max_degree = 0;
  for (std::size_t i = 0; i < g.node_count(); ++i) max_degree = std::max(max_degree, double(g.degree(i)));
  const double mean_degree = 2.0 * e / n;
  agg.values[16] = e;
  agg.values[17] = n;
  agg.values[18] = mean_degree;
  agg.values[19] = mean_degree == 0 ? 0.0 : max_degree / mean_degree;
  return agg;
}

void write_structural_csv(const std::filesystem::path& path, const std::vector<StructuralRow>& rows) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "focal_id,provenance";
  for (const auto& name : GraphStructuralAggregate::column_names()) out << ',' << name;
  out << '\n';
  for (const auto& row : rows) {
    out << row.focal << ',' << row.provenance;
    for (double v : row.features.values) out << ',' << format_number(v);
    out << '\n';
  }
}

std::vector<StructuralRow> read_structural_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<StructuralRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2 + kAggregateDim)
      throw ParseError(path.filename().string(), lineno, "<row>", "expected 22 columns");
    StructuralRow row;
    row.focal = cells[0];
    row.provenance = cells[1];
    for (std::size_t i = 0; i < kAggregateDim; ++i) row.features.values[i] = parse_number(cells[2 + i]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace citegraph
