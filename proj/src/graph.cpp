#include "citegraph/graph.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "citegraph/errors.hpp"
#include "citegraph/rng.hpp"

namespace citegraph {

using nlohmann::json;

std::string_view to_string(NodeCategory category) {
  switch (category) {
    case NodeCategory::Focal:
      return "focal";
    case NodeCategory::SharedRef:
      return "shared";
    case NodeCategory::GeneratedConnected:
      return "generated_connected";
    case NodeCategory::GeneratedIsolated:
      return "generated_isolated";
    case NodeCategory::GroundTruthOnly:
      return "ground_truth_only";
  }
  return "focal";
}

NodeCategory parse_node_category(std::string_view text) {
  for (auto c : {NodeCategory::Focal, NodeCategory::SharedRef, NodeCategory::GeneratedConnected,
                 NodeCategory::GeneratedIsolated, NodeCategory::GroundTruthOnly})
    if (to_string(c) == text) return c;
  throw ValidationError("unknown node category '" + std::string(text) + "'");
}

CitationGraph::CitationGraph(PaperKey focal, Provenance provenance) : provenance_(std::move(provenance)) {
  add_node(focal, NodeCategory::Focal);
}

std::optional<std::size_t> CitationGraph::index_of(const PaperKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool CitationGraph::has_edge(std::size_t a, std::size_t b) const {
  const auto& n = adjacency_[a];
  return std::binary_search(n.begin(), n.end(), b);
}

std::size_t CitationGraph::add_node(const PaperKey& key, NodeCategory category) {
  auto [it, inserted] = index_.emplace(key, nodes_.size());
  if (!inserted) return it->second;
  nodes_.push_back(key);
  categories_.push_back(category);
  adjacency_.emplace_back();
  return it->second;
}

bool CitationGraph::add_edge(std::size_t a, std::size_t b) {
  if (a == b) return false;
  auto& na = adjacency_[a];
  auto pos = std::lower_bound(na.begin(), na.end(), b);
  if (pos != na.end() && *pos == b) return false;
  na.insert(pos, b);
  auto& nb = adjacency_[b];
  nb.insert(std::lower_bound(nb.begin(), nb.end(), a), a);
  ++edge_count_;
  return true;
}

std::vector<std::pair<std::size_t, std::size_t>> CitationGraph::edge_list() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(edge_count_);
  for (std::size_t a = 0; a < adjacency_.size(); ++a)
    for (std::size_t b : adjacency_[a])
      if (a < b) out.emplace_back(a, b);
  return out;
}

CitationGraph CitationGraph::induced(const std::function<bool(std::size_t)>& keep) const {
  CitationGraph g(focal(), provenance_);
  std::vector<std::optional<std::size_t>> remap(nodes_.size());
  remap[0] = 0;
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    if (keep(i)) remap[i] = g.add_node(nodes_[i], categories_[i]);
  for (auto [a, b] : edge_list())
    if (remap[a] && remap[b]) g.add_edge(*remap[a], *remap[b]);
  return g;
}

bool CitationGraph::operator==(const CitationGraph& other) const {
  return nodes_ == other.nodes_ && categories_ == other.categories_ && adjacency_ == other.adjacency_ &&
         provenance_ == other.provenance_;
}

const CitationGraph* GraphPair::baseline(BaselineKind kind) const {
  const auto source = Source::baseline(kind);
  for (const auto& b : baselines)
    if (b.provenance() == source) return &b;
  return nullptr;
}

const GraphPair* PairSet::find(const PaperKey& focal) const {
  auto it = std::lower_bound(pairs.begin(), pairs.end(), focal,
                             [](const GraphPair& p, const PaperKey& f) { return p.focal() < f; });
  if (it == pairs.end() || it->focal() != focal) return nullptr;
  return &*it;
}

// ---------------------------------------------------------------------------

std::vector<std::pair<PaperKey, PaperKey>> undirected_simple(
    const std::vector<std::pair<PaperKey, PaperKey>>& directed) {
  std::set<std::pair<PaperKey, PaperKey>> out;
  for (const auto& [a, b] : directed) {
    if (a == b) continue;
    out.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
  }
  return {out.begin(), out.end()};
}

namespace {

bool kept(const KeyFilter& keep, const PaperKey& key) { return !keep || keep(key); }

// Connects the focal to every reference and projects citation edges onto the
// reference nodes.
void wire_edges(CitationGraph& g, const CitationEdgeSet& edges) {
  for (std::size_t i = 1; i < g.node_count(); ++i) {
    g.add_edge(0, i);
    for (const auto& nb : edges.neighbors(g.key(i))) {
      auto j = g.index_of(nb);
      if (j && *j != 0) g.add_edge(i, *j);
    }
  }
}

}  // namespace

FullGraph build_full_graph(const PaperKey& focal, const ReferenceList& gt_refs, const ReferenceList& gen_refs,
                           const CitationEdgeSet& edges, const KeyFilter& keep) {
  if (gt_refs.focal_id != focal || gen_refs.focal_id != focal)
    throw ValidationError("reference lists do not belong to focal '" + focal + "'");
  std::set<PaperKey> gt, gen;
  for (const auto& r : gt_refs.refs)
    if (kept(keep, r) && r != focal) gt.insert(r);
  for (const auto& r : gen_refs.refs)
    if (kept(keep, r) && r != focal) gen.insert(r);
  std::set<PaperKey> all(gt);
  all.insert(gen.begin(), gen.end());
  if (all.empty()) throw DegenerateGraphError("focal '" + focal + "' has no resolvable references");

  FullGraph full;
  full.generator = gen_refs.source.kind() == Source::Kind::Generated ? gen_refs.source.generator() : "";
  full.graph = CitationGraph(focal, gen_refs.source);
  for (const auto& k : all) {
    const bool in_gt = gt.count(k) != 0;
    const bool in_gen = gen.count(k) != 0;
    NodeCategory c = in_gt && in_gen ? NodeCategory::SharedRef
                     : in_gt         ? NodeCategory::GroundTruthOnly
                                     : NodeCategory::GeneratedIsolated;
    full.graph.add_node(k, c);
  }
  wire_edges(full.graph, edges);
  for (std::size_t i = 1; i < full.graph.node_count(); ++i)
    if (full.graph.category(i) == NodeCategory::GeneratedIsolated && full.graph.degree(i) > 1)
      full.graph.set_category(i, NodeCategory::GeneratedConnected);

  full.gt_completeness = static_cast<double>(gt.size()) / static_cast<double>(gt_refs.refs.size());
  full.gen_completeness = static_cast<double>(gen.size()) / static_cast<double>(gen_refs.refs.size());
  return full;
}

CitationGraph build_list_graph(const ReferenceList& refs, const CitationEdgeSet& edges, const KeyFilter& keep) {
  CitationGraph g(refs.focal_id, refs.source);
  std::vector<PaperKey> sorted;
  for (const auto& r : refs.refs)
    if (kept(keep, r) && r != refs.focal_id) sorted.push_back(r);
  std::sort(sorted.begin(), sorted.end());
  for (const auto& r : sorted) g.add_node(r, NodeCategory::GroundTruthOnly);
  wire_edges(g, edges);
  return g;
}

GraphPair split_graph(const FullGraph& full) {
  const CitationGraph& g = full.graph;
  GraphPair pair;
  pair.generated = g.induced([&](std::size_t i) { return g.category(i) != NodeCategory::GroundTruthOnly; });
  pair.generated.set_provenance(Source::generated(full.generator));
  pair.ground_truth = g.induced([&](std::size_t i) {
    auto c = g.category(i);
    return c == NodeCategory::SharedRef || c == NodeCategory::GroundTruthOnly;
  });
  pair.ground_truth.set_provenance(Source::ground_truth());
  return pair;
}

namespace {

CitationGraph subsample_refs(const CitationGraph& g, std::size_t target, std::uint64_t seed) {
  if (g.ref_count() <= target) return g;
  std::vector<std::size_t> refs(g.ref_count());
  for (std::size_t i = 0; i < refs.size(); ++i) refs[i] = i + 1;
  Rng rng(derive_seed(seed, "size_match/" + g.focal() + "/" + g.provenance().to_string()));
  // Partial Fisher-Yates: the first `target` entries are a uniform subset.
  for (std::size_t i = 0; i < target; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.uniform_index(refs.size() - i));
    std::swap(refs[i], refs[j]);
  }
  std::vector<bool> keep(g.node_count(), false);
  for (std::size_t i = 0; i < target; ++i) keep[refs[i]] = true;
  return g.induced([&](std::size_t i) { return keep[i]; });
}

}  // namespace

GraphPair size_match(const GraphPair& pair, std::uint64_t seed) {
  std::size_t target = pair.generated.ref_count();
  bool anomaly = pair.size_anomaly;
  auto shrink_to = [&](std::size_t n) {
    if (n < target) {
      target = n;
      anomaly = true;
    }
  };
  shrink_to(pair.ground_truth.ref_count());
  for (const auto& b : pair.baselines) shrink_to(b.ref_count());

  GraphPair out;
  out.size_anomaly = anomaly;
  out.generated = subsample_refs(pair.generated, target, seed);
  out.ground_truth = subsample_refs(pair.ground_truth, target, seed);
  for (const auto& b : pair.baselines) out.baselines.push_back(subsample_refs(b, target, seed));
  return out;
}

PairSet build_pairs(const Dataset& dataset, const PairBuildOptions& options) {
  PairSet set;
  set.generator = options.generator;
  KeyFilter keep;
  if (!options.keep_unresolved) keep = [&](const PaperKey& k) { return dataset.resolvable(k); };
  const Source gen_source = Source::generated(options.generator);
  for (const auto& focal : dataset.focals()) {
    const ReferenceList* gt = dataset.list_for(focal, Source::ground_truth());
    const ReferenceList* gen = dataset.list_for(focal, gen_source);
    if (!gen) {
      set.dropped.push_back({focal, "no generated list"});
      continue;
    }
    FullGraph full;
    try {
      full = build_full_graph(focal, *gt, *gen, dataset.edges(), keep);
    } catch (const DegenerateGraphError&) {
      set.dropped.push_back({focal, "no resolvable references"});
      continue;
    }
    GraphPair pair = split_graph(full);
    if (pair.generated.ref_count() == 0) {
      set.dropped.push_back({focal, "no resolvable generated reference"});
      continue;
    }
    if (pair.ground_truth.ref_count() == 0) {
      set.dropped.push_back({focal, "no resolvable ground-truth reference"});
      continue;
    }
    for (auto kind : options.baseline_kinds) {
      const ReferenceList* b = dataset.list_for(focal, Source::baseline(kind));
      if (b) pair.baselines.push_back(build_list_graph(*b, dataset.edges(), keep));
    }
    GraphPair matched = size_match(pair, options.seed);
    if (matched.size_anomaly) set.size_anomalies.push_back(focal);
    set.pairs.push_back(std::move(matched));
  }
  std::sort(set.pairs.begin(), set.pairs.end(),
            [](const GraphPair& a, const GraphPair& b) { return a.focal() < b.focal(); });
  return set;
}

// ---------------------------------------------------------------------------

void write_graphs(const std::filesystem::path& path, const std::vector<const CitationGraph*>& graphs) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  for (const CitationGraph* g : graphs) {
    json j;
    j["focal"] = g->focal();
    j["provenance"] = g->provenance().to_string();
    j["nodes"] = g->nodes();
    json cats = json::object();
    for (std::size_t i = 0; i < g->node_count(); ++i) cats[g->key(i)] = std::string(to_string(g->category(i)));
    j["categories"] = cats;
    json edges = json::array();
    for (auto [a, b] : g->edge_list()) edges.push_back({g->key(a), g->key(b)});
    j["edges"] = edges;
    out << j.dump() << '\n';
  }
}

std::vector<CitationGraph> read_graphs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open '" + path.string() + "'");
  std::vector<CitationGraph> graphs;
  std::string line;
  std::size_t lineno = 0;
  const std::string file = path.filename().string();
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      CitationGraph g(j.at("focal").get<std::string>(), Source::parse(j.at("provenance").get<std::string>()));
      const auto& cats = j.at("categories");
      for (const auto& k : j.at("nodes")) {
        auto key = k.get<std::string>();
        if (key == g.focal()) continue;
        g.add_node(key, parse_node_category(cats.at(key).get<std::string>()));
      }
      for (const auto& e : j.at("edges")) {
        auto a = g.index_of(e.at(0).get<std::string>());
        auto b = g.index_of(e.at(1).get<std::string>());
        if (!a || !b) throw ParseError(file, lineno, "edges", "edge endpoint is not a node");
        g.add_edge(*a, *b);
      }
      graphs.push_back(std::move(g));
    } catch (const json::exception& e) {
      throw ParseError(file, lineno, "<record>", e.what());
    }
  }
  return graphs;
}

}  // namespace citegraph
