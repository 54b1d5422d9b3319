#include "citegraph/pipeline.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "citegraph/baselines.hpp"
#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"

namespace citegraph {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(FeatureMode mode) {
  switch (mode) {
    case FeatureMode::StructuralAggregate:
      return "structural";
    case FeatureMode::StructuralNode5:
      return "structural-node";
    case FeatureMode::EmbeddingSum:
      return "embedding";
    case FeatureMode::EmbeddingNode:
      return "embedding-node";
  }
  return "structural";
}

FeatureMode parse_feature_mode(std::string_view text) {
  for (auto m : {FeatureMode::StructuralAggregate, FeatureMode::StructuralNode5, FeatureMode::EmbeddingSum,
                 FeatureMode::EmbeddingNode})
    if (to_string(m) == text) return m;
  throw ValidationError("unknown feature mode '" + std::string(text) + "'");
}

std::string_view to_string(ModelKind model) {
  switch (model) {
    case ModelKind::RF:
      return "rf";
    case ModelKind::GCN:
      return "gcn";
    case ModelKind::GraphSAGE:
      return "sage";
    case ModelKind::GAT:
      return "gat";
    case ModelKind::GIN:
      return "gin";
  }
  return "rf";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "rf") return ModelKind::RF;
  switch (parse_arch(text)) {
    case Arch::GCN:
      return ModelKind::GCN;
    case Arch::GraphSAGE:
      return ModelKind::GraphSAGE;
    case Arch::GAT:
      return ModelKind::GAT;
    case Arch::GIN:
      return ModelKind::GIN;
  }
  return ModelKind::RF;
}

Arch arch_of(ModelKind model) {
  switch (model) {
    case ModelKind::GCN:
      return Arch::GCN;
    case ModelKind::GraphSAGE:
      return Arch::GraphSAGE;
    case ModelKind::GAT:
      return Arch::GAT;
    case ModelKind::GIN:
      return Arch::GIN;
    case ModelKind::RF:
      break;
  }
  throw ValidationError("random forest has no message-passing architecture");
}

bool is_node_mode(FeatureMode mode) {
  return mode == FeatureMode::StructuralNode5 || mode == FeatureMode::EmbeddingNode;
}

bool is_embedding_mode(FeatureMode mode) {
  return mode == FeatureMode::EmbeddingSum || mode == FeatureMode::EmbeddingNode;
}

std::string TaskSpec::label() const {
  return name + "/" + std::string(to_string(mode)) + "/" + std::string(to_string(model));
}

TaskSpec make_task(std::string_view name, const std::string& generator, FeatureMode mode, ModelKind model) {
  if (model == ModelKind::RF && is_node_mode(mode))
    throw ValidationError("the random forest needs graph-level features, not '" + std::string(to_string(mode)) + "'");
  if (model != ModelKind::RF && !is_node_mode(mode))
    throw ValidationError("graph neural networks need node features, not '" + std::string(to_string(mode)) + "'");
  TaskSpec t;
  t.mode = mode;
  t.model = model;
  std::string_view base = name;
  BaselineKind kind = BaselineKind::FieldShuffle;
  if (auto colon = name.find(':'); colon != std::string_view::npos) {
    base = name.substr(0, colon);
    kind = parse_baseline_kind(name.substr(colon + 1));
  }
  if (base == "gt-vs-gen") {
    if (name.find(':') != std::string_view::npos) throw ValidationError("gt-vs-gen takes no baseline kind");
    t.class_a = Source::ground_truth();
    t.class_b = Source::generated(generator);
  } else if (base == "gt-vs-base") {
    t.class_a = Source::ground_truth();
    t.class_b = Source::baseline(kind);
  } else if (base == "gen-vs-base") {
    t.class_a = Source::generated(generator);
    t.class_b = Source::baseline(kind);
  } else {
    throw ValidationError("unknown task '" + std::string(name) + "'");
  }
  t.name = base == "gt-vs-gen" ? std::string(base) : std::string(base) + ":" + std::string(to_string(kind));
  return t;
}

TaskSpec parse_task_label(std::string_view label, const std::string& generator) {
  auto a = label.find('/');
  auto b = a == std::string_view::npos ? a : label.find('/', a + 1);
  if (b == std::string_view::npos) throw ValidationError("task label '" + std::string(label) + "' is not name/mode/model");
  return make_task(label.substr(0, a), generator, parse_feature_mode(label.substr(a + 1, b - a - 1)),
                   parse_model_kind(label.substr(b + 1)));
}

// ---------------------------------------------------------------------------

FeatureStore::FeatureStore(const PairSet& pairs, std::shared_ptr<const EmbeddingTable> refs,
                           std::shared_ptr<const EmbeddingTable> focals, EigenvectorOptions eig)
    : pairs_(pairs), refs_(std::move(refs)), focals_(std::move(focals)), eig_(eig) {}

const CitationGraph* FeatureStore::graph(const PaperKey& focal, const Source& source) const {
  const GraphPair* pair = pairs_.find(focal);
  if (!pair) return nullptr;
  switch (source.kind()) {
    case Source::Kind::GroundTruth:
      return &pair->ground_truth;
    case Source::Kind::Generated:
      return source.generator() == pairs_.generator ? &pair->generated : nullptr;
    case Source::Kind::Baseline:
      return pair->baseline(source.baseline_kind());
  }
  return nullptr;
}

std::vector<PaperKey> FeatureStore::focals_with(const Source& a, const Source& b) const {
  std::vector<PaperKey> out;
  for (const auto& p : pairs_.pairs)
    if (graph(p.focal(), a) && graph(p.focal(), b)) out.push_back(p.focal());
  return out;
}

namespace {

std::string cache_key(const PaperKey& focal, const Source& source, FeatureMode mode) {
  return focal + "|" + source.to_string() + "|" + std::string(to_string(mode));
}

}  // namespace

const std::vector<double>& FeatureStore::vector_features(const PaperKey& focal, const Source& source,
                                                         FeatureMode mode) {
  const std::string key = cache_key(focal, source, mode);
  auto it = vectors_.find(key);
  if (it != vectors_.end()) return it->second;
  const CitationGraph* g = graph(focal, source);
  if (!g) throw ValidationError("no " + source.to_string() + " graph for focal '" + focal + "'");
  std::vector<double> v;
  if (mode == FeatureMode::StructuralAggregate) {
    auto agg = aggregate(*g, eig_);
    v.assign(agg.values.begin(), agg.values.end());
  } else if (mode == FeatureMode::EmbeddingSum) {
    if (!refs_) throw ValidationError("embedding features need an embedding table");
    v = graph_embedding(*g, *refs_, focal_table()).ref_sum;
  } else {
    throw ValidationError("feature mode '" + std::string(to_string(mode)) + "' is not graph-level");
  }
  return vectors_.emplace(key, std::move(v)).first->second;
}

GraphSample FeatureStore::node_sample(const PaperKey& focal, const Source& source, FeatureMode mode, int label) {
  const CitationGraph* g = graph(focal, source);
  if (!g) throw ValidationError("no " + source.to_string() + " graph for focal '" + focal + "'");
  GraphSample s;
  s.id = focal + "|" + source.to_string();
  s.nodes = g->node_count();
  s.label = label;
  for (auto [a, b] : g->edge_list()) s.edges.emplace_back(static_cast<int>(a), static_cast<int>(b));
  const auto n = static_cast<Eigen::Index>(g->node_count());
  if (mode == FeatureMode::StructuralNode5) {
    const std::string key = cache_key(focal, source, mode);
    auto it = node_structural_.find(key);
    if (it == node_structural_.end()) it = node_structural_.emplace(key, node_structural_features(*g, eig_)).first;
    s.features = Eigen::Map<const Matrix>(it->second.data(), n, static_cast<Eigen::Index>(kNodeFeatureDim));
  } else if (mode == FeatureMode::EmbeddingNode) {
    if (!refs_) throw ValidationError("embedding features need an embedding table");
    const auto dim = static_cast<Eigen::Index>(refs_->dim());
    s.features = Matrix::Zero(n, dim);
    auto fv = focal_table()->get(g->focal());
    if (fv.empty()) throw MissingEmbeddingError(g->focal());
    for (Eigen::Index d = 0; d < dim; ++d) s.features(0, d) = fv[static_cast<std::size_t>(d)];
    for (Eigen::Index i = 1; i < n; ++i) {
      auto v = refs_->get(g->key(static_cast<std::size_t>(i)));
      for (std::size_t d = 0; d < v.size(); ++d) s.features(i, static_cast<Eigen::Index>(d)) = v[d];
    }
  } else {
    throw ValidationError("feature mode '" + std::string(to_string(mode)) + "' is not node-level");
  }
  return s;
}

// ---------------------------------------------------------------------------

namespace {

struct Fold {
  std::vector<PaperKey> focals;
};

// Samples of one fold; class_b is optionally drawn from another store.
struct FoldData {
  FeatureRows x;
  Labels y;
  std::vector<GraphSample> graphs;
};

FoldData fold_data(const TaskSpec& task, FeatureStore& store, const std::vector<PaperKey>& focals,
                   FeatureStore* b_store = nullptr, const Source* b_source = nullptr, std::size_t* excluded = nullptr) {
  FoldData d;
  const bool node = is_node_mode(task.mode);
  FeatureStore& bs = b_store ? *b_store : store;
  const Source& b = b_source ? *b_source : task.class_b;
  for (const auto& f : focals) {
    if (!bs.graph(f, b)) {
      if (excluded) ++*excluded;
      continue;
    }
    if (node) {
      d.graphs.push_back(store.node_sample(f, task.class_a, task.mode, 0));
      d.graphs.push_back(bs.node_sample(f, b, task.mode, 1));
    } else {
      d.x.push_back(store.vector_features(f, task.class_a, task.mode));
      d.y.push_back(0);
      d.x.push_back(bs.vector_features(f, b, task.mode));
      d.y.push_back(1);
    }
  }
  return d;
}

void permute(FoldData& d, std::uint64_t seed) {
  Rng rng(derive_seed(seed, "permute-labels"));
  if (!d.y.empty()) rng.shuffle(d.y);
  if (!d.graphs.empty()) {
    std::vector<int> labels;
    for (const auto& g : d.graphs) labels.push_back(g.label);
    rng.shuffle(labels);
    for (std::size_t i = 0; i < labels.size(); ++i) d.graphs[i].label = labels[i];
  }
}

Labels labels_of(const FoldData& d) {
  if (!d.graphs.empty()) {
    Labels y;
    for (const auto& g : d.graphs) y.push_back(g.label);
    return y;
  }
  return d.y;
}

std::size_t fold_size(const FoldData& d) { return d.graphs.empty() ? d.x.size() : d.graphs.size(); }

struct CoreResult {
  TaskResult result;
  std::size_t excluded = 0;
};

CoreResult run_core(const TaskSpec& task, FeatureStore& store, const RunOptions& options, FeatureStore* swap_store,
                    const Source* swap_source) {
  if (task.class_a == task.class_b) throw ValidationError("task classes must differ");
  if (options.seeds.empty()) throw ValidationError("at least one seed is required");
  CoreResult out;
  auto& report = out.result.report;
  report.task = task.label();
  const auto focals = store.focals_with(task.class_a, task.class_b);
  for (std::size_t si = 0; si < options.seeds.size(); ++si) {
    const std::uint64_t seed = options.seeds[si];
    SplitPlan plan = options.plan;
    plan.seed = derive_seed(seed, "split");
    Folds folds = make_splits(focals, plan, options.strata);
    FoldData train = fold_data(task, store, folds.train);
    FoldData val = fold_data(task, store, folds.val);
    std::size_t excluded = 0;
    FoldData test = fold_data(task, store, folds.test, swap_store, swap_source, &excluded);
    if (si == 0) out.excluded = excluded;
    if (options.permute_labels) permute(train, seed);
    if (fold_size(test) == 0) throw InsufficientDataError("test fold of '" + task.label() + "' is empty");

    Metrics m;
    if (task.model == ModelKind::RF) {
      ForestConfig fc = options.forest;
      fc.seed = derive_seed(seed, "forest");
      Forest forest = train_forest(train.x, train.y, fc);
      m = evaluate(test.y, forest.predict_all(test.x));
      out.result.last_forest = std::move(forest);
    } else {
      GnnConfig gc = options.gnn;
      gc.arch = arch_of(task.model);
      gc.seed = derive_seed(seed, "gnn");
      TrainedModel tm = train_gnn(gc, train.graphs, val.graphs);
      BatchedGraphs tb = make_batch(test.graphs);
      m = evaluate(labels_of(test), predict_labels(tm.model, tb));
      out.result.last_model = std::move(tm);
    }
    report.seeds.push_back(seed);
    report.accuracy.push_back(m.accuracy);
    report.f1.push_back(m.f1);
    report.train_size = fold_size(train);
    report.val_size = fold_size(val);
    report.test_size = fold_size(test);
  }
  return out;
}

}  // namespace

TaskResult run_task(const TaskSpec& task, FeatureStore& store, const RunOptions& options) {
  return run_core(task, store, options, nullptr, nullptr).result;
}

std::vector<GraphSample> task_samples(const TaskSpec& task, FeatureStore& store, const std::vector<PaperKey>& focals) {
  if (!is_node_mode(task.mode)) throw ValidationError("task '" + task.label() + "' has no node features");
  return fold_data(task, store, focals).graphs;
}

SweepOutcome sweep_task(const TaskSpec& task, FeatureStore& store, const RunOptions& options,
                        const SearchSpace& space, std::size_t n_trials, std::uint64_t seed,
                        const SweepOptions& sweep_options) {
  if (task.model == ModelKind::RF) throw ValidationError("the sweep tunes graph neural networks only");
  if (options.seeds.empty()) throw ValidationError("at least one seed is required");
  SplitPlan plan = options.plan;
  plan.seed = derive_seed(options.seeds.front(), "split");
  Folds folds = make_splits(store.focals_with(task.class_a, task.class_b), plan, options.strata);
  auto train = task_samples(task, store, folds.train);
  auto val = task_samples(task, store, folds.val);
  auto test = task_samples(task, store, folds.test);
  SweepOutcome out;
  out.sweep = random_search(task.label(), arch_of(task.model), space, n_trials, seed, train, val, test, sweep_options);
  RunOptions retrain = options;
  retrain.gnn = out.sweep.trials[out.sweep.best].config;
  retrain.gnn.max_epochs = sweep_options.max_epochs;
  retrain.gnn.patience = sweep_options.patience;
  out.retrains = run_task(task, store, retrain).report;
  return out;
}

CrossResult cross_generator(const TaskSpec& task, FeatureStore& train_store, FeatureStore& swap_store,
                            const std::string& swap_generator, const RunOptions& options) {
  if (task.class_b.kind() != Source::Kind::Generated)
    throw ValidationError("cross-generator evaluation needs a generated second class");
  const Source swap = Source::generated(swap_generator);
  CoreResult core = run_core(task, train_store, options, &swap_store, &swap);
  CrossResult out;
  out.report = std::move(core.result.report);
  out.report.task = "cross:" + swap_generator + ":" + out.report.task;
  out.excluded = core.excluded;
  return out;
}

std::map<PaperKey, std::string> field_strata(const Dataset& dataset) {
  std::map<PaperKey, std::string> out;
  for (const auto& f : dataset.focals()) out[f] = dataset.find(f)->top_field;
  return out;
}

std::pair<std::shared_ptr<EmbeddingTable>, std::shared_ptr<EmbeddingTable>> random_tables(
    const EmbeddingTable& refs, const EmbeddingTable* focals, std::uint64_t seed) {
  auto r = std::make_shared<EmbeddingTable>(random_vector_table(refs.ids(), refs.dim(), seed));
  std::shared_ptr<EmbeddingTable> f;
  if (focals) f = std::make_shared<EmbeddingTable>(random_vector_table(focals->ids(), focals->dim(), derive_seed(seed, "focal")));
  return {r, f};
}

std::pair<std::shared_ptr<EmbeddingTable>, std::shared_ptr<EmbeddingTable>> pca_tables(
    const EmbeddingTable& refs, const EmbeddingTable* focals, std::size_t k) {
  RowMatrix rows = table_matrix(refs);
  PcaResult fit = pca(rows, k);
  auto project = [&](const EmbeddingTable& t) {
    RowMatrix p = table_matrix(t) * fit.components.transpose();
    auto out = std::make_shared<EmbeddingTable>(k);
    for (std::size_t i = 0; i < t.size(); ++i)
      out->set(t.ids()[i], std::span<const double>(p.data() + static_cast<std::ptrdiff_t>(i * k), k));
    return out;
  };
  return {project(refs), focals ? project(*focals) : nullptr};
}

void write_summary_csv(const fs::path& path, const std::vector<ClassificationReport>& reports) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "task,mean_accuracy,std_accuracy,mean_f1,std_f1,runs,train,val,test\n";
  for (const auto& r : reports) {
    auto a = r.accuracy_summary(), f = r.f1_summary();
    out << r.task << ',' << format_number(a.mean) << ',' << format_number(a.std) << ',' << format_number(f.mean)
        << ',' << format_number(f.std) << ',' << r.accuracy.size() << ',' << r.train_size << ',' << r.val_size << ','
        << r.test_size << '\n';
  }
}

std::optional<GnnConfig> gnn_preset(std::string_view task, FeatureMode mode, Arch arch) {
  struct Row {
    const char* task;
    bool embedding;
    Arch arch;
    double lr;
    std::size_t hidden;
    double dropout;
    std::size_t layers;
    double wd;
    std::size_t batch;
  };
  static const Row rows[] = {
      {"gt-vs-gen", false, Arch::GCN, 47.3668e-4, 64, 0.1494, 1, 0.0006, 13000},
      {"gt-vs-gen", false, Arch::GraphSAGE, 8.8814e-4, 32, 0.2391, 1, 0.0, 8000},
      {"gt-vs-gen", false, Arch::GAT, 10.2697e-4, 64, 0.0003, 1, 0.0003, 8000},
      {"gt-vs-gen", false, Arch::GIN, 47.3791e-4, 32, 0.0026, 1, 0.0026, 13000},
      {"gt-vs-gen", true, Arch::GCN, 1.8859e-4, 128, 0.3582, 4, 0.0054, 8000},
      {"gt-vs-gen", true, Arch::GraphSAGE, 5.7781e-4, 128, 0.4984, 3, 0.0049, 10000},
      {"gt-vs-gen", true, Arch::GAT, 51.0714e-4, 128, 0.3426, 4, 0.0, 8000},
      {"gt-vs-gen", true, Arch::GIN, 15.4030e-4, 64, 0.2535, 3, 0.0005, 8000},
      {"gen-vs-base", false, Arch::GCN, 48.4246e-4, 32, 0.0312, 4, 0.0006, 13000},
      {"gen-vs-base", false, Arch::GraphSAGE, 19.2918e-4, 64, 0.2455, 1, 0.0002, 8000},
      {"gen-vs-base", false, Arch::GAT, 69.6247e-4, 64, 0.2268, 1, 0.0010, 13000},
      {"gen-vs-base", false, Arch::GIN, 26.3361e-4, 32, 0.0075, 1, 0.0013, 10000},
      {"gen-vs-base", true, Arch::GCN, 84.7239e-4, 32, 0.4938, 3, 0.0006, 10000},
      {"gen-vs-base", true, Arch::GraphSAGE, 94.0900e-4, 32, 0.2636, 2, 0.0002, 13000},
      {"gen-vs-base", true, Arch::GAT, 27.2811e-4, 32, 0.0621, 3, 0.0016, 8000},
      {"gen-vs-base", true, Arch::GIN, 15.4219e-4, 128, 0.4876, 2, 0.0001, 8000},
  };
  const bool emb = is_embedding_mode(mode);
  for (const auto& r : rows)
    if (task == r.task && emb == r.embedding && arch == r.arch) {
      GnnConfig c;
      c.arch = arch;
      c.learning_rate = r.lr;
      c.hidden_dim = r.hidden;
      c.dropout = r.dropout;
      c.n_layers = r.layers;
      c.weight_decay = r.wd;
      c.batch_size = r.batch;
      return c;
    }
  return std::nullopt;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t infer_dim(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) return json::parse(line).at("dim").get<std::size_t>();
  throw ValidationError("'" + path.string() + "' holds no embeddings");
}

GnnConfig gnn_from_json(const json& j, GnnConfig c) {
  c.hidden_dim = j.value("hidden_dim", c.hidden_dim);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.dropout = j.value("dropout", c.dropout);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  return c;
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError("config", 1, "<document>", e.what());
  }
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  PipelineConfig c;
  try {
    c.run_id = j.value("run_id", c.run_id);
    c.out_dir = j.value("out_dir", c.out_dir.string());
    if (j.contains("dataset_dir")) c.dataset_dir = j["dataset_dir"].get<std::string>();
    if (j.contains("synth")) {
      const auto& s = j["synth"];
      SynthParams p;
      p.n_focals = s.value("n_focals", p.n_focals);
      p.seed = s.value("seed", p.seed);
      p.drift = s.value("drift", p.drift);
      p.dim = s.value("dim", p.dim);
      p.min_refs = s.value("min_refs", p.min_refs);
      p.max_refs = s.value("max_refs", p.max_refs);
      if (s.contains("generators")) p.generators = s["generators"].get<std::vector<std::string>>();
      c.synth = p;
    }
    c.generator = j.value("generator", c.generator);
    if (j.contains("cross_generator")) c.cross_generator = j["cross_generator"].get<std::string>();
    c.seed = j.value("seed", c.seed);
    if (j.contains("seeds")) {
      if (j["seeds"].is_number_integer()) {
        c.seeds.clear();
        for (std::uint64_t i = 0; i < j["seeds"].get<std::uint64_t>(); ++i) c.seeds.push_back(i);
      } else {
        c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
      }
    }
    if (j.contains("tasks")) c.tasks = j["tasks"].get<std::vector<std::string>>();
    c.n_trees = j.value("n_trees", c.n_trees);
    if (j.contains("gnn")) c.gnn = gnn_from_json(j["gnn"], c.gnn);
    c.saturation_perms = j.value("saturation_perms", c.saturation_perms);
    c.embedding_dim = j.value("embedding_dim", c.embedding_dim);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  return c;
}

PipelineConfig PipelineConfig::from_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

void ensure_baselines(Dataset& dataset, std::uint64_t seed) {
  std::vector<ReferenceList> added;
  for (auto kind : {BaselineKind::FieldShuffle, BaselineKind::SubfieldShuffle, BaselineKind::TemporalFieldShuffle}) {
    bool present = false;
    for (const auto& l : dataset.lists())
      if (l.source == Source::baseline(kind)) {
        present = true;
        break;
      }
    if (present) continue;
    for (auto& [focal, list] : field_shuffle(dataset, kind, seed)) added.push_back(std::move(list));
  }
  if (!added.empty()) dataset.put_lists(std::move(added));
}

Inputs load_inputs(const PipelineConfig& config) {
  Inputs in;
  if (config.synth) {
    SynthDataset s = synth_dataset(*config.synth);
    in.dataset = std::move(s.dataset);
    in.refs = std::make_shared<EmbeddingTable>(std::move(s.ref_embeddings));
    in.focals = std::make_shared<EmbeddingTable>(std::move(s.focal_embeddings));
  } else if (config.dataset_dir) {
    in.dataset = load_dataset(*config.dataset_dir);
    const fs::path emb = *config.dataset_dir / kEmbeddingsFile;
    if (fs::exists(emb)) {
      const std::size_t dim = config.embedding_dim ? config.embedding_dim : infer_dim(emb);
      in.refs = std::make_shared<EmbeddingTable>(load_embeddings(emb, dim));
      const fs::path femb = *config.dataset_dir / kFocalEmbeddingsFile;
      if (fs::exists(femb)) in.focals = std::make_shared<EmbeddingTable>(load_embeddings(femb, dim));
    }
  } else {
    throw ValidationError("config needs either dataset_dir or synth");
  }
  ensure_baselines(in.dataset, derive_seed(config.seed, "baselines"));
  const auto gens = in.dataset.generators();
  if (gens.empty()) throw ValidationError("dataset has no generated reference lists");
  in.generator = config.generator.empty() ? gens.front() : config.generator;
  if (std::find(gens.begin(), gens.end(), in.generator) == gens.end())
    throw ValidationError("dataset has no lists of generator '" + in.generator + "'");
  return in;
}

PairSet all_pairs(const Dataset& dataset, const std::string& generator, std::uint64_t seed) {
  PairBuildOptions po;
  po.generator = generator;
  po.seed = derive_seed(seed, "pairs");
  po.baseline_kinds = {BaselineKind::FieldShuffle, BaselineKind::SubfieldShuffle, BaselineKind::TemporalFieldShuffle};
  return build_pairs(dataset, po);
}

PipelineOutputs run_pipeline(const PipelineConfig& config) {
  Inputs in = load_inputs(config);
  const Dataset& dataset = in.dataset;
  const auto& refs = in.refs;
  const auto& focals = in.focals;
  const std::string& generator = in.generator;
  PairSet pairs = all_pairs(dataset, generator, config.seed);
  FeatureStore store(pairs, refs, focals);

  RunOptions ro;
  ro.seeds = config.seeds;
  ro.strata = field_strata(dataset);
  ro.forest.n_trees = config.n_trees;
  ro.gnn = config.gnn;

  std::vector<std::string> tasks = config.tasks;
  if (tasks.empty()) {
    tasks = {"gt-vs-gen/structural/rf", "gt-vs-base:field/structural/rf", "gen-vs-base:field/structural/rf"};
    if (refs)
      for (auto t : {"gt-vs-gen/embedding/rf", "gt-vs-base:field/embedding/rf", "gen-vs-base:field/embedding/rf"})
        tasks.push_back(t);
  }

  PipelineOutputs out;
  out.dir = config.out_dir / config.run_id;
  for (const auto& label : tasks) {
    TaskSpec spec = parse_task_label(label, generator);
    out.reports.push_back(run_task(spec, store, ro).report);
  }

  if (config.cross_generator) {
    PairSet pairs_b = all_pairs(dataset, *config.cross_generator, config.seed);
    FeatureStore store_b(pairs_b, refs, focals);
    for (const auto& label : tasks) {
      TaskSpec spec = parse_task_label(label, generator);
      if (spec.class_b.kind() != Source::Kind::Generated) continue;
      out.reports.push_back(cross_generator(spec, store, store_b, *config.cross_generator, ro).report);
    }
  }

  write_report_csv(out.dir / "report.csv", out.reports);
  write_summary_csv(out.dir / "summary.csv", out.reports);
  fs::create_directories(out.dir);
  std::ofstream sat(out.dir / "saturation.csv", std::ios::binary);
  sat << "task,fraction,w1\n";
  for (const auto& r : out.reports) {
    if (r.accuracy.size() < 5) continue;
    for (const auto& p : saturation_curve(r.accuracy, default_fractions(), config.saturation_perms,
                                          derive_seed(config.seed, "saturation/" + r.task)))
      sat << r.task << ',' << format_number(p.fraction) << ',' << format_number(p.w1) << '\n';
  }
  return out;
}

}  // namespace citegraph
