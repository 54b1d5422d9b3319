#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citegraph/forest.hpp"
#include "citegraph/graph.hpp"
#include "citegraph/saturation.hpp"
#include "citegraph/semantic.hpp"
#include "citegraph/splits.hpp"
#include "citegraph/structural.hpp"
#include "citegraph/synth.hpp"
#include "citegraph/train.hpp"

namespace citegraph {

enum class FeatureMode { StructuralAggregate, StructuralNode5, EmbeddingSum, EmbeddingNode };
enum class ModelKind { RF, GCN, GraphSAGE, GAT, GIN };

// "structural" | "structural-node" | "embedding" | "embedding-node"
std::string_view to_string(FeatureMode mode);
FeatureMode parse_feature_mode(std::string_view text);
// "rf" | "gcn" | "sage" | "gat" | "gin"
std::string_view to_string(ModelKind model);
ModelKind parse_model_kind(std::string_view text);
Arch arch_of(ModelKind model);
bool is_node_mode(FeatureMode mode);
bool is_embedding_mode(FeatureMode mode);

struct TaskSpec {
  std::string name;  // gt-vs-gen, gt-vs-base:<kind>, gen-vs-base:<kind>
  Source class_a = Source::ground_truth();  // label 0
  Source class_b = Source::ground_truth();  // label 1
  FeatureMode mode = FeatureMode::StructuralAggregate;
  ModelKind model = ModelKind::RF;

  // name/mode/model, used as the task column of reports.
  std::string label() const;
};

// The baseline kind defaults to field when omitted.
TaskSpec make_task(std::string_view name, const std::string& generator, FeatureMode mode, ModelKind model);
// "<name>/<mode>/<model>"
TaskSpec parse_task_label(std::string_view label, const std::string& generator);

// Lazily computed per-graph features of one pair set.
class FeatureStore {
 public:
  FeatureStore(const PairSet& pairs, std::shared_ptr<const EmbeddingTable> refs = nullptr,
               std::shared_ptr<const EmbeddingTable> focals = nullptr, EigenvectorOptions eig = {});

  const PairSet& pairs() const noexcept { return pairs_; }
  const CitationGraph* graph(const PaperKey& focal, const Source& source) const;
  // Focal ids that own a graph of both sources, sorted.
  std::vector<PaperKey> focals_with(const Source& a, const Source& b) const;

  const std::vector<double>& vector_features(const PaperKey& focal, const Source& source, FeatureMode mode);
  GraphSample node_sample(const PaperKey& focal, const Source& source, FeatureMode mode, int label);

  const EmbeddingTable* ref_table() const { return refs_.get(); }
  const EmbeddingTable* focal_table() const { return focals_ ? focals_.get() : refs_.get(); }

 private:
  const PairSet& pairs_;
  std::shared_ptr<const EmbeddingTable> refs_, focals_;
  EigenvectorOptions eig_;
  std::map<std::string, std::vector<double>> vectors_;
  std::map<std::string, std::vector<double>> node_structural_;
};

struct RunOptions {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  SplitPlan plan;  // seed is replaced per run
  std::map<PaperKey, std::string> strata;  // focal -> top field
  ForestConfig forest;
  GnnConfig gnn;  // arch is taken from the task
  // Label-permutation control: training labels are shuffled, test labels kept.
  bool permute_labels = false;
};

struct TaskResult {
  ClassificationReport report;
  std::optional<Forest> last_forest;
  std::optional<TrainedModel> last_model;
};

TaskResult run_task(const TaskSpec& task, FeatureStore& store, const RunOptions& options);

// Two graphs per focal (class_a labelled 0, class_b labelled 1) for node modes.
std::vector<GraphSample> task_samples(const TaskSpec& task, FeatureStore& store, const std::vector<PaperKey>& focals);

struct SweepOutcome {
  SweepResult sweep;
  ClassificationReport retrains;  // best configuration retrained per seed of the options
};

// Random search on the split of the first seed, then retraining of the best
// configuration with every seed of the options.
SweepOutcome sweep_task(const TaskSpec& task, FeatureStore& store, const RunOptions& options,
                        const SearchSpace& space, std::size_t n_trials, std::uint64_t seed,
                        const SweepOptions& sweep_options = {});

struct CrossResult {
  ClassificationReport report;
  std::size_t excluded = 0;  // test focals lacking a graph of the second generator
};

// Trains on class_a vs the first generator and tests with the test fold's
// generated graphs replaced by those of the second generator.
CrossResult cross_generator(const TaskSpec& task, FeatureStore& train_store, FeatureStore& swap_store,
                            const std::string& swap_generator, const RunOptions& options);

// Focal id -> top field for stratified splits.
std::map<PaperKey, std::string> field_strata(const Dataset& dataset);

// i.i.d. normal tables over every id of the given tables.
std::pair<std::shared_ptr<EmbeddingTable>, std::shared_ptr<EmbeddingTable>> random_tables(
    const EmbeddingTable& refs, const EmbeddingTable* focals, std::uint64_t seed);

// Linear projection of both tables onto the top-k components fitted on the
// reference table (centering is used only for the fit).
std::pair<std::shared_ptr<EmbeddingTable>, std::shared_ptr<EmbeddingTable>> pca_tables(
    const EmbeddingTable& refs, const EmbeddingTable* focals, std::size_t k);

// task,mean_accuracy,std_accuracy,mean_f1,std_f1,runs,train,val,test
void write_summary_csv(const std::filesystem::path& path, const std::vector<ClassificationReport>& reports);

// Named hyperparameter presets (best configurations reported for each
// architecture and feature mode): "<task>/<mode>/<arch>" with task
// gt-vs-gen or gen-vs-base.
std::optional<GnnConfig> gnn_preset(std::string_view task, FeatureMode mode, Arch arch);

// ---------------------------------------------------------------------------

struct PipelineConfig {
  std::string run_id = "run";
  std::filesystem::path out_dir = "out";
  // Either a dataset directory or synthetic parameters.
  std::optional<std::filesystem::path> dataset_dir;
  std::optional<SynthParams> synth;
  std::string generator;  // empty: first generator of the dataset
  std::optional<std::string> cross_generator;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  std::vector<std::string> tasks;  // task labels
  int n_trees = 100;
  GnnConfig gnn;
  int saturation_perms = 500;
  std::size_t embedding_dim = 0;  // 0: infer from the file

  static PipelineConfig from_json(const std::string& text);
  static PipelineConfig from_file(const std::filesystem::path& path);
};

struct Inputs {
  Dataset dataset;
  std::shared_ptr<EmbeddingTable> refs, focals;  // empty without embeddings
  std::string generator;                          // resolved generator name
};

// Adds baseline lists of every kind missing from the dataset.
void ensure_baselines(Dataset& dataset, std::uint64_t seed);

// Loads the dataset directory (or generates the synthetic dataset) and any
// embeddings found next to it.
Inputs load_inputs(const PipelineConfig& config);
// Pairs with every baseline kind, keyed by the config seed.
PairSet all_pairs(const Dataset& dataset, const std::string& generator, std::uint64_t seed);

struct PipelineOutputs {
  std::vector<ClassificationReport> reports;
  std::filesystem::path dir;
};

// Runs every configured task and writes report.csv, summary.csv and
// saturation.csv under <out_dir>/<run_id>/.
PipelineOutputs run_pipeline(const PipelineConfig& config);

}  // namespace citegraph
