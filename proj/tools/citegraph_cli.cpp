#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>

#include "citegraph/baselines.hpp"
#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"
#include "citegraph/pipeline.hpp"
#include "citegraph/runtime.hpp"

using namespace citegraph;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string data;
  std::string out;
  std::string run_id;
  std::string generator;
  std::optional<std::uint64_t> seed;
};

PipelineConfig resolve(const Common& c) {
  PipelineConfig cfg;
  if (!c.config_path.empty()) cfg = PipelineConfig::from_file(c.config_path);
  if (!c.data.empty()) {
    cfg.dataset_dir = c.data;
    cfg.synth.reset();
  }
  if (!c.out.empty()) cfg.out_dir = c.out;
  if (!c.run_id.empty()) cfg.run_id = c.run_id;
  if (!c.generator.empty()) cfg.generator = c.generator;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path run_dir(const PipelineConfig& cfg) {
  fs::path d = cfg.out_dir / cfg.run_id;
  fs::create_directories(d);
  return d;
}

std::vector<std::uint64_t> seed_list(std::size_t n) {
  std::vector<std::uint64_t> s;
  for (std::size_t i = 0; i < n; ++i) s.push_back(i);
  return s;
}

void print_summary(const ClassificationReport& r) {
  auto a = r.accuracy_summary(), f = r.f1_summary();
  std::cout << r.task << "  accuracy " << format_number(a.mean) << " +- " << format_number(a.std) << "  f1 "
            << format_number(f.mean) << " +- " << format_number(f.std) << "  (" << r.accuracy.size() << " runs)\n";
}

RunOptions run_options(const PipelineConfig& cfg, const Dataset& dataset) {
  RunOptions ro;
  ro.seeds = cfg.seeds;
  ro.strata = field_strata(dataset);
  ro.forest.n_trees = cfg.n_trees;
  ro.gnn = cfg.gnn;
  return ro;
}

}  // namespace

int main(int argc, char** argv) {
  citegraph::tune_allocator();
  CLI::App app{"Paired citation graphs, structural and semantic features, and graph classifiers"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON config file")->check(CLI::ExistingFile);
  app.add_option("--data", common.data, "dataset directory");
  app.add_option("--out", common.out, "output root (default out)");
  app.add_option("--run-id", common.run_id, "run directory name (default run)");
  app.add_option("--generator", common.generator, "generator name (default: first in the dataset)");
  app.add_option("--seed", common.seed, "root seed");

  auto* ingest = app.add_subcommand("ingest", "validate a dataset directory and print its counts");
  std::string ingest_dir;
  ingest->add_option("dir", ingest_dir, "dataset directory")->required();

  auto* graphs = app.add_subcommand("build-graphs", "build paired graphs and write graphs.jsonl");

  auto* baseline = app.add_subcommand("baseline", "write a baseline reference-list file");
  std::string kind_text = "field";
  std::uint64_t baseline_seed = 0;
  bool include_self = false;
  baseline->add_option("--kind", kind_text)->check(CLI::IsMember({"field", "subfield", "temporal"}));
  baseline->add_option("--seed", baseline_seed);
  baseline->add_flag("--include-self", include_self, "let a focal's own id enter its candidate pool");

  auto* features = app.add_subcommand("features", "write per-graph feature tables");
  std::string feature_mode = "structural";
  features->add_option("--mode", feature_mode)->check(CLI::IsMember({"structural", "semantic"}));

  auto* classify = app.add_subcommand("classify-rf", "random forest over graph-level features");
  std::string rf_task = "gt-vs-gen", rf_mode = "structural";
  std::size_t rf_seeds = 10;
  std::optional<int> rf_trees;
  bool rf_permute = false;
  classify->add_option("--task", rf_task, "gt-vs-gen | gt-vs-base[:kind] | gen-vs-base[:kind]");
  classify->add_option("--mode", rf_mode)->check(CLI::IsMember({"structural", "embedding"}));
  classify->add_option("--seeds", rf_seeds);
  classify->add_option("--trees", rf_trees);
  classify->add_flag("--permute-labels", rf_permute, "label-permutation control");

  auto* train = app.add_subcommand("train-gnn", "train a graph neural network");
  std::string gnn_arch = "gcn", gnn_task = "gt-vs-gen", gnn_mode = "embedding-node";
  std::size_t gnn_seeds = 5;
  bool use_preset = false;
  std::optional<int> gnn_epochs;
  train->add_option("--arch", gnn_arch)->check(CLI::IsMember({"gcn", "sage", "gat", "gin"}));
  train->add_option("--task", gnn_task);
  train->add_option("--mode", gnn_mode)->check(CLI::IsMember({"structural-node", "embedding-node"}));
  train->add_option("--seeds", gnn_seeds);
  train->add_option("--max-epochs", gnn_epochs);
  train->add_flag("--preset", use_preset, "use the tuned hyperparameters of this task, mode and arch");

  auto* sweep = app.add_subcommand("sweep", "random hyperparameter search");
  std::size_t trials = 20;
  std::string sweep_arch = "gcn", sweep_name = "gt-vs-gen", sweep_mode = "embedding-node";
  unsigned sweep_threads = 1;
  std::size_t sweep_retrains = 5;
  sweep->add_option("--trials", trials);
  sweep->add_option("--arch", sweep_arch)->check(CLI::IsMember({"gcn", "sage", "gat", "gin"}));
  sweep->add_option("--task", sweep_name);
  sweep->add_option("--mode", sweep_mode)->check(CLI::IsMember({"structural-node", "embedding-node"}));
  sweep->add_option("--threads", sweep_threads);
  sweep->add_option("--retrains", sweep_retrains);

  auto* saturation = app.add_subcommand("saturation", "Wasserstein-1 saturation curve of report.csv runs");
  std::string sat_input;
  int sat_perms = 500;
  saturation->add_option("--input", sat_input, "report.csv (default: the run directory's)");
  saturation->add_option("--perms", sat_perms);

  auto* synth = app.add_subcommand("synth", "write a synthetic dataset directory");
  std::size_t synth_focals = 2000;
  double synth_drift = SynthParams{}.drift;
  std::string synth_dir;
  synth->add_option("--focals", synth_focals);
  synth->add_option("--drift", synth_drift);
  synth->add_option("--dir", synth_dir, "target directory (default <out>/<run-id>/dataset)");

  auto* report = app.add_subcommand("report", "run every configured task and write the report tables");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      Dataset d = load_dataset(ingest_dir);
      auto c = d.counts();
      nlohmann::json j = {{"papers", c.papers},
                          {"edges", c.edges},
                          {"lists", c.lists},
                          {"focals", d.focals().size()},
                          {"generators", d.generators()},
                          {"metadata_missing", d.unresolved_refs().size()}};
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    PipelineConfig cfg = resolve(common);

    if (*synth) {
      SynthParams p = cfg.synth.value_or(SynthParams{});
      p.n_focals = synth_focals;
      p.drift = synth_drift;
      p.seed = cfg.seed;
      SynthDataset s = synth_dataset(p);
      fs::path dir = synth_dir.empty() ? run_dir(cfg) / "dataset" : fs::path(synth_dir);
      write_dataset(dir, s.dataset);
      write_embeddings(dir / kEmbeddingsFile, s.ref_embeddings);
      write_embeddings(dir / kFocalEmbeddingsFile, s.focal_embeddings);
      std::cout << "wrote " << s.dataset.focals().size() << " focals to " << dir.string() << '\n';
      return 0;
    }

    if (*saturation) {
      fs::path in = sat_input.empty() ? cfg.out_dir / cfg.run_id / "report.csv" : fs::path(sat_input);
      std::ifstream f(in);
      if (!f) throw ValidationError("cannot open '" + in.string() + "'");
      std::map<std::string, std::vector<double>> runs;
      std::string line;
      std::getline(f, line);
      while (std::getline(f, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != 4) throw ParseError(in.string(), 0, "row", "expected task,seed,accuracy,f1");
        runs[cells[0]].push_back(parse_number(cells[2]));
      }
      fs::path dir = run_dir(cfg);
      std::ofstream out(dir / "saturation.csv", std::ios::binary);
      out << "task,fraction,w1\n";
      for (const auto& [task, acc] : runs) {
        if (acc.size() < 5) {
          std::cerr << "skipping " << task << ": fewer than 5 runs\n";
          continue;
        }
        for (const auto& p : saturation_curve(acc, default_fractions(), sat_perms, derive_seed(cfg.seed, "saturation/" + task)))
          out << task << ',' << format_number(p.fraction) << ',' << format_number(p.w1) << '\n';
      }
      std::cout << "wrote " << (dir / "saturation.csv").string() << '\n';
      return 0;
    }

    if (*report) {
      auto outputs = run_pipeline(cfg);
      for (const auto& r : outputs.reports) print_summary(r);
      std::cout << "wrote " << outputs.dir.string() << '\n';
      return 0;
    }

    Inputs in = load_inputs(cfg);
    const fs::path dir = run_dir(cfg);

    if (*baseline) {
      ShuffleOptions so;
      so.exclude_self = !include_self;
      const BaselineKind kind = parse_baseline_kind(kind_text);
      auto lists = field_shuffle(in.dataset, kind, baseline_seed, so);
      std::vector<ReferenceList> flat;
      for (auto& [focal, l] : lists) flat.push_back(std::move(l));
      fs::path path = dir / ("reflists_baseline_" + std::string(to_string(kind)) + ".jsonl");
      write_reflists(path, flat);
      std::cout << "wrote " << flat.size() << " lists to " << path.string() << '\n';
      return 0;
    }

    PairSet pairs = all_pairs(in.dataset, in.generator, cfg.seed);
    FeatureStore store(pairs, in.refs, in.focals);

    if (*graphs) {
      std::vector<const CitationGraph*> all;
      for (const auto& p : pairs.pairs) {
        all.push_back(&p.ground_truth);
        all.push_back(&p.generated);
        for (const auto& b : p.baselines) all.push_back(&b);
      }
      write_graphs(dir / "graphs.jsonl", all);
      std::cout << "wrote " << all.size() << " graphs (" << pairs.dropped.size() << " pairs dropped, "
                << pairs.size_anomalies.size() << " size anomalies)\n";
      return 0;
    }

    if (*features) {
      std::vector<const CitationGraph*> all;
      for (const auto& p : pairs.pairs) {
        all.push_back(&p.ground_truth);
        all.push_back(&p.generated);
        for (const auto& b : p.baselines) all.push_back(&b);
      }
      if (feature_mode == "structural") {
        std::vector<StructuralRow> rows;
        for (const auto* g : all) rows.push_back({g->focal(), g->provenance().to_string(), aggregate(*g)});
        write_structural_csv(dir / "features_structural.csv", rows);
      } else {
        if (!in.refs) throw ValidationError("semantic features need embeddings.jsonl in the dataset directory");
        std::vector<SemanticRow> rows;
        std::vector<GraphEmbeddingRow> sums;
        for (const auto* g : all) {
          auto ge = graph_embedding(*g, *in.refs, store.focal_table());
          if (ge.coverage_warning) std::cerr << "low embedding coverage for " << g->focal() << '\n';
          rows.push_back({g->focal(), g->provenance().to_string(), alignment(ge), ge.coverage});
          sums.push_back({g->focal(), g->provenance().to_string(), ge.ref_sum});
        }
        write_semantic_csv(dir / "features_semantic.csv", rows);
        write_graph_embeddings(dir / "graph_embeddings.bin", sums);
      }
      std::cout << "wrote features of " << all.size() << " graphs\n";
      return 0;
    }

    RunOptions ro = run_options(cfg, in.dataset);

    if (*classify) {
      ro.seeds = seed_list(rf_seeds);
      if (rf_trees) ro.forest.n_trees = *rf_trees;
      ro.permute_labels = rf_permute;
      TaskSpec t = make_task(rf_task, in.generator, parse_feature_mode(rf_mode), ModelKind::RF);
      TaskResult r = run_task(t, store, ro);
      write_report_csv(dir / "report.csv", {r.report});
      write_summary_csv(dir / "summary.csv", {r.report});
      if (r.last_forest) write_forest(dir / "forest.json", *r.last_forest);
      print_summary(r.report);
      return 0;
    }

    if (*train) {
      ro.seeds = seed_list(gnn_seeds);
      const FeatureMode mode = parse_feature_mode(gnn_mode);
      const ModelKind model = parse_model_kind(gnn_arch);
      TaskSpec t = make_task(gnn_task, in.generator, mode, model);
      if (use_preset) {
        auto base = t.name.substr(0, t.name.find(':'));
        auto preset = gnn_preset(base, mode, arch_of(model));
        if (!preset) throw ValidationError("no preset for task '" + base + "'");
        preset->max_epochs = ro.gnn.max_epochs;
        preset->patience = ro.gnn.patience;
        ro.gnn = *preset;
      }
      if (gnn_epochs) ro.gnn.max_epochs = *gnn_epochs;
      TaskResult r = run_task(t, store, ro);
      write_report_csv(dir / "report.csv", {r.report});
      write_summary_csv(dir / "summary.csv", {r.report});
      if (r.last_model) {
        GnnConfig used = ro.gnn;
        used.arch = arch_of(model);
        write_model(dir / "model.bin", r.last_model->model, used.to_json());
      }
      print_summary(r.report);
      return 0;
    }

    if (*sweep) {
      ro.seeds = seed_list(sweep_retrains);
      TaskSpec t = make_task(sweep_name, in.generator, parse_feature_mode(sweep_mode), parse_model_kind(sweep_arch));
      SweepOptions so;
      so.max_epochs = cfg.gnn.max_epochs;
      so.patience = cfg.gnn.patience;
      so.threads = sweep_threads;
      SweepOutcome o = sweep_task(t, store, ro, SearchSpace{}, trials, cfg.seed, so);
      write_sweep_csv(dir / "sweep.csv", {o.sweep});
      write_model(dir / "model.bin", o.sweep.best_model.model, o.sweep.trials[o.sweep.best].config.to_json());
      write_report_csv(dir / "report.csv", {o.retrains});
      write_summary_csv(dir / "summary.csv", {o.retrains});
      std::cout << "best trial " << o.sweep.best << " val accuracy "
                << format_number(o.sweep.trials[o.sweep.best].val_accuracy) << '\n';
      print_summary(o.retrains);
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
