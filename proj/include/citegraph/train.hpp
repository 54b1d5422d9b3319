#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "citegraph/forest.hpp"
#include "citegraph/gnn.hpp"

namespace citegraph {

struct GnnConfig {
  Arch arch = Arch::GCN;
  std::size_t hidden_dim = 64;
  std::size_t n_layers = 2;
  double learning_rate = 1e-3;
  double dropout = 0.0;
  double weight_decay = 0.0;
  std::size_t batch_size = 8000;  // graphs; capped at the training set size
  int max_epochs = 500;
  int patience = 15;
  std::uint64_t seed = 0;

  std::string to_json() const;
};

struct EpochTrace {
  int epoch = 0;
  double train_loss = 0;
  double val_accuracy = 0;
  double val_f1 = 0;
};

struct TrainedModel {
  GnnModel model;  // parameters of the best validation epoch
  std::vector<EpochTrace> trace;
  int best_epoch = 0;
  double best_val_accuracy = 0;
  double best_val_f1 = 0;
  int epochs_run = 0;
};

// Adam with decoupled weight decay, early stopping on validation accuracy.
// Throws TrainingFailure when the loss stops being finite.
TrainedModel train_gnn(const GnnConfig& config, const std::vector<GraphSample>& train,
                       const std::vector<GraphSample>& val);

// Prediction rule: logit > 0 is class 1.
Labels predict_labels(const GnnModel& model, const BatchedGraphs& batch);
Metrics evaluate_model(const GnnModel& model, const std::vector<GraphSample>& graphs);

struct SearchSpace {
  std::vector<std::size_t> hidden_dims = {32, 64, 128};
  std::vector<std::size_t> layer_counts = {1, 2, 3, 4};
  double lr_lo = 1e-4, lr_hi = 1e-2;
  double dropout_lo = 0.0, dropout_hi = 0.5;
  double wd_lo = 0.0, wd_hi = 0.01;
  std::vector<std::size_t> batch_sizes = {8000, 10000, 13000};
};

// Categorical fields uniform over their sets, continuous fields uniform.
GnnConfig sample_config(const SearchSpace& space, Arch arch, Rng& rng);

struct TrialResult {
  std::size_t index = 0;
  GnnConfig config;
  bool ok = false;
  std::string error;
  double val_accuracy = 0;
  double val_f1 = 0;
  int epochs = 0;
};

struct SweepResult {
  std::string task;
  Arch arch = Arch::GCN;
  std::vector<TrialResult> trials;
  std::size_t best = 0;
  TrainedModel best_model;
  Metrics test;
};

struct SweepOptions {
  int max_epochs = 500;
  int patience = 15;
  unsigned threads = 1;
};

// Throws NoSuccessfulTrialError when every trial fails.
SweepResult random_search(const std::string& task, Arch arch, const SearchSpace& space, std::size_t n_trials,
                          std::uint64_t seed, const std::vector<GraphSample>& train,
                          const std::vector<GraphSample>& val, const std::vector<GraphSample>& test,
                          const SweepOptions& options = {});

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepResult>& sweeps);

}  // namespace citegraph
