#include "citegraph/train.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "citegraph/csv.hpp"
#include "citegraph/errors.hpp"

namespace citegraph {

using nlohmann::json;

std::string GnnConfig::to_json() const {
  json j;
  j["arch"] = std::string(to_string(arch));
  j["hidden_dim"] = hidden_dim;
  j["n_layers"] = n_layers;
  j["learning_rate"] = learning_rate;
  j["dropout"] = dropout;
  j["weight_decay"] = weight_decay;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["seed"] = seed;
  return j.dump();
}

Labels predict_labels(const GnnModel& model, const BatchedGraphs& batch) {
  Labels out;
  for (double z : model.logits(batch)) out.push_back(z > 0 ? 1 : 0);
  return out;
}

Metrics evaluate_model(const GnnModel& model, const std::vector<GraphSample>& graphs) {
  BatchedGraphs batch = make_batch(graphs);
  return evaluate(batch.labels, predict_labels(model, batch));
}

namespace {

class Adam {
 public:
  Adam(const std::vector<Matrix>& params, double lr, double wd) : lr_(lr), wd_(wd) {
    for (const auto& p : params) {
      m_.push_back(Matrix::Zero(p.rows(), p.cols()));
      v_.push_back(Matrix::Zero(p.rows(), p.cols()));
    }
  }

  void step(std::vector<Matrix>& params, const std::vector<const Matrix*>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(kBeta1, t_);
    const double c2 = 1.0 - std::pow(kBeta2, t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
      const Matrix& g = *grads[i];
      m_[i] = kBeta1 * m_[i] + (1 - kBeta1) * g;
      v_[i] = kBeta2 * v_[i] + (1 - kBeta2) * g.cwiseProduct(g);
      auto update = (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + kEps);
      params[i].array() -= lr_ * (update + wd_ * params[i].array());
    }
  }

 private:
  static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  double lr_, wd_;
  int t_ = 0;
  std::vector<Matrix> m_, v_;
};

void check_config(const GnnConfig& c) {
  if (c.hidden_dim == 0 || c.n_layers == 0) throw ValidationError("hidden_dim and n_layers must be positive");
  if (!(c.learning_rate >= 0)) throw ValidationError("learning_rate must be nonnegative");
  if (!(c.dropout >= 0 && c.dropout < 1)) throw ValidationError("dropout must lie in [0, 1)");
  if (!(c.weight_decay >= 0)) throw ValidationError("weight_decay must be nonnegative");
  if (c.batch_size == 0) throw ValidationError("batch_size must be positive");
  if (c.max_epochs < 1 || c.patience < 1) throw ValidationError("max_epochs and patience must be positive");
}

}  // namespace

TrainedModel train_gnn(const GnnConfig& config, const std::vector<GraphSample>& train,
                       const std::vector<GraphSample>& val) {
  check_config(config);
  if (train.empty() || val.empty()) throw ValidationError("training and validation splits must be nonempty");
  const auto in_dim = static_cast<std::size_t>(train.front().features.cols());

  TrainedModel out;
  GnnModel model({config.arch, in_dim, config.hidden_dim, config.n_layers}, derive_seed(config.seed, "gnn/model"));
  out.model = model;
  Adam adam(model.params(), config.learning_rate, config.weight_decay);
  Rng order_rng(derive_seed(config.seed, "gnn/order"));
  Rng drop_rng(derive_seed(config.seed, "gnn/dropout"));

  const BatchedGraphs val_batch = make_batch(val);
  const bool full_batch = config.batch_size >= train.size();
  BatchedGraphs full;
  if (full_batch) full = make_batch(train);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);

  double best = -1;
  int since = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::vector<BatchedGraphs> local;
    if (!full_batch) {
      order_rng.shuffle(order);
      for (std::size_t b = 0; b < order.size(); b += config.batch_size) {
        std::vector<const GraphSample*> items;
        for (std::size_t i = b; i < std::min(order.size(), b + config.batch_size); ++i) items.push_back(&train[order[i]]);
        local.push_back(make_batch(items));
      }
    }
    const std::size_t n_batches = full_batch ? 1 : local.size();
    double loss_sum = 0;
    for (std::size_t bi = 0; bi < n_batches; ++bi) {
      const BatchedGraphs& batch = full_batch ? full : local[bi];
      Tape tape;
      std::vector<Var> vars;
      for (const auto& p : model.params()) vars.push_back(tape.variable(p));
      ForwardOptions fo;
      fo.dropout = config.dropout;
      fo.rng = &drop_rng;
      Var loss = bce_with_logits(forward(model, tape, vars, batch, fo), batch.labels);
      const double lv = loss.value()(0, 0);
      if (!std::isfinite(lv)) throw TrainingFailure("loss is not finite", epoch);
      tape.backward(loss);
      std::vector<const Matrix*> grads;
      for (const auto& v : vars) grads.push_back(&v.grad());
      adam.step(model.params(), grads);
      loss_sum += lv * static_cast<double>(batch.graph_count);
    }
    for (const auto& p : model.params())
      if (!p.allFinite()) throw TrainingFailure("parameters are not finite", epoch);

    Metrics vm = evaluate(val_batch.labels, predict_labels(model, val_batch));
    out.trace.push_back({epoch, loss_sum / static_cast<double>(train.size()), vm.accuracy, vm.f1});
    out.epochs_run = epoch;
    if (vm.accuracy > best) {
      best = vm.accuracy;
      out.best_epoch = epoch;
      out.best_val_accuracy = vm.accuracy;
      out.best_val_f1 = vm.f1;
      out.model = model;
      since = 0;
    } else if (++since >= config.patience) {
      break;
    }
  }
  return out;
}

GnnConfig sample_config(const SearchSpace& space, Arch arch, Rng& rng) {
  auto pick = [&](const std::vector<std::size_t>& v) {
    if (v.empty()) throw ValidationError("empty categorical search dimension");
    return v[rng.uniform_index(v.size())];
  };
  GnnConfig c;
  c.arch = arch;
  c.hidden_dim = pick(space.hidden_dims);
  c.n_layers = pick(space.layer_counts);
  c.learning_rate = rng.uniform(space.lr_lo, space.lr_hi);
  c.dropout = rng.uniform(space.dropout_lo, space.dropout_hi);
  c.weight_decay = rng.uniform(space.wd_lo, space.wd_hi);
  c.batch_size = pick(space.batch_sizes);
  return c;
}

SweepResult random_search(const std::string& task, Arch arch, const SearchSpace& space, std::size_t n_trials,
                          std::uint64_t seed, const std::vector<GraphSample>& train,
                          const std::vector<GraphSample>& val, const std::vector<GraphSample>& test,
                          const SweepOptions& options) {
  if (n_trials < 1) throw ValidationError("n_trials must be at least 1");
  SweepResult res;
  res.task = task;
  res.arch = arch;
  res.trials.resize(n_trials);
  std::vector<TrainedModel> models(n_trials);

  Rng sampler(derive_seed(seed, "sweep/" + std::string(to_string(arch)) + "/" + task));
  for (std::size_t i = 0; i < n_trials; ++i) {
    res.trials[i].index = i;
    res.trials[i].config = sample_config(space, arch, sampler);
    res.trials[i].config.max_epochs = options.max_epochs;
    res.trials[i].config.patience = options.patience;
    res.trials[i].config.seed = derive_seed(seed, "sweep/trial", i);
  }
  auto run = [&](std::size_t i) {
    auto& t = res.trials[i];
    try {
      models[i] = train_gnn(t.config, train, val);
      t.ok = true;
      t.val_accuracy = models[i].best_val_accuracy;
      t.val_f1 = models[i].best_val_f1;
      t.epochs = models[i].epochs_run;
    } catch (const TrainingFailure& e) {
      t.error = e.what();
      t.epochs = e.epoch();
    }
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(n_trials)));
  if (threads == 1) {
    for (std::size_t i = 0; i < n_trials; ++i) run(i);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n_trials; i += threads) run(i);
      });
    for (auto& th : pool) th.join();
  }

  bool found = false;
  for (std::size_t i = 0; i < n_trials; ++i) {
    if (!res.trials[i].ok) continue;
    if (!found || res.trials[i].val_accuracy > res.trials[res.best].val_accuracy) {
      res.best = i;
      found = true;
    }
  }
  if (!found) throw NoSuccessfulTrialError("every trial of the " + std::string(to_string(arch)) + " sweep failed");
  res.best_model = std::move(models[res.best]);
  if (!test.empty()) res.test = evaluate_model(res.best_model.model, test);
  return res;
}

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepResult>& sweeps) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << "arch,task,trial,hidden_dim,n_layers,learning_rate,dropout,weight_decay,batch_size,val_accuracy,val_f1,"
         "epochs,status\n";
  for (const auto& s : sweeps)
    for (const auto& t : s.trials) {
      const auto& c = t.config;
      out << to_string(s.arch) << ',' << s.task << ',' << t.index << ',' << c.hidden_dim << ',' << c.n_layers << ','
          << format_number(c.learning_rate) << ',' << format_number(c.dropout) << ','
          << format_number(c.weight_decay) << ',' << c.batch_size << ',' << format_number(t.val_accuracy) << ','
          << format_number(t.val_f1) << ',' << t.epochs << ',' << (t.ok ? "ok" : "failed") << '\n';
    }
}

}  // namespace citegraph
