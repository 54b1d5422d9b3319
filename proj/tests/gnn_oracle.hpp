#pragma once

// Loop-based GNN forward pass and finite-difference gradient checks.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "citegraph/gnn.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const citegraph::Matrix& m) {
  Mat out(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  return out;
}

inline Mat mat_mul(const Mat& a, const Mat& b) {
  Mat out(a.size(), std::vector<double>(b[0].size(), 0.0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) out[i][j] += a[i][k] * b[k][j];
  return out;
}

inline void relu_inplace(Mat& m) {
  for (auto& r : m)
    for (auto& x : r) x = std::max(0.0, x);
}

inline Mat gnn_layer(citegraph::Arch arch, const Mat& h, const citegraph::GraphSample& g, const std::vector<Mat>& p) {
  const std::size_t n = g.nodes;
  std::vector<std::vector<std::size_t>> nb(n);
  for (auto [a, b] : g.edges) {
    nb[a].push_back(b);
    nb[b].push_back(a);
  }
  const std::size_t d = h[0].size();
  Mat out;
  switch (arch) {
    case citegraph::Arch::GCN: {
      Mat wh = mat_mul(h, p[0]);
      out.assign(n, std::vector<double>(wh[0].size(), 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        const double di = double(nb[i].size() + 1);
        std::vector<std::size_t> js = nb[i];
        js.push_back(i);
        for (auto j : js) {
          const double dj = double(nb[j].size() + 1);
          for (std::size_t c = 0; c < wh[0].size(); ++c) out[i][c] += wh[j][c] / std::sqrt(di * dj);
        }
      }
      break;
    }
    case citegraph::Arch::GraphSAGE: {
      Mat cat(n, std::vector<double>(2 * d, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) cat[i][c] = h[i][c];
        for (auto j : nb[i])
          for (std::size_t c = 0; c < d; ++c) cat[i][d + c] += h[j][c] / double(nb[i].size());
      }
      out = mat_mul(cat, p[0]);
      break;
    }
    case citegraph::Arch::GAT: {
      Mat wh = mat_mul(h, p[0]);
      const std::size_t hd = wh[0].size();
      out.assign(n, std::vector<double>(hd, 0.0));
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> js = nb[i];
        js.push_back(i);
        std::vector<double> e;
        for (auto j : js) {
          double s = 0;
          for (std::size_t c = 0; c < hd; ++c) s += wh[i][c] * p[1][c][0] + wh[j][c] * p[2][c][0];
          e.push_back(s > 0 ? s : citegraph::kGatSlope * s);
        }
        const double mx = *std::max_element(e.begin(), e.end());
        double z = 0;
        for (auto& x : e) z += (x = std::exp(x - mx));
        for (std::size_t k = 0; k < js.size(); ++k)
          for (std::size_t c = 0; c < hd; ++c) out[i][c] += e[k] / z * wh[js[k]][c];
      }
      break;
    }
    case citegraph::Arch::GIN: {
      Mat zsum = h;
      for (std::size_t i = 0; i < n; ++i)
        for (auto j : nb[i])
          for (std::size_t c = 0; c < d; ++c) zsum[i][c] += h[j][c];
      Mat hid = mat_mul(zsum, p[0]);
      for (auto& r : hid)
        for (std::size_t c = 0; c < r.size(); ++c) r[c] += p[1][0][c];
      relu_inplace(hid);
      out = mat_mul(hid, p[2]);
      for (auto& r : out)
        for (std::size_t c = 0; c < r.size(); ++c) r[c] += p[3][0][c];
      break;
    }
  }
  relu_inplace(out);
  return out;
}

// One logit per graph, each graph processed on its own.
inline std::vector<double> gnn_logits(const citegraph::GnnModel& model, const std::vector<citegraph::GraphSample>& graphs) {
  std::vector<double> out;
  const auto& params = model.params();
  for (const auto& g : graphs) {
    Mat h = to_mat(g.features);
    for (std::size_t l = 0; l < model.shape().n_layers; ++l) {
      auto [b, e] = model.layer_params(l);
      std::vector<Mat> p;
      for (auto i = b; i < e; ++i) p.push_back(to_mat(params[i]));
      h = gnn_layer(model.shape().arch, h, g, p);
    }
    const auto& w = params[params.size() - 2];
    double logit = params.back()(0, 0);
    for (const auto& row : h)
      for (std::size_t c = 0; c < row.size(); ++c) logit += row[c] * w(static_cast<Eigen::Index>(c), 0);
    out.push_back(logit);
  }
  return out;
}

inline std::vector<citegraph::GraphSample> random_samples(std::size_t count, std::size_t dim, unsigned seed,
                                                          std::size_t max_nodes = 8) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<citegraph::GraphSample> out;
  for (std::size_t k = 0; k < count; ++k) {
    citegraph::GraphSample g;
    g.id = "g" + std::to_string(k);
    g.nodes = 2 + rng() % (max_nodes - 1);
    for (std::size_t i = 1; i < g.nodes; ++i) g.edges.emplace_back(0, int(i));
    for (std::size_t i = 1; i < g.nodes; ++i)
      for (std::size_t j = i + 1; j < g.nodes; ++j)
        if (rng() % 3 == 0) g.edges.emplace_back(int(i), int(j));
    g.features = citegraph::Matrix(static_cast<Eigen::Index>(g.nodes), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < g.features.size(); ++i) g.features.data()[i] = nd(rng);
    g.label = static_cast<int>(k % 2);
    out.push_back(std::move(g));
  }
  return out;
}

struct GradCheck {
  double max_rel_error = 0;
  std::size_t checked = 0;
};

inline double bce_loss(const citegraph::GnnModel& model, const citegraph::BatchedGraphs& batch) {
  auto logits = model.logits(batch);
  double s = 0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    s += std::max(z, 0.0) - z * batch.labels[i] + std::log1p(std::exp(-std::abs(z)));
  }
  return s / double(logits.size());
}

// Central differences on `coords` random parameter coordinates against the
// tape gradient of the mean BCE loss. Relative error uses max(|a|,|b|,1e-6)
// as the denominator.
inline GradCheck finite_difference_check(citegraph::GnnModel model, const citegraph::BatchedGraphs& batch,
                                         std::size_t coords, unsigned seed, double eps = 1e-4) {
  citegraph::Tape tape;
  std::vector<citegraph::Var> vars;
  for (const auto& p : model.params()) vars.push_back(tape.variable(p));
  auto logits = citegraph::forward(model, tape, vars, batch);
  auto loss = citegraph::bce_with_logits(logits, batch.labels);
  tape.backward(loss);
  std::vector<citegraph::Matrix> grads;
  for (const auto& v : vars) grads.push_back(v.grad());

  std::mt19937 rng(seed);
  std::vector<std::pair<std::size_t, Eigen::Index>> all;
  for (std::size_t p = 0; p < model.params().size(); ++p)
    for (Eigen::Index i = 0; i < model.params()[p].size(); ++i) all.emplace_back(p, i);
  std::shuffle(all.begin(), all.end(), rng);
  GradCheck out;
  for (std::size_t k = 0; k < std::min(coords, all.size()); ++k) {
    auto [p, i] = all[k];
    double& x = model.params()[p].data()[i];
    const double orig = x;
    x = orig + eps;
    const double up = bce_loss(model, batch);
    x = orig - eps;
    const double down = bce_loss(model, batch);
    x = orig;
    const double fd = (up - down) / (2 * eps);
    const double an = grads[p].data()[i];
    const double rel = std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6});
    out.max_rel_error = std::max(out.max_rel_error, rel);
    ++out.checked;
  }
  return out;
}

}  // namespace oracle
