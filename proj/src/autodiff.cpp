#include "citegraph/autodiff.hpp"

#include <cmath>
#include <limits>

#include "citegraph/errors.hpp"

namespace citegraph {

const Matrix& Var::value() const { return tape->value(id); }
const Matrix& Var::grad() const { return tape->grad(id); }

Var Tape::variable(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), true, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), false, {}});
  return {this, nodes_.size() - 1};
}

Var Tape::record(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> back) {
  ++ops_;
  nodes_.push_back({std::move(value), Matrix(), needs_grad, needs_grad ? std::move(back) : nullptr});
  return {this, nodes_.size() - 1};
}

const Matrix& Tape::grad(std::size_t id) const {
  if (!backward_done_) throw StateError("gradients are only available after backward()");
  return nodes_[id].grad;
}

Matrix& Tape::grad_mut(std::size_t id) { return nodes_[id].grad; }

void Tape::backward(Var loss) {
  if (loss.tape != this || loss.id >= nodes_.size()) throw StateError("loss is not recorded on this tape");
  if (ops_ == 0)
    throw StateError("backward() called before any forward operation was recorded");
  if (nodes_[loss.id].value.size() != 1) throw ValidationError("backward() needs a scalar loss");
  for (auto& n : nodes_)
    if (n.needs_grad) n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
  backward_done_ = true;
  if (!nodes_[loss.id].needs_grad) return;
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;)
    if (nodes_[i].back) nodes_[i].back(*this, i);
}

namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape) throw ValidationError("operands live on different tapes");
}

void shape_error(const char* op, Var a, Var b) {
  throw ValidationError(std::string(op) + ": shapes " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                        " and " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + " do not match");
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  Tape& t = *a.tape;
  Matrix v = a.value() * b.value();
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.record(std::move(v), ng, [a = a.id, b = b.id](Tape& t, std::size_t o) {
    const Matrix& g = t.grad_mut(o);
    if (t.needs_grad(a)) t.grad_mut(a).noalias() += g * t.value(b).transpose();
    if (t.needs_grad(b)) t.grad_mut(b).noalias() += t.value(a).transpose() * g;
  });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("add", a, b);
  Tape& t = *a.tape;
  Matrix v = a.value() + b.value();
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.record(std::move(v), ng, [a = a.id, b = b.id](Tape& t, std::size_t o) {
    const Matrix& g = t.grad_mut(o);
    if (t.needs_grad(a)) t.grad_mut(a) += g;
    if (t.needs_grad(b)) t.grad_mut(b) += g;
  });
}

Var mul(Var a, Var b) {
  require_same_tape(a, b);
  if (a.rows() != b.rows() || a.cols() != b.cols()) shape_error("mul", a, b);
  Tape& t = *a.tape;
  Matrix v = a.value().cwiseProduct(b.value());
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  return t.record(std::move(v), ng, [a = a.id, b = b.id](Tape& t, std::size_t o) {
    const Matrix& g = t.grad_mut(o);
    if (t.needs_grad(a)) t.grad_mut(a) += g.cwiseProduct(t.value(b));
    if (t.needs_grad(b)) t.grad_mut(b) += g.cwiseProduct(t.value(a));
  });
}

Var scale(Var a, double s) {
  Tape& t = *a.tape;
  Matrix v = a.value() * s;
  return t.record(std::move(v), t.needs_grad(a.id),
                  [a = a.id, s](Tape& t, std::size_t o) { t.grad_mut(a) += t.grad_mut(o) * s; });
}

Var add_row(Var a, Var row) {
  require_same_tape(a, row);
  if (row.rows() != 1 || row.cols() != a.cols()) shape_error("add_row", a, row);
  Tape& t = *a.tape;
  Matrix v = a.value().rowwise() + row.value().row(0);
  const bool ng = t.needs_grad(a.id) || t.needs_grad(row.id);
  return t.record(std::move(v), ng, [a = a.id, r = row.id](Tape& t, std::size_t o) {
    const Matrix& g = t.grad_mut(o);
    if (t.needs_grad(a)) t.grad_mut(a) += g;
    if (t.needs_grad(r)) t.grad_mut(r) += g.colwise().sum();
  });
}

Var relu(Var a) {
  Tape& t = *a.tape;
  Matrix v = a.value().cwiseMax(0.0);
  return t.record(std::move(v), t.needs_grad(a.id), [a = a.id](Tape& t, std::size_t o) {
    t.grad_mut(a) += (t.value(a).array() > 0).cast<double>().matrix().cwiseProduct(t.grad_mut(o));
  });
}

Var leaky_relu(Var a, double slope) {
  Tape& t = *a.tape;
  Matrix v = a.value().unaryExpr([slope](double x) { return x > 0 ? x : slope * x; });
  return t.record(std::move(v), t.needs_grad(a.id), [a = a.id, slope](Tape& t, std::size_t o) {
    Matrix d = t.value(a).unaryExpr([slope](double x) { return x > 0 ? 1.0 : slope; });
    t.grad_mut(a) += d.cwiseProduct(t.grad_mut(o));
  });
}

Var mask(Var a, const Matrix& m) {
  if (m.rows() != a.rows() || m.cols() != a.cols()) throw ValidationError("mask shape does not match its operand");
  Tape& t = *a.tape;
  Matrix v = a.value().cwiseProduct(m);
  return t.record(std::move(v), t.needs_grad(a.id),
                  [a = a.id, m](Tape& t, std::size_t o) { t.grad_mut(a) += t.grad_mut(o).cwiseProduct(m); });
}

Var concat_cols(Var a, Var b) {
  require_same_tape(a, b);
  if (a.rows() != b.rows()) shape_error("concat_cols", a, b);
  Tape& t = *a.tape;
  Matrix v(a.rows(), a.cols() + b.cols());
  v << a.value(), b.value();
  const bool ng = t.needs_grad(a.id) || t.needs_grad(b.id);
  const Eigen::Index ca = a.cols(), cb = b.cols();
  return t.record(std::move(v), ng, [a = a.id, b = b.id, ca, cb](Tape& t, std::size_t o) {
    const Matrix& g = t.grad_mut(o);
    if (t.needs_grad(a)) t.grad_mut(a) += g.leftCols(ca);
    if (t.needs_grad(b)) t.grad_mut(b) += g.rightCols(cb);
  });
}

Var sum_all(Var a) {
  Tape& t = *a.tape;
  Matrix v(1, 1);
  v(0, 0) = a.value().sum();
  return t.record(std::move(v), t.needs_grad(a.id),
                  [a = a.id](Tape& t, std::size_t o) { t.grad_mut(a).array() += t.grad_mut(o)(0, 0); });
}

Var spmm(const SparseMatrix& s, const SparseMatrix& st, Var a) {
  if (s.cols() != a.rows()) throw ValidationError("spmm: sparse operand does not match the dense rows");
  Tape& t = *a.tape;
  Matrix v = s * a.value();
  const SparseMatrix* stp = &st;
  return t.record(std::move(v), t.needs_grad(a.id),
                  [a = a.id, stp](Tape& t, std::size_t o) { t.grad_mut(a) += *stp * t.grad_mut(o); });
}

Var segment_sum(Var a, const std::vector<int>& segment, std::size_t segments) {
  if (segment.size() != static_cast<std::size_t>(a.rows()))
    throw ValidationError("segment_sum: one segment index per row is required");
  Tape& t = *a.tape;
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(segments), a.cols());
  const Matrix& av = a.value();
  for (std::size_t i = 0; i < segment.size(); ++i) v.row(segment[i]) += av.row(static_cast<Eigen::Index>(i));
  return t.record(std::move(v), t.needs_grad(a.id), [a = a.id, sp = &segment](Tape& t, std::size_t o) {
    const auto& segment = *sp;
    const Matrix& g = t.grad_mut(o);
    Matrix& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < segment.size(); ++i) ga.row(static_cast<Eigen::Index>(i)) += g.row(segment[i]);
  });
}

Var gather_rows(Var a, const std::vector<int>& index) {
  Tape& t = *a.tape;
  const Matrix& av = a.value();
  Matrix v(static_cast<Eigen::Index>(index.size()), av.cols());
  for (std::size_t e = 0; e < index.size(); ++e) v.row(static_cast<Eigen::Index>(e)) = av.row(index[e]);
  return t.record(std::move(v), t.needs_grad(a.id), [a = a.id, ip = &index](Tape& t, std::size_t o) {
    const auto& index = *ip;
    const Matrix& g = t.grad_mut(o);
    Matrix& ga = t.grad_mut(a);
    for (std::size_t e = 0; e < index.size(); ++e) ga.row(index[e]) += g.row(static_cast<Eigen::Index>(e));
  });
}

Var edge_softmax(Var scores, const std::vector<int>& dst, std::size_t nodes) {
  if (scores.cols() != 1 || static_cast<std::size_t>(scores.rows()) != dst.size())
    throw ValidationError("edge_softmax: expected one score per edge");
  Tape& t = *scores.tape;
  const Matrix& s = scores.value();
  std::vector<double> mx(nodes, -std::numeric_limits<double>::infinity()), den(nodes, 0.0);
  for (std::size_t e = 0; e < dst.size(); ++e) mx[dst[e]] = std::max(mx[dst[e]], s(static_cast<Eigen::Index>(e), 0));
  Matrix v(s.rows(), 1);
  for (std::size_t e = 0; e < dst.size(); ++e) {
    const double x = std::exp(s(static_cast<Eigen::Index>(e), 0) - mx[dst[e]]);
    v(static_cast<Eigen::Index>(e), 0) = x;
    den[dst[e]] += x;
  }
  for (std::size_t e = 0; e < dst.size(); ++e) v(static_cast<Eigen::Index>(e), 0) /= den[dst[e]];
  return t.record(std::move(v), t.needs_grad(scores.id), [sid = scores.id, dp = &dst, nodes](Tape& t, std::size_t o) {
    const auto& dst = *dp;
    const Matrix& g = t.grad_mut(o);
    const Matrix& y = t.value(o);
    std::vector<double> dot(nodes, 0.0);
    for (std::size_t e = 0; e < dst.size(); ++e) dot[dst[e]] += g(static_cast<Eigen::Index>(e), 0) * y(static_cast<Eigen::Index>(e), 0);
    Matrix& gs = t.grad_mut(sid);
    for (std::size_t e = 0; e < dst.size(); ++e) {
      const auto i = static_cast<Eigen::Index>(e);
      gs(i, 0) += y(i, 0) * (g(i, 0) - dot[dst[e]]);
    }
  });
}

Var edge_aggregate(Var weight, Var h, const std::vector<int>& src, const std::vector<int>& dst, std::size_t nodes) {
  require_same_tape(weight, h);
  if (weight.cols() != 1 || static_cast<std::size_t>(weight.rows()) != src.size() || src.size() != dst.size())
    throw ValidationError("edge_aggregate: expected one weight per edge");
  Tape& t = *h.tape;
  const Matrix& w = weight.value();
  const Matrix& hv = h.value();
  Matrix v = Matrix::Zero(static_cast<Eigen::Index>(nodes), hv.cols());
  for (std::size_t e = 0; e < src.size(); ++e) v.row(dst[e]) += w(static_cast<Eigen::Index>(e), 0) * hv.row(src[e]);
  const bool ng = t.needs_grad(weight.id) || t.needs_grad(h.id);
  return t.record(std::move(v), ng, [wid = weight.id, hid = h.id, sp = &src, dp = &dst](Tape& t, std::size_t o) {
    const auto& src = *sp;
    const auto& dst = *dp;
    const Matrix& g = t.grad_mut(o);
    const Matrix& w = t.value(wid);
    const Matrix& hv = t.value(hid);
    const bool gw = t.needs_grad(wid), gh = t.needs_grad(hid);
    for (std::size_t e = 0; e < src.size(); ++e) {
      const auto i = static_cast<Eigen::Index>(e);
      if (gw) t.grad_mut(wid)(i, 0) += g.row(dst[e]).dot(hv.row(src[e]));
      if (gh) t.grad_mut(hid).row(src[e]) += w(i, 0) * g.row(dst[e]);
    }
  });
}

Var bce_with_logits(Var logits, const std::vector<int>& labels) {
  if (logits.cols() != 1 || static_cast<std::size_t>(logits.rows()) != labels.size())
    throw ValidationError("bce_with_logits: expected one logit per label");
  if (labels.empty()) throw ValidationError("bce_with_logits: empty batch");
  Tape& t = *logits.tape;
  const Matrix& z = logits.value();
  double loss = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x = z(static_cast<Eigen::Index>(i), 0);
    // Stable log(1 + exp(-|x|)) form.
    loss += std::max(x, 0.0) - x * labels[i] + std::log1p(std::exp(-std::abs(x)));
  }
  Matrix v(1, 1);
  v(0, 0) = loss / static_cast<double>(labels.size());
  return t.record(std::move(v), t.needs_grad(logits.id), [lid = logits.id, labels](Tape& t, std::size_t o) {
    const double g = t.grad_mut(o)(0, 0) / static_cast<double>(labels.size());
    const Matrix& z = t.value(lid);
    Matrix& gz = t.grad_mut(lid);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      gz(r, 0) += g * (1.0 / (1.0 + std::exp(-z(r, 0))) - labels[i]);
    }
  });
}

}  // namespace citegraph
