#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace citegraph {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

class Tape;

// Handle to a value recorded on a tape.
struct Var {
  Tape* tape = nullptr;
  std::size_t id = 0;

  const Matrix& value() const;
  const Matrix& grad() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }
};

// Records operations of one forward pass for reverse-mode differentiation.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. Constants never accumulate gradient.
  Var variable(Matrix value);
  Var constant(Matrix value);

  const Matrix& value(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad(std::size_t id) const;
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t op_count() const noexcept { return ops_; }

  // Seeds d(loss)/d(loss) = 1 and runs the recorded operations in reverse.
  // The loss must be 1x1 and produced by a recorded operation.
  void backward(Var loss);

  // Used by operations.
  Var record(Matrix value, bool needs_grad, std::function<void(Tape&, std::size_t)> back);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  Matrix& grad_mut(std::size_t id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    std::function<void(Tape&, std::size_t)> back;
  };
  std::vector<Node> nodes_;
  std::size_t ops_ = 0;
  bool backward_done_ = false;
};

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var mul(Var a, Var b);  // elementwise
Var scale(Var a, double s);
// Adds a 1 x c row to every row of a.
Var add_row(Var a, Var row);
Var relu(Var a);
Var leaky_relu(Var a, double slope);
// Elementwise product with a constant matrix (dropout masks).
Var mask(Var a, const Matrix& m);
Var concat_cols(Var a, Var b);
Var sum_all(Var a);
// s * a for a constant sparse matrix; st must be its transpose. Both must
// outlive the tape.
Var spmm(const SparseMatrix& s, const SparseMatrix& st, Var a);
// Index vectors passed to the operations below must outlive the tape.

// out[g] = sum of rows i with segment[i] == g.
Var segment_sum(Var a, const std::vector<int>& segment, std::size_t segments);
// out[e] = a[index[e]].
Var gather_rows(Var a, const std::vector<int>& index);
// Softmax of the E x 1 scores over the edges sharing a destination.
Var edge_softmax(Var scores, const std::vector<int>& dst, std::size_t nodes);
// out[dst[e]] += weight[e] * h[src[e]].
Var edge_aggregate(Var weight, Var h, const std::vector<int>& src, const std::vector<int>& dst, std::size_t nodes);
// Mean binary cross-entropy of B x 1 logits against 0/1 labels; 1 x 1.
Var bce_with_logits(Var logits, const std::vector<int>& labels);

}  // namespace citegraph
