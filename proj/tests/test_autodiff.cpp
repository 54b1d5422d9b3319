#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "citegraph/autodiff.hpp"
#include "citegraph/errors.hpp"

using namespace citegraph;

namespace {

using Fn = std::function<Var(Tape&, Var)>;

Matrix random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

double eval(const Fn& f, const Matrix& x) {
  Tape t;
  return f(t, t.variable(x)).value()(0, 0);
}

// Max absolute difference between tape and central-difference gradients.
double gradient_gap(const Fn& f, const Matrix& x0) {
  Tape t;
  Var x = t.variable(x0);
  t.backward(f(t, x));
  Matrix g = x.grad();
  double gap = 0;
  const double eps = 1e-6;
  for (Eigen::Index i = 0; i < x0.size(); ++i) {
    Matrix up = x0, down = x0;
    up.data()[i] += eps;
    down.data()[i] -= eps;
    const double fd = (eval(f, up) - eval(f, down)) / (2 * eps);
    gap = std::max(gap, std::abs(fd - g.data()[i]));
  }
  return gap;
}

}  // namespace

TEST(Autodiff, SquareAtThree) {
  Tape t;
  Var w = t.variable(Matrix::Constant(1, 1, 3.0));
  t.backward(mul(w, w));
  EXPECT_DOUBLE_EQ(w.grad()(0, 0), 6.0);
}

TEST(Autodiff, UnusedParameterHasZeroGradient) {
  Tape t;
  Var a = t.variable(Matrix::Constant(1, 1, 2.0));
  Var b = t.variable(Matrix::Constant(2, 2, 5.0));
  t.backward(scale(a, 4.0));
  EXPECT_DOUBLE_EQ(a.grad()(0, 0), 4.0);
  EXPECT_EQ(b.grad(), Matrix::Zero(2, 2));
}

TEST(Autodiff, StateErrors) {
  Tape t;
  Var a = t.variable(Matrix::Constant(1, 1, 1.0));
  EXPECT_THROW(t.backward(a), StateError);
  EXPECT_THROW(a.grad(), StateError);
  Var m = t.variable(Matrix::Ones(2, 2));
  EXPECT_THROW(t.backward(scale(m, 2)), ValidationError);
  EXPECT_THROW(matmul(m, t.variable(Matrix::Ones(3, 1))), ValidationError);
}

TEST(Autodiff, ConstantsGetNoGradient) {
  Tape t;
  Var c = t.constant(Matrix::Constant(1, 1, 2.0));
  Var x = t.variable(Matrix::Constant(1, 1, 3.0));
  t.backward(mul(c, x));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 2.0);
  EXPECT_FALSE(t.needs_grad(c.id));
}

TEST(Autodiff, DenseOpsMatchFiniteDifferences) {
  const Matrix b = random_matrix(3, 2, 1), row = random_matrix(1, 2, 2), other = random_matrix(4, 3, 3);
  const Matrix keep = (random_matrix(4, 3, 4).array() > 0).cast<double>();
  std::vector<Fn> fns = {
      [&](Tape& t, Var x) { return sum_all(matmul(x, t.constant(b))); },
      [&](Tape& t, Var x) { return sum_all(mul(matmul(x, t.constant(b)), matmul(x, t.constant(b)))); },
      [&](Tape& t, Var x) { return sum_all(add_row(matmul(x, t.constant(b)), t.constant(row))); },
      [&](Tape& t, Var x) { return sum_all(mul(relu(x), t.constant(other))); },
      [&](Tape& t, Var x) { return sum_all(mul(leaky_relu(x, 0.2), t.constant(other))); },
      [&](Tape&, Var x) { return sum_all(mul(mask(x, keep), x)); },
      [&](Tape& t, Var x) { return sum_all(mul(concat_cols(x, scale(x, -2)), t.constant(random_matrix(4, 6, 5)))); },
      [&](Tape& t, Var x) { return sum_all(mul(add(x, t.constant(other)), x)); },
  };
  const Matrix x0 = random_matrix(4, 3, 6);
  for (std::size_t i = 0; i < fns.size(); ++i) EXPECT_LT(gradient_gap(fns[i], x0), 1e-6) << "op " << i;
}

TEST(Autodiff, GraphOpsMatchFiniteDifferences) {
  // 4 nodes, edges of A + I in both directions.
  std::vector<int> src = {0, 1, 1, 2, 2, 3, 0, 1, 2, 3}, dst = {1, 0, 2, 1, 3, 2, 0, 1, 2, 3};
  std::vector<int> seg = {0, 0, 1, 1};
  std::vector<Eigen::Triplet<double>> trip = {{0, 1, 0.5}, {1, 0, 1.0}, {2, 3, 2.0}, {3, 3, -1.0}};
  SparseMatrix s(4, 4);
  s.setFromTriplets(trip.begin(), trip.end());
  SparseMatrix st = s.transpose();
  const Matrix w = random_matrix(4, 3, 7), ew = random_matrix(10, 3, 8);
  const std::vector<int> labels = {0, 1};
  std::vector<Fn> fns = {
      [&](Tape& t, Var x) { return sum_all(mul(spmm(s, st, x), t.constant(w))); },
      [&](Tape& t, Var x) { return sum_all(mul(segment_sum(x, seg, 2), t.constant(random_matrix(2, 3, 9)))); },
      [&](Tape& t, Var x) { return sum_all(mul(gather_rows(x, src), t.constant(ew))); },
      [&](Tape& t, Var x) {
        Var scores = matmul(gather_rows(x, src), t.constant(random_matrix(3, 1, 10)));
        Var a = edge_softmax(scores, dst, 4);
        return sum_all(mul(edge_aggregate(a, x, src, dst, 4), t.constant(w)));
      },
      [&](Tape& t, Var x) {
        Var logits = matmul(segment_sum(x, seg, 2), t.constant(random_matrix(3, 1, 11)));
        return bce_with_logits(logits, labels);
      },
  };
  const Matrix x0 = random_matrix(4, 3, 12);
  for (std::size_t i = 0; i < fns.size(); ++i) EXPECT_LT(gradient_gap(fns[i], x0), 1e-6) << "op " << i;
}

TEST(Autodiff, EdgeSoftmaxSumsToOnePerDestination) {
  Tape t;
  std::vector<int> dst = {0, 0, 1, 1, 1};
  Var sm = edge_softmax(t.constant(random_matrix(5, 1, 13)), dst, 2);
  EXPECT_NEAR(sm.value()(0, 0) + sm.value()(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(sm.value()(2, 0) + sm.value()(3, 0) + sm.value()(4, 0), 1.0, 1e-12);
}

TEST(Autodiff, BceIsStableForLargeLogits) {
  Tape t;
  Matrix z(2, 1);
  z << 800, -800;
  const std::vector<int> right = {1, 0}, wrong = {0, 1};
  Var l = bce_with_logits(t.variable(z), right);
  EXPECT_NEAR(l.value()(0, 0), 0.0, 1e-12);
  Var m = bce_with_logits(t.variable(z), wrong);
  EXPECT_NEAR(m.value()(0, 0), 800.0, 1e-9);
}

TEST(Autodiff, GradientsAccumulateOverReuse) {
  Tape t;
  Var x = t.variable(Matrix::Constant(1, 1, 2.0));
  t.backward(add(mul(x, x), scale(x, 3)));
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 7.0);
}
