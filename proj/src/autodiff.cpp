// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

namespace l2v::ad {

Matrix& Node::ensure_grad() {
  if (grad.rows() != value.rows() || grad.cols() != value.cols()) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }
  return grad;
}

Matrix Var::grad() const {
  if (node_->grad.size() == 0) return Matrix::Zero(rows(), cols());
  return node_->grad;
}

double Var::scalar() const {
  if (rows() != 1 || cols() != 1) throw ShapeError("Var::scalar on non-scalar node");
  return node_->value(0, 0);
}

void Var::zero_grad() {
  if (node_->grad.size() != 0) node_->grad.setZero();
}

namespace {

NodePtr make_leaf(Matrix value, bool requires_grad) {
  if (!value.allFinite()) throw NumericError("non-finite leaf value");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                     std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                     std::to_string(b.cols()));
  }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

}  // namespace

Var constant(Matrix value) { return Var(make_leaf(std::move(value), false)); }
Var parameter(Matrix value) { return Var(make_leaf(std::move(value), true)); }

Var make_node(Matrix value, std::vector<Var> parents, BackwardFn backward_fn, const char* op) {
  if (!value.allFinite()) throw NumericError(std::string(op) + ": non-finite forward value");
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  n->parents.reserve(parents.size());
  for (auto& p : parents) {
    n->requires_grad = n->requires_grad || p.requires_grad();
    n->parents.push_back(p.ptr());
  }
  if (n->requires_grad) n->backward_fn = std::move(backward_fn);
  return Var(std::move(n));
}

void accumulate(Node& n, const Matrix& g) {
  if (!n.requires_grad) return;
  n.ensure_grad() += g;
}

void backward(const Var& root) {
  if (root.rows() != 1 || root.cols() != 1) throw ShapeError("backward: root must be 1x1");
  if (!root.requires_grad()) return;

  // Iterative post-order DFS over nodes that require gradients.
  std::vector<Node*> order;
  std::unordered_set<Node*> seen;
  std::vector<std::pair<Node*, std::size_t>> stack{{&root.node(), 0}};
  seen.insert(&root.node());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  for (Node* n : order) {
    if (!n->is_leaf()) n->ensure_grad().setZero();
  }
  root.node().ensure_grad()(0, 0) += 1.0;

  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }
  for (Node* n : order) {
    if (n->grad.size() != 0 && !n->grad.allFinite()) {
      throw NumericError(std::string("backward: non-finite gradient at ") + n->op);
    }
  }
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return make_node(
      a.value() + b.value(), {a, b},
      [](Node& self) {
        accumulate(parent(self, 0), self.grad);
        accumulate(parent(self, 1), self.grad);
      },
      "add");
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return make_node(
      a.value() - b.value(), {a, b},
      [](Node& self) {
        accumulate(parent(self, 0), self.grad);
        accumulate(parent(self, 1), -self.grad);
      },
      "sub");
}

Var scale(const Var& a, double s) {
  return make_node(
      a.value() * s, {a}, [s](Node& self) { accumulate(parent(self, 0), self.grad * s); },
      "scale");
}

Var hadamard(const Var& a, const Var& b) {
  require_same_shape(a, b, "hadamard");
  return make_node(
      a.value().cwiseProduct(b.value()), {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        accumulate(pa, self.grad.cwiseProduct(pb.value));
        accumulate(pb, self.grad.cwiseProduct(pa.value));
      },
      "hadamard");
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) throw ShapeError("matmul: inner dimension mismatch");
  return make_node(
      a.value() * b.value(), {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) pa.ensure_grad().noalias() += self.grad * pb.value.transpose();
        if (pb.requires_grad) pb.ensure_grad().noalias() += pa.value.transpose() * self.grad;
      },
      "matmul");
}

Var matmul_nt(const Var& a, const Var& b) {
  if (a.cols() != b.cols()) throw ShapeError("matmul_nt: inner dimension mismatch");
  return make_node(
      a.value() * b.value().transpose(), {a, b},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Node& pb = parent(self, 1);
        if (pa.requires_grad) pa.ensure_grad().noalias() += self.grad * pb.value;
        if (pb.requires_grad) pb.ensure_grad().noalias() += self.grad.transpose() * pa.value;
      },
      "matmul_nt");
}

Var add_row(const Var& a, const Var& row) {
  if (row.rows() != 1 || row.cols() != a.cols()) throw ShapeError("add_row: row shape mismatch");
  Matrix out = a.value().rowwise() + row.value().row(0);
  return make_node(
      std::move(out), {a, row},
      [](Node& self) {
        accumulate(parent(self, 0), self.grad);
        Node& pr = parent(self, 1);
        if (pr.requires_grad) pr.ensure_grad() += self.grad.colwise().sum();
      },
      "add_row");
}

Var scale_rows(const Var& a, const Vector& weights) {
  if (weights.size() != a.rows()) throw ShapeError("scale_rows: weight count mismatch");
  Matrix out = weights.asDiagonal() * a.value();
  return make_node(
      std::move(out), {a},
      [weights](Node& self) { accumulate(parent(self, 0), weights.asDiagonal() * self.grad); },
      "scale_rows");
}

Var square(const Var& a) {
  return make_node(
      a.value().array().square().matrix(), {a},
      [](Node& self) {
        Node& pa = parent(self, 0);
        accumulate(pa, 2.0 * self.grad.cwiseProduct(pa.value));
      },
      "square");
}

Var tanh(const Var& a) {
  return make_node(
      a.value().array().tanh().matrix(), {a},
      [](Node& self) {
        Matrix d = (1.0 - self.value.array().square()).matrix();
        accumulate(parent(self, 0), self.grad.cwiseProduct(d));
      },
      "tanh");
}

constexpr double kInvSqrt2 = std::numbers::sqrt2 / 2.0;

Var gelu(const Var& a) {
  Matrix out = a.value().unaryExpr(
      [](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); });
  return make_node(
      std::move(out), {a},
      [](Node& self) {
        Node& pa = parent(self, 0);
        Matrix d = pa.value.unaryExpr([](double x) {
          const double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
          const double pdf = std::exp(-0.5 * x * x) * 0.5 * std::numbers::inv_sqrtpi *
                             std::numbers::sqrt2;
          return cdf + x * pdf;
        });
        accumulate(pa, self.grad.cwiseProduct(d));
      },
      "gelu");
}

Var sum(const Var& a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  return make_node(
      std::move(out), {a},
      [](Node& self) {
        Node& pa = parent(self, 0);
        if (pa.requires_grad) pa.ensure_grad().array() += self.grad(0, 0);
      },
      "sum");
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  Matrix out(1, 1);
  out(0, 0) = a.value().sum() / n;
  return make_node(
      std::move(out), {a},
      [n](Node& self) {
        Node& pa = parent(self, 0);
        if (pa.requires_grad) pa.ensure_grad().array() += self.grad(0, 0) / n;
      },
      "mean");
}

Var softmax_rows(const Var& a) {
  Matrix out = a.value();
  for (Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
  return make_node(
      std::move(out), {a},
      [](Node& self) {
        const Matrix& y = self.value;
        Vector dots = self.grad.cwiseProduct(y).rowwise().sum();
        Matrix g = y.cwiseProduct((self.grad.colwise() - dots));
        accumulate(parent(self, 0), g);
      },
      "softmax_rows");
}

Var log_softmax_rows(const Var& a) {
  Matrix out = a.value();
  for (Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double m = row.maxCoeff();
    const double lse = m + std::log((row.array() - m).exp().sum());
    row.array() -= lse;
  }
  return make_node(
      std::move(out), {a},
      [](Node& self) {
        Matrix p = self.value.array().exp().matrix();
        Vector gsum = self.grad.rowwise().sum();
        Matrix g = self.grad - p.cwiseProduct(gsum.replicate(1, p.cols()));
        accumulate(parent(self, 0), g);
      },
      "log_softmax_rows");
}

Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  const Index d = x.cols();
  if (d < 2) throw ShapeError("layer_norm: needs at least 2 features");
  if (gamma.rows() != 1 || gamma.cols() != d || beta.rows() != 1 || beta.cols() != d) {
    throw ShapeError("layer_norm: affine shape mismatch");
  }
  const Matrix& xv = x.value();
  Vector mu = xv.rowwise().mean();
  Matrix centered = xv.colwise() - mu;
  Vector inv_sigma =
      ((centered.array().square().rowwise().sum() / static_cast<double>(d)) + eps).rsqrt();
  Matrix xhat = inv_sigma.asDiagonal() * centered;
  Matrix out = (xhat.array().rowwise() * gamma.value().row(0).array()).matrix();
  out.rowwise() += beta.value().row(0);
  return make_node(
      std::move(out), {x, gamma, beta},
      [xhat = std::move(xhat), inv_sigma = std::move(inv_sigma)](Node& self) {
        Node& px = parent(self, 0);
        Node& pg = parent(self, 1);
        Node& pb = parent(self, 2);
        if (pg.requires_grad) pg.ensure_grad() += self.grad.cwiseProduct(xhat).colwise().sum();
        if (pb.requires_grad) pb.ensure_grad() += self.grad.colwise().sum();
        if (px.requires_grad) {
          Matrix dxhat = (self.grad.array().rowwise() * pg.value.row(0).array()).matrix();
          Vector m1 = dxhat.rowwise().mean();
          Vector m2 = dxhat.cwiseProduct(xhat).rowwise().mean();
          Matrix dx = dxhat.colwise() - m1;
          dx -= m2.asDiagonal() * xhat;
          px.ensure_grad() += inv_sigma.asDiagonal() * dx;
        }
      },
      "layer_norm");
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count <= 0 || start + count > a.cols()) throw ShapeError("slice_cols: range");
  return make_node(
      a.value().middleCols(start, count), {a},
      [start, count](Node& self) {
        Node& pa = parent(self, 0);
        if (pa.requires_grad) pa.ensure_grad().middleCols(start, count) += self.grad;
      },
      "slice_cols");
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no inputs");
  const Index rows = parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw ShapeError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  Index at = 0;
  for (const auto& p : parts) {
    out.middleCols(at, p.cols()) = p.value();
    at += p.cols();
  }
  return make_node(
      std::move(out), parts,
      [](Node& self) {
        Index at = 0;
        for (auto& p : self.parents) {
          const Index c = p->value.cols();
          if (p->requires_grad) p->ensure_grad() += self.grad.middleCols(at, c);
          at += c;
        }
      },
      "concat_cols");
}

namespace {

using StridedRows = Eigen::Map<Matrix, 0, Eigen::OuterStride<>>;

// Output rows touched by tap j: o = 2t + j - pad for t in [t0, t0 + n).
struct TapRange {
  Index t0 = 0;
  Index out0 = 0;
  Index n = 0;
};

TapRange tap_range(Index steps, int tap, int pad) {
  const Index out_len = 2 * steps;
  TapRange r;
  Index t = 0;
  while (t < steps && 2 * t + tap - pad < 0) ++t;
  Index t_end = steps;
  while (t_end > t && 2 * (t_end - 1) + tap - pad >= out_len) --t_end;
  r.t0 = t;
  r.out0 = 2 * t + tap - pad;
  r.n = t_end - t;
  return r;
}

}  // namespace

Var conv_transpose_stride2(const Var& x, const Var& kernel, const Var& bias, int kernel_len) {
  if (kernel_len < 2 || kernel_len % 2 != 0) throw ShapeError("conv_transpose: even kernel >= 2");
  const Index steps = x.rows();
  const Index din = x.cols();
  const Index dout = kernel.cols();
  if (kernel.rows() != kernel_len * din) throw ShapeError("conv_transpose: kernel rows");
  if (bias.rows() != 1 || bias.cols() != dout) throw ShapeError("conv_transpose: bias shape");
  const int pad = (kernel_len - 2) / 2;

  Matrix out(2 * steps, dout);
  out.rowwise() = bias.value().row(0);
  for (int j = 0; j < kernel_len; ++j) {
    const TapRange r = tap_range(steps, j, pad);
    if (r.n == 0) continue;
    StridedRows dst(out.data() + r.out0 * dout, r.n, dout, Eigen::OuterStride<>(2 * dout));
    dst.noalias() += x.value().middleRows(r.t0, r.n) * kernel.value().middleRows(j * din, din);
  }
  return make_node(
      std::move(out), {x, kernel, bias},
      [kernel_len, pad, steps, din, dout](Node& self) {
        Node& px = parent(self, 0);
        Node& pk = parent(self, 1);
        Node& pb = parent(self, 2);
        if (pb.requires_grad) pb.ensure_grad() += self.grad.colwise().sum();
        for (int j = 0; j < kernel_len; ++j) {
          const TapRange r = tap_range(steps, j, pad);
          if (r.n == 0) continue;
          StridedRows g(self.grad.data() + r.out0 * dout, r.n, dout,
                        Eigen::OuterStride<>(2 * dout));
          if (px.requires_grad) {
            px.ensure_grad().middleRows(r.t0, r.n).noalias() +=
                g * pk.value.middleRows(j * din, din).transpose();
          }
          if (pk.requires_grad) {
            pk.ensure_grad().middleRows(j * din, din).noalias() +=
                px.value.middleRows(r.t0, r.n).transpose() * g;
          }
        }
      },
      "conv_transpose_stride2");
}

double grad_check(const ScalarFn& fn, const std::vector<Matrix>& inputs, double eps) {
  if (!(eps > 0.0 && eps <= 1e-2)) throw std::invalid_argument("grad_check: eps out of (0, 1e-2]");

  std::vector<Var> params;
  params.reserve(inputs.size());
  for (const auto& m : inputs) params.push_back(parameter(m));
  Var root = fn(params);
  if (!std::isfinite(root.scalar())) throw NumericError("grad_check: non-finite function value");
  backward(root);

  auto evaluate = [&](std::size_t which, Index r, Index c, double delta) {
    std::vector<Var> probe;
    probe.reserve(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      if (i == which) {
        Matrix m = inputs[i];
        m(r, c) += delta;
        probe.push_back(constant(std::move(m)));
      } else {
        probe.push_back(constant(inputs[i]));
      }
    }
    const double v = fn(probe).scalar();
    if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
    return v;
  };

  double worst = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Matrix analytic = params[i].grad();
    for (Index r = 0; r < inputs[i].rows(); ++r) {
      for (Index c = 0; c < inputs[i].cols(); ++c) {
        const double central = (evaluate(i, r, c, eps) - evaluate(i, r, c, -eps)) / (2.0 * eps);
        const double a = analytic(r, c);
        const double denom = std::max({std::abs(a), std::abs(central), 1e-12});
        worst = std::max(worst, std::abs(a - central) / denom);
      }
    }
  }
  return worst;
}

}  // namespace l2v::ad
