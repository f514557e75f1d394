// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "l2v/types.hpp"

namespace l2v::ad {

// Tape-free reverse-mode differentiation over dense matrices. Every node owns
// its value; parents are kept alive by the child, so a graph lives exactly as
// long as the root Var that references it.

struct Node;
using NodePtr = std::shared_ptr<Node>;
using BackwardFn = std::function<void(Node& self)>;

struct Node {
  Matrix value;
  Matrix grad;  // empty until the first backward sweep touches the node
  std::vector<NodePtr> parents;
  BackwardFn backward_fn;
  const char* op = "leaf";
  bool requires_grad = false;

  bool is_leaf() const { return parents.empty(); }
  Matrix& ensure_grad();
};

class Var {
 public:
  Var() = default;
  explicit Var(NodePtr node) : node_(std::move(node)) {}

  const Matrix& value() const { return node_->value; }
  /** Zero-filled when no gradient has reached this node yet. */
  Matrix grad() const;
  Index rows() const { return node_->value.rows(); }
  Index cols() const { return node_->value.cols(); }
  bool requires_grad() const { return node_->requires_grad; }
  double scalar() const;
  const char* op() const { return node_->op; }

  Node& node() const { return *node_; }
  const NodePtr& ptr() const { return node_; }
  explicit operator bool() const { return static_cast<bool>(node_); }

  void zero_grad();

 private:
  NodePtr node_;
};

Var constant(Matrix value);
Var parameter(Matrix value);

/**
 * Creates an interior node. The backward function receives the node itself and
 * must accumulate into the gradients of `parents` that require gradients.
 */
Var make_node(Matrix value, std::vector<Var> parents, BackwardFn backward_fn, const char* op);

/** Adds `g` into the gradient of `n` when that node participates in backward. */
void accumulate(Node& n, const Matrix& g);

/**
 * Reverse sweep from a 1x1 root. Interior gradients are reset on every call;
 * leaf gradients accumulate across calls until zero_grad().
 */
void backward(const Var& root);

// Elementwise and linear algebra.
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double s);
Var hadamard(const Var& a, const Var& b);
Var matmul(const Var& a, const Var& b);
/** a * b^T */
Var matmul_nt(const Var& a, const Var& b);
/** Adds a 1xD row to every row of a TxD matrix. */
Var add_row(const Var& a, const Var& row);
/** Multiplies row t of `a` by the constant weights(t). */
Var scale_rows(const Var& a, const Vector& weights);
Var square(const Var& a);
Var tanh(const Var& a);
Var gelu(const Var& a);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator*(double s, const Var& a) { return scale(a, s); }

// Reductions to 1x1.
Var sum(const Var& a);
Var mean(const Var& a);

// Row-wise normalizations.
Var softmax_rows(const Var& a);
Var log_softmax_rows(const Var& a);
Var layer_norm(const Var& x, const Var& gamma, const Var& beta, double eps = 1e-5);

// Structure.
Var slice_cols(const Var& a, Index start, Index count);
Var concat_cols(const std::vector<Var>& parts);

/**
 * Stride-2 transposed temporal convolution. `kernel` stacks kernel_len blocks of
 * D_in x D_out taps; padding (kernel_len - 2) / 2 makes the output exactly 2T rows.
 */
Var conv_transpose_stride2(const Var& x, const Var& kernel, const Var& bias, int kernel_len);

using ScalarFn = std::function<Var(std::span<const Var>)>;

/**
 * Max over coordinates of |analytic - central| / max(|analytic|, |central|, 1e-12),
 * where analytic gradients come from backward() on fn(parameters(inputs)).
 */
double grad_check(const ScalarFn& fn, const std::vector<Matrix>& inputs, double eps = 1e-5);

}  // namespace l2v::ad
