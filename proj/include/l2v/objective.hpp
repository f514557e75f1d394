// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "l2v/autodiff.hpp"

namespace l2v {

enum class ObjectiveMode { continuous, discrete };

std::string to_string(ObjectiveMode mode);
ObjectiveMode objective_mode_from_string(const std::string& s);

struct ObjectiveConfig {
  double alpha = 0.01;
  ObjectiveMode mode = ObjectiveMode::continuous;
  bool normalize = true;  // unit-normalize frames inside the cosine term

  void validate() const {
    if (!(alpha >= 0.0)) throw std::invalid_argument("objective: alpha must be >= 0");
  }
};

inline constexpr double kNormFloor = 1e-8;
inline constexpr double kZeroNorm = 1e-12;

/** Raised for infeasible CTC targets or out-of-vocabulary symbols. */
struct CtcError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/**
 * -sum_t <g_t, t_t>, with both frames unit-normalized (norm floor 1e-8) when
 * `normalize` is set. Throws NumericError when a target frame has norm < 1e-12.
 */
template <typename A, typename B>
double cosine_loss(const Eigen::MatrixBase<A>& generated, const Eigen::MatrixBase<B>& target,
                   bool normalize = true) {
  if (generated.rows() != target.rows() || generated.cols() != target.cols()) {
    throw ShapeError("cosine_loss: shape mismatch");
  }
  double total = 0.0;
  for (Index t = 0; t < target.rows(); ++t) {
    const double tn = target.row(t).norm();
    if (normalize && tn < kZeroNorm) throw NumericError("cosine_loss: zero-norm target frame");
    const double dot = generated.row(t).dot(target.row(t));
    if (normalize) {
      total -= dot / (std::max(generated.row(t).norm(), kNormFloor) * std::max(tn, kNormFloor));
    } else {
      total -= dot;
    }
  }
  return total;
}

/** Mean over frames and vocabulary of the squared logit difference. */
template <typename A, typename B>
double mse_logits_loss(const Eigen::MatrixBase<A>& generated, const Eigen::MatrixBase<B>& target) {
  if (generated.rows() != target.rows() || generated.cols() != target.cols()) {
    throw ShapeError("mse_logits_loss: shape mismatch");
  }
  return (generated - target).squaredNorm() / static_cast<double>(target.size());
}

/** Per-frame nearest codebook row by Euclidean distance; ties go to the lowest index. */
template <typename A, typename B>
Labels quantize(const Eigen::MatrixBase<A>& z, const Eigen::MatrixBase<B>& codebook) {
  if (codebook.rows() < 1) throw ShapeError("quantize: empty codebook");
  if (z.cols() != codebook.cols()) throw ShapeError("quantize: dimension mismatch");
  Labels out(static_cast<std::size_t>(z.rows()));
  for (Index t = 0; t < z.rows(); ++t) {
    Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < codebook.rows(); ++k) {
      const double d = (z.row(t) - codebook.row(k)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = k;
      }
    }
    out[static_cast<std::size_t>(t)] = static_cast<int>(best);
  }
  return out;
}

/** Row-wise log-softmax computed with the max-shift. */
Matrix log_softmax(const Eigen::Ref<const Matrix>& logits);

/** Mean per-frame negative log-probability of the target index. */
double ce_index_loss(const Eigen::Ref<const Matrix>& logits, std::span<const int> targets);

/** True when T frames can carry `target` under CTC (T >= L + adjacent repeats). */
bool ctc_feasible(Index frames, std::span<const int> target);

struct CtcResult {
  double loss = 0.0;
  Matrix grad;  // d loss / d logits, T x C
};

/**
 * Negative log-likelihood of `target` summed over all CTC alignments, blank at
 * index 0, via the log-space forward recursion. Throws CtcError on infeasible
 * targets or symbols outside [1, C).
 */
double ctc_loss(const Eigen::Ref<const Matrix>& logits, std::span<const int> target);

/** Loss plus its gradient with respect to the raw logits (forward-backward). */
CtcResult ctc_loss_and_grad(const Eigen::Ref<const Matrix>& logits, std::span<const int> target);

// Graph versions. Both arguments may carry gradients.
ad::Var cosine_loss(const ad::Var& generated, const ad::Var& target, bool normalize = true);
ad::Var mse_logits_loss(const ad::Var& generated, const ad::Var& target);
ad::Var ctc_loss(const ad::Var& logits, std::span<const int> target);
ad::Var ce_index_loss(const ad::Var& logits, std::span<const int> targets);

/**
 * cosine + alpha * mse. With alpha == 0 the logit arguments are ignored (and
 * may be empty Vars) so the value equals the cosine term exactly.
 */
ad::Var total_loss(const ad::Var& z_generated, const ad::Var& z_target, const ad::Var& h_generated,
                   const ad::Var& h_target, const ObjectiveConfig& config);

}  // namespace l2v
