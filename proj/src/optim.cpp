// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace l2v {

AdamWState make_adamw_state(std::span<Matrix* const> params, AdamWConfig config) {
  AdamWState s;
  s.config = config;
  s.first_moment.reserve(params.size());
  s.second_moment.reserve(params.size());
  for (const Matrix* p : params) {
    s.first_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
    s.second_moment.push_back(Matrix::Zero(p->rows(), p->cols()));
  }
  return s;
}

void adamw_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamWState& state,
                double lr) {
  if (!(lr >= 0.0)) throw std::invalid_argument("adamw_step: negative learning rate");
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    throw ShapeError("adamw_step: parameter/gradient/state count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& p = *params[i];
    if (p.rows() != grads[i].rows() || p.cols() != grads[i].cols() ||
        p.rows() != state.first_moment[i].rows() || p.cols() != state.first_moment[i].cols()) {
      throw ShapeError("adamw_step: shape mismatch at parameter " + std::to_string(i));
    }
    if (!grads[i].allFinite()) {
      throw NumericError("adamw_step: non-finite gradient at parameter " + std::to_string(i));
    }
  }

  const AdamWConfig& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = *params[i];
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    const Matrix& g = grads[i];
    w *= 1.0 - lr * c.weight_decay;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    w.array() -= lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + c.eps);
  }
}

double lr_at(std::int64_t step, const LrSchedule& s) {
  const std::int64_t total = s.total_steps();
  if (step < 0 || step > total) throw std::out_of_range("lr_at: step outside schedule");
  const std::int64_t warm = s.warmup_steps();
  if (warm > 0 && step <= warm) {
    return s.max_lr * static_cast<double>(step) / static_cast<double>(warm);
  }
  const std::int64_t span = total - warm;
  if (span <= 0) return 0.0;
  const double progress = static_cast<double>(step - warm) / static_cast<double>(span);
  return 0.5 * s.max_lr * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace l2v
