// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "l2v/types.hpp"

namespace l2v {

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamWState {
  AdamWConfig config;
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
};

/** Zero moments shaped like `params`. */
AdamWState make_adamw_state(std::span<Matrix* const> params, AdamWConfig config = {});

/**
 * One AdamW update with decoupled weight decay: w -= lr * decay * w, then the
 * bias-corrected Adam step. Throws ShapeError on mismatched shapes and
 * NumericError on non-finite gradients; parameters are untouched on error.
 */
void adamw_step(std::span<Matrix* const> params, std::span<const Matrix> grads, AdamWState& state,
                double lr);

/** Linear warmup to max_lr, then cosine decay to exactly zero at the last step. */
struct LrSchedule {
  double max_lr = 1e-3;
  int warmup_epochs = 5;
  int total_epochs = 30;
  int steps_per_epoch = 1;

  std::int64_t total_steps() const {
    return static_cast<std::int64_t>(total_epochs) * steps_per_epoch;
  }
  std::int64_t warmup_steps() const {
    return static_cast<std::int64_t>(warmup_epochs) * steps_per_epoch;
  }
};

double lr_at(std::int64_t step, const LrSchedule& schedule);

}  // namespace l2v
