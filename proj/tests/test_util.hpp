// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "l2v/container.hpp"
#include "l2v/layers.hpp"

namespace l2v::testing {

inline Matrix random_matrix(Index rows, Index cols, std::mt19937_64& rng, double stddev = 1.0) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

/** Fresh empty directory under the system temp dir, unique per test name. */
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("l2v_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/**
 * Largest relative error between backprop and central differences over every
 * weight of `params`. `loss` builds a scalar from a binder; it is called once
 * with a trainable binder and then twice per coordinate with a constant one.
 * The denominator floor keeps coordinates whose true gradient is ~0 from being
 * scored on rounding noise alone.
 */
template <class Params, class LossFn>
double param_grad_check(Params& params, LossFn&& loss, double eps = 1e-5, double floor = 1e-4) {
  Binder trainable(true);
  ad::backward(loss(trainable));
  auto value = [&] {
    Binder frozen(false);
    return loss(frozen).scalar();
  };
  double worst = 0.0;
  visit(params, "p", [&](const std::string&, Matrix& m) {
    const Matrix analytic = trainable.grad(m);
    for (Index i = 0; i < m.size(); ++i) {
      const double keep = m.data()[i];
      m.data()[i] = keep + eps;
      const double up = value();
      m.data()[i] = keep - eps;
      const double down = value();
      m.data()[i] = keep;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic.data()[i];
      worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), floor}));
    }
  });
  return worst;
}

}  // namespace l2v::testing
