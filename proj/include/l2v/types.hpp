// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace l2v {

using Index = Eigen::Index;

/** Row-major dense matrix templated on scalar. Frames are rows. */
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/** Row vector templated on scalar (biases, per-frame masks). */
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixX<double>;
using RowVector = RowVectorX<double>;
using Vector = Eigen::VectorXd;
using MatrixF = MatrixX<float>;

/** Symbol path or target sequence. Index 0 is the CTC blank everywhere. */
using Labels = std::vector<int>;

inline constexpr int kBlank = 0;

/** Raised when an operation would produce a non-finite value. */
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** Raised on shape or contract violations. */
struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

}  // namespace l2v
