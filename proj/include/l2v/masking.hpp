// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "l2v/types.hpp"

namespace l2v {

enum class MaskKind { none, fixed, progressive };

struct MaskStrategy {
  MaskKind kind = MaskKind::progressive;
  double p = 0.0;  // fixed only
  double p_start = 0.3;
  double p_end = 1.0;

  static MaskStrategy none() { return {MaskKind::none, 0.0, 0.0, 0.0}; }
  static MaskStrategy fixed(double p) { return {MaskKind::fixed, p, p, p}; }
  static MaskStrategy progressive(double start = 0.3, double end = 1.0) {
    return {MaskKind::progressive, 0.0, start, end};
  }

  /** Throws std::invalid_argument on probabilities outside [0,1] or p_start > p_end. */
  void validate() const;
  std::string label() const;
};

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& s);

/** Per-(seed, utterance, epoch) Bernoulli stream; equal keys give equal masks. */
class MaskSampler {
 public:
  MaskSampler(std::uint64_t seed, std::uint64_t utterance, std::uint64_t epoch);

  /** One draw per frame; 1 marks a zeroed frame. */
  Vector draw(Index frames, double p);

 private:
  std::mt19937_64 rng_;
};

struct MaskResult {
  Matrix masked;
  Vector mask;  // 1 where the frame was zeroed
};

/** Zeroes whole frames independently with probability p; kept frames are copied bit-exactly. */
MaskResult mask(const Matrix& z, double p, MaskSampler& sampler);

/**
 * Linear ramp p_start -> p_end over [0, total_epochs]; `fixed` returns p and
 * `none` returns 0. Throws std::out_of_range for epochs outside the ramp.
 */
double progressive_p(int epoch, int total_epochs, const MaskStrategy& strategy);

}  // namespace l2v
