// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

// Brute-force reference implementations shared by the unit tests and the
// acceptance binary. They are written for clarity, not speed, and share no
// code with the library.

#pragma once

#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "l2v/types.hpp"

namespace l2v::oracle {

/** Removes repeats, then blanks (symbol 0). */
inline Labels collapse(const Labels& path) {
  Labels out;
  int previous = -1;
  for (int s : path) {
    if (s != previous && s != 0) out.push_back(s);
    previous = s;
  }
  return out;
}

/** Calls `fn` with every sequence of length `length` over {lo, ..., hi - 1}. */
inline void for_each_sequence(int length, int lo, int hi, const std::function<void(const Labels&)>& fn) {
  Labels seq(static_cast<std::size_t>(length), lo);
  while (true) {
    fn(seq);
    int i = length - 1;
    while (i >= 0 && ++seq[static_cast<std::size_t>(i)] == hi) {
      seq[static_cast<std::size_t>(i)] = lo;
      --i;
    }
    if (i < 0) return;
  }
}

/** -log of the summed probability of every frame path that collapses to `target`. */
inline double ctc_by_enumeration(const Matrix& logits, const Labels& target) {
  const Index frames = logits.rows();
  const int classes = static_cast<int>(logits.cols());
  Matrix prob(frames, classes);
  for (Index t = 0; t < frames; ++t) {
    double z = 0.0;
    for (int c = 0; c < classes; ++c) z += std::exp(logits(t, c));
    for (int c = 0; c < classes; ++c) prob(t, c) = std::exp(logits(t, c)) / z;
  }
  double total = 0.0;
  for_each_sequence(static_cast<int>(frames), 0, classes, [&](const Labels& path) {
    if (collapse(path) != target) return;
    double p = 1.0;
    for (Index t = 0; t < frames; ++t) p *= prob(t, path[static_cast<std::size_t>(t)]);
    total += p;
  });
  return -std::log(total);
}

/** Minimum frame count for a CTC alignment: one per symbol plus a blank between repeats. */
inline int min_frames(const Labels& target) {
  int n = static_cast<int>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i) n += target[i] == target[i - 1];
  return n;
}

struct CtcCase {
  Matrix logits;
  Labels target;
};

/**
 * Every feasible target for frames <= 6, target length <= 3, classes in {2, 3},
 * each with `draws` random logit matrices (Gaussian, stddev 2).
 */
inline std::vector<CtcCase> ctc_sweep(int draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<CtcCase> cases;
  for (int classes = 2; classes <= 3; ++classes) {
    for (int frames = 1; frames <= 6; ++frames) {
      for (int length = 0; length <= 3; ++length) {
        for_each_sequence(length, 1, classes, [&](const Labels& target) {
          if (min_frames(target) > frames) return;
          for (int d = 0; d < draws; ++d) {
            Matrix m(frames, classes);
            for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
            cases.push_back({m, target});
          }
        });
      }
    }
  }
  return cases;
}

}  // namespace l2v::oracle
