// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/masking.hpp"

#include <sstream>

namespace l2v {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void MaskStrategy::validate() const {
  switch (kind) {
    case MaskKind::none:
      return;
    case MaskKind::fixed:
      if (!is_probability(p)) throw std::invalid_argument("mask strategy: p outside [0,1]");
      return;
    case MaskKind::progressive:
      if (!is_probability(p_start) || !is_probability(p_end)) {
        throw std::invalid_argument("mask strategy: progressive bounds outside [0,1]");
      }
      if (p_start > p_end) throw std::invalid_argument("mask strategy: p_start > p_end");
      return;
  }
}

std::string MaskStrategy::label() const {
  std::ostringstream os;
  switch (kind) {
    case MaskKind::none:
      return "none";
    case MaskKind::fixed:
      os << "fixed(" << p << ")";
      return os.str();
    case MaskKind::progressive:
      os << "progressive(" << p_start << "->" << p_end << ")";
      return os.str();
  }
  return "?";
}

std::string to_string(MaskKind kind) {
  switch (kind) {
    case MaskKind::none:
      return "none";
    case MaskKind::fixed:
      return "fixed";
    case MaskKind::progressive:
      return "progressive";
  }
  return "?";
}

MaskKind mask_kind_from_string(const std::string& s) {
  if (s == "none") return MaskKind::none;
  if (s == "fixed") return MaskKind::fixed;
  if (s == "progressive") return MaskKind::progressive;
  throw std::invalid_argument("unknown mask kind: " + s);
}

MaskSampler::MaskSampler(std::uint64_t seed, std::uint64_t utterance, std::uint64_t epoch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(utterance),
                    static_cast<std::uint32_t>(utterance >> 32), static_cast<std::uint32_t>(epoch),
                    0x6d61736bU};
  rng_.seed(seq);
}

Vector MaskSampler::draw(Index frames, double p) {
  if (!is_probability(p)) throw std::invalid_argument("mask: p outside [0,1]");
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  Vector m(frames);
  for (Index t = 0; t < frames; ++t) m(t) = uniform(rng_) < p ? 1.0 : 0.0;
  return m;
}

MaskResult mask(const Matrix& z, double p, MaskSampler& sampler) {
  MaskResult r{z, sampler.draw(z.rows(), p)};
  for (Index t = 0; t < z.rows(); ++t) {
    if (r.mask(t) != 0.0) r.masked.row(t).setZero();
  }
  return r;
}

double progressive_p(int epoch, int total_epochs, const MaskStrategy& s) {
  if (total_epochs < 0 || epoch < 0 || epoch > total_epochs) {
    throw std::out_of_range("progressive_p: epoch outside [0, total_epochs]");
  }
  switch (s.kind) {
    case MaskKind::none:
      return 0.0;
    case MaskKind::fixed:
      return s.p;
    case MaskKind::progressive:
      if (total_epochs == 0) return s.p_end;
      return s.p_start +
             (s.p_end - s.p_start) * static_cast<double>(epoch) / static_cast<double>(total_epochs);
  }
  return 0.0;
}

}  // namespace l2v
