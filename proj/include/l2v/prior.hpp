// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <optional>

#include "l2v/layers.hpp"
#include "l2v/masking.hpp"

namespace l2v {

enum class LatentKind { video, audio, generated };

inline constexpr int kVideoRateHz = 25;
inline constexpr int kAudioRateHz = 50;

/** A T x D latent stream with its rate; video runs at 25 Hz, audio and generated at 50 Hz. */
struct LatentSequence {
  Matrix data;
  int rate_hz = kAudioRateHz;
  LatentKind kind = LatentKind::audio;

  void validate() const;
};

struct PriorConfig {
  int layers = 2;
  Index dim = 32;
  Index ffn_dim = 64;
  int heads = 4;
  Index video_dim = 24;
  Index audio_dim = 16;
  int kernel_len = 4;
  /** Discrete mode only: number of codebook classes predicted per frame (0 = off). */
  Index codebook_size = 0;

  void validate() const;
};

struct PriorParams {
  PriorConfig config;
  UpsamplerParams upsampler;
  Linear audio_proj;
  EncoderParams encoder;
  Linear out;
  Linear classifier;  // empty unless codebook_size > 0
};

PriorParams init_prior(const PriorConfig& config, std::uint64_t seed);

template <class F>
void visit(PriorParams& p, const std::string& prefix, F&& f) {
  visit(p.upsampler, prefix + "/upsampler", f);
  visit(p.audio_proj, prefix + "/audio_proj", f);
  visit(p.encoder, prefix + "/encoder", f);
  visit(p.out, prefix + "/out", f);
  if (p.config.codebook_size > 0) visit(p.classifier, prefix + "/classifier", f);
}

/** z_in = upsampled video + masked audio; both Ta x D_model. */
ad::Var fuse(const ad::Var& video_up, const ad::Var& audio_masked);
Matrix fuse(const Matrix& video_up, const Matrix& audio_masked);

struct PriorOutput {
  ad::Var latents;        // Ta x D_a generated audio latents
  ad::Var class_logits;   // Ta x K, discrete mode only
  Vector mask;            // 1 where the audio frame was masked; empty without audio
};

/**
 * Video latents are projected and upsampled to the audio rate, fused with the
 * masked audio projection, position-encoded, and passed through the encoder
 * stack and output projection. Without `audio` (or with p = 1) the input
 * stream is video only; the sampler is then not consulted.
 */
PriorOutput prior_forward(Binder& bind, const PriorParams& params, const Matrix& video,
                          const Matrix* audio, double p, MaskSampler* sampler);

/** Video-only inference: prior_forward with audio absent. */
Matrix infer(const PriorParams& params, const Matrix& video);
LatentSequence infer(const PriorParams& params, const LatentSequence& video);

}  // namespace l2v
