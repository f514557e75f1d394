// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/prior.hpp"

namespace l2v {

void LatentSequence::validate() const {
  if (data.rows() < 1) throw ShapeError("latent sequence: empty");
  if (!data.allFinite()) throw NumericError("latent sequence: non-finite element");
  const int expected = kind == LatentKind::video ? kVideoRateHz : kAudioRateHz;
  if (rate_hz != expected) {
    throw ShapeError("latent sequence: rate " + std::to_string(rate_hz) + " Hz, expected " +
                     std::to_string(expected));
  }
}

void PriorConfig::validate() const {
  if (layers < 0 || dim <= 0 || ffn_dim <= 0 || heads <= 0 || video_dim <= 0 || audio_dim <= 0) {
    throw std::invalid_argument("prior config: sizes must be positive");
  }
  if (dim % heads != 0) throw std::invalid_argument("prior config: dim not divisible by heads");
  if (kernel_len < 2 || kernel_len % 2 != 0) {
    throw std::invalid_argument("prior config: kernel_len must be even and >= 2");
  }
  if (codebook_size < 0 || codebook_size == 1) {
    throw std::invalid_argument("prior config: codebook_size must be 0 or >= 2");
  }
}

PriorParams init_prior(const PriorConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  PriorParams p;
  p.config = config;
  p.upsampler = init_upsampler(config.video_dim, config.dim, config.kernel_len, rng);
  p.audio_proj = init_linear(config.audio_dim, config.dim, rng);
  p.encoder = init_encoder(config.layers, config.dim, config.ffn_dim, config.heads, rng);
  p.out = init_linear(config.dim, config.audio_dim, rng);
  if (config.codebook_size > 0) p.classifier = init_linear(config.audio_dim, config.codebook_size, rng);
  return p;
}

ad::Var fuse(const ad::Var& video_up, const ad::Var& audio_masked) {
  if (video_up.rows() != audio_masked.rows() || video_up.cols() != audio_masked.cols()) {
    throw ShapeError("fuse: shape mismatch");
  }
  return video_up + audio_masked;
}

Matrix fuse(const Matrix& video_up, const Matrix& audio_masked) {
  if (video_up.rows() != audio_masked.rows() || video_up.cols() != audio_masked.cols()) {
    throw ShapeError("fuse: shape mismatch");
  }
  return video_up + audio_masked;
}

PriorOutput prior_forward(Binder& bind, const PriorParams& params, const Matrix& video,
                          const Matrix* audio, double p, MaskSampler* sampler) {
  const PriorConfig& c = params.config;
  if (video.rows() < 1) throw ShapeError("prior: empty video latents");
  if (video.cols() != c.video_dim) throw ShapeError("prior: video dimension mismatch");
  if (!video.allFinite()) throw NumericError("prior: non-finite video latents");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("prior: p outside [0,1]");
  const Index frames = 2 * video.rows();

  PriorOutput out;
  ad::Var z_in = upsample2x(bind, params.upsampler, ad::constant(video));
  if (audio) {
    if (audio->rows() != frames) {
      throw ShapeError("prior: audio length " + std::to_string(audio->rows()) +
                       " is not twice the video length " + std::to_string(video.rows()));
    }
    if (audio->cols() != c.audio_dim) throw ShapeError("prior: audio dimension mismatch");
    if (!audio->allFinite()) throw NumericError("prior: non-finite audio latents");
    if (p < 1.0) {
      if (!sampler) throw std::invalid_argument("prior: masking needs a sampler");
      out.mask = sampler->draw(frames, p);
      const Vector keep = Vector::Ones(frames) - out.mask;
      ad::Var projected = linear(bind, params.audio_proj, ad::constant(*audio));
      z_in = fuse(z_in, ad::scale_rows(projected, keep));
    } else {
      out.mask = Vector::Ones(frames);
    }
  }

  ad::Var h = z_in + ad::constant(positional_encoding(frames, c.dim));
  h = encoder_forward(bind, params.encoder, h);
  out.latents = linear(bind, params.out, h);
  if (c.codebook_size > 0) out.class_logits = linear(bind, params.classifier, out.latents);
  return out;
}

Matrix infer(const PriorParams& params, const Matrix& video) {
  Binder bind(false);
  return prior_forward(bind, params, video, nullptr, 1.0, nullptr).latents.value();
}

LatentSequence infer(const PriorParams& params, const LatentSequence& video) {
  if (video.kind != LatentKind::video) throw ShapeError("infer: expects video latents");
  video.validate();
  return LatentSequence{infer(params, video.data), kAudioRateHz, LatentKind::generated};
}

}  // namespace l2v
