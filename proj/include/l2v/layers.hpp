// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "l2v/autodiff.hpp"

namespace l2v {

/** y = x W + b, with W D_in x D_out and b 1 x D_out. */
struct Linear {
  Matrix weight;
  Matrix bias;
};

struct LayerNormParams {
  Matrix gamma;
  Matrix beta;
};

struct AttentionParams {
  Linear query;
  Linear key;
  Linear value;
  Linear output;
  int heads = 1;
};

struct FeedForwardParams {
  Linear fc1;
  Linear fc2;
};

/** Pre-normalization block: x + attn(ln1(x)), then h + ffn(ln2(h)). */
struct BlockParams {
  LayerNormParams norm1;
  AttentionParams attn;
  LayerNormParams norm2;
  FeedForwardParams ffn;
};

/** Block stack followed by a final layer norm. */
struct EncoderParams {
  std::vector<BlockParams> blocks;
  LayerNormParams final_norm;
};

/** FC projection followed by a stride-2 transposed temporal convolution. */
struct UpsamplerParams {
  Linear fc;
  Matrix kernel;  // kernel_len stacked D_model x D_model taps
  Matrix bias;
  int kernel_len = 4;
};

/**
 * Binds parameter matrices into a graph. Each matrix is bound at most once per
 * binder, so repeated uses share one leaf and gradients accumulate there.
 * A non-trainable binder produces constants: gradients still flow through the
 * operations that use them, but never into the parameters themselves.
 */
class Binder {
 public:
  explicit Binder(bool trainable) : trainable_(trainable) {}

  ad::Var operator()(const Matrix& m);
  /** Gradient reaching `m` in the last backward sweep; zeros if unbound. */
  Matrix grad(const Matrix& m) const;
  bool trainable() const { return trainable_; }

 private:
  bool trainable_;
  std::unordered_map<const Matrix*, ad::Var> bound_;
};

Linear init_linear(Index in, Index out, std::mt19937_64& rng, double gain = 1.0);
LayerNormParams init_layer_norm(Index dim);
AttentionParams init_attention(Index dim, int heads, std::mt19937_64& rng, double out_gain = 1.0);
BlockParams init_block(Index dim, Index ffn_dim, int heads, std::mt19937_64& rng,
                       double out_gain = 1.0);
EncoderParams init_encoder(int layers, Index dim, Index ffn_dim, int heads, std::mt19937_64& rng);
UpsamplerParams init_upsampler(Index in, Index dim, int kernel_len, std::mt19937_64& rng);

ad::Var linear(Binder& bind, const Linear& p, const ad::Var& x);
ad::Var layer_norm(Binder& bind, const LayerNormParams& p, const ad::Var& x);

/**
 * Multi-head scaled dot-product self-attention (scale 1/sqrt(D/H)). When
 * `weights` is non-null it receives one T x T attention matrix per head.
 */
ad::Var attention_forward(Binder& bind, const AttentionParams& p, const ad::Var& x,
                          std::vector<Matrix>* weights = nullptr);
ad::Var feed_forward(Binder& bind, const FeedForwardParams& p, const ad::Var& x);
ad::Var transformer_block(Binder& bind, const BlockParams& p, const ad::Var& x);
ad::Var encoder_forward(Binder& bind, const EncoderParams& p, const ad::Var& x);

/** Output length is exactly 2T for input length T. */
ad::Var upsample2x(Binder& bind, const UpsamplerParams& p, const ad::Var& x);

/** Fixed sinusoidal table: sin on even dims, cos on odd dims. */
Matrix positional_encoding(Index steps, Index dim);

// Named traversal of parameter trees; the callback gets (name, Matrix&).

template <class F>
void visit(Linear& p, const std::string& prefix, F&& f) {
  f(prefix + "/weight", p.weight);
  f(prefix + "/bias", p.bias);
}

template <class F>
void visit(LayerNormParams& p, const std::string& prefix, F&& f) {
  f(prefix + "/gamma", p.gamma);
  f(prefix + "/beta", p.beta);
}

template <class F>
void visit(AttentionParams& p, const std::string& prefix, F&& f) {
  visit(p.query, prefix + "/query", f);
  visit(p.key, prefix + "/key", f);
  visit(p.value, prefix + "/value", f);
  visit(p.output, prefix + "/output", f);
}

template <class F>
void visit(BlockParams& p, const std::string& prefix, F&& f) {
  visit(p.norm1, prefix + "/norm1", f);
  visit(p.attn, prefix + "/attn", f);
  visit(p.norm2, prefix + "/norm2", f);
  visit(p.ffn.fc1, prefix + "/ffn/fc1", f);
  visit(p.ffn.fc2, prefix + "/ffn/fc2", f);
}

template <class F>
void visit(EncoderParams& p, const std::string& prefix, F&& f) {
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    visit(p.blocks[i], prefix + "/block" + std::to_string(i), f);
  }
  visit(p.final_norm, prefix + "/final_norm", f);
}

template <class F>
void visit(UpsamplerParams& p, const std::string& prefix, F&& f) {
  visit(p.fc, prefix + "/fc", f);
  f(prefix + "/kernel", p.kernel);
  f(prefix + "/conv_bias", p.bias);
}

}  // namespace l2v
