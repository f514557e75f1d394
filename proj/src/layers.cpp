// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/layers.hpp"

#include <cmath>

namespace l2v {

ad::Var Binder::operator()(const Matrix& m) {
  auto it = bound_.find(&m);
  if (it != bound_.end()) return it->second;
  ad::Var v = trainable_ ? ad::parameter(m) : ad::constant(m);
  bound_.emplace(&m, v);
  return v;
}

Matrix Binder::grad(const Matrix& m) const {
  auto it = bound_.find(&m);
  if (it == bound_.end()) return Matrix::Zero(m.rows(), m.cols());
  return it->second.grad();
}

namespace {

Matrix gaussian(Index rows, Index cols, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, stddev);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

}  // namespace

Linear init_linear(Index in, Index out, std::mt19937_64& rng, double gain) {
  return Linear{gaussian(in, out, gain / std::sqrt(static_cast<double>(in)), rng),
                Matrix::Zero(1, out)};
}

LayerNormParams init_layer_norm(Index dim) {
  return LayerNormParams{Matrix::Ones(1, dim), Matrix::Zero(1, dim)};
}

AttentionParams init_attention(Index dim, int heads, std::mt19937_64& rng, double out_gain) {
  if (heads <= 0 || dim % heads != 0) throw ShapeError("attention: dim not divisible by heads");
  AttentionParams p;
  p.query = init_linear(dim, dim, rng);
  p.key = init_linear(dim, dim, rng);
  p.value = init_linear(dim, dim, rng);
  p.output = init_linear(dim, dim, rng, out_gain);
  p.heads = heads;
  return p;
}

BlockParams init_block(Index dim, Index ffn_dim, int heads, std::mt19937_64& rng,
                       double out_gain) {
  BlockParams b;
  b.norm1 = init_layer_norm(dim);
  b.attn = init_attention(dim, heads, rng, out_gain);
  b.norm2 = init_layer_norm(dim);
  b.ffn.fc1 = init_linear(dim, ffn_dim, rng);
  b.ffn.fc2 = init_linear(ffn_dim, dim, rng, out_gain);
  return b;
}

EncoderParams init_encoder(int layers, Index dim, Index ffn_dim, int heads, std::mt19937_64& rng) {
  EncoderParams e;
  const double out_gain = 1.0 / std::sqrt(2.0 * std::max(1, layers));
  for (int i = 0; i < layers; ++i) e.blocks.push_back(init_block(dim, ffn_dim, heads, rng, out_gain));
  e.final_norm = init_layer_norm(dim);
  return e;
}

UpsamplerParams init_upsampler(Index in, Index dim, int kernel_len, std::mt19937_64& rng) {
  UpsamplerParams u;
  u.fc = init_linear(in, dim, rng);
  // Each output frame receives kernel_len / 2 taps.
  const double stddev = 1.0 / std::sqrt(static_cast<double>(dim) * kernel_len / 2.0);
  u.kernel = gaussian(kernel_len * dim, dim, stddev, rng);
  u.bias = Matrix::Zero(1, dim);
  u.kernel_len = kernel_len;
  return u;
}

ad::Var linear(Binder& bind, const Linear& p, const ad::Var& x) {
  if (x.cols() != p.weight.rows()) throw ShapeError("linear: input dimension mismatch");
  return ad::add_row(ad::matmul(x, bind(p.weight)), bind(p.bias));
}

ad::Var layer_norm(Binder& bind, const LayerNormParams& p, const ad::Var& x) {
  return ad::layer_norm(x, bind(p.gamma), bind(p.beta), 1e-5);
}

ad::Var attention_forward(Binder& bind, const AttentionParams& p, const ad::Var& x,
                          std::vector<Matrix>* weights) {
  const Index dim = x.cols();
  if (p.heads <= 0 || dim % p.heads != 0) throw ShapeError("attention: dim not divisible by heads");
  if (x.rows() < 1) throw ShapeError("attention: empty sequence");
  const Index head_dim = dim / p.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));

  ad::Var q = linear(bind, p.query, x);
  ad::Var k = linear(bind, p.key, x);
  ad::Var v = linear(bind, p.value, x);
  if (weights) weights->clear();

  std::vector<ad::Var> heads;
  heads.reserve(p.heads);
  for (int h = 0; h < p.heads; ++h) {
    const Index at = h * head_dim;
    ad::Var qh = ad::slice_cols(q, at, head_dim);
    ad::Var kh = ad::slice_cols(k, at, head_dim);
    ad::Var vh = ad::slice_cols(v, at, head_dim);
    ad::Var attn = ad::softmax_rows(ad::scale(ad::matmul_nt(qh, kh), scale));
    if (weights) weights->push_back(attn.value());
    heads.push_back(ad::matmul(attn, vh));
  }
  ad::Var merged = p.heads == 1 ? heads.front() : ad::concat_cols(heads);
  return linear(bind, p.output, merged);
}

ad::Var feed_forward(Binder& bind, const FeedForwardParams& p, const ad::Var& x) {
  return linear(bind, p.fc2, ad::gelu(linear(bind, p.fc1, x)));
}

ad::Var transformer_block(Binder& bind, const BlockParams& p, const ad::Var& x) {
  ad::Var h = x + attention_forward(bind, p.attn, layer_norm(bind, p.norm1, x));
  return h + feed_forward(bind, p.ffn, layer_norm(bind, p.norm2, h));
}

ad::Var encoder_forward(Binder& bind, const EncoderParams& p, const ad::Var& x) {
  ad::Var h = x;
  for (const auto& block : p.blocks) h = transformer_block(bind, block, h);
  return layer_norm(bind, p.final_norm, h);
}

ad::Var upsample2x(Binder& bind, const UpsamplerParams& p, const ad::Var& x) {
  ad::Var projected = linear(bind, p.fc, x);
  return ad::conv_transpose_stride2(projected, bind(p.kernel), bind(p.bias), p.kernel_len);
}

Matrix positional_encoding(Index steps, Index dim) {
  Matrix pe(steps, dim);
  for (Index t = 0; t < steps; ++t) {
    for (Index i = 0; i < dim; ++i) {
      const double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(dim);
      const double angle = static_cast<double>(t) / std::pow(10000.0, exponent);
      pe(t, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

}  // namespace l2v
