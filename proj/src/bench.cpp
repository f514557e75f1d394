// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "l2v/harness.hpp"

namespace l2v {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

// Latency comparator only: an untrained encoder-decoder whose decoder has the
// head's depth and width. Its outputs are never scored.
struct DecoderBlock {
  LayerNormParams norm_self;
  AttentionParams self_attn;
  LayerNormParams norm_cross;
  AttentionParams cross_attn;
  LayerNormParams norm_ffn;
  FeedForwardParams ffn;
};

struct Comparator {
  Matrix token_embedding;  // C x D
  std::vector<DecoderBlock> blocks;
  LayerNormParams final_norm;
  Linear output;
};

Comparator make_comparator(const AsrHeadConfig& c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Comparator m;
  m.token_embedding = Matrix::NullaryExpr(c.vocabulary, c.dim, [&] { return normal(rng); });
  for (int l = 0; l < c.layers; ++l) {
    DecoderBlock b;
    b.norm_self = init_layer_norm(c.dim);
    b.self_attn = init_attention(c.dim, c.heads, rng);
    b.norm_cross = init_layer_norm(c.dim);
    b.cross_attn = init_attention(c.dim, c.heads, rng);
    b.norm_ffn = init_layer_norm(c.dim);
    b.ffn.fc1 = init_linear(c.dim, c.ffn_dim, rng);
    b.ffn.fc2 = init_linear(c.ffn_dim, c.dim, rng);
    m.blocks.push_back(std::move(b));
  }
  m.final_norm = init_layer_norm(c.dim);
  m.output = init_linear(c.dim, c.vocabulary, rng);
  return m;
}

/** Multi-head attention of `queries` over precomputed keys/values, optionally causal. */
ad::Var attend(Binder& bind, const AttentionParams& p, const ad::Var& queries, const ad::Var& keys,
               const ad::Var& values, bool causal) {
  const Index dim = queries.cols();
  const Index head_dim = dim / p.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  ad::Var q = linear(bind, p.query, queries);
  ad::Var mask;
  if (causal) {
    Matrix m = Matrix::Zero(queries.rows(), keys.rows());
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = i + 1; j < m.cols(); ++j) m(i, j) = -1e9;
    }
    mask = ad::constant(std::move(m));
  }
  std::vector<ad::Var> heads;
  for (int h = 0; h < p.heads; ++h) {
    ad::Var scores = scale * ad::matmul_nt(ad::slice_cols(q, h * head_dim, head_dim),
                                           ad::slice_cols(keys, h * head_dim, head_dim));
    if (causal) scores = scores + mask;
    heads.push_back(ad::matmul(ad::softmax_rows(scores), ad::slice_cols(values, h * head_dim, head_dim)));
  }
  return linear(bind, p.output, ad::concat_cols(heads));
}

struct Memory {
  std::vector<ad::Var> keys;
  std::vector<ad::Var> values;
};

Labels ar_decode(const Comparator& m, const ad::Var& encoded, int tokens) {
  Binder bind(false);
  // Cross-attention keys and values depend only on the encoder output.
  Memory memory;
  for (const auto& b : m.blocks) {
    memory.keys.push_back(linear(bind, b.cross_attn.key, encoded));
    memory.values.push_back(linear(bind, b.cross_attn.value, encoded));
  }
  const Index dim = m.token_embedding.cols();
  Labels out{kBlank};  // start token
  for (int step = 0; step < tokens; ++step) {
    const Index n = static_cast<Index>(out.size());
    Matrix embedded(n, dim);
    for (Index t = 0; t < n; ++t) embedded.row(t) = m.token_embedding.row(out[static_cast<std::size_t>(t)]);
    ad::Var x = ad::constant(embedded + positional_encoding(n, dim));
    for (std::size_t l = 0; l < m.blocks.size(); ++l) {
      const DecoderBlock& b = m.blocks[l];
      ad::Var h = layer_norm(bind, b.norm_self, x);
      ad::Var k = linear(bind, b.self_attn.key, h);
      ad::Var v = linear(bind, b.self_attn.value, h);
      x = x + attend(bind, b.self_attn, h, k, v, true);
      x = x + attend(bind, b.cross_attn, layer_norm(bind, b.norm_cross, x), memory.keys[l],
                     memory.values[l], false);
      x = x + feed_forward(bind, b.ffn, layer_norm(bind, b.norm_ffn, x));
    }
    const Matrix logits = linear(bind, m.output, layer_norm(bind, m.final_norm, x)).value();
    Index next = 0;
    logits.row(n - 1).maxCoeff(&next);
    out.push_back(static_cast<int>(next));
  }
  return out;
}

/** Head encoder states (the hidden sequence before the vocabulary projection). */
ad::Var head_states(Binder& bind, const AsrHeadParams& head, const Matrix& z) {
  ad::Var h = linear(bind, head.input, ad::constant(z)) +
              ad::constant(positional_encoding(z.rows(), head.config.dim));
  return encoder_forward(bind, head.encoder, h);
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

template <class F>
double time_once(F&& f) {
  const auto start = Clock::now();
  f();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Keeps results observable so the timed work cannot be discarded.
volatile std::size_t sink = 0;

}  // namespace

json BenchResult::to_json() const {
  return json{{"frames", frames},
              {"tokens", tokens},
              {"ctc_seconds", ctc_seconds},
              {"ar_seconds", ar_seconds},
              {"ratio", ratio},
              {"ctc_seconds_double", ctc_seconds_double},
              {"linearity", linearity},
              {"stages", {{"prior", prior_seconds}, {"head", head_seconds}, {"greedy", greedy_seconds}}}};
}

BenchResult bench_decode(const PriorModel& model, const AsrHeadParams& head, const BenchConfig& config) {
  if (config.frames < 2 || config.repetitions < 1) throw std::invalid_argument("bench: bad config");
#if defined(__GLIBC__)
  // Keep freed attention buffers in the heap, as a long-running decoder would.
  // Without this every score matrix above 128 KiB is mapped and faulted in
  // afresh. The setting persists for the rest of the process.
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
#endif
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 0.5);
  auto video_of = [&](int frames) {
    return Matrix(Matrix::NullaryExpr(frames, model.params.config.video_dim, [&] { return normal(rng); }));
  };
  const Matrix video = video_of(config.frames);
  const Matrix video_double = video_of(2 * config.frames);
  const Comparator comparator = make_comparator(head.config, config.seed + 1);
  const int tokens = config.frames / 2;

  auto ctc = [&](const Matrix& v) {
    sink = sink + greedy_ctc_decode(asr_logits(head, generate(model, v))).symbols.size();
  };
  auto ar = [&](const Matrix& v) {
    Binder bind(false);
    const ad::Var encoded = head_states(bind, head, generate(model, v));
    sink = sink + ar_decode(comparator, encoded, tokens).size();
  };

  // Each workload is warmed and timed in its own block. Interleaving sizes
  // makes the allocator return and re-fault large buffers on every call.
  auto timed = [&](auto&& f) {
    f();
    std::vector<double> t;
    for (int r = 0; r < config.repetitions; ++r) t.push_back(time_once(f));
    return median(t);
  };
  const double ctc_seconds = timed([&] { ctc(video); });
  const double ctc_double = timed([&] { ctc(video_double); });
  const double ar_seconds = timed([&] { ar(video); });
  Matrix z, logits;
  const double prior_seconds = timed([&] { z = generate(model, video); });
  const double head_seconds = timed([&] { logits = asr_logits(head, z); });
  const double greedy_seconds = timed([&] { sink = sink + greedy_ctc_decode(logits).symbols.size(); });

  BenchResult r;
  r.frames = config.frames;
  r.tokens = tokens;
  r.ctc_seconds = ctc_seconds;
  r.ar_seconds = ar_seconds;
  r.ratio = r.ar_seconds / r.ctc_seconds;
  r.ctc_seconds_double = ctc_double;
  r.linearity = r.ctc_seconds_double / (2.0 * r.ctc_seconds);
  r.prior_seconds = prior_seconds;
  r.head_seconds = head_seconds;
  r.greedy_seconds = greedy_seconds;
  return r;
}

}  // namespace l2v
