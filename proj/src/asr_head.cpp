// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/asr_head.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "l2v/dataworld.hpp"
#include "l2v/metrics.hpp"
#include "l2v/objective.hpp"
#include "l2v/optim.hpp"

namespace l2v {

using nlohmann::json;

void AsrHeadConfig::validate() const {
  if (audio_dim <= 0 || dim <= 0 || ffn_dim <= 0 || heads <= 0 || layers < 0) {
    throw std::invalid_argument("asr head: sizes must be positive");
  }
  if (dim % heads != 0) throw std::invalid_argument("asr head: dim not divisible by heads");
  if (vocabulary < 2) throw std::invalid_argument("asr head: vocabulary must include blank + 1");
}

json to_json(const AsrHeadConfig& c) {
  return json{{"audio_dim", c.audio_dim}, {"dim", c.dim},       {"ffn_dim", c.ffn_dim},
              {"heads", c.heads},         {"layers", c.layers}, {"vocabulary", c.vocabulary}};
}

AsrHeadConfig asr_head_config_from_json(const json& j) {
  AsrHeadConfig c;
  c.audio_dim = j.value("audio_dim", c.audio_dim);
  c.dim = j.value("dim", c.dim);
  c.ffn_dim = j.value("ffn_dim", c.ffn_dim);
  c.heads = j.value("heads", c.heads);
  c.layers = j.value("layers", c.layers);
  c.vocabulary = j.value("vocabulary", c.vocabulary);
  c.validate();
  return c;
}

json to_json(const HeadTrainConfig& c) {
  return json{{"max_epochs", c.max_epochs}, {"min_epochs", c.min_epochs},
              {"batch_size", c.batch_size}, {"max_lr", c.max_lr},
              {"warmup_epochs", c.warmup_epochs}, {"target_wer", c.target_wer},
              {"seed", c.seed}};
}

HeadTrainConfig head_train_config_from_json(const json& j) {
  HeadTrainConfig c;
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.min_epochs = j.value("min_epochs", c.min_epochs);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.max_lr = j.value("max_lr", c.max_lr);
  c.warmup_epochs = j.value("warmup_epochs", c.warmup_epochs);
  c.target_wer = j.value("target_wer", c.target_wer);
  c.seed = j.value("seed", c.seed);
  return c;
}

AsrHeadParams init_asr_head(const AsrHeadConfig& config, std::uint64_t seed) {
  config.validate();
  std::mt19937_64 rng(seed);
  AsrHeadParams p;
  p.config = config;
  p.input = init_linear(config.audio_dim, config.dim, rng);
  p.encoder = init_encoder(config.layers, config.dim, config.ffn_dim, config.heads, rng);
  p.output = init_linear(config.dim, config.vocabulary, rng);
  return p;
}

std::uint64_t content_checksum(const AsrHeadParams& params) {
  return param_checksum(const_cast<AsrHeadParams&>(params), "asr");
}

void freeze(AsrHeadParams& params) {
  params.frozen = true;
  params.checksum = content_checksum(params);
}

void verify_frozen(const AsrHeadParams& params) {
  if (!params.frozen) throw FrozenError("asr head is not frozen");
  const std::uint64_t now = content_checksum(params);
  if (now != params.checksum) {
    throw FrozenError("asr head checksum mismatch: stored " + checksum_hex(params.checksum) +
                      ", found " + checksum_hex(now));
  }
}

ad::Var asr_logits(Binder& bind, const AsrHeadParams& params, const ad::Var& z) {
  const AsrHeadConfig& c = params.config;
  if (z.cols() != c.audio_dim) {
    throw ShapeError("asr head: expected " + std::to_string(c.audio_dim) + "-dim latents, got " +
                     std::to_string(z.cols()));
  }
  ad::Var h = linear(bind, params.input, z) + ad::constant(positional_encoding(z.rows(), c.dim));
  h = encoder_forward(bind, params.encoder, h);
  return linear(bind, params.output, h);
}

Matrix asr_logits(const AsrHeadParams& params, const Matrix& z) {
  Binder bind(false);
  return asr_logits(bind, params, ad::constant(z)).value();
}

DecodeResult greedy_ctc_decode(const Eigen::Ref<const Matrix>& logits) {
  DecodeResult r;
  r.frames = logits.rows();
  r.path.resize(static_cast<std::size_t>(logits.rows()));
  int previous = kBlank;
  for (Index t = 0; t < logits.rows(); ++t) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(t, c) > logits(t, best)) best = c;
    }
    const int label = static_cast<int>(best);
    r.path[static_cast<std::size_t>(t)] = label;
    if (label != kBlank && label != previous) r.symbols.push_back(label);
    previous = label;
  }
  return r;
}

double head_wer(const AsrHeadParams& params, const std::vector<HeadExample>& examples) {
  if (examples.empty()) throw std::invalid_argument("head_wer: no examples");
  long errors = 0;
  long words = 0;
  for (const auto& ex : examples) {
    const DecodeResult d = greedy_ctc_decode(asr_logits(params, *ex.audio));
    const auto counts = edit_distance(transcript_of(d.symbols), ex.transcript);
    errors += counts.errors();
    words += static_cast<long>(tokenize(ex.transcript).size());
  }
  return static_cast<double>(errors) / static_cast<double>(words);
}

AsrHeadParams train_frozen_head(const std::vector<HeadExample>& train,
                                const std::vector<HeadExample>& heldout, const AsrHeadConfig& config,
                                const HeadTrainConfig& tc, std::vector<HeadEpochLog>* log,
                                const std::function<void(const HeadEpochLog&)>& on_epoch) {
  if (train.empty() || heldout.empty()) throw std::invalid_argument("train_frozen_head: empty split");
  if (tc.batch_size < 1 || tc.max_epochs < 1) throw std::invalid_argument("train_frozen_head: bad config");
  AsrHeadParams params = init_asr_head(config, tc.seed);
  std::vector<Matrix*> weights = param_pointers(params, "asr");
  AdamWState state = make_adamw_state(weights);
  const int steps_per_epoch =
      static_cast<int>((train.size() + static_cast<std::size_t>(tc.batch_size) - 1) /
                       static_cast<std::size_t>(tc.batch_size));
  const LrSchedule schedule{tc.max_lr, tc.warmup_epochs, tc.max_epochs, steps_per_epoch};

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(tc.seed ^ 0x9e3779b97f4a7c15ULL);
  double best = std::numeric_limits<double>::infinity();
  std::vector<Matrix> grads(weights.size());

  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t stop = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      const double inv = 1.0 / static_cast<double>(stop - start);
      Binder bind(true);
      for (std::size_t k = start; k < stop; ++k) {
        const HeadExample& ex = train[order[k]];
        ad::Var loss = ctc_loss(asr_logits(bind, params, ad::constant(*ex.audio)), ex.symbols);
        epoch_loss += loss.scalar();
        ad::backward(inv * loss);
      }
      for (std::size_t i = 0; i < weights.size(); ++i) grads[i] = bind.grad(*weights[i]);
      adamw_step(weights, grads, state, lr_at(state.step + 1, schedule));
    }
    HeadEpochLog entry{epoch, epoch_loss / static_cast<double>(train.size()), head_wer(params, heldout)};
    best = std::min(best, entry.heldout_wer);
    if (log) log->push_back(entry);
    if (on_epoch) on_epoch(entry);
    if (epoch + 1 >= tc.min_epochs && entry.heldout_wer < tc.target_wer) {
      freeze(params);
      return params;
    }
  }
  std::ostringstream msg;
  msg << "asr head did not reach held-out WER < " << tc.target_wer << " within " << tc.max_epochs
      << " epochs (best " << best << ")";
  throw TrainingError(msg.str());
}

void save_head(const AsrHeadParams& params, const std::filesystem::path& path) {
  verify_frozen(params);
  write_container(path, to_named(const_cast<AsrHeadParams&>(params), "asr"));
  std::ofstream os(path.string() + ".json", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write head sidecar for " + path.string());
  os << json{{"vocabulary", params.config.vocabulary},
             {"blank_index", kBlank},
             {"checksum", checksum_hex(params.checksum)},
             {"config", to_json(params.config)}}
            .dump(2)
     << '\n';
}

AsrHeadParams load_head(const std::filesystem::path& path) {
  std::ifstream is(path.string() + ".json");
  if (!is) throw std::runtime_error("missing head sidecar " + path.string() + ".json");
  const json side = json::parse(is);
  if (side.at("blank_index").get<int>() != kBlank) throw FormatError("head: unsupported blank index");
  AsrHeadParams params = init_asr_head(asr_head_config_from_json(side.at("config")), 0);
  if (side.at("vocabulary").get<Index>() != params.config.vocabulary) {
    throw FormatError("head: sidecar vocabulary disagrees with config");
  }
  load_named(params, "asr", read_container(path));
  params.frozen = true;
  params.checksum = std::stoull(side.at("checksum").get<std::string>(), nullptr, 16);
  verify_frozen(params);
  return params;
}

}  // namespace l2v
