// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "l2v/container.hpp"
#include "l2v/layers.hpp"

namespace l2v {

struct AsrHeadConfig {
  Index audio_dim = 16;
  Index dim = 32;
  Index ffn_dim = 64;
  int heads = 4;
  int layers = 2;
  Index vocabulary = 9;  // symbols + blank

  void validate() const;
};

nlohmann::json to_json(const AsrHeadConfig& c);
AsrHeadConfig asr_head_config_from_json(const nlohmann::json& j);

struct AsrHeadParams {
  AsrHeadConfig config;
  Linear input;
  EncoderParams encoder;
  Linear output;
  bool frozen = false;
  std::uint64_t checksum = 0;  // valid only once frozen
};

AsrHeadParams init_asr_head(const AsrHeadConfig& config, std::uint64_t seed);

template <class F>
void visit(AsrHeadParams& p, const std::string& prefix, F&& f) {
  visit(p.input, prefix + "/input", f);
  visit(p.encoder, prefix + "/encoder", f);
  visit(p.output, prefix + "/output", f);
}

std::uint64_t content_checksum(const AsrHeadParams& params);

/** Marks the head frozen and records its content checksum. */
void freeze(AsrHeadParams& params);

/** Throws FrozenError unless the head is frozen and its contents match the stored checksum. */
void verify_frozen(const AsrHeadParams& params);

struct FrozenError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** Raw CTC logits, Ta x C. Bind with a non-trainable Binder for a frozen head. */
ad::Var asr_logits(Binder& bind, const AsrHeadParams& params, const ad::Var& z);
Matrix asr_logits(const AsrHeadParams& params, const Matrix& z);

struct DecodeResult {
  Labels symbols;  // collapsed, blank-free
  Labels path;     // per-frame argmax
  Index frames = 0;
};

/** Best-path decode: argmax per frame (lowest index on ties), merge repeats, drop blanks. */
DecodeResult greedy_ctc_decode(const Eigen::Ref<const Matrix>& logits);

struct HeadTrainConfig {
  int max_epochs = 30;
  int min_epochs = 3;
  int batch_size = 8;
  double max_lr = 5e-3;
  int warmup_epochs = 1;
  double target_wer = 0.02;
  std::uint64_t seed = 11;
};

nlohmann::json to_json(const HeadTrainConfig& c);
HeadTrainConfig head_train_config_from_json(const nlohmann::json& j);

struct HeadExample {
  const Matrix* audio = nullptr;
  Labels symbols;
  std::string transcript;
};

struct HeadEpochLog {
  int epoch = 0;
  double loss = 0.0;
  double heldout_wer = 0.0;
};

/** Raised when the head cannot reach the target WER; the message names the best WER seen. */
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * CTC training with AdamW and the warmup + cosine schedule. Stops once the
 * held-out WER falls below the target (after at least min_epochs) and returns
 * the frozen head.
 */
AsrHeadParams train_frozen_head(const std::vector<HeadExample>& train,
                                const std::vector<HeadExample>& heldout, const AsrHeadConfig& config,
                                const HeadTrainConfig& train_config,
                                std::vector<HeadEpochLog>* log = nullptr,
                                const std::function<void(const HeadEpochLog&)>& on_epoch = {});

/** Corpus WER of greedy decoding of `examples` through the head. */
double head_wer(const AsrHeadParams& params, const std::vector<HeadExample>& examples);

/** Writes `path` (the "asr" container) and `path`.json with {vocabulary, blank_index, checksum, config}. */
void save_head(const AsrHeadParams& params, const std::filesystem::path& path);
/** Loads and re-verifies the stored checksum. */
AsrHeadParams load_head(const std::filesystem::path& path);

}  // namespace l2v
