// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "l2v/asr_head.hpp"
#include "l2v/dataworld.hpp"
#include "l2v/masking.hpp"
#include "l2v/metrics.hpp"
#include "l2v/objective.hpp"
#include "l2v/optim.hpp"
#include "l2v/prior.hpp"

namespace l2v {

struct RunConfig {
  WorldConfig world;
  PriorConfig prior;
  ObjectiveConfig objective;
  MaskStrategy mask = MaskStrategy::progressive();
  AdamWConfig adamw;
  double max_lr = 1e-3;
  int warmup_epochs = 5;
  int epochs = 30;
  int batch_size = 8;
  std::uint64_t seed = 1;       // prior initialization and batch order
  std::uint64_t mask_seed = 2;  // mask streams
  int train_count = 2000;
  int heldout_count = 200;
  /** Optional locations used by `ablate`; empty means "given on the command line". */
  std::string data_dir;
  std::string head_path;
  std::string output_dir;

  void validate() const;
};

/** Every field is written; reading rejects unknown keys so typos cannot hide. */
nlohmann::json to_json(const RunConfig& c);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

nlohmann::json to_json(const MaskStrategy& m);
MaskStrategy mask_strategy_from_json(const nlohmann::json& j);

/** Mask probability used throughout `epoch` of an `epochs`-long run. */
double epoch_mask_p(const MaskStrategy& strategy, int epoch, int epochs);

// A trained prior plus what inference needs beyond its parameters.
struct PriorModel {
  PriorParams params;
  ObjectiveMode mode = ObjectiveMode::continuous;
  Matrix codebook;  // discrete mode: K x D_a rows addressed by the classifier
};

/** Video-only generation of audio-rate latents (codebook lookup in discrete mode). */
Matrix generate(const PriorModel& model, const Matrix& video);

void save_prior(const PriorModel& model, const std::filesystem::path& path);
PriorModel load_prior(const std::filesystem::path& path);
std::uint64_t prior_checksum(const PriorModel& model);

struct EpochRecord {
  int epoch = 0;
  double p = 0.0;
  double lr_first = 0.0;
  double lr_last = 0.0;
  double loss_total = 0.0;  // means over training utterances
  double loss_cosine = 0.0;
  double loss_mse = 0.0;
  double heldout_wer = 0.0;
  double seconds = 0.0;
};

struct ComponentChecksums {
  std::uint64_t world = 0;
  std::uint64_t asr = 0;

  bool operator==(const ComponentChecksums&) const = default;
};

struct RunLog {
  nlohmann::json config;
  ComponentChecksums before;
  ComponentChecksums after;
  std::vector<EpochRecord> epochs;
  int best_epoch = -1;
  double best_wer = 0.0;
  double train_seconds = 0.0;

  /** JSON lines: one config record, one per epoch, one final record. */
  std::vector<nlohmann::json> records() const;
  void write(const std::filesystem::path& path) const;
};

/** Drops wall-clock fields so logs of identical runs compare equal. */
nlohmann::json strip_timing(nlohmann::json record);

/** Precomputed targets for one training utterance; null entries are derived on the fly. */
struct LossTargets {
  const Matrix* logits = nullptr;  // frozen head applied to the true audio latents
  const Labels* indices = nullptr;  // discrete mode: nearest codebook row per frame
};

struct PriorLoss {
  ad::Var total;
  ad::Var main;  // cosine term, or cross-entropy in discrete mode
  ad::Var mse;   // logit term; empty when alpha is 0
};

/**
 * Training objective for one utterance. Prior weights are bound through `bind`;
 * the head is always bound as constants.
 */
PriorLoss prior_loss(Binder& bind, const PriorModel& model, const AsrHeadParams& head,
                     const Utterance& u, const ObjectiveConfig& objective, double p,
                     MaskSampler* sampler, const LossTargets& targets = {});

struct TrainResult {
  PriorModel best;  // checkpoint with the lowest held-out WER
  RunLog log;
};

/** Raised when a component that must stay frozen changed or failed verification. */
using FrozenBoundaryError = FrozenError;

/**
 * Trains the prior against cached head targets. Gradients reach only the
 * prior parameters; head and world checksums are verified before and after.
 */
TrainResult train_prior(const RunConfig& config, const World& world,
                        const std::vector<Utterance>& train, const std::vector<Utterance>& heldout,
                        const AsrHeadParams& head,
                        const std::function<void(const EpochRecord&)>& on_epoch = {});

/** Greedy transcription of video-only inference. */
std::string transcribe(const PriorModel& model, const AsrHeadParams& head, const Matrix& video);

/** Corpus WER of the model on in-memory utterances (video only). */
double heldout_wer(const PriorModel& model, const AsrHeadParams& head,
                   const std::vector<Utterance>& utterances);

/** Evaluation parallelism: L2V_THREADS when set, else the hardware count. */
int evaluation_threads();

/**
 * Evaluates one manifest split. Audio and logits paths are removed from the
 * records before any file is opened, so only video latents are read.
 */
WERReport evaluate(const PriorModel& model, const AsrHeadParams& head, const Manifest& manifest,
                   const std::string& split = "heldout");

/** Diagnostic ceiling: decodes the true audio latents of the split through the head. */
WERReport evaluate_audio(const AsrHeadParams& head, const Manifest& manifest,
                         const std::string& split = "heldout");

struct AblationRow {
  std::string arm;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  double wer = 0.0;  // held-out WER of the best checkpoint
  int best_epoch = -1;
  int epochs_to_threshold = 0;  // epochs + 1 when never reached
  std::vector<double> curve;    // held-out WER per epoch
};

struct AblationTable {
  std::string kind;
  std::vector<AblationRow> rows;

  const AblationRow& row(const std::string& arm, std::uint64_t seed) const;
  nlohmann::json to_json() const;
};

/** First epoch (1-based) with WER <= threshold, or curve size + 1. */
int epochs_to_threshold(const std::vector<double>& curve, double threshold);

/** Fills epochs_to_threshold per seed: threshold = 1.2 x the best final WER among that seed's arms. */
void assign_convergence(AblationTable& table);

std::vector<MaskStrategy> default_mask_arms();
inline const std::vector<double> kDefaultAlphas = {0.0, 0.01, 0.2, 0.5};

struct AblationData {
  const World* world = nullptr;
  const std::vector<Utterance>* train = nullptr;
  const std::vector<Utterance>* heldout = nullptr;
  const AsrHeadParams* head = nullptr;
};

using ArmCallback = std::function<void(const AblationRow&)>;

AblationTable ablate_masking(const RunConfig& base, const AblationData& data,
                             const std::vector<std::uint64_t>& seeds,
                             const std::vector<MaskStrategy>& arms = default_mask_arms(),
                             const ArmCallback& on_arm = {});
AblationTable ablate_alpha(const RunConfig& base, const AblationData& data,
                           const std::vector<std::uint64_t>& seeds,
                           const std::vector<double>& alphas = kDefaultAlphas,
                           const ArmCallback& on_arm = {});

/** Loads the named split of a dataset into memory with audio. */
std::vector<Utterance> load_split(const Manifest& manifest, const std::string& split);

// Decode latency.

struct BenchConfig {
  int frames = 100;  // video frames per utterance
  int repetitions = 15;
  std::uint64_t seed = 3;
};

struct BenchResult {
  int frames = 0;
  int tokens = 0;           // comparator output length
  double ctc_seconds = 0.0;  // median, full video-to-text pipeline
  double ar_seconds = 0.0;   // median, same front end + autoregressive decoder
  double ratio = 0.0;
  double ctc_seconds_double = 0.0;  // at 2 x frames
  double linearity = 0.0;           // ctc(2F) / (2 ctc(F)); 1 is perfectly linear
  double prior_seconds = 0.0;       // stage breakdown of the CTC pipeline at F
  double head_seconds = 0.0;
  double greedy_seconds = 0.0;

  nlohmann::json to_json() const;
};

/**
 * Times the CTC pipeline (prior, head, greedy collapse) against a
 * comparator-only autoregressive decoder with the head's depth and width that
 * emits one token per two video frames and re-attends over its whole prefix
 * at every step.
 */
BenchResult bench_decode(const PriorModel& model, const AsrHeadParams& head,
                         const BenchConfig& config = {});

}  // namespace l2v
