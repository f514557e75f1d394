// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

namespace l2v {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  std::set<std::string> allowed(known.begin(), known.end());
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read_field(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json prior_config_json(const PriorConfig& c) {
  return json{{"layers", c.layers},       {"dim", c.dim},
              {"ffn_dim", c.ffn_dim},     {"heads", c.heads},
              {"video_dim", c.video_dim}, {"audio_dim", c.audio_dim},
              {"kernel_len", c.kernel_len}, {"codebook_size", c.codebook_size}};
}

PriorConfig prior_config_from(const json& j) {
  reject_unknown(j, {"layers", "dim", "ffn_dim", "heads", "video_dim", "audio_dim", "kernel_len",
                     "codebook_size"},
                 "prior");
  PriorConfig c;
  read_field(j, "layers", c.layers);
  read_field(j, "dim", c.dim);
  read_field(j, "ffn_dim", c.ffn_dim);
  read_field(j, "heads", c.heads);
  read_field(j, "video_dim", c.video_dim);
  read_field(j, "audio_dim", c.audio_dim);
  read_field(j, "kernel_len", c.kernel_len);
  read_field(j, "codebook_size", c.codebook_size);
  c.validate();
  return c;
}

std::string hex(std::uint64_t v) { return checksum_hex(v); }

json checksums_json(const ComponentChecksums& c) {
  return json{{"world", hex(c.world)}, {"asr", hex(c.asr)}};
}

int words_of(const std::string& transcript) { return static_cast<int>(tokenize(transcript).size()); }

/** Runs fn(i) for i in [0, n) on up to evaluation_threads() workers; rethrows the first error. */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, evaluation_threads())));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

// Configuration.

void RunConfig::validate() const {
  world.validate();
  prior.validate();
  objective.validate();
  mask.validate();
  if (prior.audio_dim != world.audio_dim || prior.video_dim != world.video_dim) {
    throw std::invalid_argument("run config: prior latent dims disagree with the world");
  }
  if (epochs < 1) throw std::invalid_argument("run config: epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs > epochs) {
    throw std::invalid_argument("run config: warmup_epochs must lie in [0, epochs]");
  }
  if (batch_size < 1) throw std::invalid_argument("run config: batch_size must be >= 1");
  if (!(max_lr >= 0.0)) throw std::invalid_argument("run config: max_lr must be >= 0");
  if (train_count < 1 || heldout_count < 1) throw std::invalid_argument("run config: empty split");
}

json to_json(const MaskStrategy& m) {
  json j{{"kind", to_string(m.kind)}};
  if (m.kind == MaskKind::fixed) j["p"] = m.p;
  if (m.kind == MaskKind::progressive) {
    j["p_start"] = m.p_start;
    j["p_end"] = m.p_end;
  }
  return j;
}

MaskStrategy mask_strategy_from_json(const json& j) {
  reject_unknown(j, {"kind", "p", "p_start", "p_end"}, "mask");
  const MaskKind kind = mask_kind_from_string(j.at("kind").get<std::string>());
  MaskStrategy m;
  switch (kind) {
    case MaskKind::none:
      m = MaskStrategy::none();
      break;
    case MaskKind::fixed:
      m = MaskStrategy::fixed(j.at("p").get<double>());
      break;
    case MaskKind::progressive:
      m = MaskStrategy::progressive(j.value("p_start", 0.3), j.value("p_end", 1.0));
      break;
  }
  m.validate();
  return m;
}

json to_json(const RunConfig& c) {
  return json{{"world", to_json(c.world)},
              {"prior", prior_config_json(c.prior)},
              {"objective",
               {{"alpha", c.objective.alpha},
                {"mode", to_string(c.objective.mode)},
                {"normalize", c.objective.normalize}}},
              {"mask", to_json(c.mask)},
              {"adamw",
               {{"beta1", c.adamw.beta1},
                {"beta2", c.adamw.beta2},
                {"eps", c.adamw.eps},
                {"weight_decay", c.adamw.weight_decay}}},
              {"max_lr", c.max_lr},
              {"warmup_epochs", c.warmup_epochs},
              {"epochs", c.epochs},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"mask_seed", c.mask_seed},
              {"train_count", c.train_count},
              {"heldout_count", c.heldout_count},
              {"data_dir", c.data_dir},
              {"head_path", c.head_path},
              {"output_dir", c.output_dir}};
}

RunConfig run_config_from_json(const json& j) {
  reject_unknown(j, {"world", "prior", "objective", "mask", "adamw", "max_lr", "warmup_epochs",
                     "epochs", "batch_size", "seed", "mask_seed", "train_count", "heldout_count",
                     "data_dir", "head_path", "output_dir"},
                 "run config");
  RunConfig c;
  if (j.contains("world")) c.world = world_config_from_json(j["world"]);
  if (j.contains("prior")) c.prior = prior_config_from(j["prior"]);
  if (j.contains("objective")) {
    const json& o = j["objective"];
    reject_unknown(o, {"alpha", "mode", "normalize"}, "objective");
    read_field(o, "alpha", c.objective.alpha);
    if (o.contains("mode")) c.objective.mode = objective_mode_from_string(o["mode"].get<std::string>());
    read_field(o, "normalize", c.objective.normalize);
  }
  if (j.contains("mask")) c.mask = mask_strategy_from_json(j["mask"]);
  if (j.contains("adamw")) {
    const json& a = j["adamw"];
    reject_unknown(a, {"beta1", "beta2", "eps", "weight_decay"}, "adamw");
    read_field(a, "beta1", c.adamw.beta1);
    read_field(a, "beta2", c.adamw.beta2);
    read_field(a, "eps", c.adamw.eps);
    read_field(a, "weight_decay", c.adamw.weight_decay);
  }
  read_field(j, "max_lr", c.max_lr);
  read_field(j, "warmup_epochs", c.warmup_epochs);
  read_field(j, "epochs", c.epochs);
  read_field(j, "batch_size", c.batch_size);
  read_field(j, "seed", c.seed);
  read_field(j, "mask_seed", c.mask_seed);
  read_field(j, "train_count", c.train_count);
  read_field(j, "heldout_count", c.heldout_count);
  read_field(j, "data_dir", c.data_dir);
  read_field(j, "head_path", c.head_path);
  read_field(j, "output_dir", c.output_dir);
  c.validate();
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config " + path.string());
  try {
    return run_config_from_json(json::parse(is));
  } catch (const json::exception& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

double epoch_mask_p(const MaskStrategy& strategy, int epoch, int epochs) {
  // The ramp ends on the last epoch, so the final epoch sees p_end.
  return progressive_p(epoch, std::max(1, epochs - 1), strategy);
}

// Models and checkpoints.

Matrix generate(const PriorModel& model, const Matrix& video) {
  if (model.mode == ObjectiveMode::continuous) return infer(model.params, video);
  Binder bind(false);
  const PriorOutput out = prior_forward(bind, model.params, video, nullptr, 1.0, nullptr);
  const Matrix& logits = out.class_logits.value();
  Matrix z(logits.rows(), model.codebook.cols());
  for (Index t = 0; t < logits.rows(); ++t) {
    Index k = 0;
    logits.row(t).maxCoeff(&k);
    z.row(t) = model.codebook.row(k);
  }
  return z;
}

std::uint64_t prior_checksum(const PriorModel& model) {
  NamedArrays arrays = to_named(const_cast<PriorParams&>(model.params), "prior");
  if (model.mode == ObjectiveMode::discrete) arrays.push_back({"codebook", model.codebook});
  return checksum(arrays);
}

void save_prior(const PriorModel& model, const fs::path& path) {
  NamedArrays arrays = to_named(const_cast<PriorParams&>(model.params), "prior");
  if (model.mode == ObjectiveMode::discrete) arrays.push_back({"codebook", model.codebook});
  write_container(path, arrays);
  std::ofstream os(path.string() + ".json", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write prior sidecar for " + path.string());
  os << json{{"config", prior_config_json(model.params.config)},
             {"mode", to_string(model.mode)},
             {"checksum", hex(checksum(arrays))}}
            .dump(2)
     << '\n';
}

PriorModel load_prior(const fs::path& path) {
  std::ifstream is(path.string() + ".json");
  if (!is) throw std::runtime_error("missing prior sidecar " + path.string() + ".json");
  const json side = json::parse(is);
  PriorModel model;
  model.params = init_prior(prior_config_from(side.at("config")), 0);
  model.mode = objective_mode_from_string(side.at("mode").get<std::string>());
  const NamedArrays arrays = read_container(path);
  load_named(model.params, "prior", arrays);
  if (model.mode == ObjectiveMode::discrete) {
    auto it = std::find_if(arrays.begin(), arrays.end(),
                           [](const NamedArray& a) { return a.name == "codebook"; });
    if (it == arrays.end()) throw FormatError(path.string() + ": discrete checkpoint lacks a codebook");
    model.codebook = it->value;
  }
  if (hex(prior_checksum(model)) != side.at("checksum").get<std::string>()) {
    throw FormatError(path.string() + ": checksum mismatch");
  }
  return model;
}

// Run log.

std::vector<json> RunLog::records() const {
  std::vector<json> out;
  out.push_back({{"event", "config"}, {"config", config}, {"checksums_before", checksums_json(before)}});
  for (const auto& e : epochs) {
    out.push_back({{"event", "epoch"},
                   {"epoch", e.epoch},
                   {"p", e.p},
                   {"lr_first", e.lr_first},
                   {"lr_last", e.lr_last},
                   {"loss_total", e.loss_total},
                   {"loss_cosine", e.loss_cosine},
                   {"loss_mse", e.loss_mse},
                   {"heldout_wer", e.heldout_wer},
                   {"timing", {{"seconds", e.seconds}}}});
  }
  out.push_back({{"event", "final"},
                 {"best_epoch", best_epoch},
                 {"best_wer", best_wer},
                 {"checksums_after", checksums_json(after)},
                 {"frozen_unchanged", before == after},
                 {"timing", {{"train_seconds", train_seconds}}}});
  return out;
}

void RunLog::write(const fs::path& path) const {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write run log " + path.string());
  for (const auto& r : records()) os << r.dump() << '\n';
}

json strip_timing(json record) {
  record.erase("timing");
  return record;
}

// Training.

std::string transcribe(const PriorModel& model, const AsrHeadParams& head, const Matrix& video) {
  return transcript_of(greedy_ctc_decode(asr_logits(head, generate(model, video))).symbols);
}

int evaluation_threads() {
  if (const char* env = std::getenv("L2V_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

double heldout_wer(const PriorModel& model, const AsrHeadParams& head,
                   const std::vector<Utterance>& utterances) {
  if (utterances.empty()) throw std::invalid_argument("heldout_wer: no utterances");
  std::vector<int> errors(utterances.size(), 0);
  parallel_for(utterances.size(), [&](std::size_t i) {
    const Utterance& u = utterances[i];
    errors[i] = edit_distance(transcribe(model, head, u.video), u.transcript).errors();
  });
  long e = 0;
  long w = 0;
  for (std::size_t i = 0; i < utterances.size(); ++i) {
    e += errors[i];
    w += words_of(utterances[i].transcript);
  }
  return static_cast<double>(e) / static_cast<double>(w);
}

PriorLoss prior_loss(Binder& bind, const PriorModel& model, const AsrHeadParams& head,
                     const Utterance& u, const ObjectiveConfig& objective, double p,
                     MaskSampler* sampler, const LossTargets& targets) {
  const bool discrete = objective.mode == ObjectiveMode::discrete;
  const PriorOutput out = prior_forward(bind, model.params, u.video, &u.audio, p, sampler);
  PriorLoss loss;
  ad::Var generated = out.latents;
  if (discrete) {
    const Labels indices = targets.indices ? *targets.indices : quantize(u.audio, model.codebook);
    loss.main = ce_index_loss(out.class_logits, indices);
    // Expected codebook row under the classifier, so the logit term stays differentiable.
    generated = ad::matmul(ad::softmax_rows(out.class_logits), ad::constant(model.codebook));
  } else {
    loss.main = cosine_loss(out.latents, ad::constant(u.audio), objective.normalize);
  }
  loss.total = loss.main;
  if (objective.alpha > 0.0) {
    Binder frozen(false);
    const Matrix target = targets.logits ? *targets.logits : asr_logits(head, u.audio);
    loss.mse = mse_logits_loss(asr_logits(frozen, head, generated), ad::constant(target));
    loss.total = loss.main + objective.alpha * loss.mse;
  }
  return loss;
}

TrainResult train_prior(const RunConfig& config, const World& world,
                        const std::vector<Utterance>& train, const std::vector<Utterance>& heldout,
                        const AsrHeadParams& head,
                        const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  if (train.empty() || heldout.empty()) throw std::invalid_argument("train_prior: empty split");
  verify_frozen(head);
  if (head.config.audio_dim != config.prior.audio_dim) {
    throw ShapeError("train_prior: head and prior disagree on the audio latent width");
  }
  const auto start = Clock::now();
  const bool discrete = config.objective.mode == ObjectiveMode::discrete;
  const bool use_mse = config.objective.alpha > 0.0;

  TrainResult result;
  RunLog& log = result.log;
  log.config = to_json(config);
  log.before = {world_checksum(world), content_checksum(head)};

  PriorModel model;
  model.mode = config.objective.mode;
  PriorConfig prior_config = config.prior;
  if (discrete) {
    prior_config.codebook_size = world.embeddings.rows();
    model.codebook = world.embeddings;
  }
  model.params = init_prior(prior_config, config.seed);

  // Frozen targets are computed once; the head never sees a trainable binder.
  std::vector<Matrix> logit_targets(train.size());
  std::vector<Labels> index_targets(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (use_mse) logit_targets[i] = asr_logits(head, train[i].audio);
    if (discrete) index_targets[i] = quantize(train[i].audio, model.codebook);
  }

  std::vector<Matrix*> weights = param_pointers(model.params, "prior");
  AdamWState state = make_adamw_state(weights, config.adamw);
  const int steps_per_epoch = static_cast<int>(
      (train.size() + static_cast<std::size_t>(config.batch_size) - 1) / static_cast<std::size_t>(config.batch_size));
  const LrSchedule schedule{config.max_lr, config.warmup_epochs, config.epochs, steps_per_epoch};

  std::vector<std::size_t> order(train.size());
  std::vector<Matrix> grads(weights.size());
  double best = std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto epoch_start = Clock::now();
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(config.seed * 1000003ULL + static_cast<std::uint64_t>(epoch));
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.p = epoch_mask_p(config.mask, epoch, config.epochs);
    rec.lr_first = lr_at(state.step + 1, schedule);
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t stop = std::min(order.size(), first + static_cast<std::size_t>(config.batch_size));
      const double inv = 1.0 / static_cast<double>(stop - first);
      Binder bind(true);
      try {
        for (std::size_t k = first; k < stop; ++k) {
          const std::size_t i = order[k];
          const Utterance& u = train[i];
          MaskSampler sampler(config.mask_seed, i, static_cast<std::uint64_t>(epoch));
          const LossTargets targets{use_mse ? &logit_targets[i] : nullptr,
                                    discrete ? &index_targets[i] : nullptr};
          const PriorLoss loss =
              prior_loss(bind, model, head, u, config.objective, rec.p, &sampler, targets);
          const ad::Var& total = loss.total;
          if (use_mse) rec.loss_mse += loss.mse.scalar();
          rec.loss_cosine += loss.main.scalar();
          rec.loss_total += total.scalar();
          ad::backward(inv * total);
        }
        for (std::size_t w = 0; w < weights.size(); ++w) grads[w] = bind.grad(*weights[w]);
        rec.lr_last = lr_at(state.step + 1, schedule);
        adamw_step(weights, grads, state, rec.lr_last);
      } catch (const NumericError& e) {
        throw NumericError("train_prior: step " + std::to_string(state.step + 1) + " (epoch " +
                           std::to_string(epoch) + "): " + e.what());
      }
    }
    const double n = static_cast<double>(train.size());
    rec.loss_total /= n;
    rec.loss_cosine /= n;
    rec.loss_mse /= n;
    rec.heldout_wer = heldout_wer(model, head, heldout);
    if (rec.heldout_wer < best) {
      best = rec.heldout_wer;
      result.best = model;
      log.best_epoch = epoch;
    }
    rec.seconds = seconds_since(epoch_start);
    log.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  log.best_wer = best;
  log.after = {world_checksum(world), content_checksum(head)};
  log.train_seconds = seconds_since(start);
  verify_frozen(head);
  if (!(log.after == log.before)) {
    throw FrozenError("train_prior: frozen component checksum changed during training");
  }
  return result;
}

// Evaluation.

std::vector<Utterance> load_split(const Manifest& manifest, const std::string& split) {
  std::vector<Utterance> out;
  for (const ManifestRecord* r : manifest.split(split)) out.push_back(load_utterance(manifest, *r, true));
  if (out.empty()) throw std::invalid_argument("dataset has no '" + split + "' utterances");
  return out;
}

WERReport evaluate(const PriorModel& model, const AsrHeadParams& head, const Manifest& manifest,
                   const std::string& split) {
  const Manifest stripped = video_only(manifest);
  const auto records = stripped.split(split);
  if (records.empty()) throw std::invalid_argument("evaluate: no '" + split + "' records");
  std::vector<UtteranceScore> scores(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const ManifestRecord& r = *records[i];
    const Utterance u = load_utterance(stripped, r, false);
    scores[i] = score_utterance(r.id, transcribe(model, head, u.video), r.transcript, r.duration);
  });
  return corpus_stats(std::move(scores), kDefaultBucketEdges);
}

WERReport evaluate_audio(const AsrHeadParams& head, const Manifest& manifest, const std::string& split) {
  const auto records = manifest.split(split);
  if (records.empty()) throw std::invalid_argument("evaluate_audio: no '" + split + "' records");
  std::vector<UtteranceScore> scores(records.size());
  parallel_for(records.size(), [&](std::size_t i) {
    const ManifestRecord& r = *records[i];
    const Utterance u = load_utterance(manifest, r, true);
    const auto hyp = transcript_of(greedy_ctc_decode(asr_logits(head, u.audio)).symbols);
    scores[i] = score_utterance(r.id, hyp, r.transcript, r.duration);
  });
  return corpus_stats(std::move(scores), kDefaultBucketEdges);
}

// Ablations.

std::vector<MaskStrategy> default_mask_arms() {
  return {MaskStrategy::none(), MaskStrategy::fixed(0.5), MaskStrategy::fixed(0.8),
          MaskStrategy::fixed(1.0), MaskStrategy::progressive()};
}

const AblationRow& AblationTable::row(const std::string& arm, std::uint64_t seed) const {
  for (const auto& r : rows) {
    if (r.arm == arm && r.seed == seed) return r;
  }
  throw std::out_of_range("ablation table has no row " + arm + " / seed " + std::to_string(seed));
}

json AblationTable::to_json() const {
  json out = json::array();
  for (const auto& r : rows) {
    out.push_back({{"arm", r.arm},
                   {"seed", r.seed},
                   {"alpha", r.alpha},
                   {"wer", r.wer},
                   {"best_epoch", r.best_epoch},
                   {"epochs_to_threshold", r.epochs_to_threshold},
                   {"curve", r.curve}});
  }
  return json{{"kind", kind}, {"rows", out}};
}

int epochs_to_threshold(const std::vector<double>& curve, double threshold) {
  for (std::size_t e = 0; e < curve.size(); ++e) {
    if (curve[e] <= threshold) return static_cast<int>(e) + 1;
  }
  return static_cast<int>(curve.size()) + 1;
}

void assign_convergence(AblationTable& table) {
  std::set<std::uint64_t> seeds;
  for (const auto& r : table.rows) seeds.insert(r.seed);
  for (std::uint64_t s : seeds) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : table.rows) {
      if (r.seed == s) best = std::min(best, r.wer);
    }
    for (auto& r : table.rows) {
      if (r.seed == s) r.epochs_to_threshold = epochs_to_threshold(r.curve, 1.2 * best);
    }
  }
}

namespace {

AblationRow run_arm(const RunConfig& cfg, const AblationData& data, const std::string& arm) {
  if (!data.world || !data.train || !data.heldout || !data.head) {
    throw std::invalid_argument("ablation: incomplete data");
  }
  const TrainResult r = train_prior(cfg, *data.world, *data.train, *data.heldout, *data.head);
  AblationRow row;
  row.arm = arm;
  row.seed = cfg.seed;
  row.alpha = cfg.objective.alpha;
  row.wer = r.log.best_wer;
  row.best_epoch = r.log.best_epoch;
  for (const auto& e : r.log.epochs) row.curve.push_back(e.heldout_wer);
  return row;
}

RunConfig seeded_config(const RunConfig& base, std::uint64_t seed) {
  RunConfig cfg = base;
  cfg.seed = seed;
  cfg.mask_seed = seed + 7919;
  return cfg;
}

}  // namespace

AblationTable ablate_masking(const RunConfig& base, const AblationData& data,
                             const std::vector<std::uint64_t>& seeds,
                             const std::vector<MaskStrategy>& arms, const ArmCallback& on_arm) {
  AblationTable table{"masking", {}};
  for (std::uint64_t seed : seeds) {
    for (const auto& arm : arms) {
      RunConfig cfg = seeded_config(base, seed);
      cfg.mask = arm;
      table.rows.push_back(run_arm(cfg, data, arm.label()));
      if (on_arm) on_arm(table.rows.back());
    }
  }
  assign_convergence(table);
  return table;
}

AblationTable ablate_alpha(const RunConfig& base, const AblationData& data,
                           const std::vector<std::uint64_t>& seeds, const std::vector<double>& alphas,
                           const ArmCallback& on_arm) {
  AblationTable table{"alpha", {}};
  for (std::uint64_t seed : seeds) {
    for (double alpha : alphas) {
      RunConfig cfg = seeded_config(base, seed);
      cfg.objective.alpha = alpha;
      json label = alpha;
      table.rows.push_back(run_arm(cfg, data, "alpha=" + label.dump()));
      if (on_arm) on_arm(table.rows.back());
    }
  }
  assign_convergence(table);
  return table;
}

}  // namespace l2v
