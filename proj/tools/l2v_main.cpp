// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

// Command-line front end: data generation, head and prior training,
// evaluation, ablations, and the decode benchmark.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "l2v/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace l2v;

namespace {

/** Writes through a sibling temporary so a failed run never leaves a partial file. */
void write_atomically(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << text;
    if (!os) throw std::runtime_error("write failed for " + path.string());
  }
  fs::rename(tmp, path);
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return json::parse(is);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (!piece.empty()) seeds.push_back(std::stoull(piece));
  }
  if (seeds.empty()) throw CLI::ValidationError("--seeds", "expected a comma-separated list");
  return seeds;
}

struct GenArgs {
  std::uint64_t seed = 1;
  int count = 0;
  int heldout = -1;
  std::string out;
  std::string world_config;
  bool noiseless = false;
  bool homophemes = false;
};

int gen_data(const GenArgs& a) {
  WorldConfig wc = a.world_config.empty() ? WorldConfig{} : world_config_from_json(read_json(a.world_config));
  wc.seed = a.seed;
  if (a.noiseless) wc.sigma_audio = wc.sigma_video = 0.0;
  if (a.homophemes) wc.homophemes = default_homophemes();
  const World world = gen_world(wc);
  const int heldout = a.heldout >= 0 ? a.heldout : std::max(1, a.count / 10);
  std::vector<Utterance> utts = gen_utterances(world, 0, a.count, "train");
  for (auto& u : gen_utterances(world, static_cast<std::uint64_t>(a.count), heldout, "heldout")) {
    utts.push_back(std::move(u));
  }
  if (a.noiseless) {
    for (const auto& u : utts) {
      if (quantize(u.audio, world.embeddings) != u.frame_labels) {
        throw std::logic_error("noiseless check failed for " + u.id);
      }
    }
  }
  write_dataset(a.out, world, utts);
  std::cout << json{{"out", a.out},
                    {"train", a.count},
                    {"heldout", heldout},
                    {"world_checksum", checksum_hex(world_checksum(world))}}
                   .dump()
            << '\n';
  return 0;
}

std::vector<HeadExample> examples_of(const std::vector<Utterance>& utts) {
  std::vector<HeadExample> out;
  for (const auto& u : utts) out.push_back({&u.audio, u.symbols, u.transcript});
  return out;
}

int train_asr(const std::string& data, const std::string& out, const std::string& config,
              std::string log_path) {
  const Dataset ds = read_dataset(data);
  AsrHeadConfig hc;
  HeadTrainConfig tc;
  if (!config.empty()) {
    const json j = read_json(config);
    if (j.contains("head")) hc = asr_head_config_from_json(j["head"]);
    if (j.contains("train")) tc = head_train_config_from_json(j["train"]);
  }
  hc.audio_dim = ds.world.config.audio_dim;
  hc.vocabulary = ds.world.config.classes();
  const auto train = load_split(ds.manifest, "train");
  const auto heldout = load_split(ds.manifest, "heldout");
  if (log_path.empty()) log_path = out + ".log.jsonl";
  std::ofstream log(log_path, std::ios::trunc);
  log << json{{"event", "config"}, {"head", to_json(hc)}, {"train", to_json(tc)}}.dump() << '\n';
  std::vector<HeadEpochLog> epochs;
  AsrHeadParams head;
  try {
    head = train_frozen_head(examples_of(train), examples_of(heldout), hc, tc, &epochs,
                             [&](const HeadEpochLog& e) {
                               const json rec{{"event", "epoch"}, {"epoch", e.epoch}, {"loss", e.loss},
                                              {"heldout_wer", e.heldout_wer}};
                               log << rec.dump() << '\n' << std::flush;
                               std::cerr << rec.dump() << '\n';
                             });
  } catch (const TrainingError& e) {
    log << json{{"event", "failed"}, {"error", e.what()}}.dump() << '\n';
    throw;
  }
  save_head(head, out);
  const json final{{"event", "final"},
                   {"heldout_wer", epochs.back().heldout_wer},
                   {"epochs", epochs.size()},
                   {"checksum", checksum_hex(head.checksum)}};
  log << final.dump() << '\n';
  std::cout << final.dump() << '\n';
  return 0;
}

int train_prior_cmd(const std::string& config, const std::string& data, const std::string& head_path,
                    const std::string& out, std::string log_path) {
  RunConfig cfg = load_run_config(config);
  const Dataset ds = read_dataset(data);
  cfg.world = ds.world.config;
  cfg.validate();
  const AsrHeadParams head = load_head(head_path);
  const auto train = load_split(ds.manifest, "train");
  const auto heldout = load_split(ds.manifest, "heldout");
  const TrainResult r = train_prior(cfg, ds.world, train, heldout, head, [](const EpochRecord& e) {
    std::cerr << json{{"epoch", e.epoch}, {"p", e.p}, {"loss", e.loss_total},
                      {"heldout_wer", e.heldout_wer}}
                     .dump()
              << '\n';
  });
  save_prior(r.best, out);
  if (log_path.empty()) log_path = out + ".log.jsonl";
  r.log.write(log_path);
  std::cout << r.log.records().back().dump() << '\n';
  return 0;
}

int eval_cmd(const std::string& ckpt, const std::string& head_path, const std::string& data,
             const std::string& report, const std::string& split, bool audio) {
  const PriorModel model = audio ? PriorModel{} : load_prior(ckpt);
  const AsrHeadParams head = load_head(head_path);
  const Dataset ds = read_dataset(data, audio);
  const WERReport r = audio ? evaluate_audio(head, ds.manifest, split) : evaluate(model, head, ds.manifest, split);
  json j = to_json(r);
  j["mode"] = audio ? "audio-diagnostic" : "video";
  write_atomically(report, j.dump(2) + "\n");
  std::cout << json{{"wer", r.wer}, {"sigma", r.sigma}, {"rank", r.rank},
                    {"utterances", r.per_utterance.size()}}
                   .dump()
            << '\n';
  return 0;
}

int ablate_cmd(const std::string& kind, const std::string& config, std::string data,
               std::string head_path, const std::string& seeds_text, const std::string& out) {
  RunConfig cfg = load_run_config(config);
  if (data.empty()) data = cfg.data_dir;
  if (head_path.empty()) head_path = cfg.head_path;
  if (data.empty() || head_path.empty()) {
    throw CLI::ValidationError("ablate", "needs --data and --head (or data_dir/head_path in the config)");
  }
  const Dataset ds = read_dataset(data);
  cfg.world = ds.world.config;
  const AsrHeadParams head = load_head(head_path);
  const auto train = load_split(ds.manifest, "train");
  const auto heldout = load_split(ds.manifest, "heldout");
  const AblationData d{&ds.world, &train, &heldout, &head};
  const auto seeds = parse_seeds(seeds_text);
  auto progress = [](const AblationRow& r) {
    std::cerr << json{{"arm", r.arm}, {"seed", r.seed}, {"wer", r.wer}}.dump() << '\n';
  };
  AblationTable table;
  if (kind == "masking") {
    table = ablate_masking(cfg, d, seeds, default_mask_arms(), progress);
  } else {
    table = ablate_alpha(cfg, d, seeds, kDefaultAlphas, progress);
  }
  const std::string text = table.to_json().dump(2) + "\n";
  if (!out.empty()) write_atomically(out, text);
  std::cout << text;
  return 0;
}

int bench_cmd(const std::string& ckpt, const std::string& head_path, int frames, int reps,
              const std::string& out) {
  const PriorModel model = load_prior(ckpt);
  const AsrHeadParams head = load_head(head_path);
  BenchConfig bc;
  bc.frames = frames;
  bc.repetitions = reps;
  const std::string text = bench_decode(model, head, bc).to_json().dump(2) + "\n";
  if (!out.empty()) write_atomically(out, text);
  std::cout << text;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"l2v: video-to-audio latent prior toolkit"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "generate a synthetic paired-latent dataset");
  g->add_option("--seed", gen.seed, "world and utterance master seed");
  g->add_option("--count", gen.count, "training utterances")->required()->check(CLI::PositiveNumber);
  g->add_option("--heldout", gen.heldout, "held-out utterances (default count/10)");
  g->add_option("--out", gen.out, "output directory")->required();
  g->add_option("--world", gen.world_config, "world config JSON");
  g->add_flag("--noiseless", gen.noiseless, "zero latent noise and verify exact recoverability");
  g->add_flag("--homophemes", gen.homophemes, "collapse b/a and d/c in the video view");

  std::string data, out, config, head, ckpt, report, log, split = "heldout", kind, seeds = "1";
  bool audio = false;
  int frames = 100;
  int reps = 15;

  auto* ta = app.add_subcommand("train-asr", "train and freeze the CTC head on audio latents");
  ta->add_option("--data", data, "dataset directory")->required();
  ta->add_option("--out", out, "head checkpoint path")->required();
  ta->add_option("--config", config, "JSON with optional 'head' and 'train' objects");
  ta->add_option("--log", log, "training log (default OUT.log.jsonl)");

  auto* tp = app.add_subcommand("train-prior", "train the prior against the frozen head");
  tp->add_option("--config", config, "run config JSON")->required();
  tp->add_option("--data", data, "dataset directory")->required();
  tp->add_option("--head", head, "frozen head checkpoint")->required();
  tp->add_option("--out", out, "prior checkpoint path")->required();
  tp->add_option("--log", log, "run log (default OUT.log.jsonl)");

  auto* ev = app.add_subcommand("eval", "video-only evaluation of a prior checkpoint");
  ev->add_option("--ckpt", ckpt, "prior checkpoint")->required();
  ev->add_option("--head", head, "frozen head checkpoint")->required();
  ev->add_option("--data", data, "dataset directory")->required();
  ev->add_option("--report", report, "report JSON path")->required();
  ev->add_option("--split", split, "manifest split to score");
  ev->add_flag("--audio-diagnostic", audio, "decode true audio latents through the head instead");

  auto* ab = app.add_subcommand("ablate", "masking-strategy or alpha ablation");
  ab->add_option("--kind", kind, "masking or alpha")->required()->check(CLI::IsMember({"masking", "alpha"}));
  ab->add_option("--config", config, "base run config JSON")->required();
  ab->add_option("--data", data, "dataset directory");
  ab->add_option("--head", head, "frozen head checkpoint");
  ab->add_option("--seeds", seeds, "comma-separated run seeds");
  ab->add_option("--out", out, "table JSON path");

  auto* be = app.add_subcommand("bench", "CTC vs autoregressive decode latency");
  be->add_option("--ckpt", ckpt, "prior checkpoint")->required();
  be->add_option("--head", head, "frozen head checkpoint")->required();
  be->add_option("--frames", frames, "video frames per utterance")->check(CLI::Range(2, 100000));
  be->add_option("--repetitions", reps, "timed repetitions")->check(CLI::PositiveNumber);
  be->add_option("--out", out, "result JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 1;
  }

  try {
    if (*g) return gen_data(gen);
    if (*ta) return train_asr(data, out, config, log);
    if (*tp) return train_prior_cmd(config, data, head, out, log);
    if (*ev) return eval_cmd(ckpt, head, data, report, split, audio);
    if (*ab) return ablate_cmd(kind, config, data, head, seeds, out);
    if (*be) return bench_cmd(ckpt, head, frames, reps, out);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
