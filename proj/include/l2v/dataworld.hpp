// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "l2v/container.hpp"

namespace l2v {

// Synthetic paired-latent world. Each symbol (and the blank) owns an
// orthonormal audio embedding; audio latents are noisy embeddings at 50 Hz,
// video latents a half-rate tanh view of the clean embedding path. Homophemes
// share one video embedding but keep distinct audio embeddings.

struct WorldConfig {
  int vocab = 8;  // symbols, excluding the blank
  Index audio_dim = 16;
  Index video_dim = 24;
  int duration_min = 3;  // audio frames per symbol
  int duration_max = 8;
  int gap_min = 0;  // blank frames between symbols
  int gap_max = 2;
  double sigma_audio = 0.05;
  double sigma_video = 0.05;
  int length_min = 3;  // symbols per transcript
  int length_max = 12;
  /** (symbol, representative): the symbol renders the representative's lip view. */
  std::vector<std::pair<int, int>> homophemes;
  std::uint64_t seed = 1;

  void validate() const;
  int classes() const { return vocab + 1; }
};

/** Symbol pairs collapsed in the video view by --homophemes: b looks like a, d like c. */
std::vector<std::pair<int, int>> default_homophemes();

nlohmann::json to_json(const WorldConfig& c);
WorldConfig world_config_from_json(const nlohmann::json& j);

struct World {
  WorldConfig config;
  Matrix embeddings;  // (V+1) x D_a, orthonormal rows, row 0 = blank
  Matrix video_map;   // D_v x D_a, unit spectral norm (power-iteration estimate)
  std::vector<int> video_class;  // symbol -> representative used by the video view
};

/** Throws std::invalid_argument when V + 1 > D_a (orthonormal rows infeasible). */
World gen_world(const WorldConfig& config);
NamedArrays world_arrays(const World& world);
std::uint64_t world_checksum(const World& world);

std::string symbol_name(int symbol);
int symbol_from_name(const std::string& name);
std::string transcript_of(std::span<const int> symbols);
Labels symbols_of(const std::string& transcript);

struct Utterance {
  std::string id;
  std::string transcript;
  Labels symbols;
  Labels frame_labels;  // audio-rate label path, blank = 0
  Matrix audio;         // Ta x D_a @ 50 Hz
  Matrix video;         // Tv x D_v @ 25 Hz, Ta = 2 Tv
  std::optional<Matrix> logits;
  std::string split = "train";

  double duration() const { return static_cast<double>(audio.rows()) / 50.0; }
};

/** Seed of the utterance with the given index; depends only on (master seed, index). */
std::uint64_t utterance_seed(std::uint64_t master_seed, std::uint64_t index);
std::string utterance_id(std::uint64_t index);

/** Samples a transcript and its frame path (odd paths get one trailing blank). */
Labels sample_frame_path(const WorldConfig& config, std::mt19937_64& rng);

/** Renders latents for a given frame path, drawing noise from `rng`. */
Utterance synthesize(const World& world, std::string id, Labels frame_labels, std::mt19937_64& rng);

Utterance gen_utterance(const World& world, std::uint64_t seed, std::string id);

/** Utterances with indices [first, first + count), tagged with `split`. */
std::vector<Utterance> gen_utterances(const World& world, std::uint64_t first, int count,
                                      const std::string& split);

// Latent exchange file, little-endian:
//   "L2V1" | u32 dtype (0 = f32) | u32 rate_hz | u32 T | u32 D | T*D f32 row-major
struct LatentFile {
  Matrix data;
  int rate_hz = 0;
};

void write_latents(const std::filesystem::path& path, const Matrix& data, int rate_hz);
LatentFile read_latents(const std::filesystem::path& path);
/** Header-only validation: magic, dtype, and payload size; returns (T, D, rate). */
std::tuple<Index, Index, int> probe_latents(const std::filesystem::path& path);

/**
 * Records every latent file read while alive. Process-wide; at most one audit
 * may be active at a time.
 */
class LatentReadAudit {
 public:
  LatentReadAudit();
  ~LatentReadAudit();
  LatentReadAudit(const LatentReadAudit&) = delete;
  LatentReadAudit& operator=(const LatentReadAudit&) = delete;

  std::vector<std::filesystem::path> paths() const;
};

/** float32 rounding applied to every world latent so disk round trips are exact. */
Matrix round_to_f32(const Matrix& m);

struct ManifestRecord {
  std::string id;
  std::string transcript;
  std::string video;  // paths relative to the manifest directory
  std::optional<std::string> audio;
  std::optional<std::string> logits;
  double duration = 0.0;
  std::string split = "train";
  nlohmann::json extra = nlohmann::json::object();  // unknown fields, preserved verbatim
};

struct Manifest {
  std::filesystem::path root;  // directory the paths are relative to
  std::vector<ManifestRecord> records;

  std::vector<const ManifestRecord*> split(const std::string& name) const;
};

/** Writes latents/<id>.{video,audio[,logits]}.l2v under `dir` and returns their records. */
std::vector<ManifestRecord> write_utterance_files(const std::vector<Utterance>& utterances,
                                                  const std::filesystem::path& dir);
void write_manifest(const std::vector<ManifestRecord>& records, const std::filesystem::path& path);
/** Writes the utterance files and dir/manifest.jsonl. */
void write_manifest(const std::vector<Utterance>& utterances, const std::filesystem::path& dir);

/**
 * Parses JSON lines and validates ids are unique and referenced files exist
 * and carry valid headers. Errors name the offending line. With
 * `with_audio` unset, audio and logits entries are dropped unread.
 */
Manifest read_manifest(const std::filesystem::path& path, bool with_audio = true);

/** Copy of the manifest with audio and logits references removed. */
Manifest video_only(Manifest manifest);

/** Loads one record; audio is read only when `with_audio` is set. */
Utterance load_utterance(const Manifest& manifest, const ManifestRecord& record, bool with_audio);

struct Dataset {
  World world;
  Manifest manifest;
};

/** dir/world.json, dir/world.l2vc, dir/manifest.jsonl, dir/latents/. */
void write_dataset(const std::filesystem::path& dir, const World& world,
                   const std::vector<Utterance>& utterances);
Dataset read_dataset(const std::filesystem::path& dir, bool with_audio = true);

}  // namespace l2v
