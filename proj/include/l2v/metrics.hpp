// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace l2v {

/** Splits on single spaces, case-sensitive; empty pieces are dropped. */
std::vector<std::string> tokenize(const std::string& text);

struct EditCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;

  int errors() const { return substitutions + deletions + insertions; }
  bool operator==(const EditCounts&) const = default;
};

/**
 * Unit-cost Levenshtein alignment of hyp against ref. Among minimal alignments
 * the backtrace prefers substitution, then deletion, then insertion.
 */
EditCounts edit_distance(std::span<const std::string> hyp, std::span<const std::string> ref);
EditCounts edit_distance(const std::string& hyp, const std::string& ref);

/** (S + D + I) / N; throws std::invalid_argument for an empty reference. */
double wer(const std::string& hyp, const std::string& ref);

struct UtteranceScore {
  std::string id;
  EditCounts counts;
  int ref_words = 0;
  double duration = 0.0;  // seconds
  std::string hypothesis;
  std::string reference;

  double wer() const { return static_cast<double>(counts.errors()) / ref_words; }
};

UtteranceScore score_utterance(const std::string& id, const std::string& hyp,
                               const std::string& ref, double duration);

struct LengthBucket {
  double lo = 0.0;
  double hi = 0.0;  // +inf for the last bucket
  int utterances = 0;
  int ref_words = 0;
  int errors = 0;

  double wer() const { return static_cast<double>(errors) / ref_words; }
  std::string label() const;
};

inline const std::vector<double> kDefaultBucketEdges{2.0, 4.0, 6.0};

/** Buckets [0,e0), [e0,e1), ..., [e_last, inf); empty buckets are nullopt. */
std::vector<std::optional<LengthBucket>> bucket_by_length(
    std::span<const UtteranceScore> scores, std::span<const double> edges = kDefaultBucketEdges);

/** Consistency-aware aggregate: mu * (1 + sigma). */
inline double rank_metric(double mu, double sigma) { return mu * (1.0 + sigma); }

struct WERReport {
  std::vector<UtteranceScore> per_utterance;
  double wer = 0.0;    // word-weighted mean: sum(errors) / sum(N)
  double sigma = 0.0;  // word-weighted standard deviation of per-utterance WER
  double rank = 0.0;
  std::vector<double> bucket_edges;
  std::vector<std::optional<LengthBucket>> buckets;
};

/** Throws std::invalid_argument for an empty score list. */
WERReport corpus_stats(std::vector<UtteranceScore> scores,
                       std::span<const double> edges = kDefaultBucketEdges);

nlohmann::json to_json(const WERReport& report);
WERReport report_from_json(const nlohmann::json& j);

}  // namespace l2v
