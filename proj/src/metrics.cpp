// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/metrics.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace l2v {

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> words;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t end = text.find(' ', start);
    const std::size_t stop = end == std::string::npos ? text.size() : end;
    if (stop > start) words.push_back(text.substr(start, stop - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return words;
}

EditCounts edit_distance(std::span<const std::string> hyp, std::span<const std::string> ref) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  // cost[i][j]: aligning ref[0..i) with hyp[0..j).
  std::vector<std::vector<int>> cost(n + 1, std::vector<int>(m + 1, 0));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }

  EditCounts c;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        if (!same) ++c.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++c.deletions;
      --i;
    } else {
      ++c.insertions;
      --j;
    }
  }
  return c;
}

EditCounts edit_distance(const std::string& hyp, const std::string& ref) {
  const auto h = tokenize(hyp);
  const auto r = tokenize(ref);
  return edit_distance(h, r);
}

double wer(const std::string& hyp, const std::string& ref) {
  const auto r = tokenize(ref);
  if (r.empty()) throw std::invalid_argument("wer: empty reference");
  const auto h = tokenize(hyp);
  return static_cast<double>(edit_distance(h, r).errors()) / static_cast<double>(r.size());
}

UtteranceScore score_utterance(const std::string& id, const std::string& hyp,
                               const std::string& ref, double duration) {
  const auto r = tokenize(ref);
  if (r.empty()) throw std::invalid_argument("score: empty reference for " + id);
  const auto h = tokenize(hyp);
  return UtteranceScore{id, edit_distance(h, r), static_cast<int>(r.size()), duration, hyp, ref};
}

std::string LengthBucket::label() const {
  std::ostringstream os;
  os << "[" << lo << ",";
  if (std::isinf(hi)) {
    os << "inf)";
  } else {
    os << hi << ")";
  }
  return os.str();
}

std::vector<std::optional<LengthBucket>> bucket_by_length(std::span<const UtteranceScore> scores,
                                                          std::span<const double> edges) {
  std::vector<LengthBucket> all;
  double lo = 0.0;
  for (double e : edges) {
    all.push_back(LengthBucket{lo, e});
    lo = e;
  }
  all.push_back(LengthBucket{lo, std::numeric_limits<double>::infinity()});

  for (const auto& s : scores) {
    if (!(s.duration >= 0.0)) throw std::invalid_argument("bucket_by_length: negative duration");
    for (auto& b : all) {
      if (s.duration >= b.lo && s.duration < b.hi) {
        b.utterances += 1;
        b.ref_words += s.ref_words;
        b.errors += s.counts.errors();
        break;
      }
    }
  }
  std::vector<std::optional<LengthBucket>> out;
  for (const auto& b : all) {
    if (b.utterances > 0) {
      out.emplace_back(b);
    } else {
      out.emplace_back(std::nullopt);
    }
  }
  return out;
}

WERReport corpus_stats(std::vector<UtteranceScore> scores, std::span<const double> edges) {
  if (scores.empty()) throw std::invalid_argument("corpus_stats: no scores");
  double words = 0.0;
  double errors = 0.0;
  for (const auto& s : scores) {
    if (s.ref_words <= 0) throw std::invalid_argument("corpus_stats: empty reference for " + s.id);
    words += s.ref_words;
    errors += s.counts.errors();
  }
  WERReport r;
  r.wer = errors / words;
  double var = 0.0;
  for (const auto& s : scores) var += s.ref_words * std::pow(s.wer() - r.wer, 2);
  r.sigma = std::sqrt(var / words);
  r.rank = rank_metric(r.wer, r.sigma);
  r.bucket_edges.assign(edges.begin(), edges.end());
  r.buckets = bucket_by_length(scores, edges);
  r.per_utterance = std::move(scores);
  return r;
}

nlohmann::json to_json(const WERReport& report) {
  using nlohmann::json;
  json per = json::array();
  for (const auto& s : report.per_utterance) {
    per.push_back({{"id", s.id},
                   {"substitutions", s.counts.substitutions},
                   {"deletions", s.counts.deletions},
                   {"insertions", s.counts.insertions},
                   {"ref_words", s.ref_words},
                   {"duration", s.duration},
                   {"wer", s.wer()},
                   {"hypothesis", s.hypothesis},
                   {"reference", s.reference}});
  }
  json buckets = json::object();
  for (const auto& b : report.buckets) {
    if (!b) continue;
    buckets[b->label()] = {{"utterances", b->utterances},
                           {"ref_words", b->ref_words},
                           {"errors", b->errors},
                           {"wer", b->wer()}};
  }
  return json{{"per_utterance", per},
              {"wer", report.wer},
              {"sigma", report.sigma},
              {"rank", report.rank},
              {"buckets", buckets},
              {"bucket_edges", report.bucket_edges},
              {"weighting", "sigma weighted by reference word counts, as the mean"}};
}

WERReport report_from_json(const nlohmann::json& j) {
  std::vector<UtteranceScore> scores;
  for (const auto& u : j.at("per_utterance")) {
    UtteranceScore s;
    s.id = u.at("id").get<std::string>();
    s.counts.substitutions = u.at("substitutions").get<int>();
    s.counts.deletions = u.at("deletions").get<int>();
    s.counts.insertions = u.at("insertions").get<int>();
    s.ref_words = u.at("ref_words").get<int>();
    s.duration = u.at("duration").get<double>();
    s.hypothesis = u.value("hypothesis", "");
    s.reference = u.value("reference", "");
    scores.push_back(std::move(s));
  }
  std::vector<double> edges = j.value("bucket_edges", kDefaultBucketEdges);
  return corpus_stats(std::move(scores), edges);
}

}  // namespace l2v
