// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/dataworld.hpp"

#include "l2v/prior.hpp"

#include <cstring>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

namespace l2v {

namespace fs = std::filesystem;
using nlohmann::json;

void WorldConfig::validate() const {
  if (vocab < 1) throw std::invalid_argument("world: vocab must be >= 1");
  if (vocab + 1 > audio_dim) {
    throw std::invalid_argument("world: vocab + blank (" + std::to_string(vocab + 1) +
                                ") exceeds audio_dim (" + std::to_string(audio_dim) + ")");
  }
  if (video_dim < 1) throw std::invalid_argument("world: video_dim must be >= 1");
  if (duration_min < 1 || duration_max < duration_min) {
    throw std::invalid_argument("world: bad duration range");
  }
  if (gap_min < 0 || gap_max < gap_min) throw std::invalid_argument("world: bad gap range");
  if (length_min < 1 || length_max < length_min) throw std::invalid_argument("world: bad length range");
  if (sigma_audio < 0.0 || sigma_video < 0.0) throw std::invalid_argument("world: negative noise");
  for (auto [s, rep] : homophemes) {
    if (s < 1 || s > vocab || rep < 1 || rep > vocab) {
      throw std::invalid_argument("world: homopheme symbol out of range");
    }
  }
}

std::vector<std::pair<int, int>> default_homophemes() { return {{2, 1}, {4, 3}}; }

json to_json(const WorldConfig& c) {
  json h = json::array();
  for (auto [s, rep] : c.homophemes) h.push_back({s, rep});
  return json{{"vocab", c.vocab},
              {"audio_dim", c.audio_dim},
              {"video_dim", c.video_dim},
              {"duration_min", c.duration_min},
              {"duration_max", c.duration_max},
              {"gap_min", c.gap_min},
              {"gap_max", c.gap_max},
              {"sigma_audio", c.sigma_audio},
              {"sigma_video", c.sigma_video},
              {"length_min", c.length_min},
              {"length_max", c.length_max},
              {"homophemes", h},
              {"seed", c.seed}};
}

WorldConfig world_config_from_json(const json& j) {
  WorldConfig c;
  c.vocab = j.value("vocab", c.vocab);
  c.audio_dim = j.value("audio_dim", c.audio_dim);
  c.video_dim = j.value("video_dim", c.video_dim);
  c.duration_min = j.value("duration_min", c.duration_min);
  c.duration_max = j.value("duration_max", c.duration_max);
  c.gap_min = j.value("gap_min", c.gap_min);
  c.gap_max = j.value("gap_max", c.gap_max);
  c.sigma_audio = j.value("sigma_audio", c.sigma_audio);
  c.sigma_video = j.value("sigma_video", c.sigma_video);
  c.length_min = j.value("length_min", c.length_min);
  c.length_max = j.value("length_max", c.length_max);
  c.seed = j.value("seed", c.seed);
  if (j.contains("homophemes")) {
    for (const auto& p : j.at("homophemes")) c.homophemes.emplace_back(p.at(0), p.at(1));
  }
  c.validate();
  return c;
}

namespace {

std::mt19937_64 seeded(std::uint64_t a, std::uint64_t b, std::uint32_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32), salt};
  return std::mt19937_64(seq);
}

Matrix gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

double spectral_norm_estimate(const Matrix& w) {
  Vector v = Vector::Ones(w.cols()).normalized();
  double sigma = 0.0;
  for (int it = 0; it < 200; ++it) {
    Vector u = w * v;
    Vector next = w.transpose() * u;
    const double n = next.norm();
    if (n == 0.0) return 0.0;
    v = next / n;
    sigma = std::sqrt(n);
  }
  return sigma;
}

}  // namespace

World gen_world(const WorldConfig& config) {
  config.validate();
  World w;
  w.config = config;
  auto rng = seeded(config.seed, 0, 0x776f726cU);

  // Modified Gram-Schmidt on Gaussian rows.
  Matrix e = gaussian(config.classes(), config.audio_dim, rng);
  for (Index i = 0; i < e.rows(); ++i) {
    for (Index j = 0; j < i; ++j) e.row(i) -= e.row(i).dot(e.row(j)) * e.row(j);
    e.row(i).normalize();
  }
  w.embeddings = e;

  Matrix vm = gaussian(config.video_dim, config.audio_dim, rng);
  w.video_map = vm / spectral_norm_estimate(vm);

  w.video_class.resize(static_cast<std::size_t>(config.classes()));
  for (int s = 0; s < config.classes(); ++s) w.video_class[static_cast<std::size_t>(s)] = s;
  for (auto [s, rep] : config.homophemes) w.video_class[static_cast<std::size_t>(s)] = rep;
  return w;
}

NamedArrays world_arrays(const World& world) {
  Matrix classes(1, static_cast<Index>(world.video_class.size()));
  for (std::size_t i = 0; i < world.video_class.size(); ++i) {
    classes(0, static_cast<Index>(i)) = world.video_class[i];
  }
  return {{"world/embeddings", world.embeddings},
          {"world/video_map", world.video_map},
          {"world/video_class", classes}};
}

std::uint64_t world_checksum(const World& world) { return checksum(world_arrays(world)); }

std::string symbol_name(int symbol) {
  if (symbol < 1 || symbol > 26) throw std::out_of_range("symbol index out of range");
  return std::string(1, static_cast<char>('a' + symbol - 1));
}

int symbol_from_name(const std::string& name) {
  if (name.size() != 1 || name[0] < 'a' || name[0] > 'z') {
    throw std::invalid_argument("unknown symbol '" + name + "'");
  }
  return name[0] - 'a' + 1;
}

std::string transcript_of(std::span<const int> symbols) {
  std::string out;
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out += ' ';
    out += symbol_name(symbols[i]);
  }
  return out;
}

Labels symbols_of(const std::string& transcript) {
  Labels out;
  std::istringstream is(transcript);
  std::string word;
  while (is >> word) out.push_back(symbol_from_name(word));
  return out;
}

std::uint64_t utterance_seed(std::uint64_t master_seed, std::uint64_t index) {
  auto rng = seeded(master_seed, index, 0x75747472U);
  return rng();
}

std::string utterance_id(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "utt%06llu", static_cast<unsigned long long>(index));
  return buf;
}

Labels sample_frame_path(const WorldConfig& c, std::mt19937_64& rng) {
  auto uniform = [&rng](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int length = uniform(c.length_min, c.length_max);
  Labels path;
  auto blanks = [&path](int n) { path.insert(path.end(), static_cast<std::size_t>(n), kBlank); };
  blanks(uniform(c.gap_min, c.gap_max));
  int previous = kBlank;
  for (int i = 0; i < length; ++i) {
    const int symbol = uniform(1, c.vocab);
    if (i > 0) {
      int gap = uniform(c.gap_min, c.gap_max);
      // A repeated symbol needs a separating blank to survive CTC collapse.
      if (symbol == previous) gap = std::max(gap, 1);
      blanks(gap);
    }
    path.insert(path.end(), static_cast<std::size_t>(uniform(c.duration_min, c.duration_max)),
                symbol);
    previous = symbol;
  }
  blanks(uniform(c.gap_min, c.gap_max));
  if (path.size() % 2 != 0) path.push_back(kBlank);
  return path;
}

Matrix round_to_f32(const Matrix& m) { return m.cast<float>().cast<double>(); }

namespace {

Labels collapse(const Labels& path) {
  Labels out;
  int previous = kBlank;
  for (int l : path) {
    if (l != kBlank && l != previous) out.push_back(l);
    previous = l;
  }
  return out;
}

}  // namespace

Utterance synthesize(const World& world, std::string id, Labels frame_labels, std::mt19937_64& rng) {
  const WorldConfig& c = world.config;
  if (frame_labels.empty() || frame_labels.size() % 2 != 0) {
    throw std::invalid_argument("synthesize: frame path must be non-empty and even");
  }
  const Index ta = static_cast<Index>(frame_labels.size());
  const Index tv = ta / 2;
  std::normal_distribution<double> normal(0.0, 1.0);

  Utterance u;
  u.id = std::move(id);
  u.audio.resize(ta, c.audio_dim);
  Matrix clean(ta, c.audio_dim);
  for (Index t = 0; t < ta; ++t) {
    const int label = frame_labels[static_cast<std::size_t>(t)];
    if (label < 0 || label > c.vocab) throw std::invalid_argument("synthesize: label out of range");
    u.audio.row(t) = world.embeddings.row(label);
    for (Index d = 0; d < c.audio_dim; ++d) u.audio(t, d) += c.sigma_audio * normal(rng);
    clean.row(t) = world.embeddings.row(world.video_class[static_cast<std::size_t>(label)]);
  }
  u.video.resize(tv, c.video_dim);
  for (Index v = 0; v < tv; ++v) {
    const RowVector pair = 0.5 * (clean.row(2 * v) + clean.row(2 * v + 1));
    u.video.row(v) = (pair * world.video_map.transpose()).array().tanh().matrix();
    for (Index d = 0; d < c.video_dim; ++d) u.video(v, d) += c.sigma_video * normal(rng);
  }
  u.audio = round_to_f32(u.audio);
  u.video = round_to_f32(u.video);
  u.symbols = collapse(frame_labels);
  u.transcript = transcript_of(u.symbols);
  u.frame_labels = std::move(frame_labels);
  return u;
}

Utterance gen_utterance(const World& world, std::uint64_t seed, std::string id) {
  std::mt19937_64 rng(seed);
  Labels path = sample_frame_path(world.config, rng);
  Utterance u = synthesize(world, std::move(id), std::move(path), rng);
  // Well-posedness: the transcript survives collapse of its own label path.
  if (u.symbols.empty()) throw std::logic_error("gen_utterance: empty transcript");
  return u;
}

std::vector<Utterance> gen_utterances(const World& world, std::uint64_t first, int count,
                                      const std::string& split) {
  std::vector<Utterance> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const std::uint64_t index = first + static_cast<std::uint64_t>(i);
    Utterance u = gen_utterance(world, utterance_seed(world.config.seed, index), utterance_id(index));
    u.split = split;
    out.push_back(std::move(u));
  }
  return out;
}

// Latent exchange format.

namespace {

constexpr char kLatentMagic[4] = {'L', '2', 'V', '1'};
constexpr std::uint32_t kDtypeF32 = 0;
constexpr std::size_t kLatentHeader = 20;

std::uint32_t read_u32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

void write_latents(const fs::path& path, const Matrix& data, int rate_hz) {
  if (rate_hz <= 0) throw std::invalid_argument("write_latents: rate must be positive");
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  const std::uint32_t header[4] = {kDtypeF32, static_cast<std::uint32_t>(rate_hz),
                                   static_cast<std::uint32_t>(data.rows()),
                                   static_cast<std::uint32_t>(data.cols())};
  os.write(kLatentMagic, 4);
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  const MatrixF f = data.cast<float>();
  os.write(reinterpret_cast<const char*>(f.data()),
           static_cast<std::streamsize>(f.size() * sizeof(float)));
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

namespace {

struct LatentHeader {
  std::uint32_t rate = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
};

LatentHeader parse_header(const unsigned char* h, std::uintmax_t file_size, const fs::path& path) {
  if (std::memcmp(h, kLatentMagic, 4) != 0) throw FormatError(path.string() + ": bad magic");
  const std::uint32_t dtype = read_u32(h + 4);
  if (dtype != kDtypeF32) {
    throw FormatError(path.string() + ": unknown dtype " + std::to_string(dtype));
  }
  LatentHeader out{read_u32(h + 8), read_u32(h + 12), read_u32(h + 16)};
  const std::uintmax_t expected =
      kLatentHeader + 4ull * static_cast<std::uintmax_t>(out.rows) * out.cols;
  if (file_size < expected) throw FormatError(path.string() + ": truncated payload");
  if (file_size > expected) throw FormatError(path.string() + ": trailing bytes after payload");
  return out;
}

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  return std::vector<unsigned char>(std::istreambuf_iterator<char>(is), {});
}

}  // namespace

namespace {

std::mutex audit_mutex;
std::vector<fs::path>* audit_log = nullptr;

void audit(const fs::path& path) {
  std::lock_guard<std::mutex> lock(audit_mutex);
  if (audit_log) audit_log->push_back(path);
}

}  // namespace

LatentReadAudit::LatentReadAudit() {
  std::lock_guard<std::mutex> lock(audit_mutex);
  if (audit_log) throw std::logic_error("a latent read audit is already active");
  audit_log = new std::vector<fs::path>();
}

LatentReadAudit::~LatentReadAudit() {
  std::lock_guard<std::mutex> lock(audit_mutex);
  delete audit_log;
  audit_log = nullptr;
}

std::vector<fs::path> LatentReadAudit::paths() const {
  std::lock_guard<std::mutex> lock(audit_mutex);
  return *audit_log;
}

LatentFile read_latents(const fs::path& path) {
  audit(path);
  const auto bytes = slurp(path);
  if (bytes.size() < kLatentHeader) {
    if (bytes.size() >= 4 && std::memcmp(bytes.data(), kLatentMagic, 4) != 0) {
      throw FormatError(path.string() + ": bad magic");
    }
    throw FormatError(path.string() + ": truncated header");
  }
  const LatentHeader h = parse_header(bytes.data(), bytes.size(), path);
  MatrixF f(h.rows, h.cols);
  std::memcpy(f.data(), bytes.data() + kLatentHeader, 4ull * h.rows * h.cols);
  return LatentFile{f.cast<double>(), static_cast<int>(h.rate)};
}

std::tuple<Index, Index, int> probe_latents(const fs::path& path) {
  audit(path);
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError(path.string() + ": missing file");
  unsigned char h[kLatentHeader];
  if (!is.read(reinterpret_cast<char*>(h), kLatentHeader)) {
    throw FormatError(path.string() + ": truncated header");
  }
  const LatentHeader hdr = parse_header(h, fs::file_size(path), path);
  return {hdr.rows, hdr.cols, static_cast<int>(hdr.rate)};
}

// Manifests.

std::vector<const ManifestRecord*> Manifest::split(const std::string& name) const {
  std::vector<const ManifestRecord*> out;
  for (const auto& r : records) {
    if (r.split == name) out.push_back(&r);
  }
  return out;
}

std::vector<ManifestRecord> write_utterance_files(const std::vector<Utterance>& utterances,
                                                  const fs::path& dir) {
  fs::create_directories(dir / "latents");
  std::vector<ManifestRecord> records;
  records.reserve(utterances.size());
  for (const auto& u : utterances) {
    ManifestRecord r;
    r.id = u.id;
    r.transcript = u.transcript;
    r.video = "latents/" + u.id + ".video.l2v";
    r.audio = "latents/" + u.id + ".audio.l2v";
    write_latents(dir / r.video, u.video, kVideoRateHz);
    write_latents(dir / *r.audio, u.audio, kAudioRateHz);
    if (u.logits) {
      r.logits = "latents/" + u.id + ".logits.l2v";
      write_latents(dir / *r.logits, *u.logits, kAudioRateHz);
    }
    r.duration = u.duration();
    r.split = u.split;
    records.push_back(std::move(r));
  }
  return records;
}

void write_manifest(const std::vector<ManifestRecord>& records, const fs::path& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (const auto& r : records) {
    json j = r.extra;
    j["id"] = r.id;
    j["transcript"] = r.transcript;
    j["video"] = r.video;
    if (r.audio) j["audio"] = *r.audio;
    if (r.logits) j["logits"] = *r.logits;
    j["duration"] = r.duration;
    j["split"] = r.split;
    os << j.dump() << '\n';
  }
}

void write_manifest(const std::vector<Utterance>& utterances, const fs::path& dir) {
  write_manifest(write_utterance_files(utterances, dir), dir / "manifest.jsonl");
}

Manifest read_manifest(const fs::path& path, bool with_audio) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open manifest " + path.string());
  Manifest m;
  m.root = path.parent_path();
  std::set<std::string> ids;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(where + "malformed JSON (" + e.what() + ")");
    }
    ManifestRecord r;
    try {
      r.id = j.at("id").get<std::string>();
      r.transcript = j.at("transcript").get<std::string>();
      r.video = j.at("video").get<std::string>();
      if (j.contains("audio") && !j["audio"].is_null()) r.audio = j["audio"].get<std::string>();
      if (j.contains("logits") && !j["logits"].is_null()) r.logits = j["logits"].get<std::string>();
      r.duration = j.at("duration").get<double>();
      r.split = j.value("split", std::string("train"));
    } catch (const json::exception& e) {
      throw FormatError(where + "bad record (" + e.what() + ")");
    }
    for (const char* k : {"id", "transcript", "video", "audio", "logits", "duration", "split"}) {
      j.erase(k);
    }
    r.extra = std::move(j);
    if (!with_audio) {
      r.audio.reset();
      r.logits.reset();
    }
    if (!ids.insert(r.id).second) throw FormatError(where + "duplicate id " + r.id);
    if (r.duration < 0.0) throw FormatError(where + "negative duration");
    try {
      probe_latents(m.root / r.video);
      if (r.audio) probe_latents(m.root / *r.audio);
      if (r.logits) probe_latents(m.root / *r.logits);
    } catch (const FormatError& e) {
      throw FormatError(where + e.what());
    }
    m.records.push_back(std::move(r));
  }
  return m;
}

Manifest video_only(Manifest manifest) {
  for (auto& r : manifest.records) {
    r.audio.reset();
    r.logits.reset();
  }
  return manifest;
}

Utterance load_utterance(const Manifest& manifest, const ManifestRecord& record, bool with_audio) {
  Utterance u;
  u.id = record.id;
  u.transcript = record.transcript;
  u.symbols = symbols_of(record.transcript);
  u.split = record.split;
  LatentFile v = read_latents(manifest.root / record.video);
  if (v.rate_hz != kVideoRateHz) {
    throw FormatError(record.id + ": video latents at " + std::to_string(v.rate_hz) + " Hz");
  }
  u.video = std::move(v.data);
  if (with_audio) {
    if (!record.audio) throw FormatError(record.id + ": no audio latents in manifest");
    LatentFile a = read_latents(manifest.root / *record.audio);
    if (a.rate_hz != kAudioRateHz) {
      throw FormatError(record.id + ": audio latents at " + std::to_string(a.rate_hz) + " Hz");
    }
    if (a.data.rows() != 2 * u.video.rows()) {
      throw FormatError(record.id + ": audio/video length mismatch");
    }
    u.audio = std::move(a.data);
    if (record.logits) u.logits = read_latents(manifest.root / *record.logits).data;
  }
  return u;
}

void write_dataset(const fs::path& dir, const World& world, const std::vector<Utterance>& utterances) {
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "world.json", std::ios::trunc);
    os << to_json(world.config).dump(2) << '\n';
  }
  write_container(dir / "world.l2vc", world_arrays(world));
  write_manifest(utterances, dir);
}

Dataset read_dataset(const fs::path& dir, bool with_audio) {
  std::ifstream is(dir / "world.json");
  if (!is) throw std::runtime_error("missing " + (dir / "world.json").string());
  Dataset d;
  d.world = gen_world(world_config_from_json(json::parse(is)));
  const NamedArrays stored = read_container(dir / "world.l2vc");
  if (checksum(stored) != world_checksum(d.world)) {
    throw FormatError(dir.string() + ": world parameters do not match world.json");
  }
  d.manifest = read_manifest(dir / "manifest.jsonl", with_audio);
  return d;
}

}  // namespace l2v
