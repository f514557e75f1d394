// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <fstream>
#include <random>

#include "gtest/gtest.h"
#include "l2v/asr_head.hpp"
#include "l2v/dataworld.hpp"
#include "l2v/objective.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace l2v {
namespace {

using testing::random_matrix;

Matrix one_hot(const Labels& path, Index classes) {
  Matrix m = Matrix::Zero(static_cast<Index>(path.size()), classes);
  for (std::size_t t = 0; t < path.size(); ++t) m(static_cast<Index>(t), path[t]) = 1.0;
  return m;
}

AsrHeadConfig tiny_config() {
  AsrHeadConfig c;
  c.audio_dim = 6;
  c.dim = 8;
  c.ffn_dim = 16;
  c.heads = 2;
  c.layers = 1;
  c.vocabulary = 4;
  return c;
}

TEST(GreedyDecodeTest, CollapsesRepeatsThenDropsBlanks) {
  EXPECT_EQ(greedy_ctc_decode(one_hot({0, 1, 1, 0, 2}, 3)).symbols, (Labels{1, 2}));
  EXPECT_EQ(greedy_ctc_decode(one_hot({1, 0, 1}, 3)).symbols, (Labels{1, 1}));
  EXPECT_TRUE(greedy_ctc_decode(one_hot({0, 0, 0}, 3)).symbols.empty());
}

TEST(GreedyDecodeTest, ReportsPathAndFrames) {
  const DecodeResult r = greedy_ctc_decode(one_hot({2, 2, 0, 1}, 3));
  EXPECT_EQ(r.path, (Labels{2, 2, 0, 1}));
  EXPECT_EQ(r.frames, 4);
}

TEST(GreedyDecodeTest, TiesGoToLowestIndex) {
  Matrix logits = Matrix::Zero(2, 3);
  logits(1, 1) = 1.0;
  logits(1, 2) = 1.0;
  const DecodeResult r = greedy_ctc_decode(logits);
  EXPECT_EQ(r.path, (Labels{0, 1}));
}

TEST(GreedyDecodeTest, EmptyInputDecodesToNothing) {
  const DecodeResult r = greedy_ctc_decode(Matrix(0, 3));
  EXPECT_EQ(r.frames, 0);
  EXPECT_TRUE(r.symbols.empty());
}

TEST(GreedyDecodeTest, ExhaustiveOneHotPathsMatchCollapseOracle) {
  int checked = 0;
  for (int classes = 2; classes <= 3; ++classes) {
    for (int frames = 1; frames <= 5; ++frames) {
      oracle::for_each_sequence(frames, 0, classes, [&](const Labels& path) {
        const DecodeResult r = greedy_ctc_decode(one_hot(path, classes));
        EXPECT_EQ(r.symbols, oracle::collapse(path));
        EXPECT_EQ(r.path, path);
        ++checked;
      });
    }
  }
  EXPECT_EQ(checked, (2 + 4 + 8 + 16 + 32) + (3 + 9 + 27 + 81 + 243));
}

TEST(GreedyDecodeTest, RandomLogitsMatchOracleAndIgnoreFrameShifts) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> shift(0.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Index frames = 1 + trial % 6;
    const Matrix logits = random_matrix(frames, 4, rng);
    Labels argmax(static_cast<std::size_t>(frames));
    for (Index t = 0; t < frames; ++t) {
      Index best = 0;
      logits.row(t).maxCoeff(&best);
      argmax[static_cast<std::size_t>(t)] = static_cast<int>(best);
    }
    const DecodeResult r = greedy_ctc_decode(logits);
    EXPECT_EQ(r.symbols, oracle::collapse(argmax));
    Matrix shifted = logits;
    for (Index t = 0; t < frames; ++t) shifted.row(t).array() += shift(rng);
    EXPECT_EQ(greedy_ctc_decode(shifted).symbols, r.symbols);
    for (int s : r.symbols) EXPECT_NE(s, kBlank);
  }
}

TEST(AsrHeadTest, LogitShapeAndDeterminism) {
  const AsrHeadParams head = init_asr_head(tiny_config(), 3);
  std::mt19937_64 rng(2);
  const Matrix z = random_matrix(11, 6, rng);
  const Matrix a = asr_logits(head, z);
  EXPECT_EQ(a.rows(), 11);
  EXPECT_EQ(a.cols(), 4);
  EXPECT_EQ(a, asr_logits(head, z));
  EXPECT_THROW(asr_logits(head, random_matrix(11, 5, rng)), ShapeError);
}

TEST(AsrHeadTest, GradientWrtInputMatchesCentralDifferences) {
  const AsrHeadParams head = init_asr_head(tiny_config(), 4);
  std::mt19937_64 rng(3);
  const Labels target{1, 3};
  const double err = ad::grad_check(
      [&](std::span<const ad::Var> v) {
        Binder bind(false);
        return ctc_loss(asr_logits(bind, head, v[0]), target);
      },
      {random_matrix(5, 6, rng)});
  EXPECT_LT(err, 1e-4);
}

TEST(FrozenHeadTest, FreezeAndVerify) {
  AsrHeadParams head = init_asr_head(tiny_config(), 5);
  EXPECT_THROW(verify_frozen(head), FrozenError);
  freeze(head);
  EXPECT_NO_THROW(verify_frozen(head));
  EXPECT_EQ(head.checksum, content_checksum(head));
  head.output.bias(0, 1) += 1e-9;
  EXPECT_THROW(verify_frozen(head), FrozenError);
}

TEST(FrozenHeadTest, ChecksumDependsOnEveryArray) {
  AsrHeadParams head = init_asr_head(tiny_config(), 6);
  const std::uint64_t base = content_checksum(head);
  visit(head, "asr", [&](const std::string& name, Matrix& m) {
    const double keep = m(0, 0);
    m(0, 0) = keep + 1.0;
    EXPECT_NE(content_checksum(head), base) << name;
    m(0, 0) = keep;
  });
  EXPECT_EQ(content_checksum(head), base);
}

TEST(FrozenHeadTest, SaveLoadRoundTripKeepsChecksum) {
  AsrHeadParams head = init_asr_head(tiny_config(), 7);
  const auto dir = testing::scratch_dir("head_roundtrip");
  EXPECT_THROW(save_head(head, dir / "head.l2vc"), FrozenError);
  freeze(head);
  save_head(head, dir / "head.l2vc");
  EXPECT_TRUE(std::filesystem::exists(dir / "head.l2vc.json"));
  const AsrHeadParams loaded = load_head(dir / "head.l2vc");
  EXPECT_EQ(loaded.checksum, head.checksum);
  EXPECT_TRUE(loaded.frozen);
  std::mt19937_64 rng(4);
  const Matrix z = random_matrix(6, 6, rng);
  EXPECT_EQ(asr_logits(loaded, z), asr_logits(head, z));
}

TEST(FrozenHeadTest, LoadRejectsTamperedSidecar) {
  AsrHeadParams head = init_asr_head(tiny_config(), 8);
  freeze(head);
  const auto dir = testing::scratch_dir("head_tampered");
  save_head(head, dir / "head.l2vc");
  {
    std::ofstream os(dir / "head.l2vc.json", std::ios::trunc);
    os << nlohmann::json{{"vocabulary", 4},
                         {"blank_index", 0},
                         {"checksum", checksum_hex(head.checksum ^ 1)},
                         {"config", to_json(head.config)}};
  }
  EXPECT_THROW(load_head(dir / "head.l2vc"), FrozenError);
  EXPECT_THROW(load_head(dir / "missing.l2vc"), std::runtime_error);
}

TEST(AsrHeadConfigTest, JsonRoundTripAndValidation) {
  const AsrHeadConfig c = tiny_config();
  const AsrHeadConfig back = asr_head_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  AsrHeadConfig bad = c;
  bad.vocabulary = 1;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = c;
  bad.heads = 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

// A short run on a small noiseless world: enough to check the training loop
// learns and that failure to converge is reported with the best WER.
class HeadTrainingTest : public ::testing::Test {
 protected:
  void SetUp() override {
    WorldConfig wc;
    wc.sigma_audio = 0.0;
    wc.sigma_video = 0.0;
    world_ = gen_world(wc);
    train_ = gen_utterances(world_, 0, 240, "train");
    heldout_ = gen_utterances(world_, 240, 40, "heldout");
    for (const auto& u : train_) train_ex_.push_back({&u.audio, u.symbols, u.transcript});
    for (const auto& u : heldout_) heldout_ex_.push_back({&u.audio, u.symbols, u.transcript});
  }
  World world_;
  std::vector<Utterance> train_, heldout_;
  std::vector<HeadExample> train_ex_, heldout_ex_;
};

TEST_F(HeadTrainingTest, LossFallsAndUnreachableTargetIsReported) {
  HeadTrainConfig tc;
  tc.max_epochs = 2;
  tc.min_epochs = 2;
  tc.target_wer = 0.0;
  std::vector<HeadEpochLog> log;
  try {
    train_frozen_head(train_ex_, heldout_ex_, AsrHeadConfig{}, tc, &log);
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("best"), std::string::npos);
  }
  ASSERT_EQ(log.size(), 2u);
  EXPECT_LT(log[1].loss, log[0].loss);
}

TEST_F(HeadTrainingTest, ReachesLooseTargetAndFreezes) {
  HeadTrainConfig tc;
  tc.max_epochs = 6;
  tc.min_epochs = 1;
  tc.target_wer = 0.8;
  const AsrHeadParams head = train_frozen_head(train_ex_, heldout_ex_, AsrHeadConfig{}, tc);
  EXPECT_TRUE(head.frozen);
  EXPECT_LT(head_wer(head, heldout_ex_), 0.8);
}

}  // namespace
}  // namespace l2v
