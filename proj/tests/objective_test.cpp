// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include <random>

#include "gtest/gtest.h"
#include "l2v/objective.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace l2v {
namespace {

using testing::random_matrix;

TEST(CosineLossTest, SelfSimilarityIsMinusFrames) {
  std::mt19937_64 rng(1);
  const Matrix z = random_matrix(7, 5, rng);
  EXPECT_NEAR(cosine_loss(z, z), -7.0, 1e-12);
  EXPECT_NEAR(cosine_loss(z, Matrix(-z)), 7.0, 1e-12);
}

TEST(CosineLossTest, OrthogonalFramesGiveZero) {
  Matrix a = Matrix::Zero(2, 3), b = Matrix::Zero(2, 3);
  a(0, 0) = 2.0;
  b(0, 1) = 5.0;
  a(1, 2) = 1.0;
  b(1, 2) = 3.0;
  EXPECT_NEAR(cosine_loss(a, b), -1.0, 1e-15);
}

TEST(CosineLossTest, InvariantToPositiveFrameScaling) {
  std::mt19937_64 rng(2);
  const Matrix a = random_matrix(6, 4, rng), b = random_matrix(6, 4, rng);
  std::uniform_real_distribution<double> scale(0.1, 10.0);
  Matrix as = a, bs = b;
  for (Index t = 0; t < 6; ++t) {
    as.row(t) *= scale(rng);
    bs.row(t) *= scale(rng);
  }
  EXPECT_NEAR(cosine_loss(a, b), cosine_loss(as, bs), 1e-12);
}

TEST(CosineLossTest, UnnormalizedIsNegativeDotSum) {
  Matrix a(1, 2), b(1, 2);
  a << 1, 2;
  b << 3, 4;
  EXPECT_DOUBLE_EQ(cosine_loss(a, b, false), -11.0);
}

TEST(CosineLossTest, RejectsZeroTargetFrameAndShapeMismatch) {
  Matrix target = Matrix::Ones(3, 2);
  target.row(1).setZero();
  EXPECT_THROW(cosine_loss(Matrix::Ones(3, 2), target), NumericError);
  EXPECT_THROW(cosine_loss(Matrix::Ones(3, 2), Matrix::Ones(2, 2)), ShapeError);
}

TEST(CosineLossTest, GraphMatchesPlainAndGradChecks) {
  std::mt19937_64 rng(3);
  const Matrix a = random_matrix(5, 4, rng), b = random_matrix(5, 4, rng);
  EXPECT_NEAR(cosine_loss(ad::constant(a), ad::constant(b)).scalar(), cosine_loss(a, b), 1e-14);
  const double err = ad::grad_check(
      [](std::span<const ad::Var> v) { return cosine_loss(v[0], v[1]); }, {a, b});
  EXPECT_LT(err, 1e-6);
}

TEST(MseLossTest, MeanOverAllElements) {
  Matrix a = Matrix::Zero(2, 3), b = Matrix::Zero(2, 3);
  b(0, 0) = 3.0;
  b(1, 2) = -1.0;
  EXPECT_DOUBLE_EQ(mse_logits_loss(a, b), 10.0 / 6.0);
  EXPECT_DOUBLE_EQ(mse_logits_loss(ad::constant(a), ad::constant(b)).scalar(), 10.0 / 6.0);
  EXPECT_THROW(mse_logits_loss(a, Matrix::Zero(3, 2)), ShapeError);
}

TEST(TotalLossTest, CombinesTermsWithAlpha) {
  std::mt19937_64 rng(4);
  const Matrix zg = random_matrix(4, 3, rng), zt = random_matrix(4, 3, rng);
  const Matrix hg = random_matrix(4, 5, rng), ht = random_matrix(4, 5, rng);
  ObjectiveConfig c;
  c.alpha = 0.3;
  const double got = total_loss(ad::constant(zg), ad::constant(zt), ad::constant(hg), ad::constant(ht), c).scalar();
  EXPECT_NEAR(got, cosine_loss(zg, zt) + 0.3 * mse_logits_loss(hg, ht), 1e-14);
  c.alpha = -1.0;
  EXPECT_THROW(total_loss(ad::constant(zg), ad::constant(zt), ad::constant(hg), ad::constant(ht), c),
               std::invalid_argument);
}

TEST(TotalLossTest, GradientIsLinearInTerms) {
  std::mt19937_64 rng(5);
  const Matrix zt = random_matrix(4, 3, rng), ht = random_matrix(4, 5, rng);
  const Matrix zg0 = random_matrix(4, 3, rng), hg0 = random_matrix(4, 5, rng);
  ObjectiveConfig c;
  c.alpha = 0.7;
  ad::Var zg = ad::parameter(zg0), hg = ad::parameter(hg0);
  ad::backward(total_loss(zg, ad::constant(zt), hg, ad::constant(ht), c));
  ad::Var zc = ad::parameter(zg0), hm = ad::parameter(hg0);
  ad::backward(cosine_loss(zc, ad::constant(zt)));
  ad::backward(mse_logits_loss(hm, ad::constant(ht)));
  EXPECT_LT((zg.grad() - zc.grad()).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_LT((hg.grad() - 0.7 * hm.grad()).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(CtcLossTest, SingleFrameSingleSymbol) {
  Matrix logits = Matrix::Zero(1, 3);
  const Labels target{2};
  EXPECT_NEAR(ctc_loss(logits, target), std::log(3.0), 1e-14);
}

TEST(CtcLossTest, UniformTwoFramesRepeatedEnumeration) {
  // Paths for target {1} over 2 frames with 2 classes: 11, 01, 10.
  const Labels target{1};
  EXPECT_NEAR(ctc_loss(Matrix::Zero(2, 2), target), -std::log(3.0 / 4.0), 1e-14);
}

TEST(CtcLossTest, MatchesEnumerationOnExhaustiveSweep) {
  const auto cases = oracle::ctc_sweep(8, 77);
  ASSERT_GE(cases.size(), 500u);
  double worst = 0.0;
  for (const auto& c : cases) {
    worst = std::max(worst, std::abs(ctc_loss(c.logits, c.target) - oracle::ctc_by_enumeration(c.logits, c.target)));
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(CtcLossTest, Feasibility) {
  const Labels repeated{1, 1}, distinct{1, 2};
  EXPECT_FALSE(ctc_feasible(2, repeated));
  EXPECT_TRUE(ctc_feasible(3, repeated));
  EXPECT_TRUE(ctc_feasible(2, distinct));
  EXPECT_THROW(ctc_loss(Matrix::Zero(2, 3), repeated), CtcError);
}

TEST(CtcLossTest, RejectsBadTargetsAndVocabulary) {
  const Labels blank{0}, high{3}, one{1};
  EXPECT_THROW(ctc_loss(Matrix::Zero(3, 3), blank), CtcError);
  EXPECT_THROW(ctc_loss(Matrix::Zero(3, 3), high), CtcError);
  EXPECT_THROW(ctc_loss(Matrix::Zero(3, 1), one), CtcError);
}

TEST(CtcLossTest, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(6);
  const Labels target{1, 2, 2};
  const double err = ad::grad_check(
      [&](std::span<const ad::Var> v) { return ctc_loss(v[0], target); }, {random_matrix(7, 4, rng)});
  EXPECT_LT(err, 1e-6);
}

TEST(CtcLossTest, DecreasesUnderGradientDescent) {
  std::mt19937_64 rng(7);
  Matrix logits = random_matrix(8, 4, rng);
  const Labels target{3, 1, 3};
  double previous = ctc_loss(logits, target);
  EXPECT_GE(previous, 0.0);
  for (int step = 0; step < 20; ++step) {
    logits -= 0.1 * ctc_loss_and_grad(logits, target).grad;
    const double now = ctc_loss(logits, target);
    EXPECT_GE(now, 0.0);
    EXPECT_LE(now, previous + 1e-6);
    previous = now;
  }
}

TEST(QuantizeTest, NearestRowWithLowestIndexOnTies) {
  Matrix codebook(3, 2);
  codebook << 0, 0, 1, 0, 1, 0;
  Matrix z(3, 2);
  z << 0.1, 0.0, 0.9, 0.1, 0.5, 0.0;
  EXPECT_EQ(quantize(z, codebook), (Labels{0, 1, 0}));
}

TEST(QuantizeTest, MatchesBruteForce) {
  std::mt19937_64 rng(8);
  const Matrix codebook = random_matrix(6, 4, rng), z = random_matrix(40, 4, rng);
  const Labels got = quantize(z, codebook);
  for (Index t = 0; t < z.rows(); ++t) {
    for (Index k = 0; k < codebook.rows(); ++k) {
      EXPECT_LE((z.row(t) - codebook.row(got[t])).norm(), (z.row(t) - codebook.row(k)).norm());
    }
  }
  EXPECT_THROW(quantize(z, Matrix(0, 4)), ShapeError);
  EXPECT_THROW(quantize(z, Matrix::Zero(2, 3)), ShapeError);
}

TEST(CrossEntropyTest, UniformLogits) {
  const std::vector<int> targets{0, 2};
  EXPECT_NEAR(ce_index_loss(Matrix::Zero(2, 4), targets), std::log(4.0), 1e-14);
  EXPECT_THROW(ce_index_loss(Matrix::Zero(3, 4), targets), ShapeError);
  const std::vector<int> bad{0, 4};
  EXPECT_THROW(ce_index_loss(Matrix::Zero(2, 4), bad), std::out_of_range);
}

TEST(CrossEntropyTest, GradChecks) {
  std::mt19937_64 rng(9);
  const std::vector<int> targets{1, 0, 3, 2, 2};
  const double err = ad::grad_check(
      [&](std::span<const ad::Var> v) { return ce_index_loss(v[0], targets); }, {random_matrix(5, 4, rng)});
  EXPECT_LT(err, 1e-6);
}

TEST(ObjectiveModeTest, StringsRoundTrip) {
  for (auto m : {ObjectiveMode::continuous, ObjectiveMode::discrete}) {
    EXPECT_EQ(objective_mode_from_string(to_string(m)), m);
  }
  EXPECT_THROW(objective_mode_from_string("hybrid"), std::invalid_argument);
}

}  // namespace
}  // namespace l2v
