// Copyright 2026 The l2v Authors
// SPDX-License-Identifier: Apache-2.0

#include "l2v/objective.hpp"

#include <algorithm>
#include <vector>

namespace l2v {

std::string to_string(ObjectiveMode mode) {
  return mode == ObjectiveMode::continuous ? "continuous" : "discrete";
}

ObjectiveMode objective_mode_from_string(const std::string& s) {
  if (s == "continuous") return ObjectiveMode::continuous;
  if (s == "discrete") return ObjectiveMode::discrete;
  throw std::invalid_argument("unknown objective mode: " + s);
}

Matrix log_softmax(const Eigen::Ref<const Matrix>& logits) {
  Matrix out = logits;
  for (Index r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    const double m = row.maxCoeff();
    row.array() -= m + std::log((row.array() - m).exp().sum());
  }
  return out;
}

double ce_index_loss(const Eigen::Ref<const Matrix>& logits, std::span<const int> targets) {
  if (static_cast<Index>(targets.size()) != logits.rows()) {
    throw ShapeError("ce_index_loss: target count mismatch");
  }
  const Matrix lp = log_softmax(logits);
  double total = 0.0;
  for (Index t = 0; t < lp.rows(); ++t) {
    const int k = targets[static_cast<std::size_t>(t)];
    if (k < 0 || k >= lp.cols()) throw std::out_of_range("ce_index_loss: index out of range");
    total -= lp(t, k);
  }
  return total / static_cast<double>(lp.rows());
}

bool ctc_feasible(Index frames, std::span<const int> target) {
  Index needed = static_cast<Index>(target.size());
  for (std::size_t i = 1; i < target.size(); ++i) {
    if (target[i] == target[i - 1]) ++needed;
  }
  return frames >= needed;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

// Blank-interleaved label sequence: blank, l1, blank, l2, ..., blank.
std::vector<int> extend(std::span<const int> target) {
  std::vector<int> ext(2 * target.size() + 1, kBlank);
  for (std::size_t i = 0; i < target.size(); ++i) ext[2 * i + 1] = target[i];
  return ext;
}

void validate_ctc(const Eigen::Ref<const Matrix>& logits, std::span<const int> target) {
  if (logits.cols() < 2) throw CtcError("ctc: vocabulary must include blank and one symbol");
  if (logits.rows() < 1) throw CtcError("ctc: empty logits");
  for (int s : target) {
    if (s <= kBlank || s >= logits.cols()) throw CtcError("ctc: target symbol out of range");
  }
  if (!ctc_feasible(logits.rows(), target)) {
    throw CtcError("ctc: target of length " + std::to_string(target.size()) +
                   " cannot be aligned to " + std::to_string(logits.rows()) + " frames");
  }
}

// alpha(t, s): log prob of all prefixes ending in extended state s at frame t,
// emissions 0..t included.
Matrix forward_ctc(const Matrix& lp, const std::vector<int>& ext) {
  const Index frames = lp.rows();
  const Index states = static_cast<Index>(ext.size());
  Matrix alpha = Matrix::Constant(frames, states, kNegInf);
  alpha(0, 0) = lp(0, ext[0]);
  if (states > 1) alpha(0, 1) = lp(0, ext[1]);
  for (Index t = 1; t < frames; ++t) {
    for (Index s = 0; s < states; ++s) {
      double acc = alpha(t - 1, s);
      if (s >= 1) acc = log_add(acc, alpha(t - 1, s - 1));
      if (s >= 2 && ext[s] != kBlank && ext[s] != ext[s - 2]) acc = log_add(acc, alpha(t - 1, s - 2));
      alpha(t, s) = acc == kNegInf ? kNegInf : acc + lp(t, ext[s]);
    }
  }
  return alpha;
}

double total_log_prob(const Matrix& alpha) {
  const Index last = alpha.rows() - 1;
  const Index states = alpha.cols();
  double lp = alpha(last, states - 1);
  if (states > 1) lp = log_add(lp, alpha(last, states - 2));
  return lp;
}

}  // namespace

double ctc_loss(const Eigen::Ref<const Matrix>& logits, std::span<const int> target) {
  validate_ctc(logits, target);
  const Matrix lp = log_softmax(logits);
  return -total_log_prob(forward_ctc(lp, extend(target)));
}

CtcResult ctc_loss_and_grad(const Eigen::Ref<const Matrix>& logits, std::span<const int> target) {
  validate_ctc(logits, target);
  const Matrix lp = log_softmax(logits);
  const std::vector<int> ext = extend(target);
  const Index frames = lp.rows();
  const Index states = static_cast<Index>(ext.size());
  const Matrix alpha = forward_ctc(lp, ext);
  const double log_p = total_log_prob(alpha);

  // beta(t, s): log prob of emissions t+1..T-1 given state s at frame t.
  Matrix beta = Matrix::Constant(frames, states, kNegInf);
  beta(frames - 1, states - 1) = 0.0;
  if (states > 1) beta(frames - 1, states - 2) = 0.0;
  for (Index t = frames - 2; t >= 0; --t) {
    for (Index s = 0; s < states; ++s) {
      double acc = beta(t + 1, s) + lp(t + 1, ext[s]);
      if (s + 1 < states) acc = log_add(acc, beta(t + 1, s + 1) + lp(t + 1, ext[s + 1]));
      if (s + 2 < states && ext[s + 2] != kBlank && ext[s + 2] != ext[s]) {
        acc = log_add(acc, beta(t + 1, s + 2) + lp(t + 1, ext[s + 2]));
      }
      beta(t, s) = acc;
    }
  }

  CtcResult r;
  r.loss = -log_p;
  r.grad = lp.array().exp().matrix();
  for (Index t = 0; t < frames; ++t) {
    for (Index s = 0; s < states; ++s) {
      const double g = alpha(t, s) + beta(t, s);
      if (g == kNegInf) continue;
      r.grad(t, ext[s]) -= std::exp(g - log_p);
    }
  }
  return r;
}

ad::Var cosine_loss(const ad::Var& generated, const ad::Var& target, bool normalize) {
  const Matrix& g = generated.value();
  const Matrix& t = target.value();
  Matrix out(1, 1);
  out(0, 0) = cosine_loss(g, t, normalize);
  return ad::make_node(
      std::move(out), {generated, target},
      [normalize](ad::Node& self) {
        ad::Node& pg = *self.parents[0];
        ad::Node& pt = *self.parents[1];
        const double up = self.grad(0, 0);
        const Matrix& gv = pg.value;
        const Matrix& tv = pt.value;
        if (!normalize) {
          ad::accumulate(pg, -up * tv);
          ad::accumulate(pt, -up * gv);
          return;
        }
        Matrix dg(gv.rows(), gv.cols());
        Matrix dt(tv.rows(), tv.cols());
        for (Index r = 0; r < gv.rows(); ++r) {
          const double gn_raw = gv.row(r).norm();
          const double tn_raw = tv.row(r).norm();
          const double gn = std::max(gn_raw, kNormFloor);
          const double tn = std::max(tn_raw, kNormFloor);
          const RowVector gh = gv.row(r) / gn;
          const RowVector th = tv.row(r) / tn;
          const double c = gh.dot(th);
          // Inside the floor the normalization is a fixed scale, so the radial term drops.
          dg.row(r) = (gn_raw > kNormFloor ? (th - c * gh) : th) / gn;
          dt.row(r) = (tn_raw > kNormFloor ? (gh - c * th) : gh) / tn;
        }
        ad::accumulate(pg, -up * dg);
        ad::accumulate(pt, -up * dt);
      },
      "cosine_loss");
}

ad::Var mse_logits_loss(const ad::Var& generated, const ad::Var& target) {
  Matrix out(1, 1);
  out(0, 0) = mse_logits_loss(generated.value(), target.value());
  const double n = static_cast<double>(generated.value().size());
  return ad::make_node(
      std::move(out), {generated, target},
      [n](ad::Node& self) {
        ad::Node& pg = *self.parents[0];
        ad::Node& pt = *self.parents[1];
        const Matrix d = (2.0 * self.grad(0, 0) / n) * (pg.value - pt.value);
        ad::accumulate(pg, d);
        ad::accumulate(pt, -d);
      },
      "mse_logits_loss");
}

ad::Var ctc_loss(const ad::Var& logits, std::span<const int> target) {
  CtcResult r = ctc_loss_and_grad(logits.value(), target);
  Matrix out(1, 1);
  out(0, 0) = r.loss;
  return ad::make_node(
      std::move(out), {logits},
      [grad = std::move(r.grad)](ad::Node& self) {
        ad::accumulate(*self.parents[0], self.grad(0, 0) * grad);
      },
      "ctc_loss");
}

ad::Var ce_index_loss(const ad::Var& logits, std::span<const int> targets) {
  Matrix out(1, 1);
  out(0, 0) = ce_index_loss(logits.value(), targets);
  Matrix grad = log_softmax(logits.value()).array().exp().matrix();
  for (Index t = 0; t < grad.rows(); ++t) grad(t, targets[static_cast<std::size_t>(t)]) -= 1.0;
  grad /= static_cast<double>(grad.rows());
  return ad::make_node(
      std::move(out), {logits},
      [grad = std::move(grad)](ad::Node& self) {
        ad::accumulate(*self.parents[0], self.grad(0, 0) * grad);
      },
      "ce_index_loss");
}

ad::Var total_loss(const ad::Var& z_generated, const ad::Var& z_target, const ad::Var& h_generated,
                   const ad::Var& h_target, const ObjectiveConfig& config) {
  config.validate();
  ad::Var cos = cosine_loss(z_generated, z_target, config.normalize);
  if (config.alpha == 0.0) return cos;
  return cos + config.alpha * mse_logits_loss(h_generated, h_target);
}

}  // namespace l2v
