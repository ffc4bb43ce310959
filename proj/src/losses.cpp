// Copyright 2026 The emoart Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "emoart/losses.hpp"

#include <cmath>

#include "emoart/error.hpp"

namespace emoart {

void LossWeights::validate() const {
  if (!(lambda_discrete >= 0.0) || !(lambda_continuous >= 0.0) || !std::isfinite(lambda_discrete) ||
      !std::isfinite(lambda_continuous)) {
    throw ValidationError("loss lambdas must be finite and non-negative");
  }
  if (!(lambda_discrete + lambda_continuous > 0.0)) {
    throw ValidationError("lambda_discrete + lambda_continuous must be positive");
  }
  for (double w : category_weights) {
    if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("category weights must be positive and finite");
  }
}

namespace {

void check_same_shape(const LossMatrix& a, const LossMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
  }
  if (a.rows() == 0) throw InvalidArgument(std::string(what) + ": empty batch");
}

void check_weights(const LossMatrix& scores, std::span<const double> w) {
  if (static_cast<Eigen::Index>(w.size()) != scores.cols()) {
    throw InvalidArgument("discrete loss: " + std::to_string(w.size()) + " category weights for " +
                          std::to_string(scores.cols()) + " categories");
  }
  for (double v : w) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("discrete loss: non-positive category weight");
  }
}

}  // namespace

double discrete_loss(const LossMatrix& scores, const LossMatrix& targets, std::span<const double> w) {
  check_same_shape(scores, targets, "discrete loss");
  check_weights(scores, w);
  double total = 0.0;
  for (Eigen::Index b = 0; b < scores.rows(); ++b) {
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
      const double d = scores(b, k) - targets(b, k);
      total += w[static_cast<std::size_t>(k)] * d * d;
    }
  }
  return total / double(scores.rows());
}

LossMatrix discrete_loss_grad(const LossMatrix& scores, const LossMatrix& targets, std::span<const double> w) {
  check_same_shape(scores, targets, "discrete loss");
  check_weights(scores, w);
  LossMatrix g(scores.rows(), scores.cols());
  const double inv_b = 1.0 / double(scores.rows());
  for (Eigen::Index b = 0; b < scores.rows(); ++b) {
    for (Eigen::Index k = 0; k < scores.cols(); ++k) {
      g(b, k) = 2.0 * w[static_cast<std::size_t>(k)] * (scores(b, k) - targets(b, k)) * inv_b;
    }
  }
  return g;
}

double continuous_loss(const LossMatrix& pred, const LossMatrix& target) {
  check_same_shape(pred, target, "continuous loss");
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.size(); ++i) total += smooth_l1(pred.data()[i] - target.data()[i]);
  return total / double(pred.size());
}

LossMatrix continuous_loss_grad(const LossMatrix& pred, const LossMatrix& target) {
  check_same_shape(pred, target, "continuous loss");
  LossMatrix g(pred.rows(), pred.cols());
  const double inv_n = 1.0 / double(pred.size());
  for (Eigen::Index i = 0; i < pred.size(); ++i) {
    g.data()[i] = smooth_l1_derivative(pred.data()[i] - target.data()[i]) * inv_n;
  }
  return g;
}

double combined_loss(const LossMatrix& scores, const LossMatrix& vad_pred, const LossMatrix& targets_disc,
                     const LossMatrix& targets_vad, const LossWeights& weights) {
  if (scores.rows() != vad_pred.rows()) throw InvalidArgument("combined loss: batch sizes differ");
  return weights.lambda_discrete * discrete_loss(scores, targets_disc, weights.category_weights) +
         weights.lambda_continuous * continuous_loss(vad_pred, targets_vad);
}

LossEvaluation evaluate_loss(const LossMatrix& scores, const LossMatrix& vad_pred,
                             const LossMatrix& targets_disc, const LossMatrix& targets_vad,
                             const LossWeights& weights) {
  if (scores.rows() != vad_pred.rows()) throw InvalidArgument("combined loss: batch sizes differ");
  LossEvaluation e;
  e.discrete = discrete_loss(scores, targets_disc, weights.category_weights);
  e.continuous = continuous_loss(vad_pred, targets_vad);
  e.total = weights.lambda_discrete * e.discrete + weights.lambda_continuous * e.continuous;
  e.d_scores = weights.lambda_discrete * discrete_loss_grad(scores, targets_disc, weights.category_weights);
  e.d_vad = weights.lambda_continuous * continuous_loss_grad(vad_pred, targets_vad);
  return e;
}

std::vector<double> make_category_weights(const DatasetManifest& train_manifest, double c) {
  if (!(c > 1.0) || !std::isfinite(c)) {
    throw ValidationError("category weight smoothing constant must be finite and greater than 1");
  }
  const std::size_t persons = train_manifest.person_count();
  if (persons == 0) throw ValidationError("cannot derive category weights from an empty manifest");
  std::vector<double> counts(train_manifest.categories.size(), 0.0);
  for (const auto& r : train_manifest.records) {
    for (const auto& p : r.persons) {
      for (int k : p.categories) counts.at(static_cast<std::size_t>(k)) += 1.0;
    }
  }
  std::vector<double> w(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) w[k] = 1.0 / std::log(c + counts[k] / double(persons));
  return w;
}

}  // namespace emoart
