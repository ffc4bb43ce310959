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

#ifndef EMOART_LOSSES_HPP
#define EMOART_LOSSES_HPP

#include <span>
#include <vector>

#include <Eigen/Core>

#include "emoart/dataset.hpp"

namespace emoart {

/// Row-major (batch, dims) matrix of doubles.
using LossMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LossWeights {
  double lambda_discrete = 0.5;
  double lambda_continuous = 0.5;
  std::vector<double> category_weights = std::vector<double>(kNumCategories, 1.0);

  /// lambdas non-negative with a positive sum; category weights positive
  /// and finite.
  void validate() const;
};

/// (1/B) sum_b sum_k w_k (scores_bk - targets_bk)^2
double discrete_loss(const LossMatrix& scores, const LossMatrix& targets, std::span<const double> w);
LossMatrix discrete_loss_grad(const LossMatrix& scores, const LossMatrix& targets, std::span<const double> w);

/// Smooth-L1 with the transition at |x| = 1.
inline double smooth_l1(double x) {
  const double a = x < 0 ? -x : x;
  return a < 1.0 ? 0.5 * x * x : a - 0.5;
}
inline double smooth_l1_derivative(double x) {
  if (x >= 1.0) return 1.0;
  if (x <= -1.0) return -1.0;
  return x;
}

/// Mean of smooth_l1(pred - target) over all B x 3 elements.
double continuous_loss(const LossMatrix& pred, const LossMatrix& target);
LossMatrix continuous_loss_grad(const LossMatrix& pred, const LossMatrix& target);

/// lambda_discrete * discrete_loss + lambda_continuous * continuous_loss.
double combined_loss(const LossMatrix& scores, const LossMatrix& vad_pred, const LossMatrix& targets_disc,
                     const LossMatrix& targets_vad, const LossWeights& weights);

struct LossEvaluation {
  double total = 0;
  double discrete = 0;
  double continuous = 0;
  LossMatrix d_scores;  // d total / d scores
  LossMatrix d_vad;     // d total / d vad_pred
};

LossEvaluation evaluate_loss(const LossMatrix& scores, const LossMatrix& vad_pred,
                             const LossMatrix& targets_disc, const LossMatrix& targets_vad,
                             const LossWeights& weights);

inline constexpr double kDefaultWeightSmoothing = 1.2;

/// w_k = 1 / ln(c + p_k), p_k the fraction of persons labelled with k.
/// Requires c > 1 so every weight is positive.
std::vector<double> make_category_weights(const DatasetManifest& train_manifest,
                                          double c = kDefaultWeightSmoothing);

}  // namespace emoart

#endif  // EMOART_LOSSES_HPP
