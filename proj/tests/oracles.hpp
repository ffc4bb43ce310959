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

// Independent reference implementations shared by the unit and acceptance
// tests. They favour obviousness over speed.

#ifndef EMOART_TESTS_ORACLES_HPP
#define EMOART_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "emoart/image.hpp"
#include "emoart/losses.hpp"

namespace emoart::oracle {

// Quadratic-time AP: the rank of item i is one plus the number of items
// ahead of it (higher score, or equal score and lower index).
inline double average_precision(const std::vector<double>& s, const std::vector<std::uint8_t>& l) {
  const std::size_t n = s.size();
  double sum = 0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!l[i]) continue;
    ++pos;
    std::size_t rank = 1, hits = 1;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      const bool ahead = s[j] > s[i] || (s[j] == s[i] && j < i);
      if (ahead) {
        ++rank;
        hits += l[j];
      }
    }
    sum += double(hits) / double(rank);
  }
  return sum / double(pos);
}

// Bilinear sample (u, v) of an out_w x out_h resampling of region r: pixel
// centres, clamped neighbours, double precision.
inline double bilinear(const Image& img, const Region& r, int out_w, int out_h, int u, int v, int c) {
  const double sx = r.x1 + (u + 0.5) * (r.x2 - r.x1) / out_w - 0.5;
  const double sy = r.y1 + (v + 0.5) * (r.y2 - r.y1) / out_h - 0.5;
  const double fx0 = std::floor(sx), fy0 = std::floor(sy);
  const double ax = sx - fx0, ay = sy - fy0;
  auto px = [&](double x, double y) {
    const int xi = std::clamp(static_cast<int>(x), 0, img.width - 1);
    const int yi = std::clamp(static_cast<int>(y), 0, img.height - 1);
    return static_cast<double>(img.at(xi, yi, c));
  };
  return (1 - ax) * (1 - ay) * px(fx0, fy0) + ax * (1 - ay) * px(fx0 + 1, fy0) +
         (1 - ax) * ay * px(fx0, fy0 + 1) + ax * ay * px(fx0 + 1, fy0 + 1);
}

inline double discrete_loss(const LossMatrix& scores, const LossMatrix& targets, const std::vector<double>& w) {
  double s = 0;
  for (int i = 0; i < scores.rows(); ++i) {
    for (int k = 0; k < scores.cols(); ++k) {
      const double d = scores(i, k) - targets(i, k);
      s += w[k] * d * d;
    }
  }
  return s / double(scores.rows());
}

inline double huber(double e) { return std::abs(e) < 1 ? 0.5 * e * e : std::abs(e) - 0.5; }

inline double continuous_loss(const LossMatrix& pred, const LossMatrix& target) {
  double s = 0;
  for (int i = 0; i < pred.rows(); ++i) {
    for (int d = 0; d < pred.cols(); ++d) s += huber(pred(i, d) - target(i, d));
  }
  return s / double(pred.rows() * pred.cols());
}

}  // namespace emoart::oracle

#endif  // EMOART_TESTS_ORACLES_HPP
