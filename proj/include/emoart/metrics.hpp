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

#ifndef EMOART_METRICS_HPP
#define EMOART_METRICS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoart/dataset.hpp"
#include "emoart/model.hpp"

namespace emoart {

/// Non-interpolated average precision: rank by descending score (ties keep
/// the original index order) and average precision@r over the ranks r that
/// hold a positive. Requires at least one positive label.
double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct DiscreteMetrics {
  // nullopt for categories without a positive in the evaluated set.
  std::vector<std::optional<double>> per_category_ap;
  double mean_ap = 0.0;  // NaN when no category is included
};

/// Per-category AP over all persons. With `predominant_only`, only the first
/// listed category of each person counts as positive.
DiscreteMetrics evaluate_discrete(std::span<const PredictionResult> preds,
                                  std::span<const PersonAnnotation> truths,
                                  std::size_t num_categories = kNumCategories,
                                  bool predominant_only = false);

struct VadMetrics {
  std::array<double, kNumVadDims> per_dim_error{};
  double mean_error = 0.0;
};

/// Mean absolute error per dimension and its mean over the three dimensions.
VadMetrics evaluate_vad(std::span<const PredictionResult> preds, std::span<const PersonAnnotation> truths);

/// AP values are fractions in [0, 1]; renderers show them x100.
struct MetricsReport {
  std::vector<std::string> categories = canonical_category_list();
  std::vector<std::optional<double>> per_category_ap =
      std::vector<std::optional<double>>(kNumCategories);
  double mean_ap = 0.0;
  std::array<double, kNumVadDims> per_dim_vad_error{};
  double mean_vad_error = 0.0;
  std::size_t n_persons = 0;
  std::string source_tag;
  std::string config_hash;
  bool predominant_only = false;

  std::vector<std::string> excluded_categories() const;
  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

MetricsReport build_report(std::span<const PredictionResult> preds, std::span<const PersonAnnotation> truths,
                           const std::vector<std::string>& categories, std::string source_tag,
                           std::string config_hash, bool predominant_only = false);

inline constexpr std::string_view kReportFormat = "emoart-report";

nlohmann::json report_to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);
void save_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport load_report(const std::filesystem::path& path);

struct MetricDelta {
  std::string metric;   // "mean_ap", "mean_vad_error", "vad_error.valence", "ap.Anger", ...
  std::optional<double> a;
  std::optional<double> b;
  std::optional<double> delta;  // b - a, when both exist
  bool higher_is_better = true;
  /// delta signed so that positive means b is better than a.
  std::optional<double> improvement() const {
    if (!delta) return std::nullopt;
    return higher_is_better ? *delta : -*delta;
  }
};

struct ReportDiff {
  std::string source_a, source_b;
  std::vector<MetricDelta> entries;

  const MetricDelta* find(std::string_view metric) const;
};

/// b relative to a. Both reports must use the same category list.
ReportDiff compare_reports(const MetricsReport& a, const MetricsReport& b);

nlohmann::json diff_to_json(const ReportDiff& diff);

}  // namespace emoart

#endif  // EMOART_METRICS_HPP
