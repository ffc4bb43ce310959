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

#include "emoart/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "emoart/error.hpp"

namespace emoart {

using nlohmann::json;

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw InvalidArgument("average_precision: length mismatch");
  std::size_t positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw InvalidArgument("average_precision: non-finite score");
    if (labels[i]) ++positives;
  }
  if (positives == 0) throw InvalidArgument("average_precision: no positive labels");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    ++hits;
    sum += double(hits) / double(r + 1);
  }
  return sum / double(positives);
}

namespace {

void check_aligned(std::size_t preds, std::size_t truths) {
  if (preds != truths) {
    throw InvalidArgument("length mismatch: " + std::to_string(preds) + " predictions for " +
                          std::to_string(truths) + " annotated persons");
  }
}

}  // namespace

DiscreteMetrics evaluate_discrete(std::span<const PredictionResult> preds, std::span<const PersonAnnotation> truths,
                                  std::size_t num_categories, bool predominant_only) {
  check_aligned(preds.size(), truths.size());
  if (num_categories > kNumCategories) throw InvalidArgument("too many categories");
  DiscreteMetrics m;
  m.per_category_ap.assign(num_categories, std::nullopt);
  std::vector<double> scores(preds.size());
  std::vector<std::uint8_t> labels(preds.size());
  double sum = 0.0;
  std::size_t included = 0;
  for (std::size_t k = 0; k < num_categories; ++k) {
    bool any = false;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      scores[i] = preds[i].discrete_scores[k];
      const auto& cats = truths[i].categories;
      bool pos = false;
      if (predominant_only) {
        pos = !cats.empty() && cats.front() == static_cast<int>(k);
      } else {
        pos = std::find(cats.begin(), cats.end(), static_cast<int>(k)) != cats.end();
      }
      labels[i] = pos ? 1 : 0;
      any = any || pos;
    }
    if (!any) continue;
    const double ap = average_precision(scores, labels);
    m.per_category_ap[k] = ap;
    sum += ap;
    ++included;
  }
  m.mean_ap = included ? sum / double(included) : std::nan("");
  return m;
}

VadMetrics evaluate_vad(std::span<const PredictionResult> preds, std::span<const PersonAnnotation> truths) {
  check_aligned(preds.size(), truths.size());
  VadMetrics m;
  if (preds.empty()) throw InvalidArgument("evaluate_vad: no persons");
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto truth = truths[i].vad.as_array();
    for (std::size_t d = 0; d < kNumVadDims; ++d) m.per_dim_error[d] += std::abs(preds[i].vad[d] - truth[d]);
  }
  for (double& e : m.per_dim_error) e /= double(preds.size());
  m.mean_error = (m.per_dim_error[0] + m.per_dim_error[1] + m.per_dim_error[2]) / 3.0;
  return m;
}

std::vector<std::string> MetricsReport::excluded_categories() const {
  std::vector<std::string> out;
  for (std::size_t k = 0; k < per_category_ap.size() && k < categories.size(); ++k) {
    if (!per_category_ap[k]) out.push_back(categories[k]);
  }
  return out;
}

MetricsReport build_report(std::span<const PredictionResult> preds, std::span<const PersonAnnotation> truths,
                           const std::vector<std::string>& categories, std::string source_tag,
                           std::string config_hash, bool predominant_only) {
  const DiscreteMetrics d = evaluate_discrete(preds, truths, categories.size(), predominant_only);
  const VadMetrics v = evaluate_vad(preds, truths);
  MetricsReport r;
  r.categories = categories;
  r.per_category_ap = d.per_category_ap;
  r.mean_ap = d.mean_ap;
  r.per_dim_vad_error = v.per_dim_error;
  r.mean_vad_error = v.mean_error;
  r.n_persons = preds.size();
  r.source_tag = std::move(source_tag);
  r.config_hash = std::move(config_hash);
  r.predominant_only = predominant_only;
  return r;
}

json report_to_json(const MetricsReport& r) {
  json ap = json::object();
  for (std::size_t k = 0; k < r.categories.size(); ++k) {
    ap[r.categories[k]] = r.per_category_ap.at(k) ? json(*r.per_category_ap[k]) : json(nullptr);
  }
  json vad = json::object();
  for (std::size_t d = 0; d < kNumVadDims; ++d) vad[std::string(kVadNames[d])] = r.per_dim_vad_error[d];
  return json{{"format", kReportFormat},
              {"version", 1},
              {"source_tag", r.source_tag},
              {"config_hash", r.config_hash},
              {"n_persons", r.n_persons},
              {"predominant_only", r.predominant_only},
              {"categories", r.categories},
              {"per_category_ap", ap},
              {"excluded_categories", r.excluded_categories()},
              {"mean_ap", std::isnan(r.mean_ap) ? json(nullptr) : json(r.mean_ap)},
              {"per_dim_vad_error", vad},
              {"mean_vad_error", r.mean_vad_error}};
}

MetricsReport report_from_json(const json& j) {
  try {
    if (j.value("format", "") != kReportFormat) throw ValidationError("not an emoart report");
    MetricsReport r;
    r.source_tag = j.at("source_tag").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.n_persons = j.at("n_persons").get<std::size_t>();
    r.predominant_only = j.value("predominant_only", false);
    r.categories = j.at("categories").get<std::vector<std::string>>();
    r.per_category_ap.assign(r.categories.size(), std::nullopt);
    const json& ap = j.at("per_category_ap");
    for (std::size_t k = 0; k < r.categories.size(); ++k) {
      const json& v = ap.at(r.categories[k]);
      if (!v.is_null()) r.per_category_ap[k] = v.get<double>();
    }
    const json& mean_ap = j.at("mean_ap");
    r.mean_ap = mean_ap.is_null() ? std::nan("") : mean_ap.get<double>();
    for (std::size_t d = 0; d < kNumVadDims; ++d) {
      r.per_dim_vad_error[d] = j.at("per_dim_vad_error").at(std::string(kVadNames[d])).get<double>();
    }
    r.mean_vad_error = j.at("mean_vad_error").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

void save_report(const MetricsReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write report: " + path.string());
  out << report_to_json(report).dump(2) << '\n';
  if (!out) throw IoError("failed writing report: " + path.string());
}

MetricsReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open report: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("malformed report " + path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

const MetricDelta* ReportDiff::find(std::string_view metric) const {
  for (const auto& e : entries) {
    if (e.metric == metric) return &e;
  }
  return nullptr;
}

namespace {

std::optional<double> finite_or_null(double v) {
  return std::isnan(v) ? std::nullopt : std::optional<double>(v);
}

MetricDelta make_delta(std::string metric, std::optional<double> a, std::optional<double> b, bool higher_better) {
  MetricDelta d{std::move(metric), a, b, std::nullopt, higher_better};
  if (a && b) d.delta = *b - *a;
  return d;
}

}  // namespace

ReportDiff compare_reports(const MetricsReport& a, const MetricsReport& b) {
  if (a.categories != b.categories) throw ValidationError("cannot compare reports with different category sets");
  ReportDiff diff;
  diff.source_a = a.source_tag;
  diff.source_b = b.source_tag;
  diff.entries.push_back(make_delta("mean_ap", finite_or_null(a.mean_ap), finite_or_null(b.mean_ap), true));
  diff.entries.push_back(make_delta("mean_vad_error", a.mean_vad_error, b.mean_vad_error, false));
  for (std::size_t d = 0; d < kNumVadDims; ++d) {
    diff.entries.push_back(make_delta("vad_error." + std::string(kVadNames[d]), a.per_dim_vad_error[d],
                                      b.per_dim_vad_error[d], false));
  }
  for (std::size_t k = 0; k < a.categories.size(); ++k) {
    diff.entries.push_back(make_delta("ap." + a.categories[k], a.per_category_ap[k], b.per_category_ap[k], true));
  }
  return diff;
}

json diff_to_json(const ReportDiff& diff) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  json entries = json::array();
  for (const auto& e : diff.entries) {
    entries.push_back(json{{"metric", e.metric},
                           {"a", opt(e.a)},
                           {"b", opt(e.b)},
                           {"delta", opt(e.delta)},
                           {"direction", e.higher_is_better ? "up" : "down"},
                           {"improvement", opt(e.improvement())}});
  }
  return json{{"a", diff.source_a}, {"b", diff.source_b}, {"entries", entries}};
}

}  // namespace emoart
