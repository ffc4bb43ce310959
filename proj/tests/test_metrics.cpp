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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "emoart/error.hpp"
#include "emoart/metrics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace emoart {
namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
};

Instance random_instance(std::mt19937_64& rng, int kind) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 50)(rng);
  Instance x;
  x.scores.resize(n);
  x.labels.resize(n);
  std::uniform_real_distribution<double> u(0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    switch (kind) {
      case 0: x.scores[i] = 0.25; break;                              // all ties
      case 1: x.scores[i] = std::floor(u(rng) * 4) / 4; break;        // heavy ties
      default: x.scores[i] = u(rng); break;
    }
    x.labels[i] = u(rng) < 0.3;
  }
  if (kind == 3) {
    std::fill(x.labels.begin(), x.labels.end(), 0);  // single positive
  }
  if (std::count(x.labels.begin(), x.labels.end(), 1) == 0) {
    x.labels[std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)] = 1;
  }
  return x;
}

TEST(AveragePrecision, WorkedExample) {
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const std::vector<std::uint8_t> l{1, 0, 1, 0};
  EXPECT_NEAR(average_precision(s, l), (1.0 + 2.0 / 3.0) / 2.0, 1e-12);
}

TEST(AveragePrecision, MatchesBruteForceOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 1000; ++t) {
    const Instance x = random_instance(rng, t % 5);
    const double ap = average_precision(x.scores, x.labels);
    ASSERT_NEAR(ap, oracle::average_precision(x.scores, x.labels), 1e-9) << "instance " << t;
    ASSERT_GE(ap, 0.0);
    ASSERT_LE(ap, 1.0);
  }
}

TEST(AveragePrecision, PerfectRankingAndTies) {
  EXPECT_DOUBLE_EQ(average_precision(std::vector<double>{3, 2, 1, 0}, std::vector<std::uint8_t>{1, 1, 0, 0}), 1.0);
  // All tied: index order decides; positives at indices 1 and 3.
  EXPECT_NEAR(average_precision(std::vector<double>{1, 1, 1, 1}, std::vector<std::uint8_t>{0, 1, 0, 1}),
              (0.5 + 0.5) / 2, 1e-12);
  EXPECT_THROW(average_precision(std::vector<double>{1, 2}, std::vector<std::uint8_t>{0, 0}), InvalidArgument);
  EXPECT_THROW(average_precision(std::vector<double>{1}, std::vector<std::uint8_t>{0, 1}), InvalidArgument);
}

TEST(AveragePrecision, InvariantUnderIncreasingTransforms) {
  std::mt19937_64 rng(7);
  for (int t = 0; t < 100; ++t) {
    Instance x = random_instance(rng, 2);
    const double ap = average_precision(x.scores, x.labels);
    std::vector<double> y = x.scores;
    for (double& v : y) v = 10 * v + 3;
    EXPECT_NEAR(average_precision(y, x.labels), ap, 1e-12);
    for (double& v : y) v = std::exp(v / 10);
    EXPECT_NEAR(average_precision(y, x.labels), ap, 1e-12);
  }
}

TEST(AveragePrecision, PromotingANegativeNeverHelps) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 300; ++t) {
    Instance x = random_instance(rng, 2);
    const double before = average_precision(x.scores, x.labels);
    // Swap the scores of a negative ranked below some positive.
    std::size_t pos = x.labels.size(), neg = x.labels.size();
    for (std::size_t i = 0; i < x.labels.size(); ++i) {
      for (std::size_t j = 0; j < x.labels.size(); ++j) {
        if (x.labels[i] && !x.labels[j] && x.scores[i] > x.scores[j]) {
          pos = i;
          neg = j;
        }
      }
    }
    if (pos == x.labels.size()) continue;
    std::swap(x.scores[pos], x.scores[neg]);
    EXPECT_LE(average_precision(x.scores, x.labels), before + 1e-12);
  }
}

PersonAnnotation person_with(std::vector<int> cats, VadTriple vad = {5, 5, 5}) {
  return PersonAnnotation{{0, 0, 1, 1}, std::move(cats), vad};
}

TEST(EvaluateDiscrete, MatchesPerCategoryBruteForce) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<PredictionResult> preds(50);
  std::vector<PersonAnnotation> truths;
  for (auto& p : preds) {
    for (auto& s : p.discrete_scores) s = std::floor(u(rng) * 8);
  }
  for (int i = 0; i < 50; ++i) {
    std::vector<int> cats;
    for (int k = 0; k < 20; ++k) {  // categories 20..25 never positive
      if (u(rng) < 0.15) cats.push_back(k);
    }
    if (cats.empty()) cats.push_back(i % 20);
    truths.push_back(person_with(cats));
  }
  const DiscreteMetrics m = evaluate_discrete(preds, truths);
  double sum = 0;
  int included = 0;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    std::vector<double> s;
    std::vector<std::uint8_t> l;
    for (std::size_t i = 0; i < preds.size(); ++i) {
      s.push_back(preds[i].discrete_scores[k]);
      const auto& c = truths[i].categories;
      l.push_back(std::find(c.begin(), c.end(), int(k)) != c.end());
    }
    if (std::count(l.begin(), l.end(), 1) == 0) {
      EXPECT_FALSE(m.per_category_ap[k].has_value());
      continue;
    }
    ASSERT_TRUE(m.per_category_ap[k].has_value());
    const double ref = oracle::average_precision(s, l);
    EXPECT_NEAR(*m.per_category_ap[k], ref, 1e-9);
    sum += ref;
    ++included;
  }
  EXPECT_NEAR(m.mean_ap, sum / included, 1e-9);
}

TEST(EvaluateDiscrete, PerfectScoresAndSinglePerson) {
  std::vector<PredictionResult> preds(3);
  std::vector<PersonAnnotation> truths{person_with({0, 4}), person_with({4}), person_with({7})};
  for (std::size_t i = 0; i < 3; ++i) {
    for (int c : truths[i].categories) preds[i].discrete_scores[c] = 1.0;
  }
  const auto m = evaluate_discrete(preds, truths);
  EXPECT_DOUBLE_EQ(m.mean_ap, 1.0);
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    EXPECT_EQ(m.per_category_ap[k].has_value(), k == 0 || k == 4 || k == 7);
  }

  PredictionResult arbitrary;
  for (std::size_t k = 0; k < kNumCategories; ++k) arbitrary.discrete_scores[k] = -double(k);
  const std::vector<PredictionResult> one{arbitrary};
  const std::vector<PersonAnnotation> t1{person_with({2, 9, 25})};
  const auto m1 = evaluate_discrete(one, t1);
  EXPECT_DOUBLE_EQ(m1.mean_ap, 1.0);
}

TEST(EvaluateDiscrete, PredominantOnlyUsesFirstCategory) {
  std::vector<PredictionResult> preds(2);
  preds[0].discrete_scores[3] = 0.1;
  preds[1].discrete_scores[3] = 0.9;
  const std::vector<PersonAnnotation> truths{person_with({3, 5}), person_with({5, 3})};
  const auto all = evaluate_discrete(preds, truths);
  const auto first = evaluate_discrete(preds, truths, kNumCategories, true);
  EXPECT_DOUBLE_EQ(*all.per_category_ap[3], 1.0);
  EXPECT_DOUBLE_EQ(*first.per_category_ap[3], 0.5);
  EXPECT_TRUE(first.per_category_ap[5].has_value());
}

TEST(EvaluateDiscrete, NoPositivesGivesNaN) {
  const std::vector<PredictionResult> preds(2);
  const std::vector<PersonAnnotation> truths{person_with({1}), person_with({1})};
  const auto m = evaluate_discrete(preds, truths, 1);
  EXPECT_TRUE(std::isnan(m.mean_ap));
  EXPECT_THROW(evaluate_discrete(preds, std::vector<PersonAnnotation>{person_with({1})}), InvalidArgument);
}

TEST(EvaluateVad, WorkedExample) {
  PredictionResult p;
  p.vad = {5, 5, 5};
  const std::vector<PredictionResult> preds{p};
  const std::vector<PersonAnnotation> truths{person_with({0}, {6, 4, 5})};
  const auto v = evaluate_vad(preds, truths);
  EXPECT_NEAR(v.per_dim_error[0], 1.0, 1e-12);
  EXPECT_NEAR(v.per_dim_error[1], 1.0, 1e-12);
  EXPECT_NEAR(v.per_dim_error[2], 0.0, 1e-12);
  EXPECT_NEAR(v.mean_error, 2.0 / 3.0, 1e-12);
}

TEST(EvaluateVad, ScalarLoopAndPermutationInvariance) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(1, 10);
  std::vector<PredictionResult> preds(40);
  std::vector<PersonAnnotation> truths;
  for (auto& p : preds) p.vad = {u(rng), u(rng), u(rng)};
  for (int i = 0; i < 40; ++i) truths.push_back(person_with({i % 26}, {u(rng), u(rng), u(rng)}));
  double ref[3] = {0, 0, 0};
  for (int i = 0; i < 40; ++i) {
    ref[0] += std::abs(preds[i].vad[0] - truths[i].vad.valence);
    ref[1] += std::abs(preds[i].vad[1] - truths[i].vad.arousal);
    ref[2] += std::abs(preds[i].vad[2] - truths[i].vad.dominance);
  }
  const auto v = evaluate_vad(preds, truths);
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(v.per_dim_error[d], ref[d] / 40, 1e-12);

  std::vector<std::size_t> perm(40);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<PredictionResult> p2;
  std::vector<PersonAnnotation> t2;
  for (auto i : perm) {
    p2.push_back(preds[i]);
    t2.push_back(truths[i]);
  }
  const auto r1 = build_report(preds, truths, canonical_category_list(), "X", "h");
  const auto r2 = build_report(p2, t2, canonical_category_list(), "X", "h");
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(r1.per_dim_vad_error[d], r2.per_dim_vad_error[d], 1e-12);
  EXPECT_NEAR(r1.mean_vad_error, r2.mean_vad_error, 1e-12);
}

MetricsReport sample_report() {
  MetricsReport r;
  r.source_tag = "EMOTIC";
  r.config_hash = "0123456789abcdef";
  r.n_persons = 12;
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    if (k % 5 != 0) r.per_category_ap[k] = 0.01 * double(k) + 1.0 / 3.0;
  }
  r.mean_ap = 0.2613;
  r.per_dim_vad_error = {0.9, 1.0, 0.98};
  r.mean_vad_error = 0.96;
  return r;
}

TEST(Reports, JsonRoundTripIsLossless) {
  const MetricsReport r = sample_report();
  EXPECT_EQ(report_from_json(report_to_json(r)), r);
  testing::TempDir dir("report");
  save_report(r, dir / "r.json");
  EXPECT_EQ(load_report(dir / "r.json"), r);
  EXPECT_EQ(r.excluded_categories().size(), 6u);
}

TEST(Reports, CompareSignsFollowTableConventions) {
  MetricsReport a = sample_report(), b = sample_report();
  // Photo-domain vs artwork-domain numbers of a published baseline row.
  a.mean_ap = 0.2613;
  b.mean_ap = 0.1333;
  a.mean_vad_error = 0.96;
  b.mean_vad_error = 1.91;
  b.source_tag = "ODOR-e";
  const ReportDiff d = compare_reports(a, b);
  const MetricDelta* ap = d.find("mean_ap");
  const MetricDelta* vad = d.find("mean_vad_error");
  ASSERT_TRUE(ap && vad);
  EXPECT_NEAR(100.0 * *ap->delta, -12.80, 1e-9);
  EXPECT_NEAR(*vad->delta, 0.95, 1e-9);
  EXPECT_LT(*ap->improvement(), 0);
  EXPECT_LT(*vad->improvement(), 0);

  const ReportDiff same = compare_reports(a, a);
  for (const auto& e : same.entries) {
    if (e.delta) {
      EXPECT_EQ(*e.delta, 0.0) << e.metric;
    }
  }
  MetricsReport c = a;
  c.categories.pop_back();
  c.per_category_ap.pop_back();
  EXPECT_THROW(compare_reports(a, c), ValidationError);
}

}  // namespace
}  // namespace emoart
