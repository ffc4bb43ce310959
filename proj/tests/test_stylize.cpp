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

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "emoart/checkpoint.hpp"
#include "emoart/error.hpp"
#include "emoart/harness.hpp"
#include "emoart/model.hpp"
#include "emoart/stylize.hpp"
#include "emoart/synthetic.hpp"
#include "test_util.hpp"

namespace emoart {
namespace {

using testing::random_image;
using testing::TempDir;

// Smooth image with texture, values well inside [0, 1].
Image textured_image(int w, int h, std::uint64_t seed, double freq) {
  Image img = random_image(w, h, seed);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double base = 0.5 + 0.2 * std::sin(freq * (x + 2 * c) + 0.3 * c) * std::cos(0.7 * freq * y);
        img.at(x, y, c) = float(base + 0.1 * (img.at(x, y, c) - 0.5));
      }
    }
  }
  return img;
}

std::array<double, 3> channel_mean(const Image& img) {
  std::array<double, 3> m{};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) m[i % 3] += img.pixels[i];
  for (auto& v : m) v /= double(img.width) * img.height;
  return m;
}

std::array<double, 3> channel_std(const Image& img) {
  const auto m = channel_mean(img);
  std::array<double, 3> s{};
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    const double d = img.pixels[i] - m[i % 3];
    s[i % 3] += d * d;
  }
  for (auto& v : s) v = std::sqrt(v / (double(img.width) * img.height));
  return s;
}

double max_abs_diff(const Image& a, const Image& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) d = std::max(d, double(std::abs(a.pixels[i] - b.pixels[i])));
  return d;
}

TEST(Stylizer, StrengthZeroIsIdentity) {
  const Image content = random_image(37, 29, 1);
  const Image style = random_image(64, 48, 2);
  const Image out = stylize_image(content, style, 0.0);
  ASSERT_EQ(out.width, 37);
  ASSERT_EQ(out.height, 29);
  EXPECT_LT(max_abs_diff(out, content), 1e-6);
}

TEST(Stylizer, FullStrengthMatchesStyleStatistics) {
  const StatisticsMatchingStylizer s;
  EXPECT_EQ(s.channel_count(), 21);
  const Image content = textured_image(64, 48, 3, 0.3);
  const Image style = textured_image(96, 80, 4, 0.9);
  const Image out = s.stylize(content, style, 1.0);
  const FeatureStats fo = s.feature_stats(out), fs = s.feature_stats(style);
  ASSERT_EQ(fo.mean.size(), 21u);
  for (std::size_t i = 0; i < fo.mean.size(); ++i) {
    EXPECT_NEAR(fo.mean[i], fs.mean[i], 1e-2) << "channel " << i;
    EXPECT_NEAR(fo.std[i], fs.std[i], 1e-2) << "channel " << i;
  }
  // The pixel mean is carried by the coarsest band alone.
  const auto mo = channel_mean(out), ms = channel_mean(style);
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(mo[c], ms[c], 1e-4);
}

TEST(Stylizer, StyleEqualToContentIsFixedPoint) {
  const Image img = textured_image(40, 32, 5, 0.5);
  EXPECT_LT(max_abs_diff(stylize_image(img, img, 1.0), img), 1e-5);
  EXPECT_LT(max_abs_diff(stylize_image(img, img, 0.6), img), 1e-5);
}

TEST(Stylizer, FlatContentPicksUpStyleTexture) {
  const Image gray(48, 48, 0.5f);
  const Image style = textured_image(48, 48, 6, 0.8);
  const Image out = stylize_image(gray, style, 1.0);
  const auto so = channel_std(out), ss = channel_std(style);
  for (int c = 0; c < 3; ++c) {
    EXPECT_GT(so[c], 0.5 * ss[c]);
    EXPECT_NEAR(channel_mean(out)[c], channel_mean(style)[c], 1e-4);
  }
  const auto half = channel_std(stylize_image(gray, style, 0.5));
  for (int c = 0; c < 3; ++c) EXPECT_LT(half[c], so[c]);
}

TEST(Stylizer, OutputIsContinuousInStrength) {
  const Image content = textured_image(32, 32, 7, 0.4);
  const Image style = textured_image(32, 32, 8, 1.1);
  Image prev = stylize_image(content, style, 0.0);
  double worst = 0;
  for (int k = 1; k <= 100; ++k) {
    const Image cur = stylize_image(content, style, k / 100.0);
    worst = std::max(worst, max_abs_diff(cur, prev));
    prev = cur;
  }
  const double total = max_abs_diff(stylize_image(content, style, 1.0), content);
  EXPECT_GT(total, 0.05);
  EXPECT_LT(worst, 3.0 * total / 100.0);
}

TEST(Stylizer, KeepsOddSizesAndRejectsBadStrength) {
  for (auto [w, h] : std::vector<std::pair<int, int>>{{1, 1}, {3, 7}, {33, 17}, {64, 5}}) {
    const Image out = stylize_image(random_image(w, h, w), random_image(20, 30, h), 0.8);
    EXPECT_EQ(out.width, w);
    EXPECT_EQ(out.height, h);
  }
  EXPECT_THROW(stylize_image(random_image(8, 8, 1), random_image(8, 8, 2), 1.5), InvalidArgument);
  EXPECT_THROW(stylize_image(random_image(8, 8, 1), random_image(8, 8, 2), -0.1), InvalidArgument);
}

TEST(StylizerRegistry, UnknownIdAndCustomRegistration) {
  EXPECT_THROW(make_stylizer("no-such-method"), ValidationError);
  EXPECT_THROW(stylize_image(random_image(8, 8, 1), random_image(8, 8, 2), 0.5, "no-such-method"), ValidationError);
  register_stylizer("stats-match-1", [] { return std::make_unique<StatisticsMatchingStylizer>(1); });
  const auto ids = registered_stylizers();
  EXPECT_NE(std::find(ids.begin(), ids.end(), "stats-match-1"), ids.end());
  EXPECT_NE(std::find(ids.begin(), ids.end(), "stats-match"), ids.end());
}

TEST(StyleAssignment, DeckCoversCorpusEvenly) {
  const auto a = assign_styles(30, 10, 4);
  std::map<std::size_t, int> counts;
  for (auto s : a) counts[s]++;
  EXPECT_EQ(counts.size(), 10u);
  for (auto [s, n] : counts) EXPECT_EQ(n, 3);
  // Each block of ten is a permutation.
  for (int block = 0; block < 3; ++block) {
    std::set<std::size_t> seen(a.begin() + 10 * block, a.begin() + 10 * (block + 1));
    EXPECT_EQ(seen.size(), 10u);
  }
  EXPECT_EQ(a, assign_styles(30, 10, 4));
  EXPECT_NE(a, assign_styles(30, 10, 5));
  EXPECT_THROW(assign_styles(3, 0, 1), Error);
}

class StylizeJobTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticSpec spec;
    spec.n_images = 50;
    spec.width = 45;
    spec.height = 33;
    spec.second_person_prob = 0.3;
    spec.seed = 11;
    source_ = generate_synthetic_dataset(spec, dir_ / "data");
    std::filesystem::create_directories(dir_ / "styles" / "nested");
    for (int i = 0; i < 4; ++i) {
      save_image(textured_image(40 + 8 * i, 36, 100 + i, 0.3 + 0.2 * i),
                 dir_ / "styles" / (i % 2 ? "nested" : "") / ("style" + std::to_string(i) + ".png"));
    }
    std::ofstream(dir_ / "styles" / "notes.txt") << "not an image";
  }

  StylizationJob job(const std::string& out, double strength = 1.0) const {
    StylizationJob j;
    j.source = source_;
    j.styles = StyleCorpus::from_directory(dir_ / "styles", 3);
    j.strength = strength;
    j.output_dir = dir_ / out;
    return j;
  }

  TempDir dir_{"stylize"};
  DatasetManifest source_;
};

TEST_F(StylizeJobTest, PreservesGeometryAndAnnotations) {
  const StylizationJob j = job("out");
  EXPECT_EQ(j.styles.paths.size(), 4u);
  const StylizationResult r = stylize_dataset(j);
  EXPECT_EQ(r.processed, 50u);
  EXPECT_EQ(r.resumed, 0u);
  EXPECT_EQ(r.style_assignment.size(), 50u);
  ASSERT_EQ(r.manifest.records.size(), source_.records.size());
  EXPECT_EQ(r.manifest.source_tag, source_.source_tag + "-s");
  EXPECT_EQ(r.manifest.categories, source_.categories);
  for (std::size_t i = 0; i < source_.records.size(); ++i) {
    const ImageRecord& a = source_.records[i];
    const ImageRecord& b = r.manifest.records[i];
    EXPECT_EQ(a.image_id, b.image_id);
    EXPECT_EQ(a.persons, b.persons);
    EXPECT_EQ(a.width, b.width);
    EXPECT_EQ(a.height, b.height);
    const Image img = load_image(r.manifest.resolve(b));
    EXPECT_EQ(img.width, a.width);
    EXPECT_EQ(img.height, a.height);
  }
  // The written manifest reloads to the same content.
  const DatasetManifest reread = parse_manifest(j.output_dir / std::string(kStylizedManifestName));
  EXPECT_EQ(reread, r.manifest);

  std::ifstream log(j.output_dir / std::string(kJobLogName));
  std::string line;
  std::size_t ok = 0;
  while (std::getline(log, line)) {
    const auto e = nlohmann::json::parse(line);
    ok += e.at("status") == "ok";
    EXPECT_TRUE(e.contains("image_id"));
    EXPECT_TRUE(e.contains("style_id"));
  }
  EXPECT_EQ(ok, 50u);
}

std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST_F(StylizeJobTest, DeterministicAndResumable) {
  StylizationJob a = job("a");
  StylizationJob b = job("b");
  b.workers = 3;
  const auto ra = stylize_dataset(a);
  const auto rb = stylize_dataset(b);
  EXPECT_EQ(ra.style_assignment, rb.style_assignment);
  for (std::size_t i = 0; i < ra.manifest.records.size(); ++i) {
    ASSERT_EQ(read_bytes(ra.manifest.resolve(ra.manifest.records[i])),
              read_bytes(rb.manifest.resolve(rb.manifest.records[i])));
  }

  const auto again = stylize_dataset(a);
  EXPECT_EQ(again.resumed, 50u);
  EXPECT_EQ(again.processed, 0u);

  const auto victim = ra.manifest.resolve(ra.manifest.records[7]);
  const std::string before = read_bytes(victim);
  std::filesystem::remove(victim);
  const auto redo = stylize_dataset(a);
  EXPECT_EQ(redo.processed, 1u);
  EXPECT_EQ(redo.resumed, 49u);
  EXPECT_EQ(read_bytes(victim), before);
}

TEST_F(StylizeJobTest, JobErrors) {
  StylizationJob j = job("bad");
  j.stylizer_id = "no-such-method";
  EXPECT_THROW(stylize_dataset(j), ValidationError);
  EXPECT_THROW(StyleCorpus::from_directory(dir_ / "data" / "missing", 1), Error);
  std::filesystem::create_directories(dir_ / "empty");
  EXPECT_THROW(StyleCorpus::from_directory(dir_ / "empty", 1), ValidationError);

  // A damaged source image fails the job but leaves the others done.
  StylizationJob k = job("partial");
  k.source.base_dir = dir_ / "copy";
  std::filesystem::copy(dir_ / "data", dir_ / "copy", std::filesystem::copy_options::recursive);
  std::ofstream(k.source.resolve(k.source.records[3])) << "garbage";
  EXPECT_THROW(stylize_dataset(k), RuntimeError);
  std::ifstream log(k.output_dir / std::string(kJobLogName));
  std::string line;
  std::size_t ok = 0, failed = 0;
  while (std::getline(log, line)) {
    const auto e = nlohmann::json::parse(line);
    (e.at("status") == "ok" ? ok : failed)++;
  }
  EXPECT_EQ(ok, 49u);
  EXPECT_EQ(failed, 1u);
}

TEST_F(StylizeJobTest, StrengthZeroLeavesEvaluationUnchanged) {
  const auto r = stylize_dataset(job("zero", 0.0));
  ModelConfig mc;
  mc.trunk_width = 8;
  mc.context_side = 64;
  mc.init = InitMode::kRandom;
  Checkpoint ck;
  ck.model = EmotionModel::build(mc, 1);
  ck.categories = source_.categories;
  ck.normalization = compute_normalization(source_);
  const MetricsReport a = evaluate(ck, source_);
  const MetricsReport b = evaluate(ck, r.manifest);
  EXPECT_EQ(a.per_category_ap, b.per_category_ap);
  EXPECT_EQ(a.mean_ap, b.mean_ap);
  EXPECT_EQ(a.per_dim_vad_error, b.per_dim_vad_error);
  EXPECT_EQ(a.mean_vad_error, b.mean_vad_error);
  EXPECT_EQ(a.n_persons, b.n_persons);
}

}  // namespace
}  // namespace emoart
