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

#ifndef EMOART_STYLIZE_HPP
#define EMOART_STYLIZE_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "emoart/dataset.hpp"
#include "emoart/image.hpp"

namespace emoart {

/// Per-channel statistics of a stylizer's feature representation.
struct FeatureStats {
  std::vector<double> mean;
  std::vector<double> std;
};

/// A style-transfer method. Implementations must keep the content image's
/// pixel dimensions and return the content unchanged at strength 0.
class Stylizer {
 public:
  virtual ~Stylizer() = default;
  virtual std::string_view id() const = 0;
  virtual Image stylize(const Image& content, const Image& style, double strength) const = 0;
  virtual FeatureStats feature_stats(const Image& image) const = 0;
};

/// Baseline: statistics matching in a fixed orthonormal feature space.
///
/// Encoder: opponent colour transform (luma + two chroma axes) followed by a
/// `levels`-deep 2-D Haar decomposition, giving 3 * (3 * levels + 1) feature
/// channels. Both stages are orthonormal, so the decoder is the exact
/// transpose. Each content channel is standardized and rescaled to
///   mean = (1 - s) * mean_content + s * mean_style
///   std  = (1 - s) * std_content  + s * std_style.
/// A content channel with zero variance borrows the standardized pattern of
/// the style channel, so flat regions can still pick up texture.
///
/// Images are edge-padded to a multiple of 2^levels for the transform and
/// cropped back, which is exact when the size is already a multiple.
class StatisticsMatchingStylizer final : public Stylizer {
 public:
  static constexpr std::string_view kId = "stats-match";

  explicit StatisticsMatchingStylizer(int levels = 2);

  std::string_view id() const override { return kId; }
  Image stylize(const Image& content, const Image& style, double strength) const override;
  FeatureStats feature_stats(const Image& image) const override;

  int levels() const noexcept { return levels_; }
  int channel_count() const noexcept { return 3 * (3 * levels_ + 1); }

 private:
  int levels_;
};

using StylizerFactory = std::function<std::unique_ptr<Stylizer>()>;

/// Registers a factory under `id`; replaces an existing registration.
void register_stylizer(const std::string& id, StylizerFactory factory);
/// Throws ValidationError for unregistered ids.
std::unique_ptr<Stylizer> make_stylizer(std::string_view id);
std::vector<std::string> registered_stylizers();

/// Convenience wrapper; strength must lie in [0, 1].
Image stylize_image(const Image& content, const Image& style, double strength,
                    std::string_view stylizer_id = StatisticsMatchingStylizer::kId);

struct StyleCorpus {
  std::vector<std::filesystem::path> paths;
  std::uint64_t sampling_seed = 0;

  /// All decodable-looking image files under `dir` (recursive), sorted.
  static StyleCorpus from_directory(const std::filesystem::path& dir, std::uint64_t seed);
};

/// Style index per content image: the corpus is consumed as a shuffled deck
/// and reshuffled whenever it runs out.
std::vector<std::size_t> assign_styles(std::size_t n_images, std::size_t n_styles, std::uint64_t seed);

struct StylizationJob {
  DatasetManifest source;
  StyleCorpus styles;
  std::string stylizer_id = std::string(StatisticsMatchingStylizer::kId);
  double strength = 1.0;
  std::filesystem::path output_dir;
  std::size_t workers = 1;
};

struct StylizationResult {
  DatasetManifest manifest;  // written to output_dir/manifest.jsonl
  std::vector<std::size_t> style_assignment;
  std::size_t processed = 0;
  std::size_t resumed = 0;  // already done according to the job log
};

inline constexpr std::string_view kStylizedManifestName = "manifest.jsonl";
inline constexpr std::string_view kJobLogName = "job_log.jsonl";

/// Stylizes every image of the source manifest. Annotations pass through
/// unchanged; paths point at output_dir/images and source_tag gains "-s".
/// Progress is appended to output_dir/job_log.jsonl as
/// {"image_id", "style_id", "status"} lines; a rerun skips images logged as
/// "ok" whose output still exists. If any image fails, the log is kept and a
/// RuntimeError lists the failures.
StylizationResult stylize_dataset(const StylizationJob& job);

}  // namespace emoart

#endif  // EMOART_STYLIZE_HPP
