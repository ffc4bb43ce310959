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

#ifndef EMOART_DATASET_HPP
#define EMOART_DATASET_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "emoart/categories.hpp"
#include "emoart/image.hpp"
#include "emoart/tensor.hpp"

namespace emoart {

struct BoundingBox {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  Region region() const noexcept { return Region{x1, y1, x2, y2}; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

struct VadTriple {
  double valence = 0, arousal = 0, dominance = 0;

  std::array<double, 3> as_array() const noexcept { return {valence, arousal, dominance}; }
  friend bool operator==(const VadTriple&, const VadTriple&) = default;
};

struct PersonAnnotation {
  BoundingBox bbox;
  std::vector<int> categories;  // indices into the manifest's category list, listed order kept
  VadTriple vad;

  friend bool operator==(const PersonAnnotation&, const PersonAnnotation&) = default;
};

struct ImageRecord {
  std::string image_id;
  std::string path;  // relative to the manifest's directory (or absolute)
  int width = 0;
  int height = 0;
  std::vector<PersonAnnotation> persons;

  friend bool operator==(const ImageRecord&, const ImageRecord&) = default;
};

enum class Split { kTrain, kVal, kTest };

std::string_view split_name(Split split);
Split parse_split(std::string_view name);

/// Inclusive range ground-truth VAD values must lie in.
struct VadScale {
  double lo = 1.0;
  double hi = 10.0;
  friend bool operator==(const VadScale&, const VadScale&) = default;
};

struct DatasetManifest {
  Split split = Split::kTrain;
  std::string source_tag;
  VadScale vad_scale;
  std::vector<std::string> categories = canonical_category_list();
  std::vector<ImageRecord> records;
  // Directory relative image paths resolve against. Not serialized.
  std::filesystem::path base_dir;

  std::size_t person_count() const noexcept;
  std::filesystem::path resolve(const ImageRecord& record) const;

  /// Equality on everything that is serialized (base_dir excluded).
  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.split == b.split && a.source_tag == b.source_tag &&
           a.vad_scale == b.vad_scale && a.categories == b.categories &&
           a.records == b.records;
  }
};

struct ManifestOptions {
  bool check_files = true;      // every referenced image must exist
  double clip_tolerance = 2.0;  // pixels a bbox may overhang before it is an error
};

inline constexpr std::string_view kManifestFormat = "emoart-manifest";
inline constexpr int kManifestVersion = 1;

/// Parses the line-delimited manifest format: a header object on the first
/// non-blank line, then one image record per line. Errors carry the line.
DatasetManifest parse_manifest(const std::filesystem::path& path,
                               const ManifestOptions& options = {});
DatasetManifest parse_manifest_text(std::string_view text,
                                    const std::filesystem::path& base_dir,
                                    const ManifestOptions& options = {});

std::string serialize_manifest(const DatasetManifest& manifest);

/// Writes the manifest; relative image paths are rebased so they still point
/// at the same files from the new location.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);

/// Checks a record against the geometric and label invariants and returns it
/// with boxes clipped to the image. Throws ManifestError (line 0).
ImageRecord validate_record(ImageRecord record, const VadScale& scale,
                            std::size_t num_categories, double clip_tolerance = 2.0);

// ---------------------------------------------------------------------------
// Preprocessing

/// Per-channel normalization applied to [0, 1] pixels: (x - mean) / std.
struct Normalization {
  std::array<float, 3> mean{0.485f, 0.456f, 0.406f};
  std::array<float, 3> std{0.229f, 0.224f, 0.225f};

  static Normalization natural_images() { return {}; }
  friend bool operator==(const Normalization&, const Normalization&) = default;
};

/// Pixel mean/std over the manifest's images. `max_images` > 0 takes an
/// evenly strided subset.
Normalization compute_normalization(const DatasetManifest& manifest, std::size_t max_images = 0);

inline constexpr int kDefaultBodySide = 128;
inline constexpr int kDefaultContextSide = 224;

/// (H, W, 3) tensor of normalized values.
Tensor normalize_image(const Image& image, const Normalization& norm);

/// Person crop resampled to side x side, normalized. Sides other than 128
/// and 224 work but log a warning.
Tensor extract_body_crop(const Image& image, const ImageRecord& record,
                         const PersonAnnotation& person, int side,
                         const Normalization& norm);
Tensor extract_body_crop(const DatasetManifest& manifest, const ImageRecord& record,
                         const PersonAnnotation& person, int side,
                         const Normalization& norm);

Tensor preprocess_context(const Image& image, int side, const Normalization& norm);
Tensor preprocess_context(const DatasetManifest& manifest, const ImageRecord& record,
                          int side, const Normalization& norm);

/// Mirrors an (H, W, C) tensor left-right.
Tensor flip_tensor_horizontal(const Tensor& hwc);

struct AugmentParams {
  bool flip = false;
  std::array<float, 3> gain{1, 1, 1};
  std::array<float, 3> bias{0, 0, 0};
};

/// Draws flip (p = 0.5) and per-channel jitter from `seed`.
AugmentParams sample_augment(std::uint64_t seed);

/// Applies the same flip and jitter to both tensors.
void apply_augment(const AugmentParams& params, Tensor& body, Tensor& context);

std::pair<Tensor, Tensor> augment(const Tensor& body, const Tensor& context, std::uint64_t seed);

/// A (record, person) pair; the training and evaluation unit.
struct SampleRef {
  std::size_t record = 0;
  std::size_t person = 0;
};

/// All persons in record order. Records without persons are skipped.
std::vector<SampleRef> enumerate_samples(const DatasetManifest& manifest);

/// Multi-hot target over the manifest's category list.
std::vector<double> multi_hot(const PersonAnnotation& person, std::size_t num_categories);

}  // namespace emoart

#endif  // EMOART_DATASET_HPP
