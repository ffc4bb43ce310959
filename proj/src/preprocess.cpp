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
#include <random>

#include "emoart/dataset.hpp"
#include "emoart/error.hpp"
#include "emoart/logging.hpp"
#include "emoart/rng.hpp"

namespace emoart {

Tensor normalize_image(const Image& image, const Normalization& norm) {
  Tensor t({image.height, image.width, 3});
  float* out = t.data();
  for (std::size_t i = 0; i < image.pixels.size(); i += 3) {
    for (int c = 0; c < 3; ++c) out[i + c] = (image.pixels[i + c] - norm.mean[c]) / norm.std[c];
  }
  return t;
}

namespace {

void check_side(int side, const char* what) {
  if (side <= 0) throw InvalidArgument(std::string(what) + " side must be positive");
}

void check_geometry(const Image& image, const ImageRecord& record) {
  if (image.width != record.width || image.height != record.height) {
    throw ValidationError("image '" + record.image_id + "' is " + std::to_string(image.width) +
                          "x" + std::to_string(image.height) + " but the manifest says " +
                          std::to_string(record.width) + "x" + std::to_string(record.height));
  }
}

}  // namespace

Tensor extract_body_crop(const Image& image, const ImageRecord& record,
                         const PersonAnnotation& person, int side, const Normalization& norm) {
  check_side(side, "body crop");
  if (side != 128 && side != 224) {
    log_warning("body crop side " + std::to_string(side) + " is not a supported configuration");
  }
  check_geometry(image, record);
  const BoundingBox& b = person.bbox;
  if (!(b.x1 < b.x2) || !(b.y1 < b.y2) || b.x1 < 0 || b.y1 < 0 || b.x2 > image.width ||
      b.y2 > image.height) {
    throw ValidationError("bounding box does not fit image '" + record.image_id + "'");
  }
  return normalize_image(resample_region(image, b.region(), side, side), norm);
}

Tensor extract_body_crop(const DatasetManifest& manifest, const ImageRecord& record,
                         const PersonAnnotation& person, int side, const Normalization& norm) {
  return extract_body_crop(load_image(manifest.resolve(record)), record, person, side, norm);
}

Tensor preprocess_context(const Image& image, int side, const Normalization& norm) {
  check_side(side, "context");
  return normalize_image(resize_image(image, side, side), norm);
}

Tensor preprocess_context(const DatasetManifest& manifest, const ImageRecord& record, int side,
                          const Normalization& norm) {
  Image image = load_image(manifest.resolve(record));
  check_geometry(image, record);
  return preprocess_context(image, side, norm);
}

Tensor flip_tensor_horizontal(const Tensor& hwc) {
  if (hwc.rank() != 3) throw InvalidArgument("expected an (H, W, C) tensor, got " + hwc.shape_string());
  const int h = hwc.dim(0), w = hwc.dim(1), c = hwc.dim(2);
  Tensor out(hwc.shape());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float* src = hwc.data() + (static_cast<std::size_t>(y) * w + x) * c;
      float* dst = out.data() + (static_cast<std::size_t>(y) * w + (w - 1 - x)) * c;
      std::copy(src, src + c, dst);
    }
  }
  return out;
}

AugmentParams sample_augment(std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  AugmentParams p;
  p.flip = unit(rng) < 0.5;
  for (int c = 0; c < 3; ++c) {
    p.gain[c] = static_cast<float>(0.9 + 0.2 * unit(rng));
    p.bias[c] = static_cast<float>(-0.1 + 0.2 * unit(rng));
  }
  return p;
}

namespace {

void jitter(Tensor& t, const AugmentParams& p) {
  if (t.rank() != 3 || t.dim(2) != 3) {
    throw InvalidArgument("expected an (H, W, 3) tensor, got " + t.shape_string());
  }
  float* d = t.data();
  for (std::size_t i = 0; i < t.numel(); i += 3) {
    for (int c = 0; c < 3; ++c) d[i + c] = d[i + c] * p.gain[c] + p.bias[c];
  }
}

}  // namespace

void apply_augment(const AugmentParams& params, Tensor& body, Tensor& context) {
  if (params.flip) {
    body = flip_tensor_horizontal(body);
    context = flip_tensor_horizontal(context);
  }
  jitter(body, params);
  jitter(context, params);
}

std::pair<Tensor, Tensor> augment(const Tensor& body, const Tensor& context, std::uint64_t seed) {
  Tensor b = body;
  Tensor c = context;
  apply_augment(sample_augment(seed), b, c);
  return {std::move(b), std::move(c)};
}

Normalization compute_normalization(const DatasetManifest& manifest, std::size_t max_images) {
  const std::size_t n = manifest.records.size();
  if (n == 0) throw ValidationError("cannot compute normalization of an empty manifest");
  std::size_t stride = 1;
  if (max_images > 0 && n > max_images) stride = (n + max_images - 1) / max_images;

  std::array<double, 3> sum{}, sq{};
  double count = 0;
  for (std::size_t i = 0; i < n; i += stride) {
    Image img = load_image(manifest.resolve(manifest.records[i]));
    for (std::size_t k = 0; k < img.pixels.size(); k += 3) {
      for (int c = 0; c < 3; ++c) {
        const double v = img.pixels[k + c];
        sum[c] += v;
        sq[c] += v * v;
      }
    }
    count += double(img.width) * img.height;
  }
  Normalization norm;
  for (int c = 0; c < 3; ++c) {
    const double mean = sum[c] / count;
    const double var = std::max(0.0, sq[c] / count - mean * mean);
    norm.mean[c] = static_cast<float>(mean);
    // Constant-colour datasets would otherwise divide by zero.
    norm.std[c] = static_cast<float>(std::max(std::sqrt(var), 1e-3));
  }
  return norm;
}

}  // namespace emoart
