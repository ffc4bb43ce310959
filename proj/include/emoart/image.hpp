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

#ifndef EMOART_IMAGE_HPP
#define EMOART_IMAGE_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <vector>

namespace emoart {

/// Interleaved RGB image with float samples in [0, 1] for decoded files.
/// Intermediate results (e.g. stylized output) may leave that range; it is
/// clamped only when encoding.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<float> pixels;  // width * height * 3, row-major, RGB

  Image() = default;
  Image(int w, int h, float fill = 0.0f)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, fill) {}

  float& at(int x, int y, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  float at(int x, int y, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  bool empty() const noexcept { return pixels.empty(); }
};

Image make_constant_image(int width, int height, std::array<float, 3> rgb);

/// Decodes any format the image codec understands (PNG, JPEG, BMP, PPM, ...).
/// Grayscale inputs are expanded to three channels, alpha is dropped.
Image load_image(const std::filesystem::path& path);

/// Reads only the header when the codec allows it; falls back to a decode.
std::array<int, 2> probe_image_size(const std::filesystem::path& path);

/// Encodes with 8 bits per channel (rounding, clamped to [0, 1]). The format
/// follows the extension; ".png" is lossless.
void save_image(const Image& image, const std::filesystem::path& path);

Image flip_horizontal(const Image& image);

/// Continuous region in pixel-edge coordinates: pixel (i, j) covers
/// [i, i+1) x [j, j+1), so (0, 0, W, H) is the whole image.
struct Region {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

/// Bilinear resampling of `region` onto an out_w x out_h grid.
///
/// Output sample (u, v) sits at the centre of its cell, i.e. source position
/// x = x1 + (u + 0.5) * (x2 - x1) / out_w - 0.5 in pixel-index coordinates
/// (same for y). Neighbour lookups clamp to the image border. Resampling a
/// whole image onto its own size is the identity.
Image resample_region(const Image& image, const Region& region, int out_w, int out_h);

inline Image resize_image(const Image& image, int out_w, int out_h) {
  return resample_region(image, Region{0, 0, double(image.width), double(image.height)},
                         out_w, out_h);
}

}  // namespace emoart

#endif  // EMOART_IMAGE_HPP
