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

#include "emoart/image.hpp"

#include <algorithm>
#include <cmath>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "emoart/error.hpp"

namespace emoart {

Image make_constant_image(int width, int height, std::array<float, 3> rgb) {
  Image img(width, height);
  for (std::size_t i = 0; i < img.pixels.size(); i += 3) {
    img.pixels[i] = rgb[0];
    img.pixels[i + 1] = rgb[1];
    img.pixels[i + 2] = rgb[2];
  }
  return img;
}

Image load_image(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw IoError("image file not found: " + path.string());
  }
  cv::Mat bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) throw IoError("cannot decode image: " + path.string());
  if (bgr.depth() != CV_8U) bgr.convertTo(bgr, CV_8U);

  Image img(bgr.cols, bgr.rows);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      img.at(x, y, 0) = row[x][2] / 255.0f;
      img.at(x, y, 1) = row[x][1] / 255.0f;
      img.at(x, y, 2) = row[x][0] / 255.0f;
    }
  }
  return img;
}

std::array<int, 2> probe_image_size(const std::filesystem::path& path) {
  // imgcodecs has no header-only probe in 4.5; a decode at reduced size would
  // change the reported size for JPEG, so decode fully.
  Image img = load_image(path);
  return {img.width, img.height};
}

void save_image(const Image& image, const std::filesystem::path& path) {
  if (image.empty()) throw InvalidArgument("cannot save an empty image");
  cv::Mat bgr(image.height, image.width, CV_8UC3);
  auto to_byte = [](float v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  };
  for (int y = 0; y < image.height; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image.width; ++x) {
      row[x][2] = to_byte(image.at(x, y, 0));
      row[x][1] = to_byte(image.at(x, y, 1));
      row[x][0] = to_byte(image.at(x, y, 2));
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), bgr);
  } catch (const cv::Exception& e) {
    throw IoError("cannot encode " + path.string() + ": " + e.what());
  }
  if (!ok) throw IoError("cannot write image: " + path.string());
}

Image flip_horizontal(const Image& image) {
  Image out(image.width, image.height);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      for (int c = 0; c < 3; ++c) out.at(image.width - 1 - x, y, c) = image.at(x, y, c);
    }
  }
  return out;
}

namespace {

struct Tap {
  int i0, i1;
  double w1;  // weight of i1; i0 gets 1 - w1
};

std::vector<Tap> make_taps(double start, double extent, int out_n, int in_n) {
  std::vector<Tap> taps(static_cast<std::size_t>(out_n));
  const double step = extent / out_n;
  for (int u = 0; u < out_n; ++u) {
    double pos = start + (u + 0.5) * step - 0.5;
    pos = std::clamp(pos, 0.0, double(in_n - 1));
    int i0 = static_cast<int>(std::floor(pos));
    int i1 = std::min(i0 + 1, in_n - 1);
    taps[u] = Tap{i0, i1, pos - i0};
  }
  return taps;
}

}  // namespace

Image resample_region(const Image& image, const Region& region, int out_w, int out_h) {
  if (image.empty()) throw InvalidArgument("cannot resample an empty image");
  if (out_w <= 0 || out_h <= 0) throw InvalidArgument("resample target must be positive");
  if (!(region.x2 > region.x1) || !(region.y2 > region.y1)) {
    throw InvalidArgument("degenerate resample region");
  }
  const auto xs = make_taps(region.x1, region.x2 - region.x1, out_w, image.width);
  const auto ys = make_taps(region.y1, region.y2 - region.y1, out_h, image.height);

  Image out(out_w, out_h);
  for (int v = 0; v < out_h; ++v) {
    const Tap& ty = ys[v];
    for (int u = 0; u < out_w; ++u) {
      const Tap& tx = xs[u];
      for (int c = 0; c < 3; ++c) {
        const double top = (1.0 - tx.w1) * image.at(tx.i0, ty.i0, c) + tx.w1 * image.at(tx.i1, ty.i0, c);
        const double bottom = (1.0 - tx.w1) * image.at(tx.i0, ty.i1, c) + tx.w1 * image.at(tx.i1, ty.i1, c);
        out.at(u, v, c) = static_cast<float>((1.0 - ty.w1) * top + ty.w1 * bottom);
      }
    }
  }
  return out;
}

}  // namespace emoart
