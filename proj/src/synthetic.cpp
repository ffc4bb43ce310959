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

#include "emoart/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "emoart/error.hpp"
#include "emoart/rng.hpp"

namespace emoart {
namespace {

std::array<float, 3> hue_to_rgb(double h) {
  const double r = std::clamp(std::abs(h * 6.0 - 3.0) - 1.0, 0.0, 1.0);
  const double g = std::clamp(2.0 - std::abs(h * 6.0 - 2.0), 0.0, 1.0);
  const double b = std::clamp(2.0 - std::abs(h * 6.0 - 4.0), 0.0, 1.0);
  return {float(0.1 + 0.8 * r), float(0.1 + 0.8 * g), float(0.1 + 0.8 * b)};
}

void draw_figure(Image& img, const BoundingBox& box, std::array<float, 3> rgb) {
  // Head: disc in the top third. Torso: ellipse below it.
  const double cx = 0.5 * (box.x1 + box.x2);
  const double w = box.width(), h = box.height();
  const double head_r = std::min(w, h / 3.0) * 0.45;
  const double head_cy = box.y1 + h / 6.0;
  const double torso_cy = box.y1 + h * 0.64, torso_rx = w * 0.5, torso_ry = h * 0.36;
  for (int y = int(box.y1); y < int(std::ceil(box.y2)) && y < img.height; ++y) {
    for (int x = int(box.x1); x < int(std::ceil(box.x2)) && x < img.width; ++x) {
      const double px = x + 0.5, py = y + 0.5;
      const double dh = std::hypot(px - cx, py - head_cy);
      const double et = std::pow((px - cx) / torso_rx, 2) + std::pow((py - torso_cy) / torso_ry, 2);
      if (dh <= head_r || et <= 1.0) {
        for (int c = 0; c < 3; ++c) img.at(x, y, c) = rgb[c];
      }
    }
  }
}

}  // namespace

std::vector<int> synthetic_classes(int n_classes) {
  if (n_classes < 1 || n_classes > int(kNumCategories)) {
    throw ValidationError("n_classes must lie in [1, 26]");
  }
  std::vector<int> out;
  for (int i = 0; i < n_classes; ++i) out.push_back(int((i * kNumCategories) / n_classes));
  return out;
}

DatasetManifest generate_synthetic_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir) {
  if (spec.n_images == 0) throw ValidationError("n_images must be positive");
  if (spec.width < 32 || spec.height < 32) throw ValidationError("synthetic images must be at least 32x32");
  const auto classes = synthetic_classes(spec.n_classes);
  std::filesystem::create_directories(out_dir / "images");

  DatasetManifest m;
  m.split = spec.split;
  m.source_tag = spec.source_tag;
  m.base_dir = std::filesystem::absolute(out_dir);
  Rng rng(spec.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);

  for (std::size_t i = 0; i < spec.n_images; ++i) {
    Image img(spec.width, spec.height);
    // Low-saturation background: random base tone, diagonal stripes and
    // per-pixel grain.
    const double base = 0.3 + 0.4 * u01(rng);
    const double period = 6.0 + 10.0 * u01(rng);
    const double phase = u01(rng) * 6.283185307;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const double stripe = 0.08 * std::sin((x + y) * 6.283185307 / period + phase);
        for (int c = 0; c < 3; ++c) {
          img.at(x, y, c) = float(std::clamp(base + stripe + 0.03 * noise(rng), 0.0, 1.0));
        }
      }
    }

    ImageRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "synth_%05zu", i);
    rec.image_id = id;
    rec.path = "images/" + rec.image_id + ".png";
    rec.width = spec.width;
    rec.height = spec.height;

    const int n_persons = u01(rng) < spec.second_person_prob ? 2 : 1;
    for (int p = 0; p < n_persons; ++p) {
      // Balanced classes: image i cycles through the palette.
      const int slot = n_persons == 1 || p == 0 ? int(i % classes.size())
                                                : int(std::uniform_int_distribution<std::size_t>(
                                                      0, classes.size() - 1)(rng));
      const double bw = spec.width * (0.3 + 0.2 * u01(rng)) / n_persons;
      const double bh = spec.height * (0.5 + 0.3 * u01(rng));
      const double lane = double(spec.width) / n_persons;
      const double x1 = p * lane + (lane - bw) * u01(rng);
      const double y1 = (spec.height - bh) * u01(rng);
      PersonAnnotation person;
      person.bbox = {std::floor(x1), std::floor(y1), std::floor(x1 + bw), std::floor(y1 + bh)};
      person.categories = {classes[slot]};

      const double t = classes.size() == 1 ? 0.5 : double(slot) / double(classes.size() - 1);
      auto rgb = hue_to_rgb(double(slot) / double(classes.size()));
      for (auto& v : rgb) v = float(std::clamp(v + 0.03 * noise(rng), 0.0, 1.0));
      draw_figure(img, person.bbox, rgb);

      auto vad = [&](double centre) {
        return std::round(std::clamp(centre + spec.vad_noise * noise(rng), 1.0, 10.0) * 100.0) / 100.0;
      };
      person.vad = {vad(2.0 + 7.0 * t), vad(7.0 - 4.0 * t), vad(3.0 + 4.0 * std::abs(t - 0.5) * 2.0)};
      rec.persons.push_back(person);
    }
    save_image(img, m.base_dir / rec.path);
    m.records.push_back(std::move(rec));
  }
  write_manifest(m, out_dir / "manifest.jsonl");
  return m;
}

}  // namespace emoart
