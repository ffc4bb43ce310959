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

#ifndef EMOART_SYNTHETIC_HPP
#define EMOART_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "emoart/dataset.hpp"

namespace emoart {

/// Procedural toy dataset: one or two figures per image, drawn as coloured
/// shapes over a textured background. Each figure's colour is determined by
/// its category, and its VAD triple is a function of the category plus
/// noise, so both heads have something learnable.
struct SyntheticSpec {
  std::size_t n_images = 64;
  int width = 96;
  int height = 96;
  // Number of distinct categories used, spread evenly over the 26.
  int n_classes = 4;
  // Probability that an image holds a second figure.
  double second_person_prob = 0.0;
  // Standard deviation of the VAD noise, in scale units.
  double vad_noise = 0.3;
  std::uint64_t seed = 0;
  Split split = Split::kTrain;
  std::string source_tag = "SYNTH";
};

/// Category indices used by a spec, in palette order.
std::vector<int> synthetic_classes(int n_classes);

/// Writes images to out_dir/images and the manifest to out_dir/manifest.jsonl.
DatasetManifest generate_synthetic_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace emoart

#endif  // EMOART_SYNTHETIC_HPP
