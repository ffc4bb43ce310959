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

#ifndef EMOART_CONVERT_HPP
#define EMOART_CONVERT_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "emoart/dataset.hpp"
#include "emoart/model.hpp"

namespace emoart {

/// Source annotation formats understood by convert_annotations.
///
///   emotic-csv  one row per person with columns Folder, Filename, BBox
///               "[x1, y1, x2, y2]", Categorical_Labels "['A', 'B']" and
///               Continuous_Labels "[v, a, d]"; "Image Size" is optional
///   simple-csv  header "path,x1,y1,x2,y2,categories,valence,arousal,dominance"
///               with categories separated by ';'
std::vector<std::string> conversion_formats();

struct ConvertOptions {
  std::string format = "emotic-csv";
  std::filesystem::path images_root;  // image paths resolve against this
  Split split = Split::kTrain;
  std::string source_tag = "EMOTIC";
  VadScale vad_scale;
  double clip_tolerance = 2.0;
};

/// Groups rows by image, probes image sizes from the files, validates every
/// record and returns the manifest (base_dir = images_root). Row errors
/// carry the CSV line number.
DatasetManifest convert_annotations(const std::filesystem::path& input, const ConvertOptions& options);

/// Splits one CSV line (RFC 4180 quoting).
std::vector<std::string> split_csv_line(std::string_view line);

// ---------------------------------------------------------------------------
// Trunk weights

/// Checks that `source` is a trunk weight file for `backbone` (names, shapes,
/// width) and copies it into weights_dir under its canonical name, tagged
/// with `scheme`. Returns the destination path.
std::filesystem::path ingest_trunk_weights(const std::filesystem::path& source,
                                           const std::filesystem::path& weights_dir, Backbone backbone,
                                           Pretraining scheme);

/// Writes a randomly initialized trunk file for offline experiments, with
/// batch-norm running statistics calibrated on unit-normal inputs. The
/// header records that it is not pretrained.
std::filesystem::path write_random_trunk_weights(const std::filesystem::path& weights_dir, Backbone backbone,
                                                 Pretraining scheme, int width, std::uint64_t seed);

}  // namespace emoart

#endif  // EMOART_CONVERT_HPP
