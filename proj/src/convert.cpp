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

#include "emoart/convert.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <set>

#include "emoart/container.hpp"
#include "emoart/error.hpp"
#include "emoart/logging.hpp"
#include "emoart/resnet.hpp"

namespace emoart {
namespace {

std::string trim(std::string_view s, std::string_view chars = " \t\r\n") {
  const auto b = s.find_first_not_of(chars);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(chars);
  return std::string(s.substr(b, e - b + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// "[a, b, 'c']" -> {"a", "b", "c"}
std::vector<std::string> parse_list(std::string_view text) {
  std::string body = trim(text);
  if (!body.empty() && body.front() == '[') body.erase(0, 1);
  if (!body.empty() && body.back() == ']') body.pop_back();
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= body.size()) {
    const auto comma = body.find(',', start);
    const std::string item = trim(body.substr(start, comma == std::string::npos ? std::string::npos : comma - start),
                                  " \t\r\n'\"");
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double to_number(const std::string& s, std::size_t line, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw ManifestError(line, std::string("malformed ") + what + " value '" + s + "'");
}

struct Row {
  std::size_t line = 0;
  std::string image;  // path relative to images_root
  PersonAnnotation person;
};

int category_of(const std::string& name, std::size_t line) {
  const auto idx = category_index(name);
  if (!idx) throw ManifestError(line, "unknown category '" + name + "'");
  return *idx;
}

std::vector<Row> read_rows(const std::filesystem::path& input, const std::string& format) {
  std::ifstream in(input);
  if (!in) throw IoError("cannot read " + input.string());
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split_csv_line(line);
  }
  if (header.empty()) throw ValidationError(input.string() + " is empty");
  std::map<std::string, std::size_t> col;
  for (std::size_t i = 0; i < header.size(); ++i) col[lower(trim(header[i]))] = i;
  auto need = [&](const std::string& name) {
    auto it = col.find(name);
    if (it == col.end()) throw ManifestError(line_no, "missing column '" + name + "'");
    return it->second;
  };

  std::vector<Row> rows;
  if (format == "emotic-csv") {
    const std::size_t c_folder = need("folder"), c_file = need("filename"), c_bbox = need("bbox"),
                      c_cat = need("categorical_labels"), c_cont = need("continuous_labels");
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() < header.size()) throw ManifestError(line_no, "expected " + std::to_string(header.size()) + " fields");
      Row r;
      r.line = line_no;
      r.image = (std::filesystem::path(trim(f[c_folder])) / trim(f[c_file])).generic_string();
      const auto box = parse_list(f[c_bbox]);
      if (box.size() != 4) throw ManifestError(line_no, "BBox must hold four numbers");
      r.person.bbox = {to_number(box[0], line_no, "bbox"), to_number(box[1], line_no, "bbox"),
                       to_number(box[2], line_no, "bbox"), to_number(box[3], line_no, "bbox")};
      for (const auto& name : parse_list(f[c_cat])) r.person.categories.push_back(category_of(name, line_no));
      const auto vad = parse_list(f[c_cont]);
      if (vad.size() != 3) throw ManifestError(line_no, "Continuous_Labels must hold three numbers");
      r.person.vad = {to_number(vad[0], line_no, "vad"), to_number(vad[1], line_no, "vad"),
                      to_number(vad[2], line_no, "vad")};
      rows.push_back(std::move(r));
    }
  } else if (format == "simple-csv") {
    const std::size_t c_path = need("path"), c_x1 = need("x1"), c_y1 = need("y1"), c_x2 = need("x2"),
                      c_y2 = need("y2"), c_cat = need("categories"), c_v = need("valence"),
                      c_a = need("arousal"), c_d = need("dominance");
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto f = split_csv_line(line);
      if (f.size() < header.size()) throw ManifestError(line_no, "expected " + std::to_string(header.size()) + " fields");
      Row r;
      r.line = line_no;
      r.image = trim(f[c_path]);
      r.person.bbox = {to_number(trim(f[c_x1]), line_no, "x1"), to_number(trim(f[c_y1]), line_no, "y1"),
                       to_number(trim(f[c_x2]), line_no, "x2"), to_number(trim(f[c_y2]), line_no, "y2")};
      std::string cats = f[c_cat];
      std::replace(cats.begin(), cats.end(), ';', ',');
      for (const auto& name : parse_list(cats)) r.person.categories.push_back(category_of(name, line_no));
      r.person.vad = {to_number(trim(f[c_v]), line_no, "valence"), to_number(trim(f[c_a]), line_no, "arousal"),
                      to_number(trim(f[c_d]), line_no, "dominance")};
      rows.push_back(std::move(r));
    }
  } else {
    throw ValidationError("unknown conversion format '" + format + "'");
  }
  return rows;
}

}  // namespace

std::vector<std::string> conversion_formats() { return {"emotic-csv", "simple-csv"}; }

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r' && ch != '\n') {
      cur += ch;
    }
  }
  out.push_back(std::move(cur));
  return out;
}

DatasetManifest convert_annotations(const std::filesystem::path& input, const ConvertOptions& options) {
  const auto rows = read_rows(input, options.format);
  DatasetManifest m;
  m.split = options.split;
  m.source_tag = options.source_tag;
  m.vad_scale = options.vad_scale;
  m.base_dir = std::filesystem::absolute(options.images_root.empty() ? input.parent_path() : options.images_root);

  std::map<std::string, std::size_t> index;
  for (const Row& r : rows) {
    auto it = index.find(r.image);
    if (it == index.end()) {
      ImageRecord rec;
      rec.image_id = r.image;
      rec.path = r.image;
      const auto file = m.base_dir / r.image;
      std::error_code ec;
      if (!std::filesystem::is_regular_file(file, ec)) throw ManifestError(r.line, "image not found: " + file.string());
      const auto size = probe_image_size(file);
      rec.width = size[0];
      rec.height = size[1];
      it = index.emplace(r.image, m.records.size()).first;
      m.records.push_back(std::move(rec));
    }
    m.records[it->second].persons.push_back(r.person);
  }
  std::size_t rec_line = 0;
  for (auto& rec : m.records) {
    for (const Row& r : rows) {
      if (r.image == rec.image_id) {
        rec_line = r.line;
        break;
      }
    }
    try {
      rec = validate_record(std::move(rec), m.vad_scale, m.categories.size(), options.clip_tolerance);
    } catch (const ManifestError& e) {
      throw ManifestError(rec_line, e.what());
    }
  }
  log_info("converted " + std::to_string(rows.size()) + " persons in " + std::to_string(m.records.size()) +
           " images");
  return m;
}

// ---------------------------------------------------------------------------

std::filesystem::path ingest_trunk_weights(const std::filesystem::path& source,
                                           const std::filesystem::path& weights_dir, Backbone backbone,
                                           Pretraining scheme) {
  const Container c = read_container(source);
  const int width = c.meta.value("width", 64);
  if (c.meta.contains("backbone") && c.meta.value("backbone", "") != backbone_name(backbone)) {
    throw ValidationError(source.string() + " holds " + c.meta.value("backbone", std::string("?")) + ", not " +
                          std::string(backbone_name(backbone)));
  }
  ResNetTrunk trunk(backbone, width);
  nn::ParameterList list;
  trunk.collect(list, "");
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  auto check = [&](const std::string& name, const Tensor& expected) {
    const Tensor* t = c.find(name);
    if (!t) throw ValidationError(source.string() + ": missing tensor '" + name + "'");
    if (!t->same_shape(expected)) {
      throw ValidationError(source.string() + ": tensor '" + name + "' has shape " + t->shape_string() +
                            ", expected " + expected.shape_string());
    }
    tensors.emplace_back(name, t);
  };
  for (const auto* p : list.params) check(p->name, p->value);
  for (const auto* b : list.buffers) check(b->name, b->value);

  nlohmann::json meta = c.meta;
  meta["kind"] = "trunk-weights";
  meta["backbone"] = backbone_name(backbone);
  meta["width"] = width;
  meta["scheme"] = pretraining_name(scheme);
  if (!meta.contains("source")) meta["source"] = source.filename().string();
  std::filesystem::create_directories(weights_dir);
  const auto dest = weights_dir / backbone_weight_filename(backbone, scheme, width);
  write_container(dest, meta, tensors);
  return dest;
}

namespace {

constexpr int kCalibrationSteps = 50;
constexpr int kCalibrationBatch = 4;
constexpr int kCalibrationSide = 64;

}  // namespace

std::filesystem::path write_random_trunk_weights(const std::filesystem::path& weights_dir, Backbone backbone,
                                                 Pretraining scheme, int width, std::uint64_t seed) {
  ResNetTrunk trunk(backbone, width);
  Rng rng(seed);
  trunk.init_random(rng);
  // Batch-norm running statistics are estimated from training-mode passes
  // over unit-normal inputs, so inference-mode features stay on the same
  // scale as training-mode ones.
  std::normal_distribution<float> unit(0.0f, 1.0f);
  for (int step = 0; step < kCalibrationSteps; ++step) {
    Tensor x({kCalibrationBatch, 3, kCalibrationSide, kCalibrationSide});
    for (float& v : x.values()) v = unit(rng);
    trunk.forward(x);
  }
  nn::ParameterList list;
  trunk.collect(list, "");
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (const auto* p : list.params) tensors.emplace_back(p->name, &p->value);
  for (const auto* b : list.buffers) tensors.emplace_back(b->name, &b->value);
  const nlohmann::json meta{{"kind", "trunk-weights"},
                            {"backbone", backbone_name(backbone)},
                            {"width", width},
                            {"scheme", pretraining_name(scheme)},
                            {"source", "random-init"},
                            {"seed", seed},
                            {"bn_calibration_steps", kCalibrationSteps}};
  std::filesystem::create_directories(weights_dir);
  const auto dest = weights_dir / backbone_weight_filename(backbone, scheme, width);
  write_container(dest, meta, tensors);
  log_warning("wrote randomly initialized stand-in weights to " + dest.string() + " (not pretrained)");
  return dest;
}

}  // namespace emoart
