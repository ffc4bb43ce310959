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

#include "emoart/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "emoart/error.hpp"

namespace emoart {

using nlohmann::json;

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::kTrain;
  if (name == "val") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw ValidationError("unknown split '" + std::string(name) + "' (expected train, val or test)");
}

std::size_t DatasetManifest::person_count() const noexcept {
  std::size_t n = 0;
  for (const auto& r : records) n += r.persons.size();
  return n;
}

std::filesystem::path DatasetManifest::resolve(const ImageRecord& record) const {
  std::filesystem::path p(record.path);
  if (p.is_absolute() || base_dir.empty()) return p;
  return base_dir / p;
}

ImageRecord validate_record(ImageRecord record, const VadScale& scale,
                            std::size_t num_categories, double clip_tolerance) {
  if (record.image_id.empty()) throw ManifestError(0, "empty image_id");
  if (record.path.empty()) throw ManifestError(0, "empty image path for '" + record.image_id + "'");
  if (record.width <= 0 || record.height <= 0) {
    throw ManifestError(0, "non-positive image size for '" + record.image_id + "'");
  }
  const double w = record.width;
  const double h = record.height;
  for (std::size_t i = 0; i < record.persons.size(); ++i) {
    PersonAnnotation& p = record.persons[i];
    const std::string who = "'" + record.image_id + "' person " + std::to_string(i);
    BoundingBox& b = p.bbox;
    if (!std::isfinite(b.x1) || !std::isfinite(b.y1) || !std::isfinite(b.x2) || !std::isfinite(b.y2)) {
      throw ManifestError(0, "non-finite bounding box for " + who);
    }
    if (!(b.x1 < b.x2) || !(b.y1 < b.y2)) {
      throw ManifestError(0, "degenerate bounding box for " + who);
    }
    if (b.x1 < -clip_tolerance || b.y1 < -clip_tolerance || b.x2 > w + clip_tolerance ||
        b.y2 > h + clip_tolerance) {
      throw ManifestError(0, "bounding box outside image for " + who);
    }
    b.x1 = std::clamp(b.x1, 0.0, w);
    b.x2 = std::clamp(b.x2, 0.0, w);
    b.y1 = std::clamp(b.y1, 0.0, h);
    b.y2 = std::clamp(b.y2, 0.0, h);
    if (b.area() < 1.0) throw ManifestError(0, "bounding box smaller than one pixel for " + who);

    if (p.categories.empty()) throw ManifestError(0, "empty category set for " + who);
    std::set<int> seen;
    for (int c : p.categories) {
      if (c < 0 || static_cast<std::size_t>(c) >= num_categories) {
        throw ManifestError(0, "category index out of range for " + who);
      }
      if (!seen.insert(c).second) throw ManifestError(0, "duplicate category for " + who);
    }
    for (double v : p.vad.as_array()) {
      if (!std::isfinite(v) || v < scale.lo || v > scale.hi) {
        std::ostringstream os;
        os << "VAD value " << v << " outside [" << scale.lo << ", " << scale.hi << "] for " << who;
        throw ManifestError(0, os.str());
      }
    }
  }
  return record;
}

namespace {

template <typename T>
T require(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ManifestError(line, std::string("missing field '") + key + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ManifestError(line, std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<double> fixed_array(const json& obj, const char* key, std::size_t n, std::size_t line) {
  auto values = require<std::vector<double>>(obj, key, line);
  if (values.size() != n) {
    throw ManifestError(line, std::string("field '") + key + "' must have " + std::to_string(n) + " entries");
  }
  return values;
}

ImageRecord record_from_json(const json& j, const std::unordered_map<std::string, int>& cat_index,
                             std::size_t line) {
  if (!j.is_object()) throw ManifestError(line, "record is not a JSON object");
  ImageRecord r;
  r.image_id = require<std::string>(j, "image_id", line);
  r.path = require<std::string>(j, "path", line);
  r.width = require<int>(j, "width", line);
  r.height = require<int>(j, "height", line);
  const auto persons = j.find("persons");
  if (persons == j.end() || !persons->is_array()) {
    throw ManifestError(line, "missing field 'persons'");
  }
  for (const auto& pj : *persons) {
    if (!pj.is_object()) throw ManifestError(line, "person entry is not an object");
    PersonAnnotation p;
    auto b = fixed_array(pj, "bbox", 4, line);
    p.bbox = BoundingBox{b[0], b[1], b[2], b[3]};
    for (const auto& name : require<std::vector<std::string>>(pj, "categories", line)) {
      auto it = cat_index.find(name);
      if (it == cat_index.end()) throw ManifestError(line, "unknown category '" + name + "'");
      p.categories.push_back(it->second);
    }
    auto v = fixed_array(pj, "vad", 3, line);
    p.vad = VadTriple{v[0], v[1], v[2]};
    r.persons.push_back(std::move(p));
  }
  return r;
}

json record_to_json(const ImageRecord& r, const std::vector<std::string>& categories) {
  json persons = json::array();
  for (const auto& p : r.persons) {
    json names = json::array();
    for (int c : p.categories) names.push_back(categories.at(static_cast<std::size_t>(c)));
    persons.push_back(json{{"bbox", {p.bbox.x1, p.bbox.y1, p.bbox.x2, p.bbox.y2}},
                           {"categories", names},
                           {"vad", {p.vad.valence, p.vad.arousal, p.vad.dominance}}});
  }
  return json{{"image_id", r.image_id}, {"path", r.path},     {"width", r.width},
              {"height", r.height},     {"persons", persons}};
}

}  // namespace

DatasetManifest parse_manifest_text(std::string_view text, const std::filesystem::path& base_dir,
                                    const ManifestOptions& options) {
  DatasetManifest m;
  m.base_dir = base_dir;
  bool have_header = false;
  std::unordered_map<std::string, int> cat_index;
  std::unordered_set<std::string> ids;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }

    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ManifestError(line_no, std::string("malformed line: ") + e.what());
    }

    if (!have_header) {
      if (!j.is_object() || j.value("format", "") != kManifestFormat) {
        throw ManifestError(line_no, "first line must be a manifest header with format \"" +
                                         std::string(kManifestFormat) + "\"");
      }
      if (j.value("version", 0) != kManifestVersion) {
        throw ManifestError(line_no, "unsupported manifest version");
      }
      try {
        m.split = parse_split(require<std::string>(j, "split", line_no));
      } catch (const ManifestError&) {
        throw;
      } catch (const ValidationError& e) {
        throw ManifestError(line_no, e.what());
      }
      m.source_tag = require<std::string>(j, "source_tag", line_no);
      if (j.contains("vad_scale")) {
        auto s = fixed_array(j, "vad_scale", 2, line_no);
        if (!(s[0] < s[1])) throw ManifestError(line_no, "vad_scale must be increasing");
        m.vad_scale = VadScale{s[0], s[1]};
      }
      if (j.contains("categories")) {
        m.categories = require<std::vector<std::string>>(j, "categories", line_no);
        if (m.categories.empty()) throw ManifestError(line_no, "empty category list");
      }
      for (std::size_t i = 0; i < m.categories.size(); ++i) {
        if (!cat_index.emplace(m.categories[i], static_cast<int>(i)).second) {
          throw ManifestError(line_no, "duplicate category '" + m.categories[i] + "' in header");
        }
      }
      have_header = true;
      continue;
    }

    ImageRecord r = record_from_json(j, cat_index, line_no);
    try {
      r = validate_record(std::move(r), m.vad_scale, m.categories.size(), options.clip_tolerance);
    } catch (const ManifestError& e) {
      throw ManifestError(line_no, e.what());
    }
    if (!ids.insert(r.image_id).second) {
      throw ManifestError(line_no, "duplicate image_id '" + r.image_id + "'");
    }
    if (options.check_files) {
      std::error_code ec;
      const auto p = m.resolve(r);
      if (!std::filesystem::is_regular_file(p, ec)) {
        throw ManifestError(line_no, "image file not found: " + p.string());
      }
    }
    m.records.push_back(std::move(r));
  }
  if (!have_header) throw ManifestError(0, "manifest is empty");
  return m;
}

DatasetManifest parse_manifest(const std::filesystem::path& path, const ManifestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_manifest_text(buffer.str(), path.parent_path(), options);
}

std::string serialize_manifest(const DatasetManifest& m) {
  json header{{"format", kManifestFormat},
              {"version", kManifestVersion},
              {"split", split_name(m.split)},
              {"source_tag", m.source_tag},
              {"vad_scale", {m.vad_scale.lo, m.vad_scale.hi}}};
  if (m.categories != canonical_category_list()) header["categories"] = m.categories;
  std::string out = header.dump() + "\n";
  for (const auto& r : m.records) out += record_to_json(r, m.categories).dump() + "\n";
  return out;
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  DatasetManifest copy = manifest;
  const fs::path target_dir = fs::absolute(path).parent_path();
  if (!manifest.base_dir.empty()) {
    const fs::path from = fs::absolute(manifest.base_dir).lexically_normal();
    if (from != target_dir.lexically_normal()) {
      for (auto& r : copy.records) {
        fs::path p(r.path);
        if (p.is_absolute()) continue;
        r.path = (from / p).lexically_normal().lexically_relative(target_dir).generic_string();
      }
    }
  }
  if (!target_dir.empty()) fs::create_directories(target_dir);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write manifest: " + path.string());
  out << serialize_manifest(copy);
  if (!out) throw IoError("failed writing manifest: " + path.string());
}

std::vector<SampleRef> enumerate_samples(const DatasetManifest& manifest) {
  std::vector<SampleRef> out;
  out.reserve(manifest.person_count());
  for (std::size_t r = 0; r < manifest.records.size(); ++r) {
    for (std::size_t p = 0; p < manifest.records[r].persons.size(); ++p) out.push_back({r, p});
  }
  return out;
}

std::vector<double> multi_hot(const PersonAnnotation& person, std::size_t num_categories) {
  std::vector<double> t(num_categories, 0.0);
  for (int c : person.categories) t.at(static_cast<std::size_t>(c)) = 1.0;
  return t;
}

}  // namespace emoart
