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

#include "emoart/stylize.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "emoart/error.hpp"
#include "emoart/logging.hpp"
#include "emoart/parallel.hpp"
#include "emoart/rng.hpp"

namespace emoart {
namespace {

struct Plane {
  int w = 0, h = 0;
  std::vector<double> v;

  Plane() = default;
  Plane(int width, int height) : w(width), h(height), v(static_cast<std::size_t>(width) * height, 0.0) {}
  double& at(int x, int y) { return v[static_cast<std::size_t>(y) * w + x]; }
  double at(int x, int y) const { return v[static_cast<std::size_t>(y) * w + x]; }
};

// Opponent colour basis, rows orthonormal.
constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt3 = 0.57735026918962576451;
constexpr double kInvSqrt6 = 0.40824829046386301637;
constexpr double kColor[3][3] = {
    {kInvSqrt3, kInvSqrt3, kInvSqrt3},
    {kInvSqrt2, -kInvSqrt2, 0.0},
    {kInvSqrt6, kInvSqrt6, -2.0 * kInvSqrt6},
};

struct Haar {
  Plane ll, lh, hl, hh;
};

Haar haar_forward(const Plane& p) {
  const int w = p.w / 2, h = p.h / 2;
  Haar out{Plane(w, h), Plane(w, h), Plane(w, h), Plane(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double a = p.at(2 * x, 2 * y), b = p.at(2 * x + 1, 2 * y);
      const double c = p.at(2 * x, 2 * y + 1), d = p.at(2 * x + 1, 2 * y + 1);
      out.ll.at(x, y) = 0.5 * (a + b + c + d);
      out.lh.at(x, y) = 0.5 * (a - b + c - d);
      out.hl.at(x, y) = 0.5 * (a + b - c - d);
      out.hh.at(x, y) = 0.5 * (a - b - c + d);
    }
  }
  return out;
}

Plane haar_inverse(const Haar& q) {
  Plane p(q.ll.w * 2, q.ll.h * 2);
  for (int y = 0; y < q.ll.h; ++y) {
    for (int x = 0; x < q.ll.w; ++x) {
      const double ll = q.ll.at(x, y), lh = q.lh.at(x, y), hl = q.hl.at(x, y), hh = q.hh.at(x, y);
      p.at(2 * x, 2 * y) = 0.5 * (ll + lh + hl + hh);
      p.at(2 * x + 1, 2 * y) = 0.5 * (ll - lh + hl - hh);
      p.at(2 * x, 2 * y + 1) = 0.5 * (ll + lh - hl - hh);
      p.at(2 * x + 1, 2 * y + 1) = 0.5 * (ll - lh - hl + hh);
    }
  }
  return p;
}

// Feature channels, colour-major: per colour axis the detail bands of each
// level (LH, HL, HH) from fine to coarse, then the final approximation.
struct Features {
  int padded_w = 0, padded_h = 0;
  std::vector<Plane> channels;
};

Features encode(const Image& image, int levels) {
  const int m = 1 << levels;
  Features f;
  f.padded_w = (image.width + m - 1) / m * m;
  f.padded_h = (image.height + m - 1) / m * m;
  for (int axis = 0; axis < 3; ++axis) {
    Plane p(f.padded_w, f.padded_h);
    for (int y = 0; y < f.padded_h; ++y) {
      const int sy = std::min(y, image.height - 1);
      for (int x = 0; x < f.padded_w; ++x) {
        const int sx = std::min(x, image.width - 1);
        double s = 0.0;
        for (int c = 0; c < 3; ++c) s += kColor[axis][c] * image.at(sx, sy, c);
        p.at(x, y) = s;
      }
    }
    for (int l = 0; l < levels; ++l) {
      Haar q = haar_forward(p);
      f.channels.push_back(std::move(q.lh));
      f.channels.push_back(std::move(q.hl));
      f.channels.push_back(std::move(q.hh));
      p = std::move(q.ll);
    }
    f.channels.push_back(std::move(p));
  }
  return f;
}

Image decode(const Features& f, int levels, int out_w, int out_h) {
  const std::size_t per_axis = static_cast<std::size_t>(3 * levels + 1);
  std::array<Plane, 3> axes;
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t base = per_axis * axis;
    Plane p = f.channels[base + per_axis - 1];
    for (int l = levels - 1; l >= 0; --l) {
      Haar q{p, f.channels[base + 3 * l], f.channels[base + 3 * l + 1], f.channels[base + 3 * l + 2]};
      p = haar_inverse(q);
    }
    axes[axis] = std::move(p);
  }
  Image out(out_w, out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int axis = 0; axis < 3; ++axis) s += kColor[axis][c] * axes[axis].at(x, y);
        out.at(x, y, c) = static_cast<float>(s);
      }
    }
  }
  return out;
}

std::pair<double, double> moments(const Plane& p) {
  double sum = 0.0;
  for (double v : p.v) sum += v;
  const double mean = sum / double(p.v.size());
  double sq = 0.0;
  for (double v : p.v) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / double(p.v.size()))};
}

constexpr double kFlatStd = 1e-9;

// Standardized copy of `src` resampled (nearest) onto a w x h grid.
Plane borrowed_pattern(const Plane& src, int w, int h) {
  Plane out(w, h);
  for (int y = 0; y < h; ++y) {
    const int sy = std::min(src.h - 1, static_cast<int>((y + 0.5) * src.h / h));
    for (int x = 0; x < w; ++x) {
      const int sx = std::min(src.w - 1, static_cast<int>((x + 0.5) * src.w / w));
      out.at(x, y) = src.at(sx, sy);
    }
  }
  auto [mean, std] = moments(out);
  for (double& v : out.v) v = std > kFlatStd ? (v - mean) / std : 0.0;
  return out;
}

void check_image(const Image& image, const char* what) {
  if (image.empty() || image.width <= 0 || image.height <= 0) {
    throw InvalidArgument(std::string(what) + " image is empty");
  }
}

}  // namespace

StatisticsMatchingStylizer::StatisticsMatchingStylizer(int levels) : levels_(levels) {
  if (levels < 0 || levels > 8) throw InvalidArgument("stylizer levels must lie in [0, 8]");
}

FeatureStats StatisticsMatchingStylizer::feature_stats(const Image& image) const {
  check_image(image, "input");
  const Features f = encode(image, levels_);
  FeatureStats s;
  for (const auto& ch : f.channels) {
    auto [mean, std] = moments(ch);
    s.mean.push_back(mean);
    s.std.push_back(std);
  }
  return s;
}

Image StatisticsMatchingStylizer::stylize(const Image& content, const Image& style, double strength) const {
  check_image(content, "content");
  check_image(style, "style");
  if (!(strength >= 0.0 && strength <= 1.0)) throw InvalidArgument("stylization strength must lie in [0, 1]");

  Features fc = encode(content, levels_);
  const Features fs = encode(style, levels_);
  for (std::size_t i = 0; i < fc.channels.size(); ++i) {
    Plane& ch = fc.channels[i];
    auto [mc, sc] = moments(ch);
    auto [ms, ss] = moments(fs.channels[i]);
    const double mt = (1.0 - strength) * mc + strength * ms;
    const double st = (1.0 - strength) * sc + strength * ss;
    if (sc > kFlatStd) {
      for (double& v : ch.v) v = mt + st * ((v - mc) / sc);
    } else {
      const Plane z = borrowed_pattern(fs.channels[i], ch.w, ch.h);
      for (std::size_t k = 0; k < ch.v.size(); ++k) ch.v[k] = mt + st * z.v[k];
    }
  }
  return decode(fc, levels_, content.width, content.height);
}

// ---------------------------------------------------------------------------
// Registry

namespace {

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, StylizerFactory>& registry() {
  static std::map<std::string, StylizerFactory> r{
      {std::string(StatisticsMatchingStylizer::kId), [] { return std::make_unique<StatisticsMatchingStylizer>(); }},
  };
  return r;
}

}  // namespace

void register_stylizer(const std::string& id, StylizerFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[id] = std::move(factory);
}

std::unique_ptr<Stylizer> make_stylizer(std::string_view id) {
  std::lock_guard lock(registry_mutex());
  auto it = registry().find(std::string(id));
  if (it == registry().end()) throw ValidationError("unregistered stylizer '" + std::string(id) + "'");
  return it->second();
}

std::vector<std::string> registered_stylizers() {
  std::lock_guard lock(registry_mutex());
  std::vector<std::string> ids;
  for (const auto& [id, f] : registry()) ids.push_back(id);
  return ids;
}

Image stylize_image(const Image& content, const Image& style, double strength, std::string_view stylizer_id) {
  return make_stylizer(stylizer_id)->stylize(content, style, strength);
}

// ---------------------------------------------------------------------------
// Dataset jobs

StyleCorpus StyleCorpus::from_directory(const std::filesystem::path& dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("style directory not found: " + dir.string());
  static const std::set<std::string> kExt = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm",
                                             ".tif", ".tiff", ".webp"};
  StyleCorpus corpus;
  corpus.sampling_seed = seed;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (kExt.count(ext)) corpus.paths.push_back(entry.path());
  }
  std::sort(corpus.paths.begin(), corpus.paths.end());
  if (corpus.paths.empty()) throw ValidationError("style directory has no images: " + dir.string());
  return corpus;
}

std::vector<std::size_t> assign_styles(std::size_t n_images, std::size_t n_styles, std::uint64_t seed) {
  if (n_styles == 0) throw ValidationError("style corpus is empty");
  Rng rng(seed);
  std::vector<std::size_t> deck(n_styles);
  std::vector<std::size_t> out;
  out.reserve(n_images);
  while (out.size() < n_images) {
    std::iota(deck.begin(), deck.end(), std::size_t{0});
    std::shuffle(deck.begin(), deck.end(), rng);
    for (std::size_t s : deck) {
      if (out.size() == n_images) break;
      out.push_back(s);
    }
  }
  return out;
}

namespace {

std::string output_file_name(std::size_t index, const std::string& image_id) {
  std::string safe;
  for (char ch : image_id) {
    const auto c = static_cast<unsigned char>(ch);
    safe += (std::isalnum(c) || ch == '-' || ch == '_' || ch == '.') ? ch : '_';
  }
  if (safe.size() > 80) safe.resize(80);
  char prefix[16];
  std::snprintf(prefix, sizeof prefix, "%06zu_", index);
  return std::string(prefix) + safe + ".png";
}

std::string style_id(const StyleCorpus& corpus, std::size_t index) {
  return corpus.paths[index].filename().string();
}

std::unordered_map<std::string, std::string> read_job_log(const std::filesystem::path& path) {
  std::unordered_map<std::string, std::string> status;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      status[j.at("image_id").get<std::string>()] = j.at("status").get<std::string>();
    } catch (const nlohmann::json::exception&) {
      // A torn final line from an interrupted run; the image is redone.
    }
  }
  return status;
}

}  // namespace

StylizationResult stylize_dataset(const StylizationJob& job) {
  namespace fs = std::filesystem;
  if (!(job.strength >= 0.0 && job.strength <= 1.0)) throw ValidationError("strength must lie in [0, 1]");
  if (job.output_dir.empty()) throw ValidationError("stylization needs an output directory");
  if (job.styles.paths.empty()) throw ValidationError("style corpus is empty");
  const auto stylizer = make_stylizer(job.stylizer_id);

  const fs::path out_dir = fs::absolute(job.output_dir);
  fs::create_directories(out_dir / "images");
  const fs::path log_path = out_dir / std::string(kJobLogName);
  const auto previous = read_job_log(log_path);

  const auto& records = job.source.records;
  StylizationResult result;
  result.style_assignment = assign_styles(records.size(), job.styles.paths.size(), job.styles.sampling_seed);

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw IoError("cannot open job log " + log_path.string());
  std::mutex log_mutex;
  std::vector<std::string> failures(records.size());
  std::vector<char> resumed(records.size(), 0);
  std::vector<std::string> out_names(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) out_names[i] = output_file_name(i, records[i].image_id);

  parallel_for(records.size(), job.workers, [&](std::size_t i) {
    const ImageRecord& record = records[i];
    const std::size_t s = result.style_assignment[i];
    const fs::path out_path = out_dir / "images" / out_names[i];
    auto it = previous.find(record.image_id);
    std::error_code ec;
    if (it != previous.end() && it->second == "ok" && fs::is_regular_file(out_path, ec)) {
      resumed[i] = 1;
      return;
    }
    std::string status = "ok";
    try {
      Image content = load_image(job.source.resolve(record));
      if (content.width != record.width || content.height != record.height) {
        throw ValidationError("decoded size differs from the manifest");
      }
      Image styled = stylizer->stylize(content, load_image(job.styles.paths[s]), job.strength);
      if (styled.width != content.width || styled.height != content.height) {
        throw RuntimeError("stylizer changed the image size");
      }
      save_image(styled, out_path);
    } catch (const std::exception& e) {
      status = "failed";
      failures[i] = e.what();
    }
    nlohmann::json line{{"image_id", record.image_id}, {"style_id", style_id(job.styles, s)}, {"status", status}};
    if (status != "ok") line["error"] = failures[i];
    std::lock_guard lock(log_mutex);
    log << line.dump() << '\n';
    log.flush();
  });
  log.close();

  std::size_t failed = 0;
  std::string first_failures;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (failures[i].empty()) continue;
    if (failed < 5) first_failures += "\n  " + records[i].image_id + ": " + failures[i];
    ++failed;
  }
  if (failed > 0) {
    throw RuntimeError(std::to_string(failed) + " of " + std::to_string(records.size()) +
                       " images failed (rerun to resume; see " + log_path.string() + ")" + first_failures);
  }

  DatasetManifest out = job.source;
  out.base_dir = out_dir;
  out.source_tag = job.source.source_tag + "-s";
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    out.records[i].path = "images/" + out_names[i];
    // Geometry is unchanged, so the original boxes stay valid.
    out.records[i] = validate_record(out.records[i], out.vad_scale, out.categories.size(), 0.0);
    if (resumed[i]) ++result.resumed;
    else ++result.processed;
  }
  write_manifest(out, out_dir / std::string(kStylizedManifestName));
  result.manifest = std::move(out);
  return result;
}

}  // namespace emoart
