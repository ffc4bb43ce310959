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

#include "emoart/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "emoart/error.hpp"

namespace emoart {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_integer(const std::string& key, const std::string& v) {
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used == v.size()) return d;
  } catch (const std::exception&) {
  }
  throw ValidationError("'" + key + "' expects a number, got '" + v + "'");
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ValidationError("'" + key + "' expects true or false, got '" + v + "'");
}

std::string normalized_path(const std::filesystem::path& p) {
  if (p.empty()) return {};
  std::error_code ec;
  auto abs = std::filesystem::weakly_canonical(std::filesystem::absolute(p), ec);
  if (ec) abs = std::filesystem::absolute(p).lexically_normal();
  return abs.generic_string();
}

const std::set<std::string>& model_keys() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k;
    for (const auto& [key, v] : ModelConfig{}.to_map()) k.insert(key);
    return k;
  }();
  return keys;
}

}  // namespace

std::string_view lr_schedule_name(LrSchedule s) { return s == LrSchedule::kStep ? "step" : "constant"; }

void TrainConfig::validate() const {
  model.validate();
  LossWeights w;
  w.lambda_discrete = lambda_discrete;
  w.lambda_continuous = lambda_continuous;
  w.validate();
  if (category_weight_c != 0.0 && !(category_weight_c > 1.0)) {
    throw ValidationError("category_weight_c must be greater than 1 (or 0 to disable weighting)");
  }
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 1) throw ValidationError("batch_size must be at least 1");
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (lr_step < 1) throw ValidationError("lr_step must be at least 1");
  if (!(lr_gamma > 0.0)) throw ValidationError("lr_gamma must be positive");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ValidationError("momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw ValidationError("weight_decay must be non-negative");
  if (!(trunk_lr_scale >= 0.0)) throw ValidationError("trunk_lr_scale must be non-negative");
  if (!(grad_clip_norm >= 0.0)) throw ValidationError("grad_clip_norm must be non-negative");
  if (normalization != "dataset" && normalization != "natural") {
    throw ValidationError("normalization must be 'dataset' or 'natural'");
  }
  if (workers < 1) throw ValidationError("workers must be at least 1");
  if (train_manifest.empty()) throw ValidationError("train_manifest is not set");
  if (val_manifest.empty()) throw ValidationError("val_manifest is not set");
}

std::map<std::string, std::string> TrainConfig::to_map() const {
  auto m = model.to_map();
  m["lambda_discrete"] = fmt(lambda_discrete);
  m["lambda_continuous"] = fmt(lambda_continuous);
  m["category_weight_c"] = fmt(category_weight_c);
  m["epochs"] = std::to_string(epochs);
  m["batch_size"] = std::to_string(batch_size);
  m["learning_rate"] = fmt(learning_rate);
  m["lr_schedule"] = std::string(lr_schedule_name(lr_schedule));
  m["lr_step"] = std::to_string(lr_step);
  m["lr_gamma"] = fmt(lr_gamma);
  m["momentum"] = fmt(momentum);
  m["weight_decay"] = fmt(weight_decay);
  m["trunk_lr_scale"] = fmt(trunk_lr_scale);
  m["grad_clip_norm"] = fmt(grad_clip_norm);
  m["augment"] = augment ? "true" : "false";
  m["normalization"] = normalization;
  m["cache_mb"] = std::to_string(cache_mb);
  m["seed"] = std::to_string(seed);
  m["train_manifest"] = train_manifest.generic_string();
  m["val_manifest"] = val_manifest.generic_string();
  m["workers"] = std::to_string(workers);
  return m;
}

void TrainConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (model_keys().count(key)) {
      model.apply({{key, value}});
    } else if (key == "lambda_discrete") {
      lambda_discrete = parse_real(key, value);
    } else if (key == "lambda_continuous") {
      lambda_continuous = parse_real(key, value);
    } else if (key == "category_weight_c") {
      category_weight_c = parse_real(key, value);
    } else if (key == "epochs") {
      epochs = parse_integer<int>(key, value);
    } else if (key == "batch_size") {
      batch_size = parse_integer<int>(key, value);
    } else if (key == "learning_rate") {
      learning_rate = parse_real(key, value);
    } else if (key == "lr_schedule") {
      if (value == "step") {
        lr_schedule = LrSchedule::kStep;
      } else if (value == "constant") {
        lr_schedule = LrSchedule::kConstant;
      } else {
        throw ValidationError("lr_schedule must be 'constant' or 'step', got '" + value + "'");
      }
    } else if (key == "lr_step") {
      lr_step = parse_integer<int>(key, value);
    } else if (key == "lr_gamma") {
      lr_gamma = parse_real(key, value);
    } else if (key == "momentum") {
      momentum = parse_real(key, value);
    } else if (key == "weight_decay") {
      weight_decay = parse_real(key, value);
    } else if (key == "trunk_lr_scale") {
      trunk_lr_scale = parse_real(key, value);
    } else if (key == "grad_clip_norm") {
      grad_clip_norm = parse_real(key, value);
    } else if (key == "augment") {
      augment = parse_bool(key, value);
    } else if (key == "normalization") {
      normalization = value;
    } else if (key == "cache_mb") {
      cache_mb = parse_integer<std::size_t>(key, value);
    } else if (key == "seed") {
      seed = parse_integer<std::uint64_t>(key, value);
    } else if (key == "train_manifest") {
      train_manifest = value;
    } else if (key == "val_manifest") {
      val_manifest = value;
    } else if (key == "workers") {
      workers = parse_integer<int>(key, value);
    } else {
      throw ValidationError("unknown config key '" + key + "'");
    }
  }
}

std::map<std::string, std::string> parse_overrides(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ValidationError("config line " + std::to_string(line_no) + ": empty key");
    if (kv.count(key)) throw ValidationError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    kv[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

TrainConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir) {
  TrainConfig c;
  c.apply(parse_overrides(text));
  if (!base_dir.empty()) {
    for (auto* p : {&c.train_manifest, &c.val_manifest, &c.model.weights_dir}) {
      if (!p->empty() && p->is_relative()) *p = (base_dir / *p).lexically_normal();
    }
  }
  return c;
}

TrainConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str(), path.parent_path());
}

std::string config_to_text(const TrainConfig& config) {
  std::string out = "# emoart training configuration\n";
  for (const auto& [k, v] : config.to_map()) out += k + " = " + v + "\n";
  return out;
}

void save_config(const TrainConfig& config, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << config_to_text(config);
  if (!out) throw IoError("cannot write config " + path.string());
}

std::string config_hash(const TrainConfig& config) {
  auto m = config.to_map();
  m.erase("workers");
  m.erase("cache_mb");
  m["train_manifest"] = normalized_path(config.train_manifest);
  m["val_manifest"] = normalized_path(config.val_manifest);
  m["weights_dir"] = config.model.init == InitMode::kRandom ? "" : normalized_path(config.model.weights_dir);
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::string_view s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ull;
    }
    h ^= 0xff;
    h *= 0x100000001b3ull;
  };
  for (const auto& [k, v] : m) {
    mix(k);
    mix(v);
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

double learning_rate_at(const TrainConfig& config, int epoch) {
  if (config.lr_schedule == LrSchedule::kConstant) return config.learning_rate;
  return config.learning_rate * std::pow(config.lr_gamma, (epoch - 1) / config.lr_step);
}

}  // namespace emoart
