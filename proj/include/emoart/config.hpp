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

#ifndef EMOART_CONFIG_HPP
#define EMOART_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "emoart/losses.hpp"
#include "emoart/model.hpp"

namespace emoart {

enum class LrSchedule { kConstant, kStep };

/// Everything a training run depends on. Serialized as a flat
/// `key = value` text file; `#` starts a comment.
struct TrainConfig {
  ModelConfig model;
  double lambda_discrete = 0.5;
  double lambda_continuous = 0.5;
  // Smoothing constant c of the category weights 1 / ln(c + p_k); 0 turns
  // the weighting off (all weights 1).
  double category_weight_c = kDefaultWeightSmoothing;

  int epochs = 25;
  int batch_size = 32;
  double learning_rate = 0.01;
  LrSchedule lr_schedule = LrSchedule::kStep;
  int lr_step = 7;
  double lr_gamma = 0.1;
  double momentum = 0.9;
  double weight_decay = 0.0;
  // Learning-rate multiplier for both trunks; 0 freezes them.
  double trunk_lr_scale = 1.0;
  // Rescales the gradient of all trained parameters to at most this global
  // L2 norm before each update; 0 disables clipping.
  double grad_clip_norm = 0.0;
  bool augment = true;
  // "dataset": statistics of the training images; "natural": fixed
  // natural-image constants.
  std::string normalization = "dataset";
  // Preprocessed training inputs are kept in memory up to this size.
  std::size_t cache_mb = 1024;

  std::uint64_t seed = 0;
  std::filesystem::path train_manifest;
  std::filesystem::path val_manifest;
  // Execution only; not part of the hash.
  int workers = 1;

  void validate() const;

  std::map<std::string, std::string> to_map() const;
  /// Unknown keys are rejected.
  void apply(const std::map<std::string, std::string>& kv);

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string_view lr_schedule_name(LrSchedule s);

/// Parses `key = value` lines. Relative manifest and weight paths resolve
/// against `base_dir`.
TrainConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});
TrainConfig load_config(const std::filesystem::path& path);
std::string config_to_text(const TrainConfig& config);
void save_config(const TrainConfig& config, const std::filesystem::path& path);

/// Splits `key=value` override strings (as given on a command line).
std::map<std::string, std::string> parse_overrides(std::string_view text);

/// 16 hex digits of FNV-1a over the semantic fields. Paths are compared in
/// normalized absolute form and `workers`/`cache_mb` are ignored.
std::string config_hash(const TrainConfig& config);

/// Learning rate in effect during 1-based `epoch`.
double learning_rate_at(const TrainConfig& config, int epoch);

}  // namespace emoart

#endif  // EMOART_CONFIG_HPP
