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

#ifndef EMOART_CHECKPOINT_HPP
#define EMOART_CHECKPOINT_HPP

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoart/dataset.hpp"
#include "emoart/losses.hpp"
#include "emoart/model.hpp"

namespace emoart {

inline constexpr std::string_view kCheckpointFormat = "emoart-checkpoint";
inline constexpr int kCheckpointVersion = 1;

/// A trained model with everything needed to apply it to new data.
struct Checkpoint {
  std::unique_ptr<EmotionModel> model;
  std::vector<std::string> categories = canonical_category_list();
  Normalization normalization;
  LossWeights loss_weights;
  std::string config_hash;
  // Free-form training metadata: epoch, seed, loss curve, ...
  nlohmann::json training = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const EmotionModel& model,
                     const std::vector<std::string>& categories, const Normalization& norm,
                     const LossWeights& weights, const std::string& config_hash,
                     const nlohmann::json& training);
inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  save_checkpoint(path, *ckpt.model, ckpt.categories, ckpt.normalization, ckpt.loss_weights,
                  ckpt.config_hash, ckpt.training);
}

/// Throws ValidationError for files that are not checkpoints or whose
/// tensors do not fit the stored configuration.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace emoart

#endif  // EMOART_CHECKPOINT_HPP
