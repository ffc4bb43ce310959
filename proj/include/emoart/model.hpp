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

#ifndef EMOART_MODEL_HPP
#define EMOART_MODEL_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "emoart/categories.hpp"
#include "emoart/dataset.hpp"
#include "emoart/nn.hpp"
#include "emoart/resnet.hpp"

namespace emoart {

enum class Pretraining { kSceneCentric, kObjectCentric };
enum class InitMode { kPretrained, kRandom };

std::string_view pretraining_name(Pretraining p);
Pretraining parse_pretraining(std::string_view name);

/// Architecture and initialization knobs. The two ablation axes are
/// `context_pretraining` (object_centric == INW) and `body_crop_side`
/// (224 == 224B).
struct ModelConfig {
  Backbone body_backbone = Backbone::kResNet18;
  Backbone context_backbone = Backbone::kResNet18;
  Pretraining context_pretraining = Pretraining::kSceneCentric;
  int body_crop_side = kDefaultBodySide;
  int context_side = kDefaultContextSide;
  int fusion_hidden = 256;
  double dropout = 0.5;
  // Stem channel count of both trunks. 64 is the standard network; smaller
  // values give cheap trunks of the same topology for desk-scale runs.
  int trunk_width = 64;
  InitMode init = InitMode::kPretrained;
  std::filesystem::path weights_dir = "weights";

  bool inw() const noexcept { return context_pretraining == Pretraining::kObjectCentric; }
  bool body_224() const noexcept { return body_crop_side == 224; }

  /// Throws ValidationError on out-of-range values; warns for crop sides
  /// outside {128, 224}.
  void validate() const;

  /// Flat key/value form used by config files and checkpoints.
  std::map<std::string, std::string> to_map() const;
  /// Applies recognised keys from `kv`; unknown keys are left alone.
  void apply(const std::map<std::string, std::string>& kv);

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// File name of a trunk's pretrained weights inside ModelConfig::weights_dir.
std::string backbone_weight_filename(Backbone backbone, Pretraining scheme, int width);

/// Per-person model output.
struct PredictionResult {
  std::array<double, kNumCategories> discrete_scores{};
  std::array<double, kNumVadDims> vad{};
};

/// Batched model output: scores (B, 26) and vad (B, 3).
struct ForwardOutput {
  Tensor scores;
  Tensor vad;

  std::size_t batch() const { return scores.empty() ? 0 : static_cast<std::size_t>(scores.dim(0)); }
  PredictionResult row(std::size_t i) const;
};

/// Body trunk + context trunk + fusion head.
///
/// The fusion head concatenates [body features, context features] and
/// applies linear(fusion_hidden) -> ReLU -> dropout, then two linear heads
/// for the 26 category scores and the 3 VAD values.
///
/// Inference (`infer`) is const and thread-safe. Training uses
/// forward_train/backward and is single-writer.
class EmotionModel {
 public:
  EmotionModel(const EmotionModel&) = delete;
  EmotionModel& operator=(const EmotionModel&) = delete;

  /// Builds and initializes. The body trunk loads object-centric weights and
  /// the context trunk loads weights for `context_pretraining` when
  /// config.init is kPretrained; the fusion head is always random. A missing
  /// weight file leaves that trunk randomly initialized and logs a warning;
  /// a file that does not match the trunk throws ValidationError.
  static std::unique_ptr<EmotionModel> build(const ModelConfig& config, std::uint64_t seed);

  /// Builds with uninitialized (zero) parameters, for checkpoint loading.
  static std::unique_ptr<EmotionModel> build_empty(const ModelConfig& config);

  const ModelConfig& config() const noexcept { return config_; }

  /// body: (B, S, S, 3), context: (B, C, C, 3) normalized tensors.
  ForwardOutput infer(const Tensor& body, const Tensor& context) const;
  ForwardOutput forward_train(const Tensor& body, const Tensor& context, std::uint64_t dropout_seed);
  /// Gradients w.r.t. the outputs of the last forward_train call.
  void backward(const Tensor& d_scores, const Tensor& d_vad);

  /// Pieces of infer(), exposed for sensitivity checks.
  Tensor body_features(const Tensor& body) const;
  Tensor context_features(const Tensor& context) const;
  ForwardOutput head_infer(const Tensor& body_feat, const Tensor& context_feat) const;
  /// Gradient of sum(w_scores . scores + w_vad . vad) w.r.t. the body feature
  /// vector, through the inference-mode head (dropout off).
  Tensor head_body_feature_gradient(const Tensor& body_feat, const Tensor& context_feat,
                                    const Tensor& w_scores, const Tensor& w_vad) const;

  /// Parameter names are prefixed "body.", "context." or "head.".
  nn::ParameterList parameters();
  std::vector<std::pair<std::string, const Tensor*>> named_state() const;
  std::size_t parameter_count() const;
  void zero_grad();

  int body_feature_dim() const { return body_.feature_dim(); }
  int context_feature_dim() const { return context_.feature_dim(); }

  /// Loads a trunk weight file into one branch ("body" or "context"); names
  /// and shapes must match.
  void load_branch_weights(const std::string& branch, const std::filesystem::path& path);
  /// Writes one branch as a trunk weight file tagged with `scheme`.
  void save_branch_weights(const std::string& branch, const std::filesystem::path& path,
                           Pretraining scheme) const;

  /// When false, training forwards run both trunks in inference mode and
  /// backward stops at the fusion head.
  void set_trunks_trainable(bool trainable) noexcept { trunks_trainable_ = trainable; }
  bool trunks_trainable() const noexcept { return trunks_trainable_; }

 private:
  explicit EmotionModel(const ModelConfig& config);
  Tensor to_nchw(const Tensor& bhwc, int expected_side, const char* what) const;

  ModelConfig config_;
  ResNetTrunk body_;
  ResNetTrunk context_;
  nn::Linear fuse_;
  nn::Dropout dropout_;
  nn::Linear cat_head_;
  nn::Linear vad_head_;
  Tensor hidden_out_;  // post-ReLU activations of the last training forward
  bool trunks_trainable_ = true;
  nn::ParameterList list_;
};

/// Single-person inference composing the preprocessing with infer().
PredictionResult predict(const EmotionModel& model, const Image& image, const ImageRecord& record,
                         const PersonAnnotation& person, const Normalization& norm);
PredictionResult predict(const EmotionModel& model, const DatasetManifest& manifest,
                         const ImageRecord& record, const PersonAnnotation& person,
                         const Normalization& norm);

/// Batched inference over samples of a manifest, in the given order.
/// `batch_size` bounds memory only; results do not depend on it.
std::vector<PredictionResult> predict_samples(const EmotionModel& model,
                                              const DatasetManifest& manifest,
                                              std::span<const SampleRef> samples,
                                              const Normalization& norm,
                                              std::size_t batch_size = 16,
                                              std::size_t workers = 1);

}  // namespace emoart

#endif  // EMOART_MODEL_HPP
