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

#include "emoart/checkpoint.hpp"

#include <map>

#include "emoart/container.hpp"
#include "emoart/error.hpp"

namespace emoart {

void save_checkpoint(const std::filesystem::path& path, const EmotionModel& model,
                     const std::vector<std::string>& categories, const Normalization& norm,
                     const LossWeights& weights, const std::string& config_hash,
                     const nlohmann::json& training) {
  nlohmann::json meta{
      {"kind", "checkpoint"},
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"model", model.config().to_map()},
      {"categories", categories},
      {"normalization", {{"mean", norm.mean}, {"std", norm.std}}},
      {"loss_weights",
       {{"lambda_discrete", weights.lambda_discrete},
        {"lambda_continuous", weights.lambda_continuous},
        {"category_weights", weights.category_weights}}},
      {"config_hash", config_hash},
      {"training", training},
  };
  write_container(path, meta, model.named_state());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const Container c = read_container(path);
  const auto& meta = c.meta;
  if (meta.value("format", "") != kCheckpointFormat) {
    throw ValidationError(path.string() + " is not a model checkpoint");
  }
  if (meta.value("version", 0) != kCheckpointVersion) {
    throw ValidationError(path.string() + ": unsupported checkpoint version " +
                          std::to_string(meta.value("version", 0)));
  }
  Checkpoint ck;
  try {
    ModelConfig config;
    config.apply(meta.at("model").get<std::map<std::string, std::string>>());
    ck.model = EmotionModel::build_empty(config);
    ck.categories = meta.at("categories").get<std::vector<std::string>>();
    ck.normalization.mean = meta.at("normalization").at("mean").get<std::array<float, 3>>();
    ck.normalization.std = meta.at("normalization").at("std").get<std::array<float, 3>>();
    const auto& lw = meta.at("loss_weights");
    ck.loss_weights.lambda_discrete = lw.at("lambda_discrete").get<double>();
    ck.loss_weights.lambda_continuous = lw.at("lambda_continuous").get<double>();
    ck.loss_weights.category_weights = lw.at("category_weights").get<std::vector<double>>();
    ck.config_hash = meta.value("config_hash", "");
    ck.training = meta.value("training", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(path.string() + ": malformed checkpoint header: " + e.what());
  }

  auto list = ck.model->parameters();
  auto assign = [&](const std::string& name, Tensor& dst) {
    const Tensor* src = c.find(name);
    if (!src) throw ValidationError(path.string() + ": missing tensor '" + name + "'");
    if (!src->same_shape(dst)) {
      throw ValidationError(path.string() + ": tensor '" + name + "' has shape " + src->shape_string() +
                            ", expected " + dst.shape_string());
    }
    dst = *src;
  };
  for (auto* p : list.params) assign(p->name, p->value);
  for (auto* b : list.buffers) assign(b->name, b->value);
  if (c.tensors.size() != list.params.size() + list.buffers.size()) {
    throw ValidationError(path.string() + ": checkpoint holds tensors the model does not have");
  }
  return ck;
}

}  // namespace emoart
