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

#include "emoart/model.hpp"

#include <charconv>
#include <cmath>
#include <cstring>

#include "emoart/container.hpp"
#include "emoart/error.hpp"
#include "emoart/logging.hpp"
#include "emoart/parallel.hpp"

namespace emoart {

std::string_view pretraining_name(Pretraining p) {
  return p == Pretraining::kSceneCentric ? "scene_centric" : "object_centric";
}

Pretraining parse_pretraining(std::string_view name) {
  if (name == "scene_centric") return Pretraining::kSceneCentric;
  if (name == "object_centric") return Pretraining::kObjectCentric;
  throw ValidationError("unknown pretraining scheme '" + std::string(name) +
                        "' (expected scene_centric or object_centric)");
}

namespace {

int parse_int(const std::string& key, const std::string& v) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ValidationError("'" + key + "' expects an integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ValidationError("'" + key + "' expects a number, got '" + v + "'");
  }
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

void ModelConfig::validate() const {
  if (body_crop_side < 32) throw ValidationError("body_crop_side must be at least 32");
  if (context_side < 32) throw ValidationError("context_side must be at least 32");
  if (fusion_hidden < 1) throw ValidationError("fusion_hidden must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
  if (trunk_width < 1) throw ValidationError("trunk_width must be positive");
  if (body_crop_side != 128 && body_crop_side != 224) {
    log_warning("body_crop_side " + std::to_string(body_crop_side) +
                " is not a supported configuration (128 or 224)");
  }
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  return {
      {"body_backbone", std::string(backbone_name(body_backbone))},
      {"context_backbone", std::string(backbone_name(context_backbone))},
      {"context_pretraining", std::string(pretraining_name(context_pretraining))},
      {"body_crop_side", std::to_string(body_crop_side)},
      {"context_side", std::to_string(context_side)},
      {"fusion_hidden", std::to_string(fusion_hidden)},
      {"dropout", format_double(dropout)},
      {"trunk_width", std::to_string(trunk_width)},
      {"init", init == InitMode::kPretrained ? "pretrained" : "random"},
      {"weights_dir", weights_dir.generic_string()},
  };
}

void ModelConfig::apply(const std::map<std::string, std::string>& kv) {
  for (const auto& [key, value] : kv) {
    if (key == "body_backbone") {
      body_backbone = parse_backbone(value);
    } else if (key == "context_backbone") {
      context_backbone = parse_backbone(value);
    } else if (key == "context_pretraining") {
      context_pretraining = parse_pretraining(value);
    } else if (key == "body_crop_side") {
      body_crop_side = parse_int(key, value);
    } else if (key == "context_side") {
      context_side = parse_int(key, value);
    } else if (key == "fusion_hidden") {
      fusion_hidden = parse_int(key, value);
    } else if (key == "dropout") {
      dropout = parse_double(key, value);
    } else if (key == "trunk_width") {
      trunk_width = parse_int(key, value);
    } else if (key == "init") {
      if (value == "pretrained") {
        init = InitMode::kPretrained;
      } else if (value == "random") {
        init = InitMode::kRandom;
      } else {
        throw ValidationError("init must be 'pretrained' or 'random', got '" + value + "'");
      }
    } else if (key == "weights_dir") {
      weights_dir = value;
    }
  }
}

std::string backbone_weight_filename(Backbone backbone, Pretraining scheme, int width) {
  std::string name(backbone_name(backbone));
  if (width != 64) name += "-w" + std::to_string(width);
  return name + "-" + std::string(pretraining_name(scheme)) + ".ckpt";
}

PredictionResult ForwardOutput::row(std::size_t i) const {
  PredictionResult r;
  const std::size_t k = static_cast<std::size_t>(scores.dim(1));
  for (std::size_t j = 0; j < kNumCategories && j < k; ++j) r.discrete_scores[j] = scores[i * k + j];
  for (std::size_t j = 0; j < kNumVadDims; ++j) r.vad[j] = vad[i * kNumVadDims + j];
  return r;
}

// ---------------------------------------------------------------------------

EmotionModel::EmotionModel(const ModelConfig& config)
    : config_(config),
      body_(config.body_backbone, config.trunk_width),
      context_(config.context_backbone, config.trunk_width),
      fuse_(body_.feature_dim() + context_.feature_dim(), config.fusion_hidden),
      dropout_(config.dropout),
      cat_head_(config.fusion_hidden, static_cast<int>(kNumCategories)),
      vad_head_(config.fusion_hidden, static_cast<int>(kNumVadDims)) {
  body_.collect(list_, "body.");
  context_.collect(list_, "context.");
  fuse_.collect(list_, "head.fuse.");
  cat_head_.collect(list_, "head.discrete.");
  vad_head_.collect(list_, "head.continuous.");
}

std::unique_ptr<EmotionModel> EmotionModel::build_empty(const ModelConfig& config) {
  config.validate();
  return std::unique_ptr<EmotionModel>(new EmotionModel(config));
}

std::unique_ptr<EmotionModel> EmotionModel::build(const ModelConfig& config, std::uint64_t seed) {
  auto model = build_empty(config);
  Rng rng(seed);
  model->body_.init_random(rng);
  model->context_.init_random(rng);
  model->fuse_.init_uniform(rng);
  model->cat_head_.init_uniform(rng);
  model->vad_head_.init_uniform(rng);

  if (config.init == InitMode::kPretrained) {
    // Offline runs keep the random initialization of a branch whose file is
    // absent; a file that is present must match.
    auto load = [&](const std::string& branch, Backbone b, Pretraining scheme) {
      const auto path = config.weights_dir / backbone_weight_filename(b, scheme, config.trunk_width);
      std::error_code ec;
      if (std::filesystem::is_regular_file(path, ec)) {
        model->load_branch_weights(branch, path);
      } else {
        log_warning("pretrained weights not found: " + path.string() + "; the " + branch +
                    " trunk keeps its random initialization (install weights with 'fetch-weights')");
      }
    };
    load("body", config.body_backbone, Pretraining::kObjectCentric);
    load("context", config.context_backbone, config.context_pretraining);
  } else {
    log_warning("building " + std::string(backbone_name(config.body_backbone)) + "/" +
                std::string(backbone_name(config.context_backbone)) +
                " with random trunk initialization");
  }
  return model;
}

void EmotionModel::load_branch_weights(const std::string& branch, const std::filesystem::path& path) {
  if (branch != "body" && branch != "context") throw InvalidArgument("unknown branch '" + branch + "'");
  const Container c = read_container(path);
  const Backbone expected = branch == "body" ? config_.body_backbone : config_.context_backbone;
  if (c.meta.value("kind", "") != "trunk-weights") {
    throw ValidationError(path.string() + " is not a trunk weight file");
  }
  if (c.meta.value("backbone", "") != backbone_name(expected) ||
      c.meta.value("width", 64) != config_.trunk_width) {
    throw ValidationError(path.string() + " holds " + c.meta.value("backbone", std::string("?")) +
                          " (width " + std::to_string(c.meta.value("width", 64)) + "), expected " +
                          std::string(backbone_name(expected)) + " (width " +
                          std::to_string(config_.trunk_width) + ")");
  }
  const std::string prefix = branch + ".";
  auto assign = [&](const std::string& full_name, Tensor& dst) {
    const std::string key = full_name.substr(prefix.size());
    const Tensor* src = c.find(key);
    if (!src) throw ValidationError(path.string() + ": missing tensor '" + key + "'");
    if (!src->same_shape(dst)) {
      throw ValidationError(path.string() + ": tensor '" + key + "' has shape " + src->shape_string() +
                            ", expected " + dst.shape_string());
    }
    dst = *src;
  };
  for (auto* p : list_.params) {
    if (p->name.starts_with(prefix)) assign(p->name, p->value);
  }
  for (auto* b : list_.buffers) {
    if (b->name.starts_with(prefix)) assign(b->name, b->value);
  }
}

void EmotionModel::save_branch_weights(const std::string& branch, const std::filesystem::path& path,
                                       Pretraining scheme) const {
  if (branch != "body" && branch != "context") throw InvalidArgument("unknown branch '" + branch + "'");
  const std::string prefix = branch + ".";
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (const auto& [name, t] : named_state()) {
    if (name.starts_with(prefix)) tensors.emplace_back(name.substr(prefix.size()), t);
  }
  const Backbone b = branch == "body" ? config_.body_backbone : config_.context_backbone;
  const nlohmann::json meta{{"kind", "trunk-weights"},
                            {"backbone", backbone_name(b)},
                            {"width", config_.trunk_width},
                            {"scheme", pretraining_name(scheme)}};
  write_container(path, meta, tensors);
}

nn::ParameterList EmotionModel::parameters() { return list_; }

std::vector<std::pair<std::string, const Tensor*>> EmotionModel::named_state() const {
  std::vector<std::pair<std::string, const Tensor*>> out;
  for (const auto* p : list_.params) out.emplace_back(p->name, &p->value);
  for (const auto* b : list_.buffers) out.emplace_back(b->name, &b->value);
  return out;
}

std::size_t EmotionModel::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : list_.params) n += p->value.numel();
  return n;
}

void EmotionModel::zero_grad() {
  for (auto* p : list_.params) p->grad.zero();
}

Tensor EmotionModel::to_nchw(const Tensor& bhwc, int expected_side, const char* what) const {
  if (bhwc.rank() != 4 || bhwc.dim(3) != 3) {
    throw InvalidArgument(std::string(what) + " batch must be (B, H, W, 3), got " + bhwc.shape_string());
  }
  if (bhwc.dim(1) != expected_side || bhwc.dim(2) != expected_side) {
    throw InvalidArgument(std::string(what) + " batch " + bhwc.shape_string() + " does not match the configured side " +
                          std::to_string(expected_side));
  }
  const int b = bhwc.dim(0), h = bhwc.dim(1), w = bhwc.dim(2);
  Tensor out({b, 3, h, w});
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int n = 0; n < b; ++n) {
    const float* src = bhwc.data() + static_cast<std::size_t>(n) * plane * 3;
    float* dst = out.data() + static_cast<std::size_t>(n) * plane * 3;
    for (std::size_t i = 0; i < plane; ++i) {
      dst[i] = src[i * 3];
      dst[plane + i] = src[i * 3 + 1];
      dst[2 * plane + i] = src[i * 3 + 2];
    }
  }
  return out;
}

namespace {

Tensor concat_features(const Tensor& a, const Tensor& b) {
  if (a.dim(0) != b.dim(0)) throw InvalidArgument("feature batch sizes differ");
  const int n = a.dim(0), fa = a.dim(1), fb = b.dim(1);
  Tensor out({n, fa + fb});
  for (int i = 0; i < n; ++i) {
    std::memcpy(out.data() + static_cast<std::size_t>(i) * (fa + fb), a.data() + static_cast<std::size_t>(i) * fa,
                sizeof(float) * fa);
    std::memcpy(out.data() + static_cast<std::size_t>(i) * (fa + fb) + fa, b.data() + static_cast<std::size_t>(i) * fb,
                sizeof(float) * fb);
  }
  return out;
}

std::pair<Tensor, Tensor> split_features(const Tensor& g, int fa) {
  const int n = g.dim(0), f = g.dim(1), fb = f - fa;
  Tensor a({n, fa}), b({n, fb});
  for (int i = 0; i < n; ++i) {
    std::memcpy(a.data() + static_cast<std::size_t>(i) * fa, g.data() + static_cast<std::size_t>(i) * f, sizeof(float) * fa);
    std::memcpy(b.data() + static_cast<std::size_t>(i) * fb, g.data() + static_cast<std::size_t>(i) * f + fa,
                sizeof(float) * fb);
  }
  return {std::move(a), std::move(b)};
}

void check_batches(const Tensor& body, const Tensor& context) {
  if (body.rank() != 4 || context.rank() != 4) {
    throw InvalidArgument("body and context inputs must be rank-4 (B, H, W, 3) batches");
  }
  if (body.dim(0) != context.dim(0)) {
    throw InvalidArgument("shape mismatch: body batch " + body.shape_string() + " vs context batch " +
                          context.shape_string());
  }
  if (body.dim(0) < 1) throw InvalidArgument("empty batch");
}

}  // namespace

Tensor EmotionModel::body_features(const Tensor& body) const {
  return body_.infer(to_nchw(body, config_.body_crop_side, "body"));
}

Tensor EmotionModel::context_features(const Tensor& context) const {
  return context_.infer(to_nchw(context, config_.context_side, "context"));
}

ForwardOutput EmotionModel::head_infer(const Tensor& body_feat, const Tensor& context_feat) const {
  Tensor h = nn::relu(fuse_.infer(concat_features(body_feat, context_feat)));
  return ForwardOutput{cat_head_.infer(h), vad_head_.infer(h)};
}

Tensor EmotionModel::head_body_feature_gradient(const Tensor& body_feat, const Tensor& context_feat,
                                                const Tensor& w_scores, const Tensor& w_vad) const {
  const int n = body_feat.dim(0);
  const int hidden = config_.fusion_hidden;
  const int fb = body_feat.dim(1);
  const int fin = fuse_.in_features();
  Tensor pre = fuse_.infer(concat_features(body_feat, context_feat));
  Tensor grad({n, fb});
  const auto& wc = cat_head_.weight().value;
  const auto& wv = vad_head_.weight().value;
  const auto& wf = fuse_.weight().value;
  for (int b = 0; b < n; ++b) {
    std::vector<double> dh(static_cast<std::size_t>(hidden), 0.0);
    for (int j = 0; j < hidden; ++j) {
      if (!(pre[static_cast<std::size_t>(b) * hidden + j] > 0.0f)) continue;
      double s = 0.0;
      for (std::size_t k = 0; k < kNumCategories; ++k) s += double(w_scores[k]) * wc[k * hidden + j];
      for (std::size_t k = 0; k < kNumVadDims; ++k) s += double(w_vad[k]) * wv[k * hidden + j];
      dh[j] = s;
    }
    for (int f = 0; f < fb; ++f) {
      double s = 0.0;
      for (int j = 0; j < hidden; ++j) s += dh[j] * wf[static_cast<std::size_t>(j) * fin + f];
      grad[static_cast<std::size_t>(b) * fb + f] = static_cast<float>(s);
    }
  }
  return grad;
}

ForwardOutput EmotionModel::infer(const Tensor& body, const Tensor& context) const {
  check_batches(body, context);
  return head_infer(body_features(body), context_features(context));
}

ForwardOutput EmotionModel::forward_train(const Tensor& body, const Tensor& context,
                                          std::uint64_t dropout_seed) {
  check_batches(body, context);
  Tensor fb, fc;
  if (trunks_trainable_) {
    fb = body_.forward(to_nchw(body, config_.body_crop_side, "body"));
    fc = context_.forward(to_nchw(context, config_.context_side, "context"));
  } else {
    fb = body_features(body);
    fc = context_features(context);
  }
  hidden_out_ = nn::relu(fuse_.forward(concat_features(fb, fc)));
  Tensor d = dropout_.forward(hidden_out_, dropout_seed);
  return ForwardOutput{cat_head_.forward(d), vad_head_.forward(d)};
}

void EmotionModel::backward(const Tensor& d_scores, const Tensor& d_vad) {
  if (hidden_out_.empty()) throw RuntimeError("backward called without a training forward");
  Tensor g = cat_head_.backward(d_scores);
  Tensor gv = vad_head_.backward(d_vad);
  for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gv[i];
  g = nn::relu_backward(hidden_out_, dropout_.backward(g));
  hidden_out_ = Tensor();
  Tensor dcat = fuse_.backward(g);
  if (!trunks_trainable_) return;
  auto [db, dc] = split_features(dcat, body_.feature_dim());
  body_.backward(db);
  context_.backward(dc);
}

// ---------------------------------------------------------------------------

PredictionResult predict(const EmotionModel& model, const Image& image, const ImageRecord& record,
                         const PersonAnnotation& person, const Normalization& norm) {
  const ModelConfig& cfg = model.config();
  Tensor body = extract_body_crop(image, record, person, cfg.body_crop_side, norm);
  Tensor context = preprocess_context(image, cfg.context_side, norm);
  body.reshape({1, cfg.body_crop_side, cfg.body_crop_side, 3});
  context.reshape({1, cfg.context_side, cfg.context_side, 3});
  return model.infer(body, context).row(0);
}

PredictionResult predict(const EmotionModel& model, const DatasetManifest& manifest,
                         const ImageRecord& record, const PersonAnnotation& person,
                         const Normalization& norm) {
  return predict(model, load_image(manifest.resolve(record)), record, person, norm);
}

std::vector<PredictionResult> predict_samples(const EmotionModel& model, const DatasetManifest& manifest,
                                              std::span<const SampleRef> samples, const Normalization& norm,
                                              std::size_t batch_size, std::size_t workers) {
  const ModelConfig& cfg = model.config();
  if (batch_size == 0) batch_size = 1;
  std::vector<PredictionResult> out(samples.size());
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, samples.size() - start);
    std::vector<Tensor> bodies(n), contexts(n);
    parallel_for(n, workers, [&](std::size_t i) {
      const SampleRef& s = samples[start + i];
      const ImageRecord& record = manifest.records.at(s.record);
      Image image = load_image(manifest.resolve(record));
      bodies[i] = extract_body_crop(image, record, record.persons.at(s.person), cfg.body_crop_side, norm);
      contexts[i] = preprocess_context(image, cfg.context_side, norm);
    });
    ForwardOutput y = model.infer(Tensor::stack(bodies), Tensor::stack(contexts));
    for (std::size_t i = 0; i < n; ++i) out[start + i] = y.row(i);
  }
  return out;
}

}  // namespace emoart
