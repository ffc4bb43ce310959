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

#include "emoart/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "emoart/error.hpp"
#include "emoart/logging.hpp"
#include "emoart/parallel.hpp"
#include "emoart/rng.hpp"

namespace emoart {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Stream tags for derive_seed, so that the data order, augmentation and
// dropout draws never share a stream.
enum : std::uint64_t { kStreamInit = 1, kStreamOrder = 2, kStreamAugment = 3, kStreamDropout = 4 };

/// Preprocessed (body, context) inputs of a manifest's samples, kept in
/// memory when they fit the budget and recomputed per request otherwise.
class SampleSource {
 public:
  SampleSource(const DatasetManifest& manifest, const ModelConfig& cfg, const Normalization& norm,
               std::size_t cache_bytes, std::size_t workers)
      : manifest_(manifest), cfg_(cfg), norm_(norm), workers_(workers),
        samples_(enumerate_samples(manifest)) {
    const std::size_t per_sample =
        (std::size_t(cfg.body_crop_side) * cfg.body_crop_side + std::size_t(cfg.context_side) * cfg.context_side) *
        3 * sizeof(float);
    if (per_sample * samples_.size() <= cache_bytes) fill_cache();
  }

  std::size_t size() const noexcept { return samples_.size(); }
  const std::vector<SampleRef>& samples() const noexcept { return samples_; }
  const PersonAnnotation& person(std::size_t i) const {
    return manifest_.records[samples_[i].record].persons[samples_[i].person];
  }

  /// Inputs of the given sample indices, (B, S, S, 3) each.
  std::pair<std::vector<Tensor>, std::vector<Tensor>> fetch(std::span<const std::size_t> idx) const {
    std::vector<Tensor> bodies(idx.size()), contexts(idx.size());
    parallel_for(idx.size(), workers_, [&](std::size_t k) {
      if (!bodies_.empty()) {
        bodies[k] = bodies_[idx[k]];
        contexts[k] = contexts_[idx[k]];
      } else {
        const SampleRef& s = samples_[idx[k]];
        const ImageRecord& rec = manifest_.records[s.record];
        const Image img = load_image(manifest_.resolve(rec));
        bodies[k] = extract_body_crop(img, rec, rec.persons[s.person], cfg_.body_crop_side, norm_);
        contexts[k] = preprocess_context(img, cfg_.context_side, norm_);
      }
    });
    return {std::move(bodies), std::move(contexts)};
  }

 private:
  void fill_cache() {
    bodies_.resize(samples_.size());
    contexts_.resize(samples_.size());
    // Group by record so each image is decoded once.
    std::vector<std::size_t> first(manifest_.records.size(), samples_.size());
    for (std::size_t i = samples_.size(); i-- > 0;) first[samples_[i].record] = i;
    parallel_for(manifest_.records.size(), workers_, [&](std::size_t r) {
      if (first[r] == samples_.size()) return;
      const ImageRecord& rec = manifest_.records[r];
      const Image img = load_image(manifest_.resolve(rec));
      const Tensor ctx = preprocess_context(img, cfg_.context_side, norm_);
      for (std::size_t i = first[r]; i < samples_.size() && samples_[i].record == r; ++i) {
        bodies_[i] = extract_body_crop(img, rec, rec.persons[samples_[i].person], cfg_.body_crop_side, norm_);
        contexts_[i] = ctx;
      }
    });
  }

  const DatasetManifest& manifest_;
  ModelConfig cfg_;
  Normalization norm_;
  std::size_t workers_;
  std::vector<SampleRef> samples_;
  std::vector<Tensor> bodies_, contexts_;
};

std::vector<PredictionResult> infer_all(const EmotionModel& model, const SampleSource& src, std::size_t batch) {
  std::vector<PredictionResult> out(src.size());
  std::vector<std::size_t> idx;
  for (std::size_t start = 0; start < src.size(); start += batch) {
    const std::size_t n = std::min(batch, src.size() - start);
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), start);
    auto [b, c] = src.fetch(idx);
    ForwardOutput y = model.infer(Tensor::stack(b), Tensor::stack(c));
    for (std::size_t i = 0; i < n; ++i) out[start + i] = y.row(i);
  }
  return out;
}

std::vector<PersonAnnotation> truths_of(const SampleSource& src) {
  std::vector<PersonAnnotation> t;
  t.reserve(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) t.push_back(src.person(i));
  return t;
}

LossMatrix to_matrix(const Tensor& t) {
  LossMatrix m(t.dim(0), t.dim(1));
  for (std::size_t i = 0; i < t.numel(); ++i) m.data()[i] = t[i];
  return m;
}

Tensor to_tensor(const LossMatrix& m) {
  Tensor t({int(m.rows()), int(m.cols())});
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = static_cast<float>(m.data()[i]);
  return t;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("cannot write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double number_or_nan(const nlohmann::json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

// ---------------------------------------------------------------------------
// Run records

nlohmann::json run_record_to_json(const RunRecord& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"learning_rate", e.learning_rate},
                      {"train_loss", e.train_loss},
                      {"train_discrete", e.train_discrete},
                      {"train_continuous", e.train_continuous},
                      {"val_mean_ap", number_or_null(e.val_mean_ap)},
                      {"val_mean_vad_error", e.val_mean_vad_error},
                      {"seconds", e.seconds}});
  }
  return {{"format", "emoart-run-record"},
          {"version", 1},
          {"config_hash", r.config_hash},
          {"config", r.config},
          {"epochs", epochs},
          {"best_epoch", r.best_epoch},
          {"best_val_mean_ap", number_or_null(r.best_val_mean_ap)},
          {"wall_clock_seconds", r.wall_clock_seconds},
          {"checkpoint", r.checkpoint_path.generic_string()}};
}

RunRecord run_record_from_json(const nlohmann::json& j) {
  try {
    RunRecord r;
    r.config_hash = j.at("config_hash").get<std::string>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& e : j.at("epochs")) {
      EpochRecord er;
      er.epoch = e.at("epoch").get<int>();
      er.learning_rate = e.at("learning_rate").get<double>();
      er.train_loss = e.at("train_loss").get<double>();
      er.train_discrete = e.at("train_discrete").get<double>();
      er.train_continuous = e.at("train_continuous").get<double>();
      er.val_mean_ap = number_or_nan(e.at("val_mean_ap"));
      er.val_mean_vad_error = e.at("val_mean_vad_error").get<double>();
      er.seconds = e.at("seconds").get<double>();
      r.epochs.push_back(er);
    }
    r.best_epoch = j.at("best_epoch").get<int>();
    r.best_val_mean_ap = number_or_nan(j.at("best_val_mean_ap"));
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    r.checkpoint_path = j.at("checkpoint").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed run record: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Training

TrainResult train(const TrainConfig& config, const std::filesystem::path& out_dir, const EpochCallback& on_epoch) {
  config.validate();
  const auto t_start = Clock::now();
  const std::size_t workers = static_cast<std::size_t>(config.workers);

  const DatasetManifest train_set = parse_manifest(config.train_manifest);
  const DatasetManifest val_set = parse_manifest(config.val_manifest);
  if (train_set.categories.size() != kNumCategories) {
    throw ValidationError("the model predicts " + std::to_string(kNumCategories) +
                          " categories but the training manifest lists " +
                          std::to_string(train_set.categories.size()));
  }
  if (val_set.categories != train_set.categories) {
    throw ValidationError("category set mismatch between training and validation manifests");
  }

  LossWeights weights;
  weights.lambda_discrete = config.lambda_discrete;
  weights.lambda_continuous = config.lambda_continuous;
  if (config.category_weight_c != 0.0) {
    weights.category_weights = make_category_weights(train_set, config.category_weight_c);
  }
  weights.validate();

  const Normalization norm =
      config.normalization == "dataset" ? compute_normalization(train_set, 2000) : Normalization::natural_images();
  const std::string hash = config_hash(config);

  auto model = EmotionModel::build(config.model, derive_seed(config.seed, {kStreamInit}));
  const bool trunks_frozen = config.trunk_lr_scale == 0.0;
  model->set_trunks_trainable(!trunks_frozen);

  const std::size_t cache_bytes = config.cache_mb * std::size_t(1) << 20;
  const SampleSource train_src(train_set, config.model, norm, cache_bytes, workers);
  const SampleSource val_src(val_set, config.model, norm, cache_bytes / 2, workers);
  if (train_src.size() == 0) throw ValidationError("training manifest has no annotated persons");
  const auto val_truths = truths_of(val_src);
  log_info("training on " + std::to_string(train_src.size()) + " persons, validating on " +
           std::to_string(val_src.size()) + " (config " + hash + ")");

  std::filesystem::create_directories(out_dir);
  save_config(config, out_dir / std::string(kResolvedConfigName));
  const auto ckpt_path = out_dir / std::string(kBestCheckpointName);

  nn::ParameterList params = model->parameters();
  std::vector<std::vector<float>> velocity(params.params.size());
  for (std::size_t i = 0; i < params.params.size(); ++i) velocity[i].assign(params.params[i]->value.numel(), 0.0f);
  std::vector<char> is_trunk(params.params.size());
  for (std::size_t i = 0; i < params.params.size(); ++i) {
    const auto& n = params.params[i]->name;
    is_trunk[i] = n.starts_with("body.") || n.starts_with("context.");
  }

  RunRecord record;
  record.config_hash = hash;
  record.config = config.to_map();
  record.checkpoint_path = ckpt_path;
  record.best_val_mean_ap = std::numeric_limits<double>::quiet_NaN();
  nlohmann::json loss_curve = nlohmann::json::array();

  const std::size_t n = train_src.size();
  const std::size_t batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t k = train_set.categories.size();

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t_epoch = Clock::now();
    const double lr = learning_rate_at(config, epoch);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng order_rng(derive_seed(config.seed, {kStreamOrder, std::uint64_t(epoch)}));
    std::shuffle(order.begin(), order.end(), order_rng);

    double sum_total = 0, sum_disc = 0, sum_cont = 0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
      const std::size_t b = std::min(batch, n - start);
      std::span<const std::size_t> idx(order.data() + start, b);
      auto [bodies, contexts] = train_src.fetch(idx);
      if (config.augment) {
        for (std::size_t i = 0; i < b; ++i) {
          apply_augment(sample_augment(derive_seed(config.seed, {kStreamAugment, std::uint64_t(epoch), idx[i]})),
                        bodies[i], contexts[i]);
        }
      }
      LossMatrix t_disc = LossMatrix::Zero(b, k), t_vad(b, kNumVadDims);
      for (std::size_t i = 0; i < b; ++i) {
        const auto& person = train_src.person(idx[i]);
        for (int c : person.categories) t_disc(i, c) = 1.0;
        const auto v = person.vad.as_array();
        for (std::size_t d = 0; d < kNumVadDims; ++d) t_vad(i, d) = v[d];
      }

      const ForwardOutput y = model->forward_train(
          Tensor::stack(bodies), Tensor::stack(contexts),
          derive_seed(config.seed, {kStreamDropout, std::uint64_t(epoch), batch_index}));
      const LossEvaluation loss = evaluate_loss(to_matrix(y.scores), to_matrix(y.vad), t_disc, t_vad, weights);
      if (!std::isfinite(loss.total)) {
        throw DivergenceError(epoch, batch_index,
                              "training diverged: non-finite loss at epoch " + std::to_string(epoch) +
                                  ", batch " + std::to_string(batch_index));
      }
      sum_total += loss.total * double(b);
      sum_disc += loss.discrete * double(b);
      sum_cont += loss.continuous * double(b);

      model->zero_grad();
      model->backward(to_tensor(loss.d_scores), to_tensor(loss.d_vad));

      float clip = 1.0f;
      if (config.grad_clip_norm > 0.0) {
        double sq = 0.0;
        for (std::size_t p = 0; p < params.params.size(); ++p) {
          if (is_trunk[p] && trunks_frozen) continue;
          for (float g : params.params[p]->grad.values()) sq += double(g) * g;
        }
        const double norm = std::sqrt(sq);
        if (norm > config.grad_clip_norm) clip = static_cast<float>(config.grad_clip_norm / norm);
      }

      const float mom = static_cast<float>(config.momentum);
      const float wd = static_cast<float>(config.weight_decay);
      for (std::size_t p = 0; p < params.params.size(); ++p) {
        if (is_trunk[p] && trunks_frozen) continue;
        const float step = static_cast<float>(lr * (is_trunk[p] ? config.trunk_lr_scale : 1.0));
        Tensor& w = params.params[p]->value;
        const Tensor& g = params.params[p]->grad;
        float* v = velocity[p].data();
        for (std::size_t e = 0; e < w.numel(); ++e) {
          v[e] = mom * v[e] + clip * g[e] + wd * w[e];
          w[e] -= step * v[e];
        }
      }
    }

    EpochRecord er;
    er.epoch = epoch;
    er.learning_rate = lr;
    er.train_loss = sum_total / double(n);
    er.train_discrete = sum_disc / double(n);
    er.train_continuous = sum_cont / double(n);
    if (val_src.size() > 0) {
      const auto preds = infer_all(*model, val_src, 16);
      for (const auto& p : preds) {
        const bool finite = std::all_of(p.discrete_scores.begin(), p.discrete_scores.end(),
                                        [](double v) { return std::isfinite(v); }) &&
                            std::all_of(p.vad.begin(), p.vad.end(), [](double v) { return std::isfinite(v); });
        if (!finite) {
          throw DivergenceError(epoch, batch_index,
                                "training diverged: non-finite validation predictions after epoch " +
                                    std::to_string(epoch));
        }
      }
      const MetricsReport rep = build_report(preds, val_truths, val_set.categories, val_set.source_tag, hash);
      er.val_mean_ap = rep.mean_ap;
      er.val_mean_vad_error = rep.mean_vad_error;
    } else {
      er.val_mean_ap = std::numeric_limits<double>::quiet_NaN();
      er.val_mean_vad_error = std::numeric_limits<double>::quiet_NaN();
    }
    er.seconds = seconds_since(t_epoch);
    loss_curve.push_back(er.train_loss);

    const bool improved = record.best_epoch == 0 ||
                          (std::isfinite(er.val_mean_ap) &&
                           (!std::isfinite(record.best_val_mean_ap) || er.val_mean_ap > record.best_val_mean_ap));
    record.epochs.push_back(er);
    if (improved) {
      record.best_epoch = epoch;
      record.best_val_mean_ap = er.val_mean_ap;
      const nlohmann::json training{{"epoch", epoch},
                                    {"seed", config.seed},
                                    {"loss_curve", loss_curve},
                                    {"val_mean_ap", number_or_null(er.val_mean_ap)},
                                    {"val_mean_vad_error", number_or_null(er.val_mean_vad_error)},
                                    {"train_manifest", config.train_manifest.generic_string()},
                                    {"source_tag", train_set.source_tag}};
      save_checkpoint(ckpt_path, *model, train_set.categories, norm, weights, hash, training);
    }
    record.wall_clock_seconds = seconds_since(t_start);
    write_json(out_dir / std::string(kRunRecordName), run_record_to_json(record));

    char line[256];
    std::snprintf(line, sizeof line, "epoch %d/%d lr %.4g loss %.5f (disc %.5f, cont %.5f) val AP %.2f VAD %.4f  %.1fs",
                  epoch, config.epochs, lr, er.train_loss, er.train_discrete, er.train_continuous,
                  100.0 * er.val_mean_ap, er.val_mean_vad_error, er.seconds);
    log_info(line);
    if (on_epoch) on_epoch(er);
  }

  return TrainResult{load_checkpoint(ckpt_path), std::move(record)};
}

// ---------------------------------------------------------------------------
// Evaluation

MetricsReport evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest, const EvaluateOptions& options) {
  if (!checkpoint.model) throw InvalidArgument("checkpoint holds no model");
  if (checkpoint.categories != manifest.categories) {
    throw ValidationError("category set mismatch: the checkpoint was trained on " +
                          std::to_string(checkpoint.categories.size()) + " categories, the manifest lists " +
                          std::to_string(manifest.categories.size()) +
                          (checkpoint.categories.size() == manifest.categories.size() ? " with different names" : ""));
  }
  const auto samples = enumerate_samples(manifest);
  const auto preds = predict_samples(*checkpoint.model, manifest, samples, checkpoint.normalization,
                                     options.batch_size, options.workers);
  std::vector<PersonAnnotation> truths;
  truths.reserve(samples.size());
  for (const auto& s : samples) truths.push_back(manifest.records[s.record].persons[s.person]);
  return build_report(preds, truths, manifest.categories, manifest.source_tag, checkpoint.config_hash,
                      options.predominant_only);
}

MetricsReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                       const EvaluateOptions& options) {
  const Checkpoint ck = load_checkpoint(checkpoint);
  return evaluate(ck, parse_manifest(manifest), options);
}

// ---------------------------------------------------------------------------
// Ablations

AblationAxis parse_ablation_axis(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "inw") return AblationAxis::kInw;
  if (s == "224b") return AblationAxis::kBody224;
  throw ValidationError("unknown ablation axis '" + std::string(name) + "' (expected INW or 224B)");
}

std::string_view ablation_axis_name(AblationAxis axis) { return axis == AblationAxis::kInw ? "INW" : "224B"; }

std::vector<TrainConfig> ablation_grid(const TrainConfig& base, std::span<const AblationAxis> axes) {
  if (axes.size() > 8) throw ValidationError("too many ablation axes");
  std::vector<TrainConfig> grid;
  for (std::size_t mask = 0; mask < (std::size_t(1) << axes.size()); ++mask) {
    TrainConfig c = base;
    for (std::size_t a = 0; a < axes.size(); ++a) {
      const bool on = (mask >> a) & 1;
      if (axes[a] == AblationAxis::kInw) {
        c.model.context_pretraining = on ? Pretraining::kObjectCentric : Pretraining::kSceneCentric;
      } else {
        c.model.body_crop_side = on ? 224 : kDefaultBodySide;
      }
    }
    grid.push_back(std::move(c));
  }
  return grid;
}

namespace {

std::string display_backbone(Backbone b) { return b == Backbone::kResNet18 ? "ResNet-18" : "ResNet-50"; }

std::string model_label(const ModelConfig& m) {
  if (m.body_backbone == m.context_backbone) return display_backbone(m.body_backbone);
  return display_backbone(m.body_backbone) + "/" + display_backbone(m.context_backbone);
}

}  // namespace

AblationTable run_ablation(const std::vector<TrainConfig>& grid, const std::vector<std::filesystem::path>& eval_manifests,
                           const std::filesystem::path& work_dir, const EvaluateOptions& options) {
  if (grid.empty()) throw ValidationError("ablation grid is empty");
  if (eval_manifests.empty()) throw ValidationError("ablation needs at least one evaluation manifest");

  std::vector<DatasetManifest> evals;
  AblationTable table;
  for (const auto& p : eval_manifests) {
    evals.push_back(parse_manifest(p));
    std::string tag = evals.back().source_tag.empty() ? p.stem().string() : evals.back().source_tag;
    const std::string base_tag = tag;
    for (int dup = 2; std::count(table.eval_tags.begin(), table.eval_tags.end(), tag); ++dup) {
      tag = base_tag + "#" + std::to_string(dup);
    }
    table.eval_tags.push_back(tag);
  }

  for (const auto& cfg : grid) {
    AblationRow row;
    row.model = model_label(cfg.model);
    row.inw = cfg.model.inw();
    row.body_224 = cfg.model.body_224();
    row.reports.resize(evals.size());
    try {
      row.config_hash = config_hash(cfg);
      const auto run_dir = work_dir / "runs" / row.config_hash;
      const auto ckpt_path = run_dir / std::string(kBestCheckpointName);
      std::error_code ec;
      const bool cached = std::filesystem::is_regular_file(ckpt_path, ec) &&
                          std::filesystem::is_regular_file(run_dir / std::string(kRunRecordName), ec);
      if (cached) {
        log_info("ablation: reusing run " + row.config_hash);
      } else {
        log_info("ablation: training " + row.model + (row.inw ? " +INW" : "") + (row.body_224 ? " +224B" : "") +
                 " (" + row.config_hash + ")");
        train(cfg, run_dir);
      }
      const Checkpoint ck = load_checkpoint(ckpt_path);
      for (std::size_t e = 0; e < evals.size(); ++e) {
        try {
          row.reports[e] = evaluate(ck, evals[e], options);
        } catch (const std::exception& ex) {
          if (row.error.empty()) row.error = table.eval_tags[e] + ": " + ex.what();
        }
      }
    } catch (const std::exception& ex) {
      row.error = ex.what();
      log_warning("ablation cell failed: " + row.error);
    }
    table.rows.push_back(std::move(row));
  }

  for (const auto& row : table.rows) {
    std::vector<std::optional<ReportDiff>> d(evals.size());
    for (std::size_t e = 0; e < evals.size(); ++e) {
      if (row.reports[e] && table.rows[0].reports[e]) d[e] = compare_reports(*table.rows[0].reports[e], *row.reports[e]);
    }
    table.deltas.push_back(std::move(d));
  }
  return table;
}

namespace {

std::string fixed(double v, int digits) {
  if (!std::isfinite(v)) return "n/a";
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

std::string signed_fixed(double v, int digits) {
  if (!std::isfinite(v)) return fixed(v, digits);
  std::string s = fixed(v, digits);
  // Values that round to zero print as +0.00, never -0.00.
  if (s.find_first_not_of("-0.") == std::string::npos) s = fixed(0.0, digits);
  return (s[0] == '-' ? "" : "+") + s;
}

// Display width in code points, so check marks and arrows align.
std::size_t display_width(const std::string& s) {
  std::size_t n = 0;
  for (unsigned char c : s) n += (c & 0xC0) != 0x80;
  return n;
}

std::string render(const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width;
  for (const auto& row : cells) {
    width.resize(std::max(width.size(), row.size()));
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], display_width(row[c]));
  }
  std::string out;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      out += (c == 0 ? "" : " | ") + cells[r][c];
      if (c + 1 < cells[r].size()) out.append(width[c] - display_width(cells[r][c]), ' ');
    }
    out += '\n';
    if (r == 0) {
      for (std::size_t c = 0; c < width.size(); ++c) out += (c == 0 ? "" : "-|-") + std::string(width[c], '-');
      out += '\n';
    }
  }
  return out;
}

}  // namespace

std::string render_ablation_table(const AblationTable& table) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Model", "INW", "224B"};
  for (const auto& t : table.eval_tags) header.push_back("AP_" + t + " ↑");
  for (const auto& t : table.eval_tags) header.push_back("VAD_" + t + " ↓");
  cells.push_back(header);
  for (const auto& row : table.rows) {
    std::vector<std::string> r{row.model, row.inw ? "✓" : "", row.body_224 ? "✓" : ""};
    for (const auto& rep : row.reports) r.push_back(rep ? fixed(100.0 * rep->mean_ap, 2) : "failed");
    for (const auto& rep : row.reports) r.push_back(rep ? fixed(rep->mean_vad_error, 2) : "failed");
    cells.push_back(std::move(r));
  }
  std::string out = render(cells);

  if (table.rows.size() > 1) {
    std::vector<std::vector<std::string>> dcells;
    std::vector<std::string> dh{"Δ vs row 1", "INW", "224B"};
    for (const auto& t : table.eval_tags) dh.push_back("ΔAP_" + t);
    for (const auto& t : table.eval_tags) dh.push_back("ΔVAD_" + t);
    dcells.push_back(dh);
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
      const auto& row = table.rows[i];
      std::vector<std::string> r{row.model, row.inw ? "✓" : "", row.body_224 ? "✓" : ""};
      for (const auto& d : table.deltas[i]) {
        const MetricDelta* m = d ? d->find("mean_ap") : nullptr;
        r.push_back(m && m->delta ? signed_fixed(100.0 * *m->delta, 2) : "n/a");
      }
      for (const auto& d : table.deltas[i]) {
        const MetricDelta* m = d ? d->find("mean_vad_error") : nullptr;
        r.push_back(m && m->delta ? signed_fixed(*m->delta, 2) : "n/a");
      }
      dcells.push_back(std::move(r));
    }
    out += "\n" + render(dcells);
  }

  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    if (!table.rows[i].error.empty()) out += "\nrow " + std::to_string(i + 1) + " failed: " + table.rows[i].error;
  }
  if (out.back() != '\n') out += '\n';
  return out;
}

nlohmann::json ablation_to_json(const AblationTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    nlohmann::json reports = nlohmann::json::array();
    for (const auto& r : row.reports) reports.push_back(r ? report_to_json(*r) : nlohmann::json(nullptr));
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& d : table.deltas[i]) deltas.push_back(d ? diff_to_json(*d) : nlohmann::json(nullptr));
    rows.push_back({{"model", row.model},
                    {"inw", row.inw},
                    {"224b", row.body_224},
                    {"config_hash", row.config_hash},
                    {"reports", reports},
                    {"deltas", deltas},
                    {"error", row.error.empty() ? nlohmann::json(nullptr) : nlohmann::json(row.error)}});
  }
  return {{"eval_sets", table.eval_tags}, {"rows", rows}, {"text", render_ablation_table(table)}};
}

}  // namespace emoart
