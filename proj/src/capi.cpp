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

#include "emoart/emoart.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include <nlohmann/json.hpp>

#include "emoart/checkpoint.hpp"
#include "emoart/convert.hpp"
#include "emoart/error.hpp"
#include "emoart/harness.hpp"
#include "emoart/logging.hpp"
#include "emoart/stylize.hpp"
#include "emoart/synthetic.hpp"

using nlohmann::json;

struct emo_model {
  emoart::Checkpoint checkpoint;
};

namespace {

thread_local std::string g_last_error;

emo_status status_of(emoart::ErrorKind kind) {
  switch (kind) {
    case emoart::ErrorKind::kInvalidArgument: return EMO_ERR_INVALID_ARGUMENT;
    case emoart::ErrorKind::kValidation: return EMO_ERR_VALIDATION;
    case emoart::ErrorKind::kIo: return EMO_ERR_IO;
    case emoart::ErrorKind::kRuntime: return EMO_ERR_RUNTIME;
    case emoart::ErrorKind::kDiverged: return EMO_ERR_DIVERGED;
  }
  return EMO_ERR_RUNTIME;
}

template <typename Fn>
emo_status guard(Fn&& fn) {
  try {
    fn();
    return EMO_OK;
  } catch (const emoart::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const json::exception& e) {
    g_last_error = std::string("malformed JSON: ") + e.what();
    return EMO_ERR_INVALID_ARGUMENT;
  } catch (const std::filesystem::filesystem_error& e) {
    g_last_error = e.what();
    return EMO_ERR_IO;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return EMO_ERR_RUNTIME;
  } catch (...) {
    g_last_error = "unknown error";
    return EMO_ERR_RUNTIME;
  }
}

void require(const void* p, const char* what) {
  if (!p) throw emoart::InvalidArgument(std::string(what) + " must not be NULL");
}

void emit(char** out, const json& j) {
  if (!out) return;
  const std::string s = j.dump(2);
  char* buf = static_cast<char*>(std::malloc(s.size() + 1));
  if (!buf) throw std::bad_alloc();
  std::memcpy(buf, s.c_str(), s.size() + 1);
  *out = buf;
}

json parse_options(const char* text) {
  if (!text || !*text) return json::object();
  json j = json::parse(text);
  if (!j.is_object()) throw emoart::InvalidArgument("options must be a JSON object");
  return j;
}

std::string str_opt(const json& o, const char* key, const std::string& fallback = {}) {
  return o.contains(key) && !o[key].is_null() ? o[key].get<std::string>() : fallback;
}

std::string required_str(const json& o, const char* key) {
  const std::string v = str_opt(o, key);
  if (v.empty()) throw emoart::ValidationError(std::string("option '") + key + "' is required");
  return v;
}

emoart::TrainConfig resolve_config(const char* text, const char* base_dir, const json& overrides) {
  emoart::TrainConfig c = emoart::parse_config_text(text ? text : "", base_dir ? base_dir : "");
  std::map<std::string, std::string> kv;
  for (const auto& [k, v] : overrides.items()) kv[k] = v.is_string() ? v.get<std::string>() : v.dump();
  c.apply(kv);
  c.validate();
  return c;
}

json prediction_json(const emoart::PredictionResult& p) {
  return {{"scores", p.discrete_scores}, {"vad", p.vad}};
}

}  // namespace

extern "C" {

const char* emo_version(void) { return "0.1.0"; }

const char* emo_last_error(void) { return g_last_error.c_str(); }

const char* emo_status_name(emo_status status) {
  switch (status) {
    case EMO_OK: return "ok";
    case EMO_ERR_INVALID_ARGUMENT: return "invalid argument";
    case EMO_ERR_VALIDATION: return "validation error";
    case EMO_ERR_IO: return "i/o error";
    case EMO_ERR_RUNTIME: return "runtime error";
    case EMO_ERR_DIVERGED: return "training diverged";
  }
  return "unknown status";
}

void emo_string_free(char* s) { std::free(s); }

void emo_set_log_callback(emo_log_fn fn, void* user) {
  if (!fn) {
    emoart::set_log_sink({});
    return;
  }
  emoart::set_log_sink([fn, user](emoart::LogLevel level, const std::string& msg) {
    fn(static_cast<int>(level), msg.c_str(), user);
  });
}

void emo_set_log_level(int level) {
  if (level < 0) level = 0;
  if (level > 3) level = 3;
  emoart::set_log_level(static_cast<emoart::LogLevel>(level));
}

emo_status emo_categories(char** json_out) {
  return guard([&] {
    require(json_out, "json_out");
    emit(json_out, emoart::canonical_category_list());
  });
}

emo_status emo_model_load(const char* checkpoint_path, emo_model** out) {
  return guard([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    *out = nullptr;
    auto m = std::make_unique<emo_model>();
    m->checkpoint = emoart::load_checkpoint(checkpoint_path);
    *out = m.release();
  });
}

void emo_model_free(emo_model* model) { delete model; }

emo_status emo_model_info(const emo_model* model, char** json_out) {
  return guard([&] {
    require(model, "model");
    require(json_out, "json_out");
    const auto& ck = model->checkpoint;
    emit(json_out, {{"model", ck.model->config().to_map()},
                    {"parameters", ck.model->parameter_count()},
                    {"categories", ck.categories},
                    {"normalization", {{"mean", ck.normalization.mean}, {"std", ck.normalization.std}}},
                    {"config_hash", ck.config_hash},
                    {"training", ck.training}});
  });
}

emo_status emo_predict(const emo_model* model, const char* image_path, const double bbox[4],
                       double scores[EMO_NUM_CATEGORIES], double vad[EMO_NUM_VAD]) {
  return guard([&] {
    require(model, "model");
    require(image_path, "image_path");
    require(bbox, "bbox");
    require(scores, "scores");
    require(vad, "vad");
    const emoart::Image img = emoart::load_image(image_path);
    emoart::ImageRecord rec;
    rec.image_id = image_path;
    rec.path = image_path;
    rec.width = img.width;
    rec.height = img.height;
    emoart::PersonAnnotation person;
    person.bbox = {bbox[0], bbox[1], bbox[2], bbox[3]};
    // Labels are irrelevant for prediction; placeholders let the geometry
    // checks of validate_record run unchanged.
    person.categories = {0};
    person.vad = {1, 1, 1};
    rec.persons.push_back(person);
    const auto checked = emoart::validate_record(rec, emoart::VadScale{}, emoart::kNumCategories);
    const auto p = emoart::predict(*model->checkpoint.model, img, checked, checked.persons[0],
                                   model->checkpoint.normalization);
    std::copy(p.discrete_scores.begin(), p.discrete_scores.end(), scores);
    std::copy(p.vad.begin(), p.vad.end(), vad);
  });
}

emo_status emo_predict_manifest(const emo_model* model, const char* manifest_path, int workers, char** json_out) {
  return guard([&] {
    require(model, "model");
    require(manifest_path, "manifest_path");
    require(json_out, "json_out");
    const auto m = emoart::parse_manifest(manifest_path);
    const auto samples = emoart::enumerate_samples(m);
    const auto preds = emoart::predict_samples(*model->checkpoint.model, m, samples, model->checkpoint.normalization,
                                               16, static_cast<std::size_t>(std::max(1, workers)));
    json arr = json::array();
    for (std::size_t i = 0; i < samples.size(); ++i) {
      json p = prediction_json(preds[i]);
      p["image_id"] = m.records[samples[i].record].image_id;
      p["person"] = samples[i].person;
      arr.push_back(std::move(p));
    }
    emit(json_out, {{"categories", model->checkpoint.categories}, {"predictions", arr}});
  });
}

emo_status emo_manifest_check(const char* manifest_path, char** json_out) {
  return guard([&] {
    require(manifest_path, "manifest_path");
    const auto m = emoart::parse_manifest(manifest_path);
    std::vector<std::size_t> counts(m.categories.size(), 0);
    for (const auto& r : m.records) {
      for (const auto& p : r.persons) {
        for (int c : p.categories) ++counts[static_cast<std::size_t>(c)];
      }
    }
    json per = json::object();
    for (std::size_t k = 0; k < m.categories.size(); ++k) per[m.categories[k]] = counts[k];
    emit(json_out, {{"split", emoart::split_name(m.split)},
                    {"source_tag", m.source_tag},
                    {"images", m.records.size()},
                    {"persons", m.person_count()},
                    {"category_counts", per}});
  });
}

emo_status emo_convert(const char* options_json, char** json_out) {
  return guard([&] {
    const json o = parse_options(options_json);
    emoart::ConvertOptions opt;
    opt.format = str_opt(o, "format", opt.format);
    opt.images_root = str_opt(o, "images_root");
    opt.split = emoart::parse_split(str_opt(o, "split", "train"));
    opt.source_tag = str_opt(o, "source_tag", opt.source_tag);
    if (o.contains("vad_scale")) opt.vad_scale = {o["vad_scale"].at(0).get<double>(), o["vad_scale"].at(1).get<double>()};
    const std::string input = required_str(o, "input");
    const std::string output = required_str(o, "output");
    const auto m = emoart::convert_annotations(input, opt);
    emoart::write_manifest(m, output);
    emit(json_out, {{"output", output}, {"images", m.records.size()}, {"persons", m.person_count()}});
  });
}

emo_status emo_synthesize(const char* options_json, char** json_out) {
  return guard([&] {
    const json o = parse_options(options_json);
    emoart::SyntheticSpec s;
    s.n_images = o.value("n_images", s.n_images);
    s.width = o.value("width", s.width);
    s.height = o.value("height", s.height);
    s.n_classes = o.value("n_classes", s.n_classes);
    s.second_person_prob = o.value("second_person_prob", s.second_person_prob);
    s.vad_noise = o.value("vad_noise", s.vad_noise);
    s.seed = o.value("seed", s.seed);
    s.split = emoart::parse_split(str_opt(o, "split", "train"));
    s.source_tag = str_opt(o, "source_tag", s.source_tag);
    const std::string out = required_str(o, "output");
    const auto m = emoart::generate_synthetic_dataset(s, out);
    emit(json_out, {{"manifest", (std::filesystem::path(out) / "manifest.jsonl").generic_string()},
                    {"images", m.records.size()},
                    {"persons", m.person_count()}});
  });
}

emo_status emo_fetch_weights(const char* options_json, char** json_out) {
  return guard([&] {
    const json o = parse_options(options_json);
    const std::string dir = str_opt(o, "weights_dir", "weights");
    const auto backbone = emoart::parse_backbone(required_str(o, "backbone"));
    const auto scheme = emoart::parse_pretraining(required_str(o, "scheme"));
    std::filesystem::path dest;
    if (o.value("random", false)) {
      dest = emoart::write_random_trunk_weights(dir, backbone, scheme, o.value("width", 64),
                                                o.value("seed", std::uint64_t{0}));
    } else {
      dest = emoart::ingest_trunk_weights(required_str(o, "source"), dir, backbone, scheme);
    }
    emit(json_out, {{"path", dest.generic_string()}});
  });
}

emo_status emo_config_resolve(const char* config_text, const char* base_dir, const char* overrides_json,
                              char** json_out) {
  return guard([&] {
    const auto c = resolve_config(config_text, base_dir, parse_options(overrides_json));
    emit(json_out, {{"text", emoart::config_to_text(c)}, {"hash", emoart::config_hash(c)}});
  });
}

emo_status emo_train(const char* config_text, const char* base_dir, const char* out_dir, char** json_out) {
  return guard([&] {
    require(out_dir, "out_dir");
    const auto c = resolve_config(config_text, base_dir, json::object());
    const auto result = emoart::train(c, out_dir);
    emit(json_out, emoart::run_record_to_json(result.record));
  });
}

emo_status emo_evaluate(const char* checkpoint_path, const char* manifest_path, const char* options_json,
                        char** json_out) {
  return guard([&] {
    require(checkpoint_path, "checkpoint_path");
    require(manifest_path, "manifest_path");
    const json o = parse_options(options_json);
    emoart::EvaluateOptions opt;
    opt.predominant_only = o.value("predominant_only", false);
    opt.workers = o.value("workers", std::size_t{1});
    opt.batch_size = o.value("batch_size", opt.batch_size);
    const auto report = emoart::evaluate(std::filesystem::path(checkpoint_path), manifest_path, opt);
    const std::string out = str_opt(o, "output");
    if (!out.empty()) emoart::save_report(report, out);
    emit(json_out, emoart::report_to_json(report));
  });
}

emo_status emo_compare(const char* report_a_path, const char* report_b_path, char** json_out) {
  return guard([&] {
    require(report_a_path, "report_a_path");
    require(report_b_path, "report_b_path");
    const auto diff = emoart::compare_reports(emoart::load_report(report_a_path), emoart::load_report(report_b_path));
    emit(json_out, emoart::diff_to_json(diff));
  });
}

emo_status emo_stylize(const char* options_json, char** json_out) {
  return guard([&] {
    const json o = parse_options(options_json);
    emoart::StylizationJob job;
    job.stylizer_id = str_opt(o, "stylizer", job.stylizer_id);
    job.strength = o.value("strength", 1.0);
    job.output_dir = required_str(o, "output");
    job.workers = o.value("workers", std::size_t{1});
    // Cheap checks before any file is read.
    if (!(job.strength >= 0.0 && job.strength <= 1.0)) {
      throw emoart::InvalidArgument("stylization strength must lie in [0, 1]");
    }
    emoart::make_stylizer(job.stylizer_id);
    job.source = emoart::parse_manifest(required_str(o, "manifest"));
    job.styles = emoart::StyleCorpus::from_directory(required_str(o, "styles"), o.value("seed", std::uint64_t{0}));
    const auto r = emoart::stylize_dataset(job);
    json assignment = json::array();
    for (std::size_t i = 0; i < r.style_assignment.size(); ++i) {
      assignment.push_back({{"image_id", r.manifest.records[i].image_id},
                            {"style", job.styles.paths[r.style_assignment[i]].filename().string()}});
    }
    emit(json_out, {{"manifest", (job.output_dir / std::string(emoart::kStylizedManifestName)).generic_string()},
                    {"source_tag", r.manifest.source_tag},
                    {"images", r.manifest.records.size()},
                    {"processed", r.processed},
                    {"resumed", r.resumed},
                    {"assignment", assignment}});
  });
}

emo_status emo_ablate(const char* config_text, const char* base_dir, const char* options_json, char** json_out) {
  return guard([&] {
    const json o = parse_options(options_json);
    const auto base = resolve_config(config_text, base_dir, json::object());
    std::vector<emoart::AblationAxis> axes;
    for (const auto& a : o.value("axes", json::array({"INW", "224B"}))) {
      axes.push_back(emoart::parse_ablation_axis(a.get<std::string>()));
    }
    std::vector<std::filesystem::path> evals;
    for (const auto& e : o.value("eval", json::array())) evals.emplace_back(e.get<std::string>());
    if (evals.empty()) evals.push_back(base.val_manifest);
    emoart::EvaluateOptions opt;
    opt.workers = o.value("workers", std::size_t{1});
    const auto table = emoart::run_ablation(emoart::ablation_grid(base, axes), evals,
                                            str_opt(o, "work_dir", "ablation"), opt);
    emit(json_out, emoart::ablation_to_json(table));
  });
}

}  // extern "C"
