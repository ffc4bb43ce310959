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

// Command-line front end. Everything goes through the C interface.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "emoart/emoart.h"

using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int exit_code(emo_status s) {
  switch (s) {
    case EMO_OK: return kExitOk;
    case EMO_ERR_INVALID_ARGUMENT:
    case EMO_ERR_VALIDATION: return kExitValidation;
    default: return kExitRuntime;
  }
}

struct Failure {
  int code;
};

// Calls a C entry point that yields a JSON string; throws Failure after
// printing the library's message.
template <typename Fn>
json call(Fn&& fn) {
  char* out = nullptr;
  const emo_status s = fn(&out);
  if (s != EMO_OK) {
    std::fprintf(stderr, "emoart: %s: %s\n", emo_status_name(s), emo_last_error());
    throw Failure{exit_code(s)};
  }
  std::unique_ptr<char, decltype(&emo_string_free)> guard(out, emo_string_free);
  return out ? json::parse(out) : json();
}

[[noreturn]] void usage_error(const std::string& msg) {
  std::fprintf(stderr, "emoart: %s\n", msg.c_str());
  throw Failure{kExitValidation};
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::fprintf(stderr, "emoart: cannot read %s\n", path.c_str());
    throw Failure{kExitRuntime};
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) {
    std::fprintf(stderr, "emoart: cannot write %s\n", path.c_str());
    throw Failure{kExitRuntime};
  }
}

std::string fmt(const char* f, double v) {
  if (!std::isfinite(v)) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Globals {
  std::string config;
  long long seed = -1;
  std::string device = "cpu";
  int workers = 1;
  std::vector<std::string> sets;
  bool quiet = false;
  bool verbose = false;
};

// Config text plus the directory its relative paths resolve against.
struct ConfigSource {
  std::string text;
  std::string base_dir;
};

ConfigSource resolve_config(const Globals& g, std::map<std::string, std::string> extra) {
  ConfigSource src;
  if (!g.config.empty()) {
    src.text = read_file(g.config);
    src.base_dir = std::filesystem::path(g.config).parent_path().string();
  }
  json overrides = json::object();
  for (const auto& s : g.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) usage_error("--set expects key=value, got '" + s + "'");
    overrides[s.substr(0, eq)] = s.substr(eq + 1);
  }
  if (g.seed >= 0) overrides["seed"] = std::to_string(g.seed);
  overrides["workers"] = std::to_string(g.workers);
  for (const auto& [k, v] : extra) {
    if (!v.empty()) overrides[k] = v;
  }
  const std::string ov = overrides.dump();
  const json r = call([&](char** out) {
    return emo_config_resolve(src.text.c_str(), src.base_dir.c_str(), ov.c_str(), out);
  });
  return {r.at("text").get<std::string>(), ""};
}

void print_report(const json& r) {
  std::printf("%-20s %s (%zu persons)\n", "evaluation set", r.value("source_tag", "").c_str(),
              r.value("n_persons", std::size_t{0}));
  std::printf("%-20s %8s\n", "category", "AP %");
  for (const auto& name : r.at("categories")) {
    const json& v = r.at("per_category_ap").at(name.get<std::string>());
    std::printf("%-20s %8s\n", name.get<std::string>().c_str(),
                v.is_null() ? "excluded" : fmt("%.2f", 100.0 * v.get<double>()).c_str());
  }
  const json& map = r.at("mean_ap");
  std::printf("%-20s %8s\n", "mean AP", map.is_null() ? "n/a" : fmt("%.2f", 100.0 * map.get<double>()).c_str());
  for (const char* dim : {"valence", "arousal", "dominance"}) {
    std::printf("%-20s %8s\n", ("VAD error " + std::string(dim)).c_str(),
                fmt("%.4f", r.at("per_dim_vad_error").at(dim).get<double>()).c_str());
  }
  std::printf("%-20s %8s\n", "mean VAD error", fmt("%.4f", r.at("mean_vad_error").get<double>()).c_str());
}

void log_to_stderr(int level, const char* message, void* user) {
  const int min_level = *static_cast<int*>(user);
  if (level < min_level) return;
  static const char* names[] = {"debug", "info", "warning", "error"};
  std::fprintf(stderr, "[%s] %s\n", names[level < 0 || level > 3 ? 3 : level], message);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Emotion recognition in artworks: datasets, training, evaluation and stylization"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Training configuration file (key = value lines)");
  app.add_option("--seed", g.seed, "Seed overriding the configuration");
  app.add_option("--device", g.device, "Compute device (only 'cpu' is available)");
  app.add_option("--workers", g.workers, "Worker threads for data loading and stylization")->check(CLI::PositiveNumber);
  app.add_option("--set", g.sets, "Configuration override key=value (repeatable)");
  app.add_flag("-q,--quiet", g.quiet, "Only print warnings and errors");
  app.add_flag("-v,--verbose", g.verbose, "Print debug messages");

  // convert
  auto* convert = app.add_subcommand("convert", "Convert annotations into a manifest");
  std::string c_format = "emotic-csv", c_input, c_root, c_split = "train", c_tag = "EMOTIC", c_out;
  std::vector<double> c_scale;
  convert->add_option("--format,--from", c_format, "emotic-csv or simple-csv");
  convert->add_option("input,--in", c_input, "Annotation CSV")->required();
  convert->add_option("--images-root", c_root, "Directory image paths are relative to");
  convert->add_option("--split", c_split, "train, val or test");
  convert->add_option("--source-tag", c_tag, "Dataset tag recorded in the manifest");
  convert->add_option("--vad-scale", c_scale, "Lowest and highest VAD value")->expected(2)->delimiter(',');
  convert->add_option("-o,--out", c_out, "Output manifest")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a procedural toy dataset");
  std::string s_out, s_split = "train", s_tag = "SYNTH";
  int s_images = 64, s_size = 96, s_classes = 4;
  double s_second = 0.0;
  synth->add_option("-o,--out", s_out, "Output directory")->required();
  synth->add_option("--images", s_images, "Number of images");
  synth->add_option("--size", s_size, "Image side in pixels");
  synth->add_option("--classes", s_classes, "Number of categories used");
  synth->add_option("--second-person", s_second, "Probability of a second figure per image");
  synth->add_option("--split", s_split, "train, val or test");
  synth->add_option("--source-tag", s_tag, "Dataset tag");

  // fetch-weights
  auto* fetch = app.add_subcommand("fetch-weights", "Install trunk weights into the weights directory");
  std::string f_backbone, f_scheme, f_source, f_dir = "weights";
  bool f_random = false;
  int f_width = 64;
  fetch->add_option("--backbone", f_backbone, "resnet18 or resnet50")->required();
  fetch->add_option("--scheme", f_scheme, "scene_centric or object_centric")->required();
  fetch->add_option("--from", f_source, "Trunk weight file to verify and install");
  fetch->add_flag("--random", f_random, "Write randomly initialized stand-in weights instead");
  fetch->add_option("--width", f_width, "Trunk width for --random");
  fetch->add_option("--weights-dir", f_dir, "Destination directory");

  // train
  auto* train = app.add_subcommand("train", "Train a model");
  std::string t_out, t_train, t_val;
  int t_epochs = 0;
  train->add_option("-o,--out", t_out, "Run directory")->required();
  train->add_option("--train", t_train, "Training manifest (overrides the config)");
  train->add_option("--val", t_val, "Validation manifest (overrides the config)");
  train->add_option("--epochs", t_epochs, "Epochs (overrides the config)");

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on a manifest");
  std::string e_ckpt, e_manifest, e_out;
  bool e_pred = false, e_json = false;
  evaluate->add_option("--checkpoint", e_ckpt, "Checkpoint file")->required();
  evaluate->add_option("--manifest", e_manifest, "Evaluation manifest")->required();
  evaluate->add_option("-o,--out", e_out, "Write the report here");
  evaluate->add_flag("--predominant-only", e_pred, "Only the first listed category counts as positive");
  evaluate->add_flag("--json", e_json, "Print the report as JSON");

  // predict
  auto* predict = app.add_subcommand("predict", "Predict emotions for one person or a whole manifest");
  std::string p_ckpt, p_image, p_manifest;
  std::vector<double> p_bbox;
  int p_top = 5;
  predict->add_option("--checkpoint", p_ckpt, "Checkpoint file")->required();
  auto* p_img_opt = predict->add_option("--image", p_image, "Image file");
  predict->add_option("--bbox", p_bbox, "Person box x1,y1,x2,y2")->expected(4)->delimiter(',');
  auto* p_man_opt = predict->add_option("--manifest", p_manifest, "Predict every person of a manifest (JSON output)");
  p_img_opt->excludes(p_man_opt);
  predict->add_option("--top", p_top, "Categories to list");

  // stylize
  auto* stylize = app.add_subcommand("stylize", "Build a stylized copy of a dataset");
  std::string y_manifest, y_styles, y_out, y_id = "stats-match";
  double y_strength = 1.0;
  stylize->add_option("--manifest", y_manifest, "Source manifest")->required();
  stylize->add_option("--styles", y_styles, "Directory of style images")->required();
  stylize->add_option("-o,--out", y_out, "Output directory")->required();
  stylize->add_option("--strength", y_strength, "Stylization strength in [0, 1]");
  stylize->add_option("--stylizer", y_id, "Registered stylizer");

  // ablate
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate an ablation grid");
  std::vector<std::string> a_eval;
  std::string a_axes = "INW,224B", a_work = "ablation", a_out;
  ablate->add_option("--eval", a_eval, "Evaluation manifest (repeatable; default: the validation manifest)");
  ablate->add_option("--axes", a_axes, "Comma-separated axes among INW and 224B");
  ablate->add_option("--work-dir", a_work, "Directory for runs (reused when present)");
  ablate->add_option("-o,--out", a_out, "Write the table as JSON here");

  // compare
  auto* compare = app.add_subcommand("compare", "Compare two evaluation reports");
  std::string k_a, k_b;
  bool k_json = false;
  compare->add_option("a", k_a, "Reference report")->required();
  compare->add_option("b", k_b, "Report compared against the reference")->required();
  compare->add_flag("--json", k_json, "Print the diff as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  int min_level = g.verbose ? 0 : g.quiet ? 2 : 1;
  emo_set_log_level(min_level);
  emo_set_log_callback(log_to_stderr, &min_level);

  try {
    if (g.device != "cpu") usage_error("device '" + g.device + "' is not available; only 'cpu' is supported");

    if (*convert) {
      json o{{"format", c_format}, {"input", c_input}, {"images_root", c_root}, {"split", c_split},
             {"source_tag", c_tag}, {"output", c_out}};
      if (!c_scale.empty()) o["vad_scale"] = c_scale;
      const std::string s = o.dump();
      const json r = call([&](char** out) { return emo_convert(s.c_str(), out); });
      std::printf("wrote %s: %zu images, %zu persons\n", c_out.c_str(), r.at("images").get<std::size_t>(),
                  r.at("persons").get<std::size_t>());
    } else if (*synth) {
      json o{{"output", s_out}, {"n_images", s_images}, {"width", s_size}, {"height", s_size},
             {"n_classes", s_classes}, {"second_person_prob", s_second}, {"split", s_split},
             {"source_tag", s_tag}, {"seed", g.seed >= 0 ? g.seed : 0}};
      const std::string s = o.dump();
      const json r = call([&](char** out) { return emo_synthesize(s.c_str(), out); });
      std::printf("wrote %s: %zu images, %zu persons\n", r.at("manifest").get<std::string>().c_str(),
                  r.at("images").get<std::size_t>(), r.at("persons").get<std::size_t>());
    } else if (*fetch) {
      if (f_random == !f_source.empty()) usage_error("fetch-weights needs exactly one of --from and --random");
      json o{{"backbone", f_backbone}, {"scheme", f_scheme}, {"weights_dir", f_dir}, {"random", f_random},
             {"width", f_width}, {"seed", g.seed >= 0 ? g.seed : 0}};
      if (!f_source.empty()) o["source"] = f_source;
      const std::string s = o.dump();
      const json r = call([&](char** out) { return emo_fetch_weights(s.c_str(), out); });
      std::printf("installed %s\n", r.at("path").get<std::string>().c_str());
    } else if (*train) {
      const auto cfg = resolve_config(g, {{"train_manifest", t_train},
                                          {"val_manifest", t_val},
                                          {"epochs", t_epochs > 0 ? std::to_string(t_epochs) : ""}});
      const json r = call([&](char** out) { return emo_train(cfg.text.c_str(), nullptr, t_out.c_str(), out); });
      const json& best = r.at("best_val_mean_ap");
      std::printf("best epoch %d, val AP %s, checkpoint %s (%.1fs)\n", r.at("best_epoch").get<int>(),
                  best.is_null() ? "n/a" : fmt("%.2f", 100.0 * best.get<double>()).c_str(),
                  r.at("checkpoint").get<std::string>().c_str(), r.at("wall_clock_seconds").get<double>());
    } else if (*evaluate) {
      json o{{"predominant_only", e_pred}, {"workers", g.workers}};
      if (!e_out.empty()) o["output"] = e_out;
      const std::string s = o.dump();
      const json r = call([&](char** out) { return emo_evaluate(e_ckpt.c_str(), e_manifest.c_str(), s.c_str(), out); });
      if (e_json) {
        std::printf("%s\n", r.dump(2).c_str());
      } else {
        print_report(r);
      }
    } else if (*predict) {
      emo_model* model = nullptr;
      {
        const emo_status s = emo_model_load(p_ckpt.c_str(), &model);
        if (s != EMO_OK) {
          std::fprintf(stderr, "emoart: %s: %s\n", emo_status_name(s), emo_last_error());
          return exit_code(s);
        }
      }
      std::unique_ptr<emo_model, decltype(&emo_model_free)> holder(model, emo_model_free);
      if (!p_manifest.empty()) {
        const json r = call([&](char** out) { return emo_predict_manifest(model, p_manifest.c_str(), g.workers, out); });
        std::printf("%s\n", r.dump(2).c_str());
      } else {
        if (p_image.empty() || p_bbox.size() != 4) usage_error("predict needs --image and --bbox, or --manifest");
        double scores[EMO_NUM_CATEGORIES], vad[EMO_NUM_VAD];
        const emo_status s = emo_predict(model, p_image.c_str(), p_bbox.data(), scores, vad);
        if (s != EMO_OK) {
          std::fprintf(stderr, "emoart: %s: %s\n", emo_status_name(s), emo_last_error());
          return exit_code(s);
        }
        const json info = call([&](char** out) { return emo_model_info(model, out); });
        const auto names = info.at("categories").get<std::vector<std::string>>();
        std::vector<int> order(EMO_NUM_CATEGORIES);
        for (int i = 0; i < EMO_NUM_CATEGORIES; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return scores[a] > scores[b]; });
        for (int i = 0; i < std::min(p_top, EMO_NUM_CATEGORIES); ++i) {
          std::printf("%-18s %.4f\n", names[order[i]].c_str(), scores[order[i]]);
        }
        std::printf("valence %.3f  arousal %.3f  dominance %.3f\n", vad[0], vad[1], vad[2]);
      }
    } else if (*stylize) {
      json o{{"manifest", y_manifest}, {"styles", y_styles}, {"output", y_out}, {"strength", y_strength},
             {"stylizer", y_id}, {"workers", g.workers}, {"seed", g.seed >= 0 ? g.seed : 0}};
      const std::string s = o.dump();
      const json r = call([&](char** out) { return emo_stylize(s.c_str(), out); });
      std::printf("wrote %s (%s): %zu images, %zu stylized, %zu resumed\n",
                  r.at("manifest").get<std::string>().c_str(), r.at("source_tag").get<std::string>().c_str(),
                  r.at("images").get<std::size_t>(), r.at("processed").get<std::size_t>(),
                  r.at("resumed").get<std::size_t>());
    } else if (*ablate) {
      const auto cfg = resolve_config(g, {});
      json axes = json::array();
      std::stringstream ss(a_axes);
      for (std::string a; std::getline(ss, a, ',');) {
        if (!a.empty()) axes.push_back(a);
      }
      json o{{"axes", axes}, {"eval", a_eval}, {"work_dir", a_work}, {"workers", g.workers}};
      const std::string s = o.dump();
      const json r = call([&](char** out) { return emo_ablate(cfg.text.c_str(), nullptr, s.c_str(), out); });
      std::printf("%s", r.at("text").get<std::string>().c_str());
      if (!a_out.empty()) write_file(a_out, r.dump(2) + "\n");
      for (const auto& row : r.at("rows")) {
        if (!row.at("error").is_null()) return kExitRuntime;
      }
    } else if (*compare) {
      const json r = call([&](char** out) { return emo_compare(k_a.c_str(), k_b.c_str(), out); });
      if (k_json) {
        std::printf("%s\n", r.dump(2).c_str());
      } else {
        std::printf("%s -> %s\n", r.at("a").get<std::string>().c_str(), r.at("b").get<std::string>().c_str());
        std::printf("%-28s %10s %10s %10s\n", "metric", "a", "b", "delta");
        for (const auto& e : r.at("entries")) {
          const std::string m = e.at("metric").get<std::string>();
          const double scale = m.rfind("ap", 0) == 0 || m == "mean_ap" ? 100.0 : 1.0;
          auto cell = [&](const json& v, const char* f) {
            return v.is_null() ? std::string("n/a") : fmt(f, scale * v.get<double>());
          };
          std::printf("%-28s %10s %10s %10s %s\n", (m + (e.at("direction") == "up" ? " ↑" : " ↓")).c_str(),
                      cell(e.at("a"), "%.2f").c_str(), cell(e.at("b"), "%.2f").c_str(),
                      cell(e.at("delta"), "%+.2f").c_str(), scale == 100.0 ? "(AP %)" : "");
        }
      }
    }
  } catch (const Failure& f) {
    return f.code;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "emoart: unexpected library output: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitOk;
}
