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

#ifndef EMOART_HARNESS_HPP
#define EMOART_HARNESS_HPP

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoart/checkpoint.hpp"
#include "emoart/config.hpp"
#include "emoart/metrics.hpp"

namespace emoart {

struct EpochRecord {
  int epoch = 0;  // 1-based
  double learning_rate = 0;
  double train_loss = 0;
  double train_discrete = 0;
  double train_continuous = 0;
  double val_mean_ap = 0;  // NaN when no category has a positive
  double val_mean_vad_error = 0;
  double seconds = 0;
};

struct RunRecord {
  std::string config_hash;
  std::map<std::string, std::string> config;  // resolved, defaults included
  std::vector<EpochRecord> epochs;
  int best_epoch = 0;
  double best_val_mean_ap = 0;
  double wall_clock_seconds = 0;
  std::filesystem::path checkpoint_path;
};

nlohmann::json run_record_to_json(const RunRecord& record);
RunRecord run_record_from_json(const nlohmann::json& j);

inline constexpr std::string_view kBestCheckpointName = "best.ckpt";
inline constexpr std::string_view kRunRecordName = "run_record.json";
inline constexpr std::string_view kResolvedConfigName = "config.txt";

struct TrainResult {
  Checkpoint checkpoint;  // the best epoch, as saved
  RunRecord record;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch SGD with momentum on the combined loss. Data order,
/// augmentation, dropout and initialization all derive from config.seed.
/// Writes best.ckpt (highest validation mean AP), run_record.json and the
/// resolved config into `out_dir`. A non-finite loss throws
/// DivergenceError naming the epoch and batch.
TrainResult train(const TrainConfig& config, const std::filesystem::path& out_dir,
                  const EpochCallback& on_epoch = {});

struct EvaluateOptions {
  bool predominant_only = false;
  std::size_t batch_size = 16;
  std::size_t workers = 1;
};

/// Predicts every person of `manifest` and scores the predictions. The
/// checkpoint's category list must equal the manifest's.
MetricsReport evaluate(const Checkpoint& checkpoint, const DatasetManifest& manifest,
                       const EvaluateOptions& options = {});
MetricsReport evaluate(const std::filesystem::path& checkpoint, const std::filesystem::path& manifest,
                       const EvaluateOptions& options = {});

// ---------------------------------------------------------------------------
// Ablations

enum class AblationAxis { kInw, kBody224 };

AblationAxis parse_ablation_axis(std::string_view name);
std::string_view ablation_axis_name(AblationAxis axis);

/// All 2^k combinations of the axes applied to `base`. Row order counts in
/// binary with the first axis as the lowest bit, so {INW, 224B} yields
/// baseline, INW, 224B, both.
std::vector<TrainConfig> ablation_grid(const TrainConfig& base, std::span<const AblationAxis> axes);

struct AblationRow {
  std::string model;  // "ResNet-50", or "ResNet-18/ResNet-50" for mixed trunks
  bool inw = false;
  bool body_224 = false;
  std::string config_hash;
  std::vector<std::optional<MetricsReport>> reports;  // one per evaluation set
  std::string error;  // empty when the cell succeeded
};

struct AblationTable {
  std::vector<std::string> eval_tags;
  std::vector<AblationRow> rows;
  // deltas[r][e]: row r against row 0 on evaluation set e.
  std::vector<std::vector<std::optional<ReportDiff>>> deltas;
};

/// Trains (or reuses runs cached under work_dir/runs/<config hash>) and
/// evaluates every grid entry. Failed cells are recorded, not thrown.
AblationTable run_ablation(const std::vector<TrainConfig>& grid,
                           const std::vector<std::filesystem::path>& eval_manifests,
                           const std::filesystem::path& work_dir, const EvaluateOptions& options = {});

/// Plain-text table: Model | INW | 224B | AP per set | VAD per set, AP in
/// percent, flags as check marks, followed by deltas against the first row.
std::string render_ablation_table(const AblationTable& table);
nlohmann::json ablation_to_json(const AblationTable& table);

}  // namespace emoart

#endif  // EMOART_HARNESS_HPP
