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

#include <cmath>
#include <fstream>

#include <gtest/gtest.h>

#include "emoart/config.hpp"
#include "emoart/convert.hpp"
#include "emoart/error.hpp"
#include "emoart/harness.hpp"
#include "emoart/synthetic.hpp"
#include "test_util.hpp"

namespace emoart {
namespace {

using testing::random_image;
using testing::TempDir;

TEST(Config, ParsesCommentsPathsAndTypes) {
  const TrainConfig c = parse_config_text(
      "# comment\n"
      "epochs = 3   # trailing\n"
      "learning_rate=0.05\n"
      "lr_schedule = constant\n"
      "body_backbone = resnet50\n"
      "context_pretraining = object_centric\n"
      "body_crop_side = 224\n"
      "train_manifest = data/train.jsonl\n"
      "augment = false\n",
      "/base");
  EXPECT_EQ(c.epochs, 3);
  EXPECT_DOUBLE_EQ(c.learning_rate, 0.05);
  EXPECT_EQ(c.lr_schedule, LrSchedule::kConstant);
  EXPECT_EQ(c.model.body_backbone, Backbone::kResNet50);
  EXPECT_TRUE(c.model.inw());
  EXPECT_TRUE(c.model.body_224());
  EXPECT_FALSE(c.augment);
  EXPECT_EQ(c.train_manifest, std::filesystem::path("/base/data/train.jsonl"));
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(parse_config_text("epochs = 3\nepochs = 4\n"), ValidationError);
  EXPECT_THROW(parse_config_text("no_such_key = 1\n"), ValidationError);
  EXPECT_THROW(parse_config_text("epochs 3\n"), ValidationError);
  EXPECT_THROW(parse_config_text("epochs = three\n"), ValidationError);
  EXPECT_THROW(parse_config_text("learning_rate = -1\n").validate(), ValidationError);
  EXPECT_THROW(parse_config_text("lr_schedule = cosine\n"), ValidationError);
  EXPECT_THROW(parse_config_text("grad_clip_norm = -1\n").validate(), ValidationError);
}

TEST(Config, TextRoundTripAndHash) {
  TrainConfig c;
  c.epochs = 5;
  c.model.trunk_width = 16;
  c.grad_clip_norm = 2.5;
  c.train_manifest = "/data/train.jsonl";
  const TrainConfig back = parse_config_text(config_to_text(c));
  EXPECT_EQ(back, c);
  EXPECT_EQ(config_hash(back), config_hash(c));
  EXPECT_EQ(config_hash(c).size(), 16u);

  TrainConfig d = c;
  d.workers = 8;
  d.cache_mb = 1;
  EXPECT_EQ(config_hash(d), config_hash(c));
  d.learning_rate = 0.02;
  EXPECT_NE(config_hash(d), config_hash(c));
  TrainConfig e = c;
  e.model.context_pretraining = Pretraining::kObjectCentric;
  EXPECT_NE(config_hash(e), config_hash(c));
  TrainConfig f = c;
  f.train_manifest = "/data/./sub/../train.jsonl";
  EXPECT_EQ(config_hash(f), config_hash(c));
}

TEST(Config, OverridesAndSchedule) {
  const auto kv = parse_overrides("epochs=2\nlearning_rate = 0.1");
  EXPECT_EQ(kv.at("epochs"), "2");
  EXPECT_EQ(kv.at("learning_rate"), "0.1");
  TrainConfig c;
  c.apply(kv);
  EXPECT_EQ(c.epochs, 2);
  EXPECT_THROW(c.apply({{"bogus", "1"}}), ValidationError);

  c.learning_rate = 0.01;
  c.lr_step = 7;
  c.lr_gamma = 0.1;
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 1), 0.01);
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 7), 0.01);
  EXPECT_NEAR(learning_rate_at(c, 8), 0.001, 1e-15);
  EXPECT_NEAR(learning_rate_at(c, 15), 0.0001, 1e-15);
  c.lr_schedule = LrSchedule::kConstant;
  EXPECT_DOUBLE_EQ(learning_rate_at(c, 20), 0.01);
}

class TrainTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir("harness");
    SyntheticSpec spec;
    spec.n_images = 12;
    spec.width = 64;
    spec.height = 64;
    spec.seed = 1;
    generate_synthetic_dataset(spec, dir() / "train");
    spec.n_images = 8;
    spec.seed = 2;
    spec.split = Split::kVal;
    generate_synthetic_dataset(spec, dir() / "val");
  }
  static void TearDownTestSuite() { delete dir_; }
  static std::filesystem::path dir() { return dir_->path(); }

  static TrainConfig config() {
    TrainConfig c;
    c.model.trunk_width = 4;
    c.model.context_side = 32;
    c.model.init = InitMode::kRandom;
    c.epochs = 2;
    c.batch_size = 4;
    c.lr_schedule = LrSchedule::kConstant;
    c.seed = 5;
    c.train_manifest = dir() / "train" / "manifest.jsonl";
    c.val_manifest = dir() / "val" / "manifest.jsonl";
    return c;
  }

  static TempDir* dir_;
};

TempDir* TrainTest::dir_ = nullptr;

TEST_F(TrainTest, WritesArtifactsAndKeepsBestEpoch) {
  std::vector<int> seen;
  const TrainResult r = train(config(), dir() / "run", [&](const EpochRecord& e) { seen.push_back(e.epoch); });
  EXPECT_EQ(seen, (std::vector<int>{1, 2}));
  ASSERT_EQ(r.record.epochs.size(), 2u);
  EXPECT_TRUE(std::filesystem::exists(dir() / "run" / std::string(kBestCheckpointName)));
  EXPECT_TRUE(std::filesystem::exists(dir() / "run" / std::string(kResolvedConfigName)));
  EXPECT_EQ(r.record.config_hash, config_hash(config()));
  EXPECT_EQ(r.checkpoint.config_hash, r.record.config_hash);

  double best = -1;
  int best_epoch = 0;
  for (const auto& e : r.record.epochs) {
    EXPECT_TRUE(std::isfinite(e.train_loss));
    if (e.val_mean_ap > best) {
      best = e.val_mean_ap;
      best_epoch = e.epoch;
    }
  }
  EXPECT_EQ(r.record.best_epoch, best_epoch);
  EXPECT_DOUBLE_EQ(r.record.best_val_mean_ap, best);

  const MetricsReport rep = evaluate(dir() / "run" / std::string(kBestCheckpointName), config().val_manifest);
  EXPECT_NEAR(rep.mean_ap, best, 1e-9);
  const MetricsReport rep2 = evaluate(r.checkpoint, parse_manifest(config().val_manifest));
  EXPECT_EQ(rep, rep2);

  std::ifstream in(dir() / "run" / std::string(kRunRecordName));
  const RunRecord reread = run_record_from_json(nlohmann::json::parse(in));
  EXPECT_EQ(reread.best_epoch, r.record.best_epoch);
  EXPECT_EQ(reread.epochs.size(), 2u);
}

TEST_F(TrainTest, SameSeedReproducesRun) {
  TrainConfig c = config();
  c.epochs = 1;
  const TrainResult a = train(c, dir() / "det_a");
  const TrainResult b = train(c, dir() / "det_b");
  EXPECT_NEAR(a.record.epochs[0].train_loss, b.record.epochs[0].train_loss, 1e-4);
  EXPECT_NEAR(a.record.epochs[0].val_mean_ap, b.record.epochs[0].val_mean_ap, 1e-4);
  const auto sa = a.checkpoint.model->named_state();
  const auto sb = b.checkpoint.model->named_state();
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) {
    for (std::size_t k = 0; k < sa[i].second->numel(); ++k) {
      ASSERT_NEAR((*sa[i].second)[k], (*sb[i].second)[k], 1e-4) << sa[i].first;
    }
  }
  c.seed = 6;
  const TrainResult d = train(c, dir() / "det_c");
  EXPECT_NE(d.record.config_hash, a.record.config_hash);
  EXPECT_NE(a.record.epochs[0].train_loss, d.record.epochs[0].train_loss);
}

TEST_F(TrainTest, CheckpointRoundTrip) {
  TrainConfig c = config();
  c.epochs = 1;
  const TrainResult r = train(c, dir() / "rt");
  const Checkpoint back = load_checkpoint(dir() / "rt" / std::string(kBestCheckpointName));
  EXPECT_EQ(back.categories, r.checkpoint.categories);
  EXPECT_EQ(back.normalization, r.checkpoint.normalization);
  EXPECT_EQ(back.loss_weights.category_weights, r.checkpoint.loss_weights.category_weights);
  const auto sa = back.model->named_state();
  const auto sb = r.checkpoint.model->named_state();
  for (std::size_t i = 0; i < sa.size(); ++i) {
    for (std::size_t k = 0; k < sa[i].second->numel(); ++k) {
      ASSERT_NEAR((*sa[i].second)[k], (*sb[i].second)[k], 1e-6);
    }
  }
  std::ofstream(dir() / "rt" / "broken.ckpt") << "not a checkpoint";
  EXPECT_THROW(load_checkpoint(dir() / "rt" / "broken.ckpt"), Error);
  EXPECT_THROW(load_checkpoint(dir() / "rt" / "absent.ckpt"), IoError);
}

TEST_F(TrainTest, CategorySetMismatchRejected) {
  TrainConfig c = config();
  c.epochs = 1;
  const TrainResult r = train(c, dir() / "mm");
  DatasetManifest m = parse_manifest(c.val_manifest);
  m.categories.pop_back();
  EXPECT_THROW(evaluate(r.checkpoint, m), ValidationError);

  write_manifest(m, dir() / "val" / "manifest25.jsonl");
  c.val_manifest = dir() / "val" / "manifest25.jsonl";
  EXPECT_THROW(train(c, dir() / "mm2"), ValidationError);
}

TEST_F(TrainTest, DivergenceIsReported) {
  TrainConfig c = config();
  c.learning_rate = 1e12;
  c.momentum = 0;
  c.epochs = 3;
  try {
    train(c, dir() / "div");
    FAIL() << "expected divergence";
  } catch (const DivergenceError& e) {
    EXPECT_GE(e.epoch(), 1);
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Ablation, RendersSignedDeltas) {
  MetricsReport a, b;
  a.mean_ap = 0.25;
  a.mean_vad_error = 1.0;
  b.mean_ap = 0.3;
  b.mean_vad_error = 1.0 - 1e-4;
  AblationTable t;
  t.eval_tags = {"X"};
  t.rows.resize(2);
  t.rows[0].model = t.rows[1].model = "ResNet-18";
  t.rows[1].inw = true;
  t.rows[0].reports = {a};
  t.rows[1].reports = {b};
  t.deltas = {{compare_reports(a, a)}, {compare_reports(a, b)}};
  const std::string text = render_ablation_table(t);
  EXPECT_NE(text.find("+5.00"), std::string::npos) << text;
  EXPECT_NE(text.find("+0.00"), std::string::npos) << text;
  EXPECT_EQ(text.find("-0.00"), std::string::npos) << text;
}

TEST_F(TrainTest, GradientClippingBoundsTheStep) {
  TrainConfig c = config();
  c.learning_rate = 1e12;
  c.momentum = 0;
  c.epochs = 2;
  c.grad_clip_norm = 1e-13;
  const TrainResult r = train(c, dir() / "clip");
  for (const EpochRecord& e : r.record.epochs) {
    EXPECT_TRUE(std::isfinite(e.train_loss));
    EXPECT_TRUE(std::isfinite(e.val_mean_vad_error));
  }
}

TEST_F(TrainTest, AblationGridAndCaching) {
  TrainConfig base = config();
  base.epochs = 1;
  const std::vector<AblationAxis> none;
  EXPECT_EQ(ablation_grid(base, none).size(), 1u);

  const std::vector<AblationAxis> axes{parse_ablation_axis("inw"), parse_ablation_axis("224B")};
  const auto grid = ablation_grid(base, axes);
  ASSERT_EQ(grid.size(), 4u);
  EXPECT_FALSE(grid[0].model.inw());
  EXPECT_FALSE(grid[0].model.body_224());
  EXPECT_TRUE(grid[1].model.inw());
  EXPECT_FALSE(grid[1].model.body_224());
  EXPECT_FALSE(grid[2].model.inw());
  EXPECT_TRUE(grid[2].model.body_224());
  EXPECT_TRUE(grid[3].model.inw() && grid[3].model.body_224());
  EXPECT_THROW(parse_ablation_axis("dropout"), ValidationError);

  // Random init has no weight files, so only the body side varies here.
  const std::vector<AblationAxis> one{AblationAxis::kBody224};
  const auto small = ablation_grid(base, one);
  const std::vector<std::filesystem::path> evals{base.val_manifest};
  const AblationTable t1 = run_ablation(small, evals, dir() / "abl");
  ASSERT_EQ(t1.rows.size(), 2u);
  for (const auto& row : t1.rows) {
    EXPECT_TRUE(row.error.empty()) << row.error;
    ASSERT_TRUE(row.reports[0].has_value());
  }
  const auto stamp = std::filesystem::last_write_time(dir() / "abl" / "runs" / t1.rows[0].config_hash /
                                                      std::string(kBestCheckpointName));
  const AblationTable t2 = run_ablation(small, evals, dir() / "abl");
  EXPECT_EQ(std::filesystem::last_write_time(dir() / "abl" / "runs" / t1.rows[0].config_hash /
                                             std::string(kBestCheckpointName)),
            stamp);
  for (std::size_t r = 0; r < 2; ++r) EXPECT_EQ(*t1.rows[r].reports[0], *t2.rows[r].reports[0]);
  EXPECT_EQ(render_ablation_table(t1), render_ablation_table(t2));
  ASSERT_TRUE(t1.deltas[0][0].has_value());
  EXPECT_EQ(*t1.deltas[0][0]->find("mean_ap")->delta, 0.0);

  // A broken cell is reported, not thrown.
  std::vector<TrainConfig> bad = small;
  bad[1].learning_rate = 1e12;
  bad[1].momentum = 0;
  const AblationTable t3 = run_ablation(bad, evals, dir() / "abl");
  EXPECT_TRUE(t3.rows[0].error.empty());
  EXPECT_FALSE(t3.rows[1].error.empty());
  EXPECT_NE(render_ablation_table(t3).find(t3.rows[1].error.substr(0, 20)), std::string::npos);
}

TEST(Convert, EmoticCsv) {
  TempDir dir("convert");
  std::filesystem::create_directories(dir / "imgs" / "mscoco");
  save_image(random_image(80, 60, 1), dir / "imgs" / "mscoco" / "a.jpg");
  save_image(random_image(50, 40, 2), dir / "imgs" / "mscoco" / "b.png");
  std::ofstream(dir / "ann.csv") << "Folder,Filename,BBox,Categorical_Labels,Continuous_Labels\n"
                                    "mscoco,a.jpg,\"[1, 2, 30, 40]\",\"['Peace', 'Happiness']\",\"[6, 4, 5]\"\n"
                                    "mscoco,b.png,\"[0, 0, 50, 40]\",\"['Anger']\",\"[2, 9, 7]\"\n"
                                    "mscoco,a.jpg,\"[40, 10, 81, 60]\",\"['Fear']\",\"[3, 8, 2]\"\n";
  ConvertOptions opt;
  opt.images_root = dir / "imgs";
  const DatasetManifest m = convert_annotations(dir / "ann.csv", opt);
  ASSERT_EQ(m.records.size(), 2u);
  const ImageRecord& a = m.records[0];
  EXPECT_EQ(a.width, 80);
  EXPECT_EQ(a.height, 60);
  ASSERT_EQ(a.persons.size(), 2u);
  EXPECT_EQ(a.persons[0].categories, (std::vector<int>{*category_index("Peace"), *category_index("Happiness")}));
  EXPECT_EQ(a.persons[0].vad, (VadTriple{6, 4, 5}));
  EXPECT_DOUBLE_EQ(a.persons[1].bbox.x2, 80.0);  // clipped by one pixel
  EXPECT_EQ(m.records[1].persons[0].categories, (std::vector<int>{*category_index("Anger")}));

  std::ofstream(dir / "bad.csv") << "Folder,Filename,BBox,Categorical_Labels,Continuous_Labels\n"
                                    "mscoco,a.jpg,\"[1, 2, 30, 40]\",\"['Peace']\",\"[6, 4, 5]\"\n"
                                    "mscoco,b.png,\"[0, 0, 50, 40]\",\"['Joy']\",\"[2, 9, 7]\"\n";
  try {
    convert_annotations(dir / "bad.csv", opt);
    FAIL() << "expected a manifest error";
  } catch (const ManifestError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Convert, SimpleCsvAndQuoting) {
  TempDir dir("convert2");
  save_image(random_image(40, 40, 3), dir / "x.png");
  std::ofstream(dir / "s.csv") << "path,x1,y1,x2,y2,categories,valence,arousal,dominance\n"
                                  "x.png,0,0,20,20,Pleasure;Surprise,5,5,5\n";
  ConvertOptions opt;
  opt.format = "simple-csv";
  opt.images_root = dir.path();
  opt.source_tag = "ODOR-e";
  opt.split = Split::kTest;
  const DatasetManifest m = convert_annotations(dir / "s.csv", opt);
  EXPECT_EQ(m.source_tag, "ODOR-e");
  EXPECT_EQ(m.split, Split::kTest);
  EXPECT_EQ(m.records[0].persons[0].categories, (std::vector<int>{*category_index("Pleasure"), *category_index("Surprise")}));
  opt.format = "xml";
  EXPECT_THROW(convert_annotations(dir / "s.csv", opt), ValidationError);

  EXPECT_EQ(split_csv_line("a,\"b,c\",\"d \"\"q\"\"\",,e"),
            (std::vector<std::string>{"a", "b,c", "d \"q\"", "", "e"}));
}

TEST(Convert, TrunkWeightIngestion) {
  TempDir dir("weights");
  const auto src = write_random_trunk_weights(dir / "raw", Backbone::kResNet18, Pretraining::kSceneCentric, 4, 1);
  const auto dst = ingest_trunk_weights(src, dir / "w", Backbone::kResNet18, Pretraining::kObjectCentric);
  EXPECT_EQ(dst.filename().string(), backbone_weight_filename(Backbone::kResNet18, Pretraining::kObjectCentric, 4));
  EXPECT_THROW(ingest_trunk_weights(src, dir / "w", Backbone::kResNet50, Pretraining::kObjectCentric), ValidationError);
}

}  // namespace
}  // namespace emoart
