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

#include <gtest/gtest.h>

#include "emoart/checkpoint.hpp"
#include "emoart/convert.hpp"
#include "emoart/error.hpp"
#include "emoart/model.hpp"
#include "emoart/synthetic.hpp"
#include "test_util.hpp"

namespace emoart {
namespace {

using testing::random_tensor;
using testing::TempDir;

ModelConfig small_config() {
  ModelConfig c;
  c.trunk_width = 8;
  c.context_side = 64;
  c.init = InitMode::kRandom;
  return c;
}

std::map<std::string, const Tensor*> state_map(const EmotionModel& m) {
  std::map<std::string, const Tensor*> out;
  for (const auto& [name, t] : m.named_state()) out[name] = t;
  return out;
}

bool tensors_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

TEST(EmotionModel, ParameterCountsOfStandardConfigurations) {
  ModelConfig c;
  c.init = InitMode::kRandom;
  EXPECT_EQ(EmotionModel::build_empty(c)->parameter_count(), 22622877u);
  c.body_backbone = Backbone::kResNet50;
  c.context_backbone = Backbone::kResNet50;
  EXPECT_EQ(EmotionModel::build_empty(c)->parameter_count(), 48072349u);
}

TEST(EmotionModel, ParameterNamesArePrefixed) {
  auto m = EmotionModel::build(small_config(), 1);
  std::size_t body = 0, context = 0, head = 0;
  for (const auto* p : m->parameters().params) {
    if (p->name.rfind("body.", 0) == 0) ++body;
    else if (p->name.rfind("context.", 0) == 0) ++context;
    else if (p->name.rfind("head.", 0) == 0) ++head;
    else ADD_FAILURE() << p->name;
  }
  EXPECT_EQ(body, context);
  EXPECT_EQ(head, 6u);
}

TEST(EmotionModel, OutputShapesForBatchSizes) {
  auto m = EmotionModel::build(small_config(), 2);
  for (int b : {1, 2, 7, 32}) {
    const auto out = m->infer(random_tensor({b, 128, 128, 3}, b, 1.0f), random_tensor({b, 64, 64, 3}, b + 1, 1.0f));
    EXPECT_EQ(out.scores.shape(), (std::vector<int>{b, 26}));
    EXPECT_EQ(out.vad.shape(), (std::vector<int>{b, 3}));
    EXPECT_EQ(out.batch(), std::size_t(b));
  }
}

TEST(EmotionModel, RowsAreIndependentInInference) {
  auto m = EmotionModel::build(small_config(), 3);
  const Tensor body = random_tensor({1, 128, 128, 3}, 4, 1.0f);
  const Tensor ctx = random_tensor({1, 64, 64, 3}, 5, 1.0f);
  const Tensor other_body = random_tensor({1, 128, 128, 3}, 6, 1.0f);
  const Tensor other_ctx = random_tensor({1, 64, 64, 3}, 7, 1.0f);
  const std::vector<Tensor> bs{body.slice0(0), other_body.slice0(0), body.slice0(0)};
  const std::vector<Tensor> cs{ctx.slice0(0), other_ctx.slice0(0), ctx.slice0(0)};
  const auto batched = m->infer(Tensor::stack(bs), Tensor::stack(cs));
  const auto single = m->infer(body, ctx);
  const auto r0 = batched.row(0), r2 = batched.row(2), s = single.row(0);
  for (std::size_t k = 0; k < kNumCategories; ++k) {
    EXPECT_EQ(r0.discrete_scores[k], r2.discrete_scores[k]);
    EXPECT_NEAR(r0.discrete_scores[k], s.discrete_scores[k], 1e-5);
  }
  for (int d = 0; d < 3; ++d) EXPECT_NEAR(r0.vad[d], s.vad[d], 1e-5);
}

TEST(EmotionModel, RejectsWrongInputSides) {
  auto m = EmotionModel::build(small_config(), 3);
  EXPECT_THROW(m->infer(random_tensor({1, 96, 96, 3}, 1), random_tensor({1, 64, 64, 3}, 2)), Error);
  EXPECT_THROW(m->infer(random_tensor({1, 128, 128, 3}, 1), random_tensor({2, 64, 64, 3}, 2)), Error);
}

TEST(EmotionModel, SeedDeterminesInitialization) {
  auto a = EmotionModel::build(small_config(), 9);
  auto b = EmotionModel::build(small_config(), 9);
  auto c = EmotionModel::build(small_config(), 10);
  const auto sa = state_map(*a), sb = state_map(*b), sc = state_map(*c);
  bool any_diff = false;
  for (const auto& [name, t] : sa) {
    EXPECT_TRUE(tensors_equal(*t, *sb.at(name))) << name;
    any_diff |= !tensors_equal(*t, *sc.at(name));
  }
  EXPECT_TRUE(any_diff);
}

TEST(EmotionModel, TrainingBackwardMatchesFiniteDifferences) {
  auto m = EmotionModel::build(small_config(), 4);
  const Tensor body = random_tensor({3, 128, 128, 3}, 1, 1.0f);
  const Tensor ctx = random_tensor({3, 64, 64, 3}, 2, 1.0f);
  const Tensor ws = random_tensor({3, 26}, 3, 1.0f);
  const Tensor wv = random_tensor({3, 3}, 4, 1.0f);
  auto objective = [&] {
    const auto out = m->forward_train(body, ctx, 77);
    double s = 0;
    for (std::size_t i = 0; i < out.scores.numel(); ++i) s += double(out.scores[i]) * ws[i];
    for (std::size_t i = 0; i < out.vad.numel(); ++i) s += double(out.vad[i]) * wv[i];
    return s;
  };
  m->zero_grad();
  objective();
  m->backward(ws, wv);
  auto params = m->parameters().params;
  for (const char* wanted : {"head.fuse.weight", "head.discrete.bias", "head.continuous.weight", "body.layer2.0.conv1.weight",
                             "context.layer4.0.bn1.weight"}) {
    nn::Parameter* p = nullptr;
    for (auto* q : params) {
      if (q->name == wanted) p = q;
    }
    ASSERT_NE(p, nullptr) << wanted;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < p->value.numel(); i += std::max<std::size_t>(1, p->value.numel() / 10)) {
      const float keep = p->value[i];
      p->value[i] = keep + 1e-3f;
      const double fp = objective();
      p->value[i] = keep - 1e-3f;
      const double fm = objective();
      p->value[i] = keep;
      const double fd = (fp - fm) / 2e-3;
      num += (fd - p->grad[i]) * (fd - p->grad[i]);
      den += std::max(fd * fd, double(p->grad[i]) * p->grad[i]);
    }
    EXPECT_LT(std::sqrt(num / std::max(den, 1e-30)), 5e-2) << wanted;
  }
}

TEST(EmotionModel, FrozenTrunksReceiveNoGradient) {
  auto m = EmotionModel::build(small_config(), 4);
  m->set_trunks_trainable(false);
  m->zero_grad();
  m->forward_train(random_tensor({2, 128, 128, 3}, 1), random_tensor({2, 64, 64, 3}, 2), 1);
  m->backward(Tensor({2, 26}, 1.0f), Tensor({2, 3}, 1.0f));
  for (const auto* p : m->parameters().params) {
    double g = 0;
    for (float v : p->grad.values()) g += std::abs(v);
    if (p->name.rfind("head.", 0) == 0) {
      EXPECT_GT(g, 0) << p->name;
    } else {
      EXPECT_EQ(g, 0) << p->name;
    }
  }
}

TEST(EmotionModel, UnknownBackboneAndBadConfigRejected) {
  std::map<std::string, std::string> kv{{"body_backbone", "vgg99"}};
  ModelConfig c = small_config();
  EXPECT_THROW(c.apply(kv), Error);
  c = small_config();
  c.fusion_hidden = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = small_config();
  c.dropout = 1.0;
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(EmotionModel, ConfigMapRoundTrip) {
  ModelConfig c = small_config();
  c.body_backbone = Backbone::kResNet50;
  c.context_pretraining = Pretraining::kObjectCentric;
  c.body_crop_side = 224;
  ModelConfig d;
  d.apply(c.to_map());
  EXPECT_EQ(c, d);
  EXPECT_TRUE(d.inw());
  EXPECT_TRUE(d.body_224());
}

class PretrainedTest : public ::testing::Test {
 protected:
  void SetUp() override {
    for (Backbone b : {Backbone::kResNet18, Backbone::kResNet50}) {
      write_random_trunk_weights(dir_.path(), b, Pretraining::kSceneCentric, 8, 100);
      write_random_trunk_weights(dir_.path(), b, Pretraining::kObjectCentric, 8, 200);
    }
  }
  ModelConfig config() const {
    ModelConfig c = small_config();
    c.init = InitMode::kPretrained;
    c.weights_dir = dir_.path();
    return c;
  }
  TempDir dir_{"weights"};
};

TEST_F(PretrainedTest, InwChangesOnlyContextInitialization) {
  ModelConfig base = config();
  ModelConfig inw = base;
  inw.context_pretraining = Pretraining::kObjectCentric;
  auto a = EmotionModel::build(base, 5);
  auto b = EmotionModel::build(inw, 5);
  const auto sa = state_map(*a), sb = state_map(*b);
  ASSERT_EQ(sa.size(), sb.size());
  std::size_t context_diff = 0;
  for (const auto& [name, t] : sa) {
    ASSERT_TRUE(sb.count(name)) << name;
    ASSERT_EQ(t->shape(), sb.at(name)->shape()) << name;
    const bool same = tensors_equal(*t, *sb.at(name));
    if (name.rfind("context.", 0) == 0) {
      context_diff += !same;
    } else {
      EXPECT_TRUE(same) << name;
    }
  }
  EXPECT_GT(context_diff, 0u);
  EXPECT_EQ(a->parameter_count(), b->parameter_count());
}

TEST_F(PretrainedTest, Body224ChangesOnlyBodyInputSide) {
  ModelConfig base = config();
  ModelConfig big = base;
  big.body_crop_side = 224;
  auto a = EmotionModel::build(base, 6);
  auto b = EmotionModel::build(big, 6);
  const auto sa = state_map(*a), sb = state_map(*b);
  for (const auto& [name, t] : sa) EXPECT_TRUE(tensors_equal(*t, *sb.at(name))) << name;
  const Tensor ctx = random_tensor({1, 64, 64, 3}, 1);
  EXPECT_NO_THROW(b->infer(random_tensor({1, 224, 224, 3}, 2), ctx));
  EXPECT_THROW(b->infer(random_tensor({1, 128, 128, 3}, 2), ctx), Error);
}

TEST_F(PretrainedTest, ResNet50ObjectCentric224Builds) {
  ModelConfig c = config();
  c.body_backbone = Backbone::kResNet50;
  c.context_backbone = Backbone::kResNet50;
  c.context_pretraining = Pretraining::kObjectCentric;
  c.body_crop_side = 224;
  auto m = EmotionModel::build(c, 7);
  EXPECT_EQ(m->body_feature_dim(), 256);
  const auto out = m->infer(random_tensor({2, 224, 224, 3}, 1), random_tensor({2, 64, 64, 3}, 2));
  EXPECT_EQ(out.scores.shape(), (std::vector<int>{2, 26}));
}

TEST_F(PretrainedTest, MissingWeightFileFallsBackToRandomInit) {
  ModelConfig c = config();
  c.trunk_width = 16;
  ModelConfig r = c;
  r.init = InitMode::kRandom;
  auto a = EmotionModel::build(c, 1), b = EmotionModel::build(r, 1);
  const auto sa = a->named_state(), sb = b->named_state();
  ASSERT_EQ(sa.size(), sb.size());
  for (std::size_t i = 0; i < sa.size(); ++i) EXPECT_EQ(max_abs_diff(*sa[i].second, *sb[i].second), 0.0) << sa[i].first;
}

TEST_F(PretrainedTest, MismatchedWeightFileIsAnError) {
  ModelConfig c = config();
  c.trunk_width = 16;
  std::filesystem::copy_file(c.weights_dir / backbone_weight_filename(Backbone::kResNet18, Pretraining::kObjectCentric, 8),
                             c.weights_dir / backbone_weight_filename(Backbone::kResNet18, Pretraining::kObjectCentric, 16));
  EXPECT_THROW(EmotionModel::build(c, 1), ValidationError);
}

TEST(Predict, BatchedMatchesLoopedAndCheckpointRoundTrip) {
  TempDir dir("predict");
  SyntheticSpec spec;
  spec.n_images = 10;
  spec.second_person_prob = 0.5;
  spec.seed = 3;
  const DatasetManifest m = generate_synthetic_dataset(spec, dir / "data");
  auto model = EmotionModel::build(small_config(), 8);
  const Normalization norm = compute_normalization(m);
  const auto samples = enumerate_samples(m);
  const auto batched = predict_samples(*model, m, samples, norm, 4);
  const auto other = predict_samples(*model, m, samples, norm, 3);
  ASSERT_EQ(batched.size(), samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& rec = m.records[samples[i].record];
    const auto one = predict(*model, m, rec, rec.persons[samples[i].person], norm);
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      EXPECT_NEAR(batched[i].discrete_scores[k], one.discrete_scores[k], 1e-5);
      EXPECT_NEAR(batched[i].discrete_scores[k], other[i].discrete_scores[k], 1e-5);
    }
  }

  save_checkpoint(dir / "m.ckpt", *model, m.categories, norm, LossWeights{}, "abc", {});
  const Checkpoint ck = load_checkpoint(dir / "m.ckpt");
  EXPECT_EQ(ck.model->config(), model->config());
  EXPECT_EQ(ck.normalization, norm);
  EXPECT_EQ(ck.config_hash, "abc");
  const auto reloaded = predict_samples(*ck.model, m, samples, norm, 4);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    for (std::size_t k = 0; k < kNumCategories; ++k) {
      ASSERT_NEAR(reloaded[i].discrete_scores[k], batched[i].discrete_scores[k], 1e-6);
    }
  }
}

}  // namespace
}  // namespace emoart
