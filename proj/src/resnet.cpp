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

#include "emoart/resnet.hpp"

#include "emoart/error.hpp"

namespace emoart {

std::string_view backbone_name(Backbone backbone) {
  switch (backbone) {
    case Backbone::kResNet18: return "resnet18";
    case Backbone::kResNet50: return "resnet50";
  }
  return "resnet18";
}

Backbone parse_backbone(std::string_view name) {
  if (name == "resnet18") return Backbone::kResNet18;
  if (name == "resnet50") return Backbone::kResNet50;
  throw ValidationError("unknown backbone '" + std::string(name) + "' (expected resnet18 or resnet50)");
}

ResNetTrunk::Block::Block(bool bottleneck, int in_planes, int planes, int stride) {
  if (bottleneck) {
    out_planes_ = planes * 4;
    convs_.emplace_back(in_planes, planes, 1, 1, 0);
    convs_.emplace_back(planes, planes, 3, stride, 1);
    convs_.emplace_back(planes, out_planes_, 1, 1, 0);
    bns_.emplace_back(planes);
    bns_.emplace_back(planes);
    bns_.emplace_back(out_planes_);
  } else {
    out_planes_ = planes;
    convs_.emplace_back(in_planes, planes, 3, stride, 1);
    convs_.emplace_back(planes, planes, 3, 1, 1);
    bns_.emplace_back(planes);
    bns_.emplace_back(planes);
  }
  if (stride != 1 || in_planes != out_planes_) {
    has_downsample_ = true;
    ds_conv_ = nn::Conv2d(in_planes, out_planes_, 1, stride, 0);
    ds_bn_ = nn::BatchNorm2d(out_planes_);
  }
}

void ResNetTrunk::Block::init_random(Rng& rng) {
  for (auto& c : convs_) c.init_kaiming(rng);
  if (has_downsample_) ds_conv_.init_kaiming(rng);
}

void ResNetTrunk::Block::collect(nn::ParameterList& out, const std::string& prefix) {
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    const std::string idx = std::to_string(i + 1);
    convs_[i].collect(out, prefix + "conv" + idx + ".");
    bns_[i].collect(out, prefix + "bn" + idx + ".");
  }
  if (has_downsample_) {
    ds_conv_.collect(out, prefix + "downsample.0.");
    ds_bn_.collect(out, prefix + "downsample.1.");
  }
}

namespace {

void add_inplace(Tensor& a, const Tensor& b) {
  for (std::size_t i = 0; i < a.numel(); ++i) a[i] += b[i];
}

}  // namespace

Tensor ResNetTrunk::Block::infer(const Tensor& x) const {
  Tensor h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = bns_[i].infer(convs_[i].infer(h));
    if (i + 1 < convs_.size()) h = nn::relu(h);
  }
  if (has_downsample_) {
    add_inplace(h, ds_bn_.infer(ds_conv_.infer(x)));
  } else {
    add_inplace(h, x);
  }
  return nn::relu(h);
}

Tensor ResNetTrunk::Block::forward(const Tensor& x) {
  relu_out_.clear();
  Tensor h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = bns_[i].forward(convs_[i].forward(h));
    if (i + 1 < convs_.size()) {
      h = nn::relu(h);
      relu_out_.push_back(h);
    }
  }
  if (has_downsample_) {
    add_inplace(h, ds_bn_.forward(ds_conv_.forward(x)));
  } else {
    add_inplace(h, x);
  }
  out_ = nn::relu(h);
  return out_;
}

Tensor ResNetTrunk::Block::backward(const Tensor& dy) {
  Tensor g = nn::relu_backward(out_, dy);
  out_ = Tensor();
  Tensor d_shortcut = has_downsample_ ? ds_conv_.backward(ds_bn_.backward(g)) : g;
  Tensor gh = std::move(g);
  for (std::size_t i = convs_.size(); i-- > 0;) {
    if (i + 1 < convs_.size()) gh = nn::relu_backward(relu_out_[i], gh);
    gh = convs_[i].backward(bns_[i].backward(gh));
  }
  relu_out_.clear();
  add_inplace(gh, d_shortcut);
  return gh;
}

ResNetTrunk::ResNetTrunk(Backbone backbone, int width)
    : backbone_(backbone), width_(width), conv1_(3, width, 7, 2, 3), bn1_(width), maxpool_(3, 2, 1) {
  if (width < 1) throw ValidationError("trunk width must be positive");
  conv1_.set_input_grad(false);
  const bool bottleneck = backbone == Backbone::kResNet50;
  const std::vector<int> depths = bottleneck ? std::vector<int>{3, 4, 6, 3} : std::vector<int>{2, 2, 2, 2};
  int in_planes = width;
  for (std::size_t stage = 0; stage < depths.size(); ++stage) {
    const int planes = width << stage;
    std::vector<Block> blocks;
    for (int b = 0; b < depths[stage]; ++b) {
      const int stride = (b == 0 && stage > 0) ? 2 : 1;
      blocks.emplace_back(bottleneck, in_planes, planes, stride);
      in_planes = blocks.back().out_planes();
    }
    layers_.push_back(std::move(blocks));
  }
  feature_dim_ = in_planes;
}

void ResNetTrunk::init_random(Rng& rng) {
  conv1_.init_kaiming(rng);
  for (auto& stage : layers_) {
    for (auto& block : stage) block.init_random(rng);
  }
}

void ResNetTrunk::collect(nn::ParameterList& out, const std::string& prefix) {
  conv1_.collect(out, prefix + "conv1.");
  bn1_.collect(out, prefix + "bn1.");
  for (std::size_t s = 0; s < layers_.size(); ++s) {
    for (std::size_t b = 0; b < layers_[s].size(); ++b) {
      layers_[s][b].collect(out, prefix + "layer" + std::to_string(s + 1) + "." + std::to_string(b) + ".");
    }
  }
}

namespace {

void check_input(const Tensor& x) {
  if (x.rank() != 4 || x.dim(1) != 3) {
    throw InvalidArgument("trunk input must be (N, 3, H, W), got " + x.shape_string());
  }
  if (x.dim(2) < 32 || x.dim(3) < 32) {
    throw InvalidArgument("trunk input " + x.shape_string() + " is smaller than 32x32");
  }
}

}  // namespace

Tensor ResNetTrunk::infer(const Tensor& x) const {
  check_input(x);
  Tensor h = maxpool_.infer(nn::relu(bn1_.infer(conv1_.infer(x))));
  for (const auto& stage : layers_) {
    for (const auto& block : stage) h = block.infer(h);
  }
  return nn::global_avg_pool(h);
}

Tensor ResNetTrunk::forward(const Tensor& x) {
  check_input(x);
  stem_out_ = nn::relu(bn1_.forward(conv1_.forward(x)));
  Tensor h = maxpool_.forward(stem_out_);
  for (auto& stage : layers_) {
    for (auto& block : stage) h = block.forward(h);
  }
  pooled_shape_ = h.shape();
  return nn::global_avg_pool(h);
}

void ResNetTrunk::backward(const Tensor& d_features) {
  if (pooled_shape_.empty()) throw RuntimeError("trunk: backward called without a training forward");
  Tensor g = nn::global_avg_pool_backward(pooled_shape_, d_features);
  pooled_shape_.clear();
  for (std::size_t s = layers_.size(); s-- > 0;) {
    for (std::size_t b = layers_[s].size(); b-- > 0;) g = layers_[s][b].backward(g);
  }
  g = nn::relu_backward(stem_out_, maxpool_.backward(g));
  stem_out_ = Tensor();
  conv1_.backward(bn1_.backward(g));
}

}  // namespace emoart
