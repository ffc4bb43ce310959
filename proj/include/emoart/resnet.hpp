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

#ifndef EMOART_RESNET_HPP
#define EMOART_RESNET_HPP

#include <string>
#include <string_view>
#include <vector>

#include "emoart/nn.hpp"

namespace emoart {

enum class Backbone { kResNet18, kResNet50 };

std::string_view backbone_name(Backbone backbone);
/// Throws ValidationError for unknown identifiers.
Backbone parse_backbone(std::string_view name);

/// Convolutional trunk of a residual network followed by global average
/// pooling. Layer names follow the usual torchvision state-dict keys
/// ("conv1.weight", "layer2.0.downsample.1.running_var", ...) without "fc".
///
/// `width` is the channel count of the stem (64 for the standard networks);
/// stage widths are width, 2*width, 4*width, 8*width (times 4 for the
/// bottleneck expansion).
class ResNetTrunk {
 public:
  explicit ResNetTrunk(Backbone backbone, int width = 64);

  ResNetTrunk(const ResNetTrunk&) = delete;
  ResNetTrunk& operator=(const ResNetTrunk&) = delete;
  ResNetTrunk(ResNetTrunk&&) = default;
  ResNetTrunk& operator=(ResNetTrunk&&) = default;

  /// (N, 3, H, W) -> (N, feature_dim()). Any H, W >= 32 works.
  Tensor infer(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  /// Backpropagates a (N, feature_dim()) gradient into the parameters.
  void backward(const Tensor& d_features);

  void init_random(Rng& rng);
  void collect(nn::ParameterList& out, const std::string& prefix);

  Backbone backbone() const noexcept { return backbone_; }
  int width() const noexcept { return width_; }
  int feature_dim() const noexcept { return feature_dim_; }

 private:
  class Block {
   public:
    Block(bool bottleneck, int in_planes, int planes, int stride);
    Tensor infer(const Tensor& x) const;
    Tensor forward(const Tensor& x);
    Tensor backward(const Tensor& dy);
    void init_random(Rng& rng);
    void collect(nn::ParameterList& out, const std::string& prefix);
    int out_planes() const noexcept { return out_planes_; }

   private:
    std::vector<nn::Conv2d> convs_;
    std::vector<nn::BatchNorm2d> bns_;
    bool has_downsample_ = false;
    nn::Conv2d ds_conv_;
    nn::BatchNorm2d ds_bn_;
    int out_planes_ = 0;
    std::vector<Tensor> relu_out_;
    Tensor out_;
  };

  Backbone backbone_;
  int width_;
  int feature_dim_ = 0;
  nn::Conv2d conv1_;
  nn::BatchNorm2d bn1_;
  nn::MaxPool2d maxpool_;
  std::vector<std::vector<Block>> layers_;
  Tensor stem_out_;
  std::vector<int> pooled_shape_;
};

}  // namespace emoart

#endif  // EMOART_RESNET_HPP
