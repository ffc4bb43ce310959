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

// Minimal CPU layers for the ResNet trunks and the fusion head.
//
// Every layer offers two paths:
//   infer(x) const      stateless, safe to call concurrently
//   forward(x)          training mode, caches what backward() needs
//   backward(dy)        accumulates parameter gradients, returns dx
// Activations are NCHW float tensors; linear layers take (N, F).

#ifndef EMOART_NN_HPP
#define EMOART_NN_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "emoart/rng.hpp"
#include "emoart/tensor.hpp"

namespace emoart::nn {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, std::vector<int> shape)
      : name(std::move(n)), value(shape), grad(shape) {}
};

/// Non-trained state (batch-norm running statistics).
struct Buffer {
  std::string name;
  Tensor value;
};

/// Flat views over a module tree, names fully qualified.
struct ParameterList {
  std::vector<Parameter*> params;
  std::vector<Buffer*> buffers;
};

class Conv2d {
 public:
  Conv2d() = default;
  Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding);

  Tensor infer(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  void init_kaiming(Rng& rng);
  void collect(ParameterList& out, const std::string& prefix);

  int in_channels() const noexcept { return in_; }
  int out_channels() const noexcept { return out_; }
  Parameter& weight() noexcept { return weight_; }
  const Parameter& weight() const noexcept { return weight_; }

  /// When false, backward() only accumulates weight gradients and returns an
  /// empty tensor (used for the stem, whose input needs no gradient).
  void set_input_grad(bool enabled) noexcept { input_grad_ = enabled; }

 private:
  int in_ = 0, out_ = 0, kernel_ = 1, stride_ = 1, pad_ = 0;
  bool input_grad_ = true;
  Parameter weight_;  // (out, in, k, k), no bias
  Tensor cached_input_;
};

class BatchNorm2d {
 public:
  BatchNorm2d() = default;
  explicit BatchNorm2d(int channels, float momentum = 0.1f, float eps = 1e-5f);

  Tensor infer(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  void collect(ParameterList& out, const std::string& prefix);

 private:
  int channels_ = 0;
  float momentum_ = 0.1f, eps_ = 1e-5f;
  Parameter gamma_, beta_;
  Buffer running_mean_, running_var_;
  Tensor x_hat_;
  std::vector<float> inv_std_;
};

Tensor relu(const Tensor& x);
/// Gradient of relu given its *output* y.
Tensor relu_backward(const Tensor& y, const Tensor& dy);

class MaxPool2d {
 public:
  MaxPool2d(int kernel = 3, int stride = 2, int padding = 1)
      : kernel_(kernel), stride_(stride), pad_(padding) {}

  Tensor infer(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

 private:
  Tensor run(const Tensor& x, std::vector<std::int32_t>* argmax) const;
  int kernel_, stride_, pad_;
  std::vector<int> input_shape_;
  std::vector<std::int32_t> argmax_;
};

/// (N, C, H, W) -> (N, C)
Tensor global_avg_pool(const Tensor& x);
Tensor global_avg_pool_backward(const std::vector<int>& input_shape, const Tensor& dy);

class Linear {
 public:
  Linear() = default;
  Linear(int in_features, int out_features);

  Tensor infer(const Tensor& x) const;
  Tensor forward(const Tensor& x);
  Tensor backward(const Tensor& dy);

  /// U(-1/sqrt(fan_in), 1/sqrt(fan_in)) for weight and bias.
  void init_uniform(Rng& rng);
  void collect(ParameterList& out, const std::string& prefix);

  int in_features() const noexcept { return in_; }
  int out_features() const noexcept { return out_; }
  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& weight() const noexcept { return weight_; }

 private:
  int in_ = 0, out_ = 0;
  Parameter weight_;  // (out, in)
  Parameter bias_;    // (out)
  Tensor cached_input_;
};

/// Inverted dropout: training scales kept units by 1 / (1 - p).
class Dropout {
 public:
  explicit Dropout(double p = 0.5) : p_(p) {}

  Tensor forward(const Tensor& x, std::uint64_t seed);
  Tensor backward(const Tensor& dy) const;
  double rate() const noexcept { return p_; }

 private:
  double p_;
  std::vector<float> mask_;
};

}  // namespace emoart::nn

#endif  // EMOART_NN_HPP
