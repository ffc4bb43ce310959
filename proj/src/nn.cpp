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

#include "emoart/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/Core>

#include "emoart/error.hpp"

namespace emoart::nn {
namespace {

using RowMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMatrix = Eigen::Map<RowMatrix>;
using ConstMapMatrix = Eigen::Map<const RowMatrix>;

void require_rank(const Tensor& t, std::size_t rank, const char* who) {
  if (t.rank() != rank) {
    throw InvalidArgument(std::string(who) + ": expected rank " + std::to_string(rank) +
                          " input, got " + t.shape_string());
  }
}

int conv_out_extent(int in, int kernel, int stride, int pad) {
  return (in + 2 * pad - kernel) / stride + 1;
}

// col is (C * k * k, Ho * Wo), row-major.
void im2col(const float* x, int channels, int h, int w, int k, int stride, int pad, int ho, int wo,
            float* col) {
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  for (int c = 0; c < channels; ++c) {
    const float* xc = x + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        float* row = col + (static_cast<std::size_t>(c * k + ki) * k + kj) * plane;
        for (int oy = 0; oy < ho; ++oy) {
          float* r = row + static_cast<std::size_t>(oy) * wo;
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) {
            std::fill(r, r + wo, 0.0f);
            continue;
          }
          const float* xr = xc + static_cast<std::size_t>(iy) * w;
          int ix = kj - pad;
          for (int ox = 0; ox < wo; ++ox, ix += stride) {
            r[ox] = (ix >= 0 && ix < w) ? xr[ix] : 0.0f;
          }
        }
      }
    }
  }
}

void col2im(const float* col, int channels, int h, int w, int k, int stride, int pad, int ho,
            int wo, float* x) {
  const std::size_t plane = static_cast<std::size_t>(ho) * wo;
  std::fill(x, x + static_cast<std::size_t>(channels) * h * w, 0.0f);
  for (int c = 0; c < channels; ++c) {
    float* xc = x + static_cast<std::size_t>(c) * h * w;
    for (int ki = 0; ki < k; ++ki) {
      for (int kj = 0; kj < k; ++kj) {
        const float* row = col + (static_cast<std::size_t>(c * k + ki) * k + kj) * plane;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - pad + ki;
          if (iy < 0 || iy >= h) continue;
          const float* r = row + static_cast<std::size_t>(oy) * wo;
          float* xr = xc + static_cast<std::size_t>(iy) * w;
          int ix = kj - pad;
          for (int ox = 0; ox < wo; ++ox, ix += stride) {
            if (ix >= 0 && ix < w) xr[ix] += r[ox];
          }
        }
      }
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding)
    : in_(in_channels),
      out_(out_channels),
      kernel_(kernel),
      stride_(stride),
      pad_(padding),
      weight_("weight", {out_channels, in_channels, kernel, kernel}) {}

void Conv2d::init_kaiming(Rng& rng) {
  // fan_out mode, gain sqrt(2).
  const double std = std::sqrt(2.0 / (double(out_) * kernel_ * kernel_));
  std::normal_distribution<double> dist(0.0, std);
  for (float& v : weight_.value.values()) v = static_cast<float>(dist(rng));
}

void Conv2d::collect(ParameterList& out, const std::string& prefix) {
  weight_.name = prefix + "weight";
  out.params.push_back(&weight_);
}

Tensor Conv2d::infer(const Tensor& x) const {
  require_rank(x, 4, "conv2d");
  if (x.dim(1) != in_) {
    throw InvalidArgument("conv2d: expected " + std::to_string(in_) + " input channels, got " +
                          x.shape_string());
  }
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = conv_out_extent(h, kernel_, stride_, pad_);
  const int wo = conv_out_extent(w, kernel_, stride_, pad_);
  if (ho <= 0 || wo <= 0) throw InvalidArgument("conv2d: input " + x.shape_string() + " too small");
  Tensor y({n, out_, ho, wo});

  const int kdim = in_ * kernel_ * kernel_;
  const bool direct = kernel_ == 1 && stride_ == 1 && pad_ == 0;
  std::vector<float> col(direct ? 0 : static_cast<std::size_t>(kdim) * ho * wo);
  ConstMapMatrix wmat(weight_.value.data(), out_, kdim);
  const std::size_t in_sample = static_cast<std::size_t>(in_) * h * w;
  const std::size_t out_sample = static_cast<std::size_t>(out_) * ho * wo;
  for (int b = 0; b < n; ++b) {
    const float* xb = x.data() + in_sample * b;
    const float* src = xb;
    if (!direct) {
      im2col(xb, in_, h, w, kernel_, stride_, pad_, ho, wo, col.data());
      src = col.data();
    }
    MapMatrix(y.data() + out_sample * b, out_, ho * wo).noalias() =
        wmat * ConstMapMatrix(src, kdim, ho * wo);
  }
  return y;
}

Tensor Conv2d::forward(const Tensor& x) {
  cached_input_ = x;
  return infer(x);
}

Tensor Conv2d::backward(const Tensor& dy) {
  const Tensor& x = cached_input_;
  if (x.empty()) throw RuntimeError("conv2d: backward called without a training forward");
  const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
  const int ho = dy.dim(2), wo = dy.dim(3);
  const int kdim = in_ * kernel_ * kernel_;
  const bool direct = kernel_ == 1 && stride_ == 1 && pad_ == 0;

  std::vector<float> col(direct ? 0 : static_cast<std::size_t>(kdim) * ho * wo);
  std::vector<float> dcol(input_grad_ && !direct ? static_cast<std::size_t>(kdim) * ho * wo : 0);
  Tensor dx;
  if (input_grad_) dx = Tensor(x.shape());

  ConstMapMatrix wmat(weight_.value.data(), out_, kdim);
  MapMatrix dw(weight_.grad.data(), out_, kdim);
  const std::size_t in_sample = static_cast<std::size_t>(in_) * h * w;
  const std::size_t out_sample = static_cast<std::size_t>(out_) * ho * wo;
  for (int b = 0; b < n; ++b) {
    const float* xb = x.data() + in_sample * b;
    const float* src = xb;
    if (!direct) {
      im2col(xb, in_, h, w, kernel_, stride_, pad_, ho, wo, col.data());
      src = col.data();
    }
    ConstMapMatrix dyb(dy.data() + out_sample * b, out_, ho * wo);
    dw.noalias() += dyb * ConstMapMatrix(src, kdim, ho * wo).transpose();
    if (!input_grad_) continue;
    if (direct) {
      MapMatrix(dx.data() + in_sample * b, kdim, ho * wo).noalias() = wmat.transpose() * dyb;
    } else {
      MapMatrix(dcol.data(), kdim, ho * wo).noalias() = wmat.transpose() * dyb;
      col2im(dcol.data(), in_, h, w, kernel_, stride_, pad_, ho, wo, dx.data() + in_sample * b);
    }
  }
  cached_input_ = Tensor();
  return dx;
}

// ---------------------------------------------------------------------------
// BatchNorm2d

BatchNorm2d::BatchNorm2d(int channels, float momentum, float eps)
    : channels_(channels),
      momentum_(momentum),
      eps_(eps),
      gamma_("weight", {channels}),
      beta_("bias", {channels}),
      running_mean_{"running_mean", Tensor({channels}, 0.0f)},
      running_var_{"running_var", Tensor({channels}, 1.0f)} {
  gamma_.value.fill(1.0f);
}

void BatchNorm2d::collect(ParameterList& out, const std::string& prefix) {
  gamma_.name = prefix + "weight";
  beta_.name = prefix + "bias";
  running_mean_.name = prefix + "running_mean";
  running_var_.name = prefix + "running_var";
  out.params.push_back(&gamma_);
  out.params.push_back(&beta_);
  out.buffers.push_back(&running_mean_);
  out.buffers.push_back(&running_var_);
}

Tensor BatchNorm2d::infer(const Tensor& x) const {
  require_rank(x, 4, "batchnorm");
  if (x.dim(1) != channels_) throw InvalidArgument("batchnorm: channel mismatch " + x.shape_string());
  const int n = x.dim(0);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor y(x.shape());
  for (int c = 0; c < channels_; ++c) {
    const float inv = 1.0f / std::sqrt(running_var_.value[c] + eps_);
    const float scale = gamma_.value[c] * inv;
    const float shift = beta_.value[c] - running_mean_.value[c] * scale;
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
      const float* xs = x.data() + off;
      float* ys = y.data() + off;
      for (std::size_t i = 0; i < hw; ++i) ys[i] = xs[i] * scale + shift;
    }
  }
  return y;
}

Tensor BatchNorm2d::forward(const Tensor& x) {
  require_rank(x, 4, "batchnorm");
  if (x.dim(1) != channels_) throw InvalidArgument("batchnorm: channel mismatch " + x.shape_string());
  const int n = x.dim(0);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  const double m = double(n) * hw;
  Tensor y(x.shape());
  x_hat_ = Tensor(x.shape());
  inv_std_.assign(channels_, 0.0f);
  for (int c = 0; c < channels_; ++c) {
    double sum = 0.0;
    for (int b = 0; b < n; ++b) {
      const float* xs = x.data() + (static_cast<std::size_t>(b) * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) sum += xs[i];
    }
    const double mean = sum / m;
    double sq = 0.0;
    for (int b = 0; b < n; ++b) {
      const float* xs = x.data() + (static_cast<std::size_t>(b) * channels_ + c) * hw;
      for (std::size_t i = 0; i < hw; ++i) {
        const double d = xs[i] - mean;
        sq += d * d;
      }
    }
    const double var = sq / m;
    const float inv = static_cast<float>(1.0 / std::sqrt(var + eps_));
    inv_std_[c] = inv;
    const float g = gamma_.value[c], bt = beta_.value[c];
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
      const float* xs = x.data() + off;
      float* xh = x_hat_.data() + off;
      float* ys = y.data() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        xh[i] = static_cast<float>((xs[i] - mean) * inv);
        ys[i] = g * xh[i] + bt;
      }
    }
    const double unbiased = m > 1 ? sq / (m - 1) : var;
    running_mean_.value[c] = static_cast<float>((1.0 - momentum_) * running_mean_.value[c] + momentum_ * mean);
    running_var_.value[c] = static_cast<float>((1.0 - momentum_) * running_var_.value[c] + momentum_ * unbiased);
  }
  return y;
}

Tensor BatchNorm2d::backward(const Tensor& dy) {
  if (x_hat_.empty()) throw RuntimeError("batchnorm: backward called without a training forward");
  const int n = dy.dim(0);
  const std::size_t hw = static_cast<std::size_t>(dy.dim(2)) * dy.dim(3);
  const double m = double(n) * hw;
  Tensor dx(dy.shape());
  for (int c = 0; c < channels_; ++c) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
      const float* d = dy.data() + off;
      const float* xh = x_hat_.data() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        sum_dy += d[i];
        sum_dy_xh += double(d[i]) * xh[i];
      }
    }
    gamma_.grad[c] += static_cast<float>(sum_dy_xh);
    beta_.grad[c] += static_cast<float>(sum_dy);
    const double k = double(gamma_.value[c]) * inv_std_[c] / m;
    for (int b = 0; b < n; ++b) {
      const std::size_t off = (static_cast<std::size_t>(b) * channels_ + c) * hw;
      const float* d = dy.data() + off;
      const float* xh = x_hat_.data() + off;
      float* out = dx.data() + off;
      for (std::size_t i = 0; i < hw; ++i) {
        out[i] = static_cast<float>(k * (m * d[i] - sum_dy - xh[i] * sum_dy_xh));
      }
    }
  }
  x_hat_ = Tensor();
  return dx;
}

// ---------------------------------------------------------------------------
// Activations and pooling

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (float& v : y.values()) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.numel(); ++i) {
    if (!(y[i] > 0.0f)) dx[i] = 0.0f;
  }
  return dx;
}

Tensor MaxPool2d::run(const Tensor& x, std::vector<std::int32_t>* argmax) const {
  require_rank(x, 4, "maxpool");
  const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
  const int ho = conv_out_extent(h, kernel_, stride_, pad_);
  const int wo = conv_out_extent(w, kernel_, stride_, pad_);
  Tensor y({n, c, ho, wo});
  if (argmax) argmax->assign(y.numel(), -1);
  std::size_t o = 0;
  for (int p = 0; p < n * c; ++p) {
    const float* xs = x.data() + static_cast<std::size_t>(p) * h * w;
    for (int oy = 0; oy < ho; ++oy) {
      for (int ox = 0; ox < wo; ++ox, ++o) {
        float best = -std::numeric_limits<float>::infinity();
        std::int32_t best_i = -1;
        for (int ki = 0; ki < kernel_; ++ki) {
          const int iy = oy * stride_ - pad_ + ki;
          if (iy < 0 || iy >= h) continue;
          for (int kj = 0; kj < kernel_; ++kj) {
            const int ix = ox * stride_ - pad_ + kj;
            if (ix < 0 || ix >= w) continue;
            const float v = xs[iy * w + ix];
            if (best_i < 0 || v > best) {
              best = v;
              best_i = iy * w + ix;
            }
          }
        }
        y[o] = best;
        if (argmax) (*argmax)[o] = best_i;
      }
    }
  }
  return y;
}

Tensor MaxPool2d::infer(const Tensor& x) const { return run(x, nullptr); }

Tensor MaxPool2d::forward(const Tensor& x) {
  input_shape_ = x.shape();
  return run(x, &argmax_);
}

Tensor MaxPool2d::backward(const Tensor& dy) {
  if (input_shape_.empty()) throw RuntimeError("maxpool: backward called without a training forward");
  Tensor dx(input_shape_);
  const std::size_t plane_in = static_cast<std::size_t>(input_shape_[2]) * input_shape_[3];
  const std::size_t plane_out = static_cast<std::size_t>(dy.dim(2)) * dy.dim(3);
  for (std::size_t o = 0; o < dy.numel(); ++o) {
    const std::size_t p = o / plane_out;
    dx[p * plane_in + static_cast<std::size_t>(argmax_[o])] += dy[o];
  }
  input_shape_.clear();
  return dx;
}

Tensor global_avg_pool(const Tensor& x) {
  require_rank(x, 4, "global_avg_pool");
  const int n = x.dim(0), c = x.dim(1);
  const std::size_t hw = static_cast<std::size_t>(x.dim(2)) * x.dim(3);
  Tensor y({n, c});
  for (int p = 0; p < n * c; ++p) {
    const float* xs = x.data() + static_cast<std::size_t>(p) * hw;
    double s = 0.0;
    for (std::size_t i = 0; i < hw; ++i) s += xs[i];
    y[p] = static_cast<float>(s / double(hw));
  }
  return y;
}

Tensor global_avg_pool_backward(const std::vector<int>& input_shape, const Tensor& dy) {
  Tensor dx(input_shape);
  const std::size_t hw = static_cast<std::size_t>(input_shape[2]) * input_shape[3];
  const float scale = 1.0f / static_cast<float>(hw);
  for (std::size_t p = 0; p < dy.numel(); ++p) {
    std::fill(dx.data() + p * hw, dx.data() + (p + 1) * hw, dy[p] * scale);
  }
  return dx;
}

// ---------------------------------------------------------------------------
// Linear

Linear::Linear(int in_features, int out_features)
    : in_(in_features),
      out_(out_features),
      weight_("weight", {out_features, in_features}),
      bias_("bias", {out_features}) {}

void Linear::init_uniform(Rng& rng) {
  const double bound = 1.0 / std::sqrt(double(in_));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (float& v : weight_.value.values()) v = static_cast<float>(dist(rng));
  for (float& v : bias_.value.values()) v = static_cast<float>(dist(rng));
}

void Linear::collect(ParameterList& out, const std::string& prefix) {
  weight_.name = prefix + "weight";
  bias_.name = prefix + "bias";
  out.params.push_back(&weight_);
  out.params.push_back(&bias_);
}

Tensor Linear::infer(const Tensor& x) const {
  require_rank(x, 2, "linear");
  if (x.dim(1) != in_) {
    throw InvalidArgument("linear: expected " + std::to_string(in_) + " features, got " + x.shape_string());
  }
  const int n = x.dim(0);
  Tensor y({n, out_});
  MapMatrix ym(y.data(), n, out_);
  ym.noalias() = ConstMapMatrix(x.data(), n, in_) * ConstMapMatrix(weight_.value.data(), out_, in_).transpose();
  for (int b = 0; b < n; ++b) {
    for (int j = 0; j < out_; ++j) ym(b, j) += bias_.value[j];
  }
  return y;
}

Tensor Linear::forward(const Tensor& x) {
  cached_input_ = x;
  return infer(x);
}

Tensor Linear::backward(const Tensor& dy) {
  if (cached_input_.empty()) throw RuntimeError("linear: backward called without a training forward");
  const int n = dy.dim(0);
  ConstMapMatrix dym(dy.data(), n, out_);
  ConstMapMatrix xm(cached_input_.data(), n, in_);
  MapMatrix(weight_.grad.data(), out_, in_).noalias() += dym.transpose() * xm;
  for (int b = 0; b < n; ++b) {
    for (int j = 0; j < out_; ++j) bias_.grad[j] += dym(b, j);
  }
  Tensor dx({n, in_});
  MapMatrix(dx.data(), n, in_).noalias() = dym * ConstMapMatrix(weight_.value.data(), out_, in_);
  cached_input_ = Tensor();
  return dx;
}

// ---------------------------------------------------------------------------
// Dropout

Tensor Dropout::forward(const Tensor& x, std::uint64_t seed) {
  Tensor y = x;
  mask_.assign(x.numel(), 1.0f);
  if (p_ <= 0.0) return y;
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const float keep_scale = static_cast<float>(1.0 / (1.0 - p_));
  for (std::size_t i = 0; i < y.numel(); ++i) {
    mask_[i] = unit(rng) < p_ ? 0.0f : keep_scale;
    y[i] *= mask_[i];
  }
  return y;
}

Tensor Dropout::backward(const Tensor& dy) const {
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.numel(); ++i) dx[i] *= mask_.at(i);
  return dx;
}

}  // namespace emoart::nn
