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

#include "emoart/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "emoart/error.hpp"

namespace emoart {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw InvalidArgument("negative tensor extent");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape, float fill)
    : shape_(std::move(shape)), data_(shape_numel(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<float> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  if (data_.size() != shape_numel(shape_)) {
    throw InvalidArgument("tensor value count does not match shape " + shape_string());
  }
}

void Tensor::reshape(std::vector<int> shape) {
  if (shape_numel(shape) != data_.size()) {
    throw InvalidArgument("cannot reshape " + shape_string() + ": element count differs");
  }
  shape_ = std::move(shape);
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

std::string Tensor::shape_string() const {
  std::string s = "(";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape_[i]);
  }
  return s + ")";
}

Tensor Tensor::slice0(int index) const {
  if (shape_.empty() || index < 0 || index >= shape_[0]) {
    throw InvalidArgument("slice index out of range for " + shape_string());
  }
  std::vector<int> inner(shape_.begin() + 1, shape_.end());
  const std::size_t n = shape_numel(inner);
  Tensor out(inner);
  std::memcpy(out.data(), data_.data() + n * static_cast<std::size_t>(index), n * sizeof(float));
  return out;
}

void Tensor::set_slice0(int index, const Tensor& row) {
  if (shape_.empty() || index < 0 || index >= shape_[0] ||
      !std::equal(shape_.begin() + 1, shape_.end(), row.shape().begin(), row.shape().end())) {
    throw InvalidArgument("cannot place " + row.shape_string() + " into " + shape_string());
  }
  std::memcpy(data_.data() + row.numel() * static_cast<std::size_t>(index), row.data(),
              row.numel() * sizeof(float));
}

Tensor Tensor::stack(std::span<const Tensor> items) {
  if (items.empty()) throw InvalidArgument("cannot stack zero tensors");
  std::vector<int> shape = items.front().shape();
  shape.insert(shape.begin(), static_cast<int>(items.size()));
  Tensor out(shape);
  for (std::size_t i = 0; i < items.size(); ++i) out.set_slice0(static_cast<int>(i), items[i]);
  return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw InvalidArgument("shape mismatch " + a.shape_string() + " vs " + b.shape_string());
  }
  double m = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    m = std::max(m, std::abs(double(a[i]) - double(b[i])));
  }
  return m;
}

}  // namespace emoart
