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

#ifndef EMOART_TENSOR_HPP
#define EMOART_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

namespace emoart {

/// Dense row-major float32 tensor. Value type: copies are deep.
///
/// Image tensors produced by preprocessing are (H, W, 3); batches handed to
/// the model are (B, H, W, 3); the network itself works in (B, C, H, W).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape, float fill = 0.0f);
  Tensor(std::vector<int> shape, std::vector<float> values);

  const std::vector<int>& shape() const noexcept { return shape_; }
  int dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float* data() noexcept { return data_.data(); }
  const float* data() const noexcept { return data_.data(); }
  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  float& operator[](std::size_t i) noexcept { return data_[i]; }
  float operator[](std::size_t i) const noexcept { return data_[i]; }

  /// Changes the logical shape; the element count must not change.
  void reshape(std::vector<int> shape);
  void fill(float v);
  void zero() { fill(0.0f); }

  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  std::string shape_string() const;

  /// Row `index` along axis 0, copied out as a tensor of rank()-1.
  Tensor slice0(int index) const;
  /// Writes `row` (rank()-1 with matching extents) into position `index`.
  void set_slice0(int index, const Tensor& row);

  /// Stacks equally shaped tensors along a new leading axis.
  static Tensor stack(std::span<const Tensor> items);

 private:
  std::vector<int> shape_;
  std::vector<float> data_;
};

std::size_t shape_numel(const std::vector<int>& shape);

/// Largest elementwise absolute difference; throws on shape mismatch.
double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace emoart

#endif  // EMOART_TENSOR_HPP
