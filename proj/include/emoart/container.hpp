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

#ifndef EMOART_CONTAINER_HPP
#define EMOART_CONTAINER_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emoart/tensor.hpp"

namespace emoart {

/// Binary tensor container used for checkpoints and trunk weight files.
///
///   bytes 0..7    magic "EMOARTCK"
///   uint32 LE     container version
///   uint64 LE     header length in bytes
///   header        UTF-8 JSON: {"format", "version", "meta", "tensors": [
///                   {"name", "shape", "offset"}]}; offsets are in floats
///                   from the start of the data section
///   data          float32 little-endian, tensors back to back
inline constexpr std::string_view kContainerMagic = "EMOARTCK";
inline constexpr unsigned kContainerVersion = 1;

struct NamedTensor {
  std::string name;
  Tensor tensor;
};

struct Container {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<NamedTensor> tensors;

  const Tensor* find(std::string_view name) const;
};

/// Writes atomically (temporary file + rename).
void write_container(const std::filesystem::path& path, const nlohmann::json& meta,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors);

Container read_container(const std::filesystem::path& path);

}  // namespace emoart

#endif  // EMOART_CONTAINER_HPP
