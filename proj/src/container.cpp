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

#include "emoart/container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "emoart/error.hpp"

namespace emoart {

static_assert(std::endian::native == std::endian::little,
              "the container format is little-endian; add byte swapping for this host");

using nlohmann::json;

const Tensor* Container::find(std::string_view name) const {
  for (const auto& t : tensors) {
    if (t.name == name) return &t.tensor;
  }
  return nullptr;
}

void write_container(const std::filesystem::path& path, const json& meta,
                     const std::vector<std::pair<std::string, const Tensor*>>& tensors) {
  json index = json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : tensors) {
    index.push_back(json{{"name", name}, {"shape", t->shape()}, {"offset", offset}});
    offset += t->numel();
  }
  const json header{{"format", "emoart-container"},
                    {"version", kContainerVersion},
                    {"meta", meta},
                    {"tensors", index}};
  const std::string text = header.dump();

  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    const std::uint32_t version = kContainerVersion;
    const std::uint64_t len = text.size();
    out.write(kContainerMagic.data(), static_cast<std::streamsize>(kContainerMagic.size()));
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : tensors) {
      out.write(reinterpret_cast<const char*>(t->data()),
                static_cast<std::streamsize>(t->numel() * sizeof(float)));
    }
    if (!out) throw IoError("failed writing " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Container read_container(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || std::string_view(magic, sizeof magic) != kContainerMagic) {
    throw ValidationError(path.string() + " is not an emoart container");
  }
  if (version != kContainerVersion) {
    throw ValidationError(path.string() + ": unsupported container version " + std::to_string(version));
  }
  if (len > (std::uint64_t{1} << 32)) throw ValidationError(path.string() + ": corrupt header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw ValidationError(path.string() + ": truncated header");

  json header;
  try {
    header = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": corrupt header: " + e.what());
  }

  Container c;
  c.meta = header.value("meta", json::object());
  const auto data_start = in.tellg();
  try {
    for (const auto& entry : header.at("tensors")) {
      std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
      const auto offset = entry.at("offset").get<std::uint64_t>();
      Tensor t(shape);
      in.seekg(data_start + static_cast<std::streamoff>(offset * sizeof(float)));
      in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.numel() * sizeof(float)));
      if (!in) throw ValidationError(path.string() + ": truncated tensor data");
      c.tensors.push_back({entry.at("name").get<std::string>(), std::move(t)});
    }
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": corrupt tensor index: " + e.what());
  }
  return c;
}

}  // namespace emoart
