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

// Runs a trunk weight file on an (N, 3, H, W) tensor "input" and writes the
// pooled features as tensor "features".
//
//   emoart_trunk_features WEIGHTS INPUT OUTPUT

#include <cstdio>
#include <exception>

#include "emoart/container.hpp"
#include "emoart/error.hpp"
#include "emoart/resnet.hpp"

int main(int argc, char** argv) {
  using namespace emoart;
  if (argc != 4) {
    std::fprintf(stderr, "usage: %s WEIGHTS INPUT OUTPUT\n", argv[0]);
    return 2;
  }
  try {
    const Container weights = read_container(argv[1]);
    ResNetTrunk trunk(parse_backbone(weights.meta.at("backbone").get<std::string>()),
                      weights.meta.value("width", 64));
    nn::ParameterList list;
    trunk.collect(list, "");
    auto assign = [&](const std::string& name, Tensor& dst) {
      const Tensor* src = weights.find(name);
      if (!src || src->shape() != dst.shape()) throw ValidationError("missing or misshapen tensor '" + name + "'");
      dst = *src;
    };
    for (nn::Parameter* p : list.params) assign(p->name, p->value);
    for (nn::Buffer* b : list.buffers) assign(b->name, b->value);

    const Container input = read_container(argv[2]);
    const Tensor* x = input.find("input");
    if (!x) throw ValidationError("no tensor 'input'");
    Tensor features = trunk.infer(*x);
    write_container(argv[3], nlohmann::json::object(), {{"features", &features}});
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
