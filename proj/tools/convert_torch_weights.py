#!/usr/bin/env python3
# Copyright 2026 The emoart Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Converts a PyTorch ResNet state dict into an emoart trunk weight file.

Accepts torchvision checkpoints and wrapped ones ({"state_dict": ...} with
"module." prefixes, as published for scene-centric models). The classifier
and batch counters are dropped. Install the result with

    emoart fetch-weights --backbone resnet50 --scheme scene_centric --from out.ckpt
"""

import argparse
import json
import struct
import sys

import numpy as np

MAGIC = b"EMOARTCK"
VERSION = 1


def write_container(path, meta, tensors):
    """tensors: list of (name, float32 ndarray)."""
    index, offset = [], 0
    for name, array in tensors:
        index.append({"name": name, "shape": list(array.shape), "offset": offset})
        offset += array.size
    header = json.dumps({"format": "emoart-container", "version": VERSION, "meta": meta,
                         "tensors": index}).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQ", VERSION, len(header)))
        f.write(header)
        for _, array in tensors:
            f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def read_container(path):
    """Returns (meta, {name: ndarray})."""
    with open(path, "rb") as f:
        if f.read(8) != MAGIC:
            raise ValueError(f"{path} is not an emoart container")
        version, length = struct.unpack("<IQ", f.read(12))
        if version != VERSION:
            raise ValueError(f"{path}: unsupported container version {version}")
        header = json.loads(f.read(length))
        data = np.frombuffer(f.read(), dtype="<f4")
    tensors = {}
    for entry in header["tensors"]:
        n = int(np.prod(entry["shape"])) if entry["shape"] else 1
        tensors[entry["name"]] = data[entry["offset"]:entry["offset"] + n].reshape(entry["shape"])
    return header["meta"], tensors


def trunk_tensors(state_dict):
    out = []
    for name, value in state_dict.items():
        if name.startswith("module."):
            name = name[len("module."):]
        if name.startswith("fc.") or name.endswith("num_batches_tracked"):
            continue
        out.append((name, value.detach().cpu().numpy().astype(np.float32)))
    return out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("input", help="PyTorch checkpoint (.pth / .pth.tar)")
    parser.add_argument("--backbone", required=True, choices=["resnet18", "resnet50"])
    parser.add_argument("--scheme", required=True, choices=["scene_centric", "object_centric"])
    parser.add_argument("-o", "--out", required=True, help="Output trunk weight file")
    args = parser.parse_args(argv)

    import torch

    checkpoint = torch.load(args.input, map_location="cpu", weights_only=False)
    if isinstance(checkpoint, dict) and "state_dict" in checkpoint:
        checkpoint = checkpoint["state_dict"]
    tensors = trunk_tensors(checkpoint)
    if not any(name == "conv1.weight" for name, _ in tensors):
        print(f"{args.input}: no conv1.weight; not a ResNet state dict", file=sys.stderr)
        return 2
    width = int(dict(tensors)["conv1.weight"].shape[0])
    meta = {"kind": "trunk-weights", "backbone": args.backbone, "scheme": args.scheme,
            "width": width, "source": args.input}
    write_container(args.out, meta, tensors)
    print(f"wrote {len(tensors)} tensors to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
