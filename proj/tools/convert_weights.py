# Copyright 2026 the fermr authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Convert a torch state dict into the weights.bin + manifest.json layout.

Handles the usual residual-network naming (conv1, bn1, layerX.Y.convZ / bnZ /
downsample.0/1, fc) and the se_module convention where the squeeze-excitation
layers are stored as 1x1 convolutions:

    layer1.0.se_module.fc1.weight [mid, C, 1, 1] -> layer1.0.se.fc1.weight [mid, C]

Usage:
    python3 convert_weights.py input.pth output_dir/
"""

import argparse
import json
import struct
import sys
from pathlib import Path


def load_state_dict(path: str):
    import torch  # local import: only needed for conversion

    blob = torch.load(path, map_location="cpu", weights_only=True)
    if hasattr(blob, "state_dict"):
        blob = blob.state_dict()
    if "state_dict" in blob and isinstance(blob["state_dict"], dict):
        blob = blob["state_dict"]
    return blob


def canonical_name(name: str) -> str | None:
    name = name.removeprefix("module.")
    if name.endswith("num_batches_tracked"):
        return None
    name = name.replace(".se_module.", ".se.")
    return name


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("input", help="torch checkpoint (.pth)")
    parser.add_argument("output", help="output directory for weights.bin + manifest.json")
    args = parser.parse_args()

    state = load_state_dict(args.input)
    out_dir = Path(args.output)
    out_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    offset = 0
    skipped = []
    with open(out_dir / "weights.bin", "wb") as bin_out:
        for raw_name, tensor in state.items():
            name = canonical_name(raw_name)
            if name is None:
                skipped.append(raw_name)
                continue
            array = tensor.detach().float().cpu()
            # se fc layers stored as 1x1 convs: drop the trailing unit dims
            if ".se.fc" in name and array.dim() == 4 and array.shape[2:] == (1, 1):
                array = array.reshape(array.shape[0], array.shape[1])
            data = array.contiguous().numpy().astype("<f4")
            raw = data.tobytes()
            bin_out.write(raw)
            entries.append(
                {
                    "name": name,
                    "shape": list(data.shape),
                    "dtype": "f32",
                    "byte_offset": offset,
                    "byte_size": len(raw),
                }
            )
            offset += len(raw)

    manifest = {"tensors": entries, "total_bytes": offset}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")

    print(f"wrote {len(entries)} tensors ({offset} bytes) to {out_dir}")
    if skipped:
        print(f"skipped {len(skipped)} entries: {', '.join(skipped[:5])}"
              + (" ..." if len(skipped) > 5 else ""))
    return 0


if __name__ == "__main__":
    sys.exit(main())
