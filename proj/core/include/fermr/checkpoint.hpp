// Copyright 2026 the fermr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Weight persistence. A weights directory holds one raw little-endian blob
// (weights.bin) plus manifest.json mapping tensor names to shape/dtype/offset;
// checkpoints add metadata.json with the epoch, config digest, seed and the
// selection metrics. Pretrained backbones are consumed in the same layout.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fermr/metrics.hpp"
#include "fermr/nn/model.hpp"
#include "fermr/tensor.hpp"

namespace fermr {

struct TensorEntry {
  std::string name;
  std::vector<std::int64_t> shape;
  std::string dtype;  // "f32"
  std::uint64_t byte_offset = 0;
  std::uint64_t byte_size = 0;
};

using NamedTensors = std::vector<std::pair<std::string, const Tensor<float>*>>;

void write_weights_dir(const std::filesystem::path& dir, const NamedTensors& tensors);
std::vector<TensorEntry> read_manifest(const std::filesystem::path& dir);
Tensor<float> read_tensor(const std::filesystem::path& dir, const TensorEntry& entry);

/// Parameters plus batch-norm running statistics, in a stable order.
NamedTensors named_tensors(nn::SEResNet<float>& model);

struct LoadReport {
  std::vector<std::string> loaded;
  std::vector<std::string> skipped;        // present in the file, unused
  std::vector<std::string> reinitialized;  // kept at fresh initialization
  bool from_scratch = false;
  std::string summary() const;
};

/// Loads backbone tensors by name from a weights directory. Head tensors
/// ("fc.*") keep their fresh initialization unless strict_head is set, in
/// which case they must be present and match. A missing backbone tensor or
/// any shape mismatch raises, naming the tensor.
LoadReport load_pretrained(nn::SEResNet<float>& model, const std::filesystem::path& weights_dir,
                           bool strict_head = false);

struct CheckpointMetadata {
  int epoch = 0;
  std::uint64_t seed = 0;
  std::string config_digest;
  std::string config_toml;
  std::optional<MetricsReport> selection_metrics;
};

struct Checkpoint {
  std::filesystem::path dir;
  CheckpointMetadata meta;
};

void save_checkpoint(const std::filesystem::path& dir, nn::SEResNet<float>& model,
                     const CheckpointMetadata& meta);

CheckpointMetadata read_checkpoint_metadata(const std::filesystem::path& dir);

/// Strict full restore (head and running statistics included).
void load_checkpoint_weights(nn::SEResNet<float>& model, const std::filesystem::path& dir);

/// Rebuilds the model from the checkpoint's embedded config and restores its
/// weights. When `expected_config_digest` is given and does not match the
/// stored one, raises unless force (then proceeds with a warning).
std::pair<std::unique_ptr<nn::SEResNet<float>>, CheckpointMetadata> load_checkpoint(
    const std::filesystem::path& dir,
    const std::optional<std::string>& expected_config_digest = std::nullopt, bool force = false);

}  // namespace fermr
