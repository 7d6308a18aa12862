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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "fermr/augment.hpp"
#include "fermr/dataset.hpp"
#include "fermr/nn/model.hpp"
#include "fermr/toml.hpp"

namespace fermr {

/// Full training recipe. Serialized to TOML; every field can be overridden
/// from the command line, and the resolved form is embedded in checkpoint
/// metadata together with its digest.
struct TrainConfig {
  std::string optimizer = "adam";
  double learning_rate = 1e-2;
  int batch_size = 128;
  int epochs = 1;
  WeightScheme weight_scheme = WeightScheme::InverseFrequency;
  std::uint64_t seed = 0;
  double selection_fraction = 0.1;
  int checkpoint_every = 1;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  int freeze_stages = 0;
  AugmentConfig augment;
  ModelConfig model;

  void validate() const;
};

/// Data locations; may come from the [data] table of the config file or from
/// command-line flags (flags win).
struct DataPaths {
  std::filesystem::path annotation_dir;
  std::filesystem::path image_root;
};

TrainConfig train_config_from_toml(const toml::Table& table);
DataPaths data_paths_from_toml(const toml::Table& table);

/// Canonical serialization: fixed key order and full float precision, so the
/// digest identifies the configuration.
std::string to_toml(const TrainConfig& config);

/// FNV-1a 64 over the canonical serialization, as 16 hex digits.
std::string config_digest(const TrainConfig& config);

}  // namespace fermr
