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

// Training orchestration: shuffled mini-batches through the training
// transform, weighted cross entropy, Adam updates, periodic evaluation on the
// selection subsample and checkpointing. (config, seed) fully determines the
// batch sequence, the augmentations and the weight updates for a fixed
// worker count.

#include <filesystem>
#include <span>
#include <vector>

#include "fermr/checkpoint.hpp"
#include "fermr/config.hpp"
#include "fermr/dataset.hpp"
#include "fermr/metrics.hpp"
#include "fermr/nn/model.hpp"

namespace fermr {

/// Runs the full training loop. Writes `train_log.jsonl` (one record per step
/// and one per selection evaluation) and `ckpt_epoch_<N>/` directories under
/// out_dir. Aborts with a diagnostic naming the step if the loss goes
/// non-finite.
std::vector<Checkpoint> train(const TrainConfig& config, const DatasetIndex& train_index,
                              const DatasetIndex& selection_index,
                              const std::filesystem::path& out_dir);

/// Highest selection challenge score wins; ties go to the earliest epoch.
const Checkpoint& select_model(std::span<const Checkpoint> checkpoints);

/// Deterministic full-set scoring: every valid sample once through the
/// evaluation transform, argmax prediction, shard-local confusion matrices
/// merged in shard order. Unreadable samples are skipped and counted; more
/// than 1% of them aborts.
ConfusionMatrix evaluate_confusion(nn::SEResNet<float>& model, const DatasetIndex& index,
                                   const AugmentConfig& augment, int shards = 1,
                                   int batch_size = 32);

MetricsReport evaluate(nn::SEResNet<float>& model, const DatasetIndex& index,
                       const AugmentConfig& augment);

struct PredictOutcome {
  std::int64_t frames = 0;
  std::int64_t fallbacks = 0;
};

/// Per video, writes `<video_id>.txt` with one predicted label per frame line,
/// plus a consolidated predictions.csv. Frames without a decodable image get
/// the prediction of the nearest decoded frame of the same video and are
/// listed in fallbacks.log.
PredictOutcome predict(nn::SEResNet<float>& model, const DatasetIndex& index,
                       const AugmentConfig& augment, const std::filesystem::path& out_dir);

}  // namespace fermr
