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

#include "fermr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fermr/augment.hpp"
#include "fermr/runtime.hpp"

namespace fermr {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kShuffleStream = 0x7368756666ULL;
constexpr std::uint64_t kSampleStream = 0x73616d706cULL;

// Loads and transforms one batch into an NCHW tensor. Per-sample rng streams
// are derived from (seed, epoch, position in the shuffled epoch order), so
// the result does not depend on the worker count.
Tensor<float> assemble_train_batch(const DatasetIndex& index, std::span<const std::int64_t> order,
                                   std::int64_t first, std::int64_t count,
                                   const AugmentConfig& augment, std::uint64_t seed, int epoch,
                                   std::vector<int>& labels) {
  const std::int64_t side = augment.crop_size;
  Tensor<float> batch({count, 3, side, side});
  labels.assign(static_cast<std::size_t>(count), 0);

  std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(workers())
  for (std::int64_t i = 0; i < count; ++i) {
    try {
      const std::int64_t ordinal = first + i;
      auto [image, label] = load_sample(index, order[static_cast<std::size_t>(ordinal)]);
      Rng rng(derive_seed(seed ^ kSampleStream, static_cast<std::uint64_t>(epoch),
                          static_cast<std::uint64_t>(ordinal)));
      Tensor<float> t = train_transform(image, augment, rng);
      std::copy(t.data(), t.data() + t.numel(), batch.data() + i * t.numel());
      labels[static_cast<std::size_t>(i)] = label;
    } catch (...) {
#pragma omp critical
      error = std::current_exception();
    }
  }
  if (error) std::rethrow_exception(error);
  return batch;
}

void log_line(std::ofstream& log, const std::string& line) {
  log << line << "\n";
  log.flush();
}

std::string metrics_json_fragment(const MetricsReport& r) {
  std::ostringstream out;
  out << "{\"accuracy\":" << r.accuracy << ",\"macro_f1\":" << r.macro_f1
      << ",\"challenge_score\":" << r.challenge_score << "}";
  return out.str();
}

}  // namespace

std::vector<Checkpoint> train(const TrainConfig& config, const DatasetIndex& train_index,
                              const DatasetIndex& selection_index, const fs::path& out_dir) {
  config.validate();
  if (train_index.num_valid() == 0) throw std::invalid_argument("train: empty training index");
  if (selection_index.num_valid() == 0) {
    throw std::invalid_argument("train: empty selection index");
  }

  fs::create_directories(out_dir);
  std::ofstream log(out_dir / "train_log.jsonl");
  if (!log) throw std::runtime_error("cannot write " + (out_dir / "train_log.jsonl").string());

  // Class weights always come from the training-split statistics.
  const ClassWeights weights = class_weights(class_statistics(train_index), config.weight_scheme);
  std::vector<float> weights_f(weights.weights.begin(), weights.weights.end());

  auto model = build_model<float>(config.model, config.seed);
  if (config.model.pretrained_weights_path) {
    const LoadReport report =
        load_pretrained(*model, *config.model.pretrained_weights_path, false);
    std::cerr << "pretrained: " << report.summary() << "\n";
  }
  model->freeze_stages(config.freeze_stages);

  nn::Adam<float> optimizer(model->parameters(), config.adam_beta1, config.adam_beta2,
                            config.adam_eps);

  const std::string config_toml = to_toml(config);
  const std::string digest = config_digest(config);

  std::vector<Checkpoint> checkpoints;
  std::vector<std::int64_t> order(static_cast<std::size_t>(train_index.num_valid()));
  std::iota(order.begin(), order.end(), 0);

  std::int64_t step = 0;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(config.seed ^ kShuffleStream, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    for (std::int64_t first = 0; first < train_index.num_valid(); first += config.batch_size) {
      const std::int64_t count =
          std::min<std::int64_t>(config.batch_size, train_index.num_valid() - first);
      std::vector<int> labels;
      Tensor<float> batch = assemble_train_batch(train_index, order, first, count, config.augment,
                                                 config.seed, epoch, labels);

      Tensor<float> logits = model->forward(batch, /*training=*/true);
      Tensor<float> dlogits(logits.shape());
      const float loss = balanced_cross_entropy_grad<float>(
          logits.data(), count, model->num_classes(), labels, weights_f, dlogits.data());

      ++step;
      if (!std::isfinite(loss)) {
        log_line(log, "{\"step\":" + std::to_string(step) + ",\"epoch\":" + std::to_string(epoch) +
                          ",\"event\":\"non-finite loss\"}");
        throw std::runtime_error("training diverged: non-finite loss at step " +
                                 std::to_string(step));
      }

      model->zero_grad();
      model->backward(dlogits);
      optimizer.step(config.learning_rate);

      char line[160];
      std::snprintf(line, sizeof(line), "{\"step\":%lld,\"epoch\":%d,\"loss\":%.9g}",
                    static_cast<long long>(step), epoch, static_cast<double>(loss));
      log_line(log, line);
    }

    if (epoch % config.checkpoint_every == 0) {
      const MetricsReport metrics = evaluate(*model, selection_index, config.augment);
      CheckpointMetadata meta;
      meta.epoch = epoch;
      meta.seed = config.seed;
      meta.config_digest = digest;
      meta.config_toml = config_toml;
      meta.selection_metrics = metrics;

      const fs::path dir = out_dir / ("ckpt_epoch_" + std::to_string(epoch));
      save_checkpoint(dir, *model, meta);
      checkpoints.push_back({dir, meta});

      log_line(log, "{\"epoch\":" + std::to_string(epoch) +
                        ",\"selection\":" + metrics_json_fragment(metrics) + "}");
    }
  }
  return checkpoints;
}

const Checkpoint& select_model(std::span<const Checkpoint> checkpoints) {
  if (checkpoints.empty()) throw std::invalid_argument("select_model: no checkpoints");
  const Checkpoint* best = nullptr;
  for (const auto& ckpt : checkpoints) {
    if (!ckpt.meta.selection_metrics) {
      throw std::invalid_argument("select_model: checkpoint without selection metrics: " +
                                  ckpt.dir.string());
    }
    if (!best || ckpt.meta.selection_metrics->challenge_score >
                     best->meta.selection_metrics->challenge_score) {
      best = &ckpt;  // strict >: earlier epoch wins ties
    }
  }
  return *best;
}

ConfusionMatrix evaluate_confusion(nn::SEResNet<float>& model, const DatasetIndex& index,
                                   const AugmentConfig& augment, int shards, int batch_size) {
  if (index.num_valid() == 0) throw std::invalid_argument("evaluate: empty index");
  if (shards < 1 || batch_size < 1) {
    throw std::invalid_argument("evaluate: shards and batch_size must be >= 1");
  }
  augment.validate();

  const std::int64_t total = index.num_valid();
  std::int64_t failed = 0;
  ConfusionMatrix merged(model.num_classes());

  for (int shard = 0; shard < shards; ++shard) {
    std::vector<std::int64_t> positions;
    for (std::int64_t i = shard; i < total; i += shards) positions.push_back(i);
    ConfusionMatrix cm(model.num_classes());

    for (std::size_t first = 0; first < positions.size(); first += static_cast<std::size_t>(batch_size)) {
      const auto count = std::min<std::size_t>(static_cast<std::size_t>(batch_size),
                                               positions.size() - first);
      const std::int64_t side = augment.crop_size;
      Tensor<float> batch({static_cast<std::int64_t>(count), 3, side, side});
      std::vector<int> labels(count, -1);
      std::vector<char> ok(count, 0);

      std::exception_ptr error;
#pragma omp parallel for schedule(static) num_threads(workers())
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(count); ++i) {
        try {
          auto [image, label] = load_sample(index, positions[first + static_cast<std::size_t>(i)]);
          Tensor<float> t = eval_transform(image, augment);
          std::copy(t.data(), t.data() + t.numel(), batch.data() + i * t.numel());
          labels[static_cast<std::size_t>(i)] = label;
          ok[static_cast<std::size_t>(i)] = 1;
        } catch (const std::runtime_error& e) {
#pragma omp critical
          {
            std::cerr << "warning: " << e.what() << " (sample skipped)\n";
          }
        } catch (...) {
#pragma omp critical
          error = std::current_exception();
        }
      }
      if (error) std::rethrow_exception(error);

      Tensor<float> logits = model.forward(batch, /*training=*/false);
      for (std::size_t i = 0; i < count; ++i) {
        if (!ok[i]) {
          ++failed;
          continue;
        }
        const float* row = logits.data() + static_cast<std::int64_t>(i) * model.num_classes();
        int arg = 0;
        for (int k = 1; k < model.num_classes(); ++k) {
          if (row[k] > row[arg]) arg = k;
        }
        const int label = labels[i];
        const int pred = arg;
        cm.accumulate(std::span(&pred, 1), std::span(&label, 1));
      }
    }
    merged.merge(cm);
  }

  if (failed * 100 > total) {
    throw std::runtime_error("evaluate: " + std::to_string(failed) + " of " +
                             std::to_string(total) + " samples unreadable (>1%)");
  }
  if (failed > 0) {
    std::cerr << "warning: evaluate skipped " << failed << " unreadable samples\n";
  }
  return merged;
}

MetricsReport evaluate(nn::SEResNet<float>& model, const DatasetIndex& index,
                       const AugmentConfig& augment) {
  return build_report(evaluate_confusion(model, index, augment));
}

namespace {

struct VideoFrames {
  std::vector<const FrameSample*> samples;
};

int argmax_row(const float* row, int k) {
  int arg = 0;
  for (int i = 1; i < k; ++i) {
    if (row[i] > row[arg]) arg = i;
  }
  return arg;
}

}  // namespace

PredictOutcome predict(nn::SEResNet<float>& model, const DatasetIndex& index,
                       const AugmentConfig& augment, const fs::path& out_dir) {
  if (index.samples().empty()) throw std::invalid_argument("predict: empty index");
  augment.validate();
  fs::create_directories(out_dir);
  if (!fs::is_directory(out_dir)) {
    throw std::runtime_error("predict: cannot create output directory " + out_dir.string());
  }

  std::map<std::string, VideoFrames> videos;
  for (const auto& sample : index.samples()) {
    videos[sample.video_id].samples.push_back(&sample);
  }

  std::ofstream csv(out_dir / "predictions.csv");
  csv << "video_id,frame_index,label_int,label_name\n";
  std::ofstream sidecar(out_dir / "fallbacks.log");
  PredictOutcome outcome;

  constexpr int kBatch = 32;
  for (auto& [video_id, video] : videos) {
    std::sort(video.samples.begin(), video.samples.end(),
              [](const FrameSample* a, const FrameSample* b) {
                return a->frame_index < b->frame_index;
              });
    const std::int64_t max_frame = video.samples.back()->frame_index;

    // Decode and predict every readable frame, batched.
    std::map<std::int64_t, int> predicted;
    std::vector<std::pair<std::int64_t, cv::Mat>> pending;
    auto flush = [&]() {
      if (pending.empty()) return;
      const std::int64_t side = augment.crop_size;
      Tensor<float> batch({static_cast<std::int64_t>(pending.size()), 3, side, side});
#pragma omp parallel for schedule(static) num_threads(workers())
      for (std::int64_t i = 0; i < static_cast<std::int64_t>(pending.size()); ++i) {
        Tensor<float> t = eval_transform(pending[static_cast<std::size_t>(i)].second, augment);
        std::copy(t.data(), t.data() + t.numel(), batch.data() + i * t.numel());
      }
      Tensor<float> logits = model.forward(batch, /*training=*/false);
      for (std::size_t i = 0; i < pending.size(); ++i) {
        predicted[pending[i].first] =
            argmax_row(logits.data() + static_cast<std::int64_t>(i) * model.num_classes(),
                       model.num_classes());
      }
      pending.clear();
    };

    for (const FrameSample* sample : video.samples) {
      if (sample->image_path.empty()) continue;
      cv::Mat bgr = cv::imread(sample->image_path.string(), cv::IMREAD_COLOR);
      if (bgr.empty()) continue;
      cv::Mat rgb;
      cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
      pending.emplace_back(sample->frame_index, std::move(rgb));
      if (pending.size() == kBatch) flush();
    }
    flush();

    if (predicted.empty()) {
      throw std::runtime_error("predict: video '" + video_id + "' has no decodable frame");
    }

    // One label per frame line, missing frames filled from the nearest
    // decoded neighbor (ties to the earlier frame).
    std::ofstream txt(out_dir / (video_id + ".txt"));
    for (std::int64_t frame = 0; frame <= max_frame; ++frame) {
      int label;
      const auto hit = predicted.find(frame);
      if (hit != predicted.end()) {
        label = hit->second;
      } else {
        auto after = predicted.lower_bound(frame);
        std::int64_t best_frame;
        if (after == predicted.begin()) {
          best_frame = after->first;
        } else {
          auto before = std::prev(after);
          if (after == predicted.end() ||
              (frame - before->first) <= (after->first - frame)) {
            best_frame = before->first;
          } else {
            best_frame = after->first;
          }
        }
        label = predicted.at(best_frame);
        sidecar << video_id << "," << frame << "," << best_frame << "\n";
        ++outcome.fallbacks;
      }
      txt << label << "\n";
      csv << video_id << "," << frame << "," << label << "," << expression_name(label) << "\n";
      ++outcome.frames;
    }
  }
  return outcome;
}

}  // namespace fermr
