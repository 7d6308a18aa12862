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

// Command-line front end: stats, train, eval, predict, report, gen-synthetic.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fermr/augment.hpp"
#include "fermr/checkpoint.hpp"
#include "fermr/config.hpp"
#include "fermr/dataset.hpp"
#include "fermr/engine.hpp"
#include "fermr/formats.hpp"
#include "fermr/metrics.hpp"
#include "fermr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace fermr;

namespace {

struct CommonFlags {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out_dir;
};

// Every subcommand accepts --config, --seed and --out.
void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "Run config file (TOML)");
  auto* seed = cmd->add_option("--seed", flags.seed, "Random seed");
  seed->each([&flags](const std::string&) { flags.seed_given = true; });
  cmd->add_option("--out", flags.out_dir, "Output directory");
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

TrainConfig load_config(const CommonFlags& flags) {
  TrainConfig config;
  if (!flags.config_path.empty()) {
    config = train_config_from_toml(toml::parse_file(flags.config_path));
  }
  if (flags.seed_given) config.seed = flags.seed;
  return config;
}

DataPaths load_data_paths(const CommonFlags& flags, const std::string& annotations,
                          const std::string& images) {
  DataPaths paths;
  if (!flags.config_path.empty()) {
    paths = data_paths_from_toml(toml::parse_file(flags.config_path));
  }
  if (!annotations.empty()) paths.annotation_dir = annotations;
  if (!images.empty()) paths.image_root = images;
  return paths;
}

cv::Mat tensor_to_image(const Tensor<float>& chw, const std::array<double, 3>& mean,
                        const std::array<double, 3>& std) {
  const int h = static_cast<int>(chw.dim(1)), w = static_cast<int>(chw.dim(2));
  cv::Mat bgr(h, w, CV_8UC3);
  for (int y = 0; y < h; ++y) {
    auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        const double v =
            (chw[(c * h + y) * static_cast<std::int64_t>(w) + x] * std[static_cast<std::size_t>(c)] +
             mean[static_cast<std::size_t>(c)]) * 255.0;
        row[x][2 - c] = cv::saturate_cast<uchar>(std::lround(v));
      }
    }
  }
  return bgr;
}

void dump_augment_pairs(const DatasetIndex& index, const TrainConfig& config, int pairs,
                        const fs::path& dir) {
  fs::create_directories(dir);
  const auto count = std::min<std::int64_t>(pairs, index.num_valid());
  for (std::int64_t i = 0; i < count; ++i) {
    auto [image, label] = load_sample(index, i);
    cv::Mat before;
    cv::cvtColor(image, before, cv::COLOR_RGB2BGR);
    Rng rng(derive_seed(config.seed, 0x64756d70ULL, static_cast<std::uint64_t>(i)));
    Tensor<float> t = train_transform(image, config.augment, rng);
    char name[64];
    std::snprintf(name, sizeof(name), "sample_%03lld_before.png", static_cast<long long>(i));
    cv::imwrite((dir / name).string(), before);
    std::snprintf(name, sizeof(name), "sample_%03lld_after.png", static_cast<long long>(i));
    cv::imwrite((dir / name).string(),
                tensor_to_image(t, config.augment.channel_mean, config.augment.channel_std));
  }
}

int run_stats(const CommonFlags& flags, const std::string& counts_file,
              const std::string& annotations, const std::string& images,
              const std::string& split) {
  std::vector<std::pair<std::string, ClassStats>> rows;
  if (!counts_file.empty()) {
    for (const auto& [name, counts] : read_counts_csv(counts_file)) {
      rows.emplace_back(name, class_statistics(counts));
    }
  } else {
    const DataPaths paths = load_data_paths(flags, annotations, images);
    if (paths.annotation_dir.empty()) {
      throw std::runtime_error("stats needs --counts-file or --annotations");
    }
    const DatasetIndex index = build_index(paths.annotation_dir, paths.image_root,
                                           split_from_name(split), !paths.image_root.empty());
    rows.emplace_back(split, class_statistics(index));
  }

  const std::string table = stats_table_text(rows);
  std::cout << table;
  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    write_text_file(fs::path(flags.out_dir) / "stats.txt", table);
    write_text_file(fs::path(flags.out_dir) / "stats.csv", stats_csv(rows));
  }
  return 0;
}

int run_train(const CommonFlags& flags, TrainConfig config, const std::string& annotations,
              const std::string& images, int dump_augment) {
  if (flags.out_dir.empty()) throw std::runtime_error("train needs --out");
  const DataPaths paths = load_data_paths(flags, annotations, images);
  if (paths.annotation_dir.empty() || paths.image_root.empty()) {
    throw std::runtime_error("train needs --annotations and --images");
  }
  config.validate();

  const DatasetIndex train_index = build_index(paths.annotation_dir, paths.image_root, Split::Train);
  const DatasetIndex val_index =
      build_index(paths.annotation_dir, paths.image_root, Split::Validation);
  // Selection subsample carved from the validation split before any
  // evaluation; the final full-set report excludes it by default.
  const DatasetIndex selection =
      stratified_subsample(val_index, config.selection_fraction, config.seed);

  fs::create_directories(flags.out_dir);
  write_text_file(fs::path(flags.out_dir) / "resolved_config.toml", to_toml(config));

  if (dump_augment > 0) {
    dump_augment_pairs(train_index, config, dump_augment, fs::path(flags.out_dir) / "augment_dump");
  }

  const auto checkpoints = train(config, train_index, selection, flags.out_dir);
  const Checkpoint& best = select_model(checkpoints);

  std::ostringstream best_json;
  best_json << "{\n  \"epoch\": " << best.meta.epoch << ",\n  \"dir\": \""
            << best.dir.filename().string() << "\",\n  \"selection_metrics\": "
            << metrics_report_to_json(*best.meta.selection_metrics) << "\n}\n";
  write_text_file(fs::path(flags.out_dir) / "best.json", best_json.str());

  std::cout << "trained " << checkpoints.size() << " checkpoint(s); best epoch " << best.meta.epoch
            << " (selection challenge score "
            << round_display(best.meta.selection_metrics->challenge_score, 3) << ")\n";
  return 0;
}

int run_eval(const CommonFlags& flags, const std::string& checkpoint, const std::string& annotations,
             const std::string& images, const std::string& split, bool include_selection,
             int shards, bool force) {
  if (checkpoint.empty()) throw std::runtime_error("eval needs --checkpoint");
  const DataPaths paths = load_data_paths(flags, annotations, images);
  if (paths.annotation_dir.empty() || paths.image_root.empty()) {
    throw std::runtime_error("eval needs --annotations and --images");
  }

  std::optional<std::string> expected_digest;
  if (!flags.config_path.empty()) {
    expected_digest = config_digest(train_config_from_toml(toml::parse_file(flags.config_path)));
  }
  auto [model, meta] = load_checkpoint(checkpoint, expected_digest, force);
  const TrainConfig config = train_config_from_toml(toml::parse(meta.config_toml));

  DatasetIndex index = build_index(paths.annotation_dir, paths.image_root, split_from_name(split));
  if (split_from_name(split) == Split::Validation && !include_selection) {
    const DatasetIndex selection =
        stratified_subsample(index, config.selection_fraction, config.seed);
    index = index_difference(index, selection);
  }

  const ConfusionMatrix cm = evaluate_confusion(*model, index, config.augment, shards);
  const MetricsReport report = build_report(cm);
  const std::string text = report_text(report);
  std::cout << text;

  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    write_text_file(fs::path(flags.out_dir) / "report.txt", text);
    write_text_file(fs::path(flags.out_dir) / "report.json", metrics_report_to_json(report) + "\n");
    write_confusion_json(fs::path(flags.out_dir) / "confusion.json", cm);
  }
  return 0;
}

int run_predict(const CommonFlags& flags, const std::string& checkpoint,
                const std::string& annotations, const std::string& images,
                const std::string& split, bool force) {
  if (checkpoint.empty()) throw std::runtime_error("predict needs --checkpoint");
  if (flags.out_dir.empty()) throw std::runtime_error("predict needs --out");
  const DataPaths paths = load_data_paths(flags, annotations, images);
  if (paths.image_root.empty()) throw std::runtime_error("predict needs --images");

  auto [model, meta] = load_checkpoint(checkpoint, std::nullopt, force);
  const TrainConfig config = train_config_from_toml(toml::parse(meta.config_toml));

  const DatasetIndex index =
      paths.annotation_dir.empty()
          ? index_from_images(paths.image_root, split_from_name(split))
          : build_index(paths.annotation_dir, paths.image_root, split_from_name(split));

  const PredictOutcome outcome = predict(*model, index, config.augment, flags.out_dir);
  std::cout << "predicted " << outcome.frames << " frames (" << outcome.fallbacks
            << " fallback(s))\n";
  return 0;
}

int run_report(const CommonFlags& flags, const std::string& confusion_file,
               const std::string& predictions_csv, const std::string& annotations,
               const std::string& split) {
  ConfusionMatrix cm(kNumClasses);
  if (!confusion_file.empty()) {
    cm = read_confusion_json(confusion_file);
  } else if (!predictions_csv.empty()) {
    if (annotations.empty()) {
      throw std::runtime_error("report --predictions needs --annotations");
    }
    // Score a predictions CSV against the annotation ground truth.
    std::map<std::string, int> predicted;
    std::ifstream in(predictions_csv);
    if (!in) throw std::runtime_error("cannot open " + predictions_csv);
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (header) {
        header = false;
        continue;
      }
      if (line.empty()) continue;
      std::istringstream ss(line);
      std::string video, frame, label;
      std::getline(ss, video, ',');
      std::getline(ss, frame, ',');
      std::getline(ss, label, ',');
      predicted[video + "#" + frame] = std::stoi(label);
    }
    const DatasetIndex index =
        build_index(annotations, "", split_from_name(split), /*check_images=*/false);
    for (std::int64_t i = 0; i < index.num_valid(); ++i) {
      const FrameSample& s = index.valid_sample(i);
      const auto it = predicted.find(s.video_id + "#" + std::to_string(s.frame_index));
      if (it == predicted.end()) {
        throw std::runtime_error("no prediction for " + s.video_id + " frame " +
                                 std::to_string(s.frame_index));
      }
      const int pred = it->second;
      cm.accumulate(std::span(&pred, 1), std::span(&s.label, 1));
    }
  } else {
    throw std::runtime_error("report needs --confusion or --predictions");
  }

  const MetricsReport report = build_report(cm);
  const std::string text = report_text(report);
  std::cout << text;
  if (!flags.out_dir.empty()) {
    fs::create_directories(flags.out_dir);
    write_text_file(fs::path(flags.out_dir) / "report.txt", text);
    write_text_file(fs::path(flags.out_dir) / "report.json", metrics_report_to_json(report) + "\n");
  }
  return 0;
}

int run_gen_synthetic(const CommonFlags& flags, int per_class, const std::string& split,
                      int videos, int image_size) {
  if (flags.out_dir.empty()) throw std::runtime_error("gen-synthetic needs --out");
  SyntheticSpec spec;
  spec.per_class = per_class;
  spec.seed = flags.seed;
  spec.split = split_from_name(split);
  spec.videos = videos;
  spec.image_size = image_size;
  generate_synthetic_dataset(flags.out_dir, spec);
  std::cout << "wrote " << per_class * kNumClasses << " images under " << flags.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-resolution facial expression recognition pipeline"};
  app.require_subcommand(1);

  // stats
  CommonFlags stats_flags;
  std::string stats_counts, stats_annotations, stats_images, stats_split = "train";
  auto* stats_cmd = app.add_subcommand("stats", "Class cardinality table for a split");
  add_common(stats_cmd, stats_flags);
  stats_cmd->add_option("--counts-file", stats_counts, "Counts CSV (skips annotation scan)");
  stats_cmd->add_option("--annotations", stats_annotations, "Annotation root directory");
  stats_cmd->add_option("--images", stats_images, "Image root directory");
  stats_cmd->add_option("--split", stats_split, "train|validation");

  // train
  CommonFlags train_flags;
  std::string train_annotations, train_images;
  int dump_augment = 0;
  double lr = 0;
  int epochs = 0, batch_size = 0, checkpoint_every = 0, freeze_stages = -1;
  double selection_fraction = 0, grayscale_p = -1, res_p = -1;
  int res_min = 0, res_max = 0, crop_size = 0, resize_shorter = 0;
  std::string weight_scheme, depth, pretrained;
  auto* train_cmd = app.add_subcommand("train", "Train with periodic selection evaluation");
  add_common(train_cmd, train_flags);
  train_cmd->add_option("--annotations", train_annotations, "Annotation root directory");
  train_cmd->add_option("--images", train_images, "Image root directory");
  auto* o_lr = train_cmd->add_option("--learning-rate", lr, "Adam learning rate");
  auto* o_epochs = train_cmd->add_option("--epochs", epochs, "Training epochs");
  auto* o_batch = train_cmd->add_option("--batch-size", batch_size, "Mini-batch size");
  auto* o_every = train_cmd->add_option("--checkpoint-every", checkpoint_every, "Epoch interval");
  auto* o_frac = train_cmd->add_option("--selection-fraction", selection_fraction,
                                       "Validation fraction for model selection");
  auto* o_scheme = train_cmd->add_option("--weight-scheme", weight_scheme,
                                         "uniform|inverse-frequency");
  auto* o_depth = train_cmd->add_option("--depth", depth, "resnet50|resnet-small");
  auto* o_pre = train_cmd->add_option("--pretrained", pretrained, "Pretrained weights directory");
  auto* o_freeze = train_cmd->add_option("--freeze-stages", freeze_stages, "Freeze stem+stages 1..N");
  auto* o_gray = train_cmd->add_option("--grayscale-probability", grayscale_p, "");
  auto* o_resp = train_cmd->add_option("--resolution-probability", res_p, "");
  auto* o_rmin = train_cmd->add_option("--resolution-min", res_min, "");
  auto* o_rmax = train_cmd->add_option("--resolution-max", res_max, "");
  auto* o_crop = train_cmd->add_option("--crop-size", crop_size, "");
  auto* o_short = train_cmd->add_option("--resize-shorter-side", resize_shorter, "");
  train_cmd->add_option("--dump-augment", dump_augment,
                        "Write N before/after augmentation pairs for visual audit");

  // eval
  CommonFlags eval_flags;
  std::string eval_checkpoint, eval_annotations, eval_images, eval_split = "validation";
  bool include_selection = false, eval_force = false;
  int shards = 1;
  auto* eval_cmd = app.add_subcommand("eval", "Full-split evaluation of a checkpoint");
  add_common(eval_cmd, eval_flags);
  eval_cmd->add_option("--checkpoint", eval_checkpoint, "Checkpoint directory");
  eval_cmd->add_option("--annotations", eval_annotations, "Annotation root directory");
  eval_cmd->add_option("--images", eval_images, "Image root directory");
  eval_cmd->add_option("--split", eval_split, "train|validation");
  eval_cmd->add_flag("--include-selection", include_selection,
                     "Score the model-selection subsample too");
  eval_cmd->add_option("--shards", shards, "Shard the evaluation N ways");
  eval_cmd->add_flag("--force", eval_force, "Load despite a config digest mismatch");

  // predict
  CommonFlags predict_flags;
  std::string predict_checkpoint, predict_annotations, predict_images, predict_split = "validation";
  bool predict_force = false;
  auto* predict_cmd = app.add_subcommand("predict", "Emit per-video prediction files");
  add_common(predict_cmd, predict_flags);
  predict_cmd->add_option("--checkpoint", predict_checkpoint, "Checkpoint directory");
  predict_cmd->add_option("--annotations", predict_annotations, "Annotation root (optional)");
  predict_cmd->add_option("--images", predict_images, "Image root directory");
  predict_cmd->add_option("--split", predict_split, "train|validation");
  predict_cmd->add_flag("--force", predict_force, "Load despite a config digest mismatch");

  // report
  CommonFlags report_flags;
  std::string report_confusion, report_predictions, report_annotations, report_split = "validation";
  auto* report_cmd = app.add_subcommand("report", "Metric tables from a confusion matrix or predictions");
  add_common(report_cmd, report_flags);
  report_cmd->add_option("--confusion", report_confusion, "confusion.json from eval");
  report_cmd->add_option("--predictions", report_predictions, "predictions.csv from predict");
  report_cmd->add_option("--annotations", report_annotations, "Annotation root (ground truth)");
  report_cmd->add_option("--split", report_split, "train|validation");

  // gen-synthetic
  CommonFlags gen_flags;
  int per_class = 64, gen_videos = 4, gen_image_size = 112;
  std::string gen_split = "train";
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Write a deterministic synthetic dataset");
  add_common(gen_cmd, gen_flags);
  gen_cmd->add_option("--per-class", per_class, "Images per class");
  gen_cmd->add_option("--split", gen_split, "train|validation");
  gen_cmd->add_option("--videos", gen_videos, "Video directories to spread frames over");
  gen_cmd->add_option("--image-size", gen_image_size, "Square image size in pixels");

  CLI11_PARSE(app, argc, argv);

  try {
    if (stats_cmd->parsed()) {
      return run_stats(stats_flags, stats_counts, stats_annotations, stats_images, stats_split);
    }
    if (train_cmd->parsed()) {
      TrainConfig config = load_config(train_flags);
      if (o_lr->count()) config.learning_rate = lr;
      if (o_epochs->count()) config.epochs = epochs;
      if (o_batch->count()) config.batch_size = batch_size;
      if (o_every->count()) config.checkpoint_every = checkpoint_every;
      if (o_frac->count()) config.selection_fraction = selection_fraction;
      if (o_scheme->count()) config.weight_scheme = weight_scheme_from_name(weight_scheme);
      if (o_depth->count()) config.model.depth = depth_from_name(depth);
      if (o_pre->count()) config.model.pretrained_weights_path = pretrained;
      if (o_freeze->count()) config.freeze_stages = freeze_stages;
      if (o_gray->count()) config.augment.grayscale_probability = grayscale_p;
      if (o_resp->count()) config.augment.resolution_policy.apply_probability = res_p;
      if (o_rmin->count()) config.augment.resolution_policy.min_resolution = res_min;
      if (o_rmax->count()) config.augment.resolution_policy.max_resolution = res_max;
      if (o_crop->count()) config.augment.crop_size = crop_size;
      if (o_short->count()) config.augment.resize_shorter_side = resize_shorter;
      return run_train(train_flags, config, train_annotations, train_images, dump_augment);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_flags, eval_checkpoint, eval_annotations, eval_images, eval_split,
                      include_selection, shards, eval_force);
    }
    if (predict_cmd->parsed()) {
      return run_predict(predict_flags, predict_checkpoint, predict_annotations, predict_images,
                         predict_split, predict_force);
    }
    if (report_cmd->parsed()) {
      return run_report(report_flags, report_confusion, report_predictions, report_annotations,
                        report_split);
    }
    if (gen_cmd->parsed()) {
      return run_gen_synthetic(gen_flags, per_class, gen_split, gen_videos, gen_image_size);
    }
  } catch (const std::exception& e) {
    std::cerr << "fermr: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
