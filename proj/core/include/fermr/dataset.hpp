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

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <opencv2/core.hpp>

#include "fermr/labels.hpp"

namespace fermr {

enum class Split { Train, Validation };

std::string_view split_name(Split split);
Split split_from_name(std::string_view name);

/// One annotated video frame. `excluded` marks frames that carry the invalid
/// label or whose image file is missing; they stay in the index (prediction
/// needs the full frame list) but never enter training or evaluation.
struct FrameSample {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::filesystem::path image_path;
  int label = kInvalidLabel;
  bool excluded = true;
};

/// Immutable per-split catalog. Samples are ordered by (video_id, frame);
/// class_counts covers valid samples only.
class DatasetIndex {
 public:
  DatasetIndex(Split split, std::vector<FrameSample> samples);

  Split split() const { return split_; }
  const std::vector<FrameSample>& samples() const { return samples_; }
  const std::array<std::int64_t, kNumClasses>& class_counts() const { return class_counts_; }

  std::int64_t num_valid() const { return static_cast<std::int64_t>(valid_positions_.size()); }
  const FrameSample& valid_sample(std::int64_t i) const;

 private:
  Split split_;
  std::vector<FrameSample> samples_;
  std::vector<std::int64_t> valid_positions_;
  std::array<std::int64_t, kNumClasses> class_counts_{};
};

struct ClassStats {
  std::array<std::int64_t, kNumClasses> counts{};
  std::array<double, kNumClasses> percentages{};  // percent, one decimal
  std::int64_t total = 0;
};

enum class WeightScheme { Uniform, InverseFrequency };

std::string_view weight_scheme_name(WeightScheme scheme);
WeightScheme weight_scheme_from_name(std::string_view name);

struct ClassWeights {
  std::array<double, kNumClasses> weights{};
  WeightScheme scheme = WeightScheme::Uniform;
};

/// One (frame_index, label) pair per line; line i is frame i; -1 marks an
/// unannotated frame. Malformed or out-of-range lines raise with the 1-based
/// line number; an empty file raises.
std::vector<std::pair<std::int64_t, int>> parse_annotation_file(const std::filesystem::path& path);

/// Scans `<annotation_dir>/<split>/<video_id>.txt` and pairs each frame with
/// `<image_root>/<video_id>/<frame, 5 digits>.jpg` (or .png). Invalid labels
/// and missing images become excluded samples; a missing image is logged as a
/// warning. With check_images=false image existence is not probed (stats-only
/// use). Raises when the annotation directory is missing or no valid sample
/// remains.
DatasetIndex build_index(const std::filesystem::path& annotation_dir,
                         const std::filesystem::path& image_root, Split split,
                         bool check_images = true);

/// Index over the image tree alone (no annotations, all labels invalid).
/// Used for prediction on unlabeled frames.
DatasetIndex index_from_images(const std::filesystem::path& image_root, Split split);

ClassStats class_statistics(const DatasetIndex& index);
ClassStats class_statistics(const std::array<std::int64_t, kNumClasses>& counts);

/// Generic inverse-frequency weights w_c = N / (K * n_c); the count-weighted
/// mean of the result is 1. All counts must be positive.
std::vector<double> inverse_frequency_weights(std::span<const std::int64_t> counts);

ClassWeights class_weights(const ClassStats& stats, WeightScheme scheme);

/// Per class c, picks max(1, round(fraction * counts[c])) valid samples
/// uniformly without replacement. Deterministic for a fixed seed.
DatasetIndex stratified_subsample(const DatasetIndex& index, double fraction, std::uint64_t seed);

/// Valid samples of `index` minus any sample of `minus` (matched by
/// video_id + frame_index). Excluded samples of `index` are preserved.
DatasetIndex index_difference(const DatasetIndex& index, const DatasetIndex& minus);

/// Decodes valid sample i as 8-bit RGB (grayscale sources are replicated to
/// three channels). Raises naming the path when the image cannot be read.
std::pair<cv::Mat, int> load_sample(const DatasetIndex& index, std::int64_t i);

}  // namespace fermr
