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

#include "fermr/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fermr/rng.hpp"

namespace fermr {

namespace fs = std::filesystem;

std::string_view split_name(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
  }
  throw std::invalid_argument("split_name: unknown split");
}

Split split_from_name(std::string_view name) {
  if (name == "train") return Split::Train;
  if (name == "validation") return Split::Validation;
  throw std::invalid_argument("unknown split '" + std::string(name) +
                              "' (expected train|validation)");
}

std::string_view weight_scheme_name(WeightScheme scheme) {
  switch (scheme) {
    case WeightScheme::Uniform:
      return "uniform";
    case WeightScheme::InverseFrequency:
      return "inverse-frequency";
  }
  throw std::invalid_argument("weight_scheme_name: unknown scheme");
}

WeightScheme weight_scheme_from_name(std::string_view name) {
  if (name == "uniform") return WeightScheme::Uniform;
  if (name == "inverse-frequency") return WeightScheme::InverseFrequency;
  throw std::invalid_argument("unknown weight scheme '" + std::string(name) +
                              "' (expected uniform|inverse-frequency)");
}

DatasetIndex::DatasetIndex(Split split, std::vector<FrameSample> samples)
    : split_(split), samples_(std::move(samples)) {
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const auto& s = samples_[i];
    if (!s.excluded) {
      if (!is_valid_label(s.label)) {
        throw std::logic_error("DatasetIndex: non-excluded sample with invalid label");
      }
      valid_positions_.push_back(static_cast<std::int64_t>(i));
      class_counts_[static_cast<std::size_t>(s.label)] += 1;
    }
  }
}

const FrameSample& DatasetIndex::valid_sample(std::int64_t i) const {
  if (i < 0 || i >= num_valid()) {
    throw std::out_of_range("DatasetIndex::valid_sample: index " + std::to_string(i) +
                            " outside [0," + std::to_string(num_valid()) + ")");
  }
  return samples_[static_cast<std::size_t>(valid_positions_[static_cast<std::size_t>(i)])];
}

std::vector<std::pair<std::int64_t, int>> parse_annotation_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open annotation file: " + path.string());

  std::vector<std::pair<std::int64_t, int>> entries;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string_view sv(line);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    while (!sv.empty() && (sv.back() == ' ' || sv.back() == '\t')) sv.remove_suffix(1);

    int value = 0;
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc{} || ptr != sv.data() + sv.size()) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": expected an integer, got '" + std::string(sv) + "'");
    }
    if (value != kInvalidLabel && !is_valid_label(value)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": label " +
                               std::to_string(value) + " outside {-1..6}");
    }
    entries.emplace_back(line_no - 1, value);
  }
  if (entries.empty()) throw std::runtime_error("empty annotation file: " + path.string());
  return entries;
}

namespace {

std::string frame_file_stem(std::int64_t frame_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%05lld", static_cast<long long>(frame_index));
  return buf;
}

// Resolves `<image_root>/<video_id>/<frame, 5 digits>.jpg` preferring .jpg,
// falling back to .png. Empty path when neither exists.
fs::path resolve_image_path(const fs::path& video_dir, std::int64_t frame_index) {
  const std::string stem = frame_file_stem(frame_index);
  fs::path jpg = video_dir / (stem + ".jpg");
  if (fs::exists(jpg)) return jpg;
  fs::path png = video_dir / (stem + ".png");
  if (fs::exists(png)) return png;
  return {};
}

}  // namespace

DatasetIndex build_index(const fs::path& annotation_dir, const fs::path& image_root, Split split,
                         bool check_images) {
  const fs::path split_dir = annotation_dir / std::string(split_name(split));
  if (!fs::is_directory(split_dir)) {
    throw std::runtime_error("annotation directory not found: " + split_dir.string());
  }

  std::vector<fs::path> annotation_files;
  for (const auto& entry : fs::directory_iterator(split_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      annotation_files.push_back(entry.path());
    }
  }
  if (annotation_files.empty()) {
    throw std::runtime_error("no annotation files under " + split_dir.string());
  }
  std::sort(annotation_files.begin(), annotation_files.end());

  std::vector<FrameSample> samples;
  for (const auto& file : annotation_files) {
    const std::string video_id = file.stem().string();
    const fs::path video_dir = image_root / video_id;
    for (const auto& [frame, label] : parse_annotation_file(file)) {
      FrameSample s;
      s.video_id = video_id;
      s.frame_index = frame;
      s.label = label;
      if (check_images) {
        s.image_path = resolve_image_path(video_dir, frame);
        if (s.image_path.empty() && is_valid_label(label)) {
          std::cerr << "warning: missing image for " << video_id << " frame " << frame
                    << ", sample excluded\n";
        }
      } else {
        s.image_path = video_dir / (frame_file_stem(frame) + ".jpg");
      }
      const bool image_ok = !check_images || !s.image_path.empty();
      s.excluded = !is_valid_label(label) || !image_ok;
      samples.push_back(std::move(s));
    }
  }

  DatasetIndex index(split, std::move(samples));
  if (index.num_valid() == 0) {
    throw std::runtime_error("no valid samples under " + split_dir.string());
  }
  return index;
}

DatasetIndex index_from_images(const fs::path& image_root, Split split) {
  if (!fs::is_directory(image_root)) {
    throw std::runtime_error("image root not found: " + image_root.string());
  }
  std::vector<FrameSample> samples;
  std::vector<fs::path> video_dirs;
  for (const auto& entry : fs::directory_iterator(image_root)) {
    if (entry.is_directory()) video_dirs.push_back(entry.path());
  }
  std::sort(video_dirs.begin(), video_dirs.end());
  for (const auto& dir : video_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      const auto ext = entry.path().extension();
      if (entry.is_regular_file() && (ext == ".jpg" || ext == ".png")) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      FrameSample s;
      s.video_id = dir.filename().string();
      s.frame_index = std::stoll(file.stem().string());
      s.image_path = file;
      s.label = kInvalidLabel;
      s.excluded = true;  // unlabeled: usable for prediction only
      samples.push_back(std::move(s));
    }
  }
  if (samples.empty()) throw std::runtime_error("no images under " + image_root.string());
  return DatasetIndex(split, std::move(samples));
}

ClassStats class_statistics(const std::array<std::int64_t, kNumClasses>& counts) {
  ClassStats stats;
  stats.counts = counts;
  stats.total = std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
  if (stats.total <= 0) throw std::invalid_argument("class_statistics: empty counts");
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    const double pct = 100.0 * static_cast<double>(counts[c]) / static_cast<double>(stats.total);
    stats.percentages[c] = std::nearbyint(pct * 10.0) / 10.0;
  }
  return stats;
}

ClassStats class_statistics(const DatasetIndex& index) {
  return class_statistics(index.class_counts());
}

std::vector<double> inverse_frequency_weights(std::span<const std::int64_t> counts) {
  const auto k = static_cast<double>(counts.size());
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c <= 0) {
      throw std::invalid_argument(
          "inverse_frequency_weights: zero class count; fall back to the uniform scheme or "
          "smooth the counts");
    }
    total += c;
  }
  std::vector<double> weights(counts.size());
  for (std::size_t c = 0; c < counts.size(); ++c) {
    weights[c] = static_cast<double>(total) / (k * static_cast<double>(counts[c]));
  }
  return weights;
}

ClassWeights class_weights(const ClassStats& stats, WeightScheme scheme) {
  ClassWeights cw;
  cw.scheme = scheme;
  if (scheme == WeightScheme::Uniform) {
    cw.weights.fill(1.0);
    return cw;
  }
  const auto weights = inverse_frequency_weights(std::span(stats.counts));
  std::copy(weights.begin(), weights.end(), cw.weights.begin());
  return cw;
}

DatasetIndex stratified_subsample(const DatasetIndex& index, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("stratified_subsample: fraction outside (0,1]");
  }

  // Valid sample ordinals per class, in index order.
  std::array<std::vector<std::int64_t>, kNumClasses> per_class;
  for (std::int64_t i = 0; i < index.num_valid(); ++i) {
    per_class[static_cast<std::size_t>(index.valid_sample(i).label)].push_back(i);
  }

  std::vector<std::int64_t> chosen;
  for (std::size_t c = 0; c < kNumClasses; ++c) {
    auto& pool = per_class[c];
    if (pool.empty()) continue;
    const auto want = std::min<std::int64_t>(
        static_cast<std::int64_t>(pool.size()),
        std::max<std::int64_t>(1, std::llround(fraction * static_cast<double>(pool.size()))));
    Rng rng(derive_seed(seed, 0x5374726174ULL, c));
    rng.shuffle(pool);
    chosen.insert(chosen.end(), pool.begin(), pool.begin() + want);
  }
  std::sort(chosen.begin(), chosen.end());

  std::vector<FrameSample> samples;
  samples.reserve(chosen.size());
  for (auto i : chosen) samples.push_back(index.valid_sample(i));
  return DatasetIndex(index.split(), std::move(samples));
}

DatasetIndex index_difference(const DatasetIndex& index, const DatasetIndex& minus) {
  auto key = [](const FrameSample& s) { return s.video_id + "#" + std::to_string(s.frame_index); };
  std::vector<std::string> removed;
  removed.reserve(minus.samples().size());
  for (const auto& s : minus.samples()) removed.push_back(key(s));
  std::sort(removed.begin(), removed.end());

  std::vector<FrameSample> samples;
  for (const auto& s : index.samples()) {
    if (!std::binary_search(removed.begin(), removed.end(), key(s))) samples.push_back(s);
  }
  return DatasetIndex(index.split(), std::move(samples));
}

std::pair<cv::Mat, int> load_sample(const DatasetIndex& index, std::int64_t i) {
  const FrameSample& sample = index.valid_sample(i);
  cv::Mat bgr = cv::imread(sample.image_path.string(), cv::IMREAD_COLOR);
  if (bgr.empty()) {
    throw std::runtime_error("cannot decode image: " + sample.image_path.string());
  }
  cv::Mat rgb;
  cv::cvtColor(bgr, rgb, cv::COLOR_BGR2RGB);
  return {rgb, sample.label};
}

}  // namespace fermr
