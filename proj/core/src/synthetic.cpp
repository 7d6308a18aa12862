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

#include "fermr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "fermr/rng.hpp"

namespace fermr {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kFrameStream = 0x73796e7468ULL;

cv::Vec3d hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  if (hp < 1) {
    r = c; g = x;
  } else if (hp < 2) {
    r = x; g = c;
  } else if (hp < 3) {
    g = c; b = x;
  } else if (hp < 4) {
    g = x; b = c;
  } else if (hp < 5) {
    r = x; b = c;
  } else {
    r = c; b = x;
  }
  const double m = v - c;
  return {r + m, g + m, b + m};
}

}  // namespace

cv::Mat synthetic_frame(int label, std::uint64_t frame_seed, int image_size) {
  if (!is_valid_label(label)) throw std::invalid_argument("synthetic_frame: bad label");
  Rng rng(frame_seed);

  // Class recipe (fixed constants) + per-image jitter (from the seed).
  const double hue = (label + rng.uniform(-0.35, 0.35)) / 7.0;
  const double frequency = 1.0 + label + rng.uniform(-0.2, 0.2);  // cycles per image
  const double theta = label * M_PI / 7.0 + rng.uniform(-0.12, 0.12);
  const double phase = rng.uniform(0.0, 2.0 * M_PI);
  const double amplitude = rng.uniform(0.25, 0.40);
  const double saturation = rng.uniform(0.50, 0.85);
  const double brightness = rng.uniform(0.40, 0.80);
  const double noise_sigma = rng.uniform(0.05, 0.10);

  const double ct = std::cos(theta), st = std::sin(theta);
  cv::Mat rgb(image_size, image_size, CV_8UC3);
  for (int y = 0; y < image_size; ++y) {
    auto* row = rgb.ptr<cv::Vec3b>(y);
    for (int x = 0; x < image_size; ++x) {
      const double u = (x * ct + y * st) / image_size;
      const double wave = 1.0 + amplitude * std::sin(2.0 * M_PI * frequency * u + phase);
      const cv::Vec3d base = hsv_to_rgb(hue, saturation, brightness * wave * 0.5);
      for (int ch = 0; ch < 3; ++ch) {
        const double v = base[ch] + rng.gaussian(0.0, noise_sigma);
        row[x][ch] = cv::saturate_cast<uchar>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
      }
    }
  }
  return rgb;
}

void generate_synthetic_dataset(const fs::path& root, const SyntheticSpec& spec) {
  if (spec.per_class < 1) throw std::invalid_argument("generate_synthetic_dataset: per_class < 1");
  if (spec.videos < 1) throw std::invalid_argument("generate_synthetic_dataset: videos < 1");

  const fs::path annotation_dir = root / "annotations" / std::string(split_name(spec.split));
  const fs::path image_root = root / "images";
  fs::create_directories(annotation_dir);
  fs::create_directories(image_root);
  if (!fs::is_directory(annotation_dir)) {
    throw std::runtime_error("cannot create " + annotation_dir.string());
  }

  const std::int64_t total = static_cast<std::int64_t>(spec.per_class) * kNumClasses;
  const std::int64_t per_video = (total + spec.videos - 1) / spec.videos;
  const auto split_tag = static_cast<std::uint64_t>(spec.split == Split::Train ? 1 : 2);

  for (std::int64_t g = 0; g < total; ++g) {
    const int video = static_cast<int>(g / per_video);
    const std::int64_t frame = g % per_video;
    const int label = static_cast<int>(g % kNumClasses);

    // Video ids carry the split: splits never share videos.
    char video_name[40];
    std::snprintf(video_name, sizeof(video_name), "synth_%s_%02d",
                  spec.split == Split::Train ? "train" : "val", video);
    const fs::path video_dir = image_root / video_name;
    fs::create_directories(video_dir);

    const std::uint64_t frame_seed =
        derive_seed(spec.seed ^ kFrameStream, split_tag, static_cast<std::uint64_t>(g));
    cv::Mat rgb = synthetic_frame(label, frame_seed, spec.image_size);
    cv::Mat bgr;
    cv::cvtColor(rgb, bgr, cv::COLOR_RGB2BGR);

    char frame_name[16];
    std::snprintf(frame_name, sizeof(frame_name), "%05lld.png", static_cast<long long>(frame));
    if (!cv::imwrite((video_dir / frame_name).string(), bgr)) {
      throw std::runtime_error("cannot write " + (video_dir / frame_name).string());
    }

    std::ofstream ann(annotation_dir / (std::string(video_name) + ".txt"),
                      frame == 0 ? std::ios::trunc : std::ios::app);
    if (!ann) {
      throw std::runtime_error("cannot write annotation for " + std::string(video_name));
    }
    ann << label << "\n";
  }
}

}  // namespace fermr
