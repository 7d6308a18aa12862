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

#include "fermr/augment.hpp"

#include <cmath>
#include <stdexcept>

#include <opencv2/imgproc.hpp>

namespace fermr {

void ResolutionPolicy::validate() const {
  if (apply_probability < 0.0 || apply_probability > 1.0) {
    throw std::invalid_argument("ResolutionPolicy: apply_probability outside [0,1]");
  }
  if (min_resolution < 1 || min_resolution > max_resolution) {
    throw std::invalid_argument("ResolutionPolicy: need 1 <= min_resolution <= max_resolution");
  }
}

void AugmentConfig::validate() const {
  if (crop_size < 1 || crop_size > resize_shorter_side) {
    throw std::invalid_argument("AugmentConfig: need 1 <= crop_size <= resize_shorter_side");
  }
  if (grayscale_probability < 0.0 || grayscale_probability > 1.0) {
    throw std::invalid_argument("AugmentConfig: grayscale_probability outside [0,1]");
  }
  for (double s : channel_std) {
    if (!(s > 0.0)) throw std::invalid_argument("AugmentConfig: channel_std must be > 0");
  }
  resolution_policy.validate();
}

std::optional<int> draw_resolution(const ResolutionPolicy& policy, Rng& rng) {
  policy.validate();
  if (!rng.bernoulli(policy.apply_probability)) return std::nullopt;
  return static_cast<int>(rng.uniform_int(policy.min_resolution, policy.max_resolution));
}

namespace {

int cv_interp(Interpolation interpolation) {
  switch (interpolation) {
    case Interpolation::Bilinear:
      return cv::INTER_LINEAR;
  }
  throw std::invalid_argument("unknown interpolation mode");
}

}  // namespace

cv::Mat downscale_upscale(const cv::Mat& image, int target_resolution,
                          Interpolation interpolation) {
  if (target_resolution < 1) {
    throw std::invalid_argument("downscale_upscale: target_resolution < 1");
  }
  const int shorter = std::min(image.rows, image.cols);
  if (target_resolution >= shorter) return image;  // clamped no-op, bit exact

  const double scale = static_cast<double>(target_resolution) / shorter;
  const int low_h = std::max(1, static_cast<int>(std::lround(image.rows * scale)));
  const int low_w = std::max(1, static_cast<int>(std::lround(image.cols * scale)));
  cv::Mat low, restored;
  cv::resize(image, low, cv::Size(low_w, low_h), 0, 0, cv_interp(interpolation));
  cv::resize(low, restored, cv::Size(image.cols, image.rows), 0, 0, cv_interp(interpolation));
  return restored;
}

cv::Mat luma_grayscale(const cv::Mat& rgb) {
  CV_Assert(rgb.type() == CV_8UC3);
  cv::Mat out(rgb.size(), CV_8UC3);
  for (int y = 0; y < rgb.rows; ++y) {
    const auto* src = rgb.ptr<cv::Vec3b>(y);
    auto* dst = out.ptr<cv::Vec3b>(y);
    for (int x = 0; x < rgb.cols; ++x) {
      const double luma = 0.299 * src[x][0] + 0.587 * src[x][1] + 0.114 * src[x][2];
      const auto v = cv::saturate_cast<uchar>(std::lround(luma));
      dst[x] = cv::Vec3b(v, v, v);
    }
  }
  return out;
}

cv::Mat random_grayscale(const cv::Mat& rgb, double p, Rng& rng) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("random_grayscale: p outside [0,1]");
  if (!rng.bernoulli(p)) return rgb;
  return luma_grayscale(rgb);
}

cv::Mat resize_shorter_side(const cv::Mat& image, int shorter, Interpolation interpolation) {
  if (shorter < 1) throw std::invalid_argument("resize_shorter_side: shorter < 1");
  const int cur = std::min(image.rows, image.cols);
  if (cur == shorter) return image;  // identity, no resampling
  const double scale = static_cast<double>(shorter) / cur;
  int new_h, new_w;
  if (image.rows <= image.cols) {
    new_h = shorter;
    new_w = std::max(shorter, static_cast<int>(std::lround(image.cols * scale)));
  } else {
    new_w = shorter;
    new_h = std::max(shorter, static_cast<int>(std::lround(image.rows * scale)));
  }
  cv::Mat out;
  cv::resize(image, out, cv::Size(new_w, new_h), 0, 0, cv_interp(interpolation));
  return out;
}

Tensor<float> to_float_chw(const cv::Mat& rgb) {
  CV_Assert(rgb.type() == CV_8UC3);
  const std::int64_t h = rgb.rows, w = rgb.cols;
  Tensor<float> t({3, h, w});
  float* data = t.data();
  for (std::int64_t y = 0; y < h; ++y) {
    const auto* row = rgb.ptr<cv::Vec3b>(static_cast<int>(y));
    for (std::int64_t x = 0; x < w; ++x) {
      for (std::int64_t c = 0; c < 3; ++c) {
        data[(c * h + y) * w + x] = static_cast<float>(row[x][c]) / 255.0f;
      }
    }
  }
  return t;
}

void channel_normalize(Tensor<float>& chw, const std::array<double, 3>& mean,
                       const std::array<double, 3>& std) {
  for (double s : std) {
    if (!(s > 0.0)) throw std::invalid_argument("channel_normalize: std must be > 0");
  }
  const std::int64_t plane = chw.dim(1) * chw.dim(2);
  float* data = chw.data();
  for (std::int64_t c = 0; c < 3; ++c) {
    const float m = static_cast<float>(mean[static_cast<std::size_t>(c)]);
    const float inv = static_cast<float>(1.0 / std[static_cast<std::size_t>(c)]);
    for (std::int64_t i = 0; i < plane; ++i) {
      data[c * plane + i] = (data[c * plane + i] - m) * inv;
    }
  }
}

namespace {

cv::Mat crop(const cv::Mat& image, int x, int y, int size) {
  // clone: crops must own their pixels so later stages never alias the source
  return image(cv::Rect(x, y, size, size)).clone();
}

}  // namespace

Tensor<float> train_transform(const cv::Mat& rgb, const AugmentConfig& config, Rng& rng) {
  config.validate();
  CV_Assert(rgb.rows >= 1 && rgb.cols >= 1 && rgb.type() == CV_8UC3);

  cv::Mat resized = resize_shorter_side(rgb, config.resize_shorter_side, config.interpolation);

  // rng consumption order is part of the determinism contract:
  // crop y, crop x, degradation Bernoulli, [resolution], grayscale Bernoulli.
  const int max_y = resized.rows - config.crop_size;
  const int max_x = resized.cols - config.crop_size;
  const int off_y = max_y > 0 ? static_cast<int>(rng.uniform_int(0, max_y)) : 0;
  const int off_x = max_x > 0 ? static_cast<int>(rng.uniform_int(0, max_x)) : 0;
  cv::Mat patch = crop(resized, off_x, off_y, config.crop_size);

  if (const auto resolution = draw_resolution(config.resolution_policy, rng)) {
    patch = downscale_upscale(patch, *resolution, config.interpolation);
  }
  patch = random_grayscale(patch, config.grayscale_probability, rng);

  Tensor<float> t = to_float_chw(patch);
  channel_normalize(t, config.channel_mean, config.channel_std);
  return t;
}

Tensor<float> eval_transform(const cv::Mat& rgb, const AugmentConfig& config) {
  config.validate();
  CV_Assert(rgb.rows >= 1 && rgb.cols >= 1 && rgb.type() == CV_8UC3);

  cv::Mat resized = resize_shorter_side(rgb, config.resize_shorter_side, config.interpolation);
  const int off_y = (resized.rows - config.crop_size) / 2;
  const int off_x = (resized.cols - config.crop_size) / 2;
  cv::Mat patch = crop(resized, off_x, off_y, config.crop_size);

  Tensor<float> t = to_float_chw(patch);
  channel_normalize(t, config.channel_mean, config.channel_std);
  return t;
}

}  // namespace fermr
