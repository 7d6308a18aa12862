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
#include <optional>

#include <opencv2/core.hpp>

#include "fermr/rng.hpp"
#include "fermr/tensor.hpp"

namespace fermr {

/// Two-stage stochastic resolution selection: first whether to degrade at
/// all, then which resolution to degrade to.
struct ResolutionPolicy {
  double apply_probability = 0.5;
  int min_resolution = 8;
  int max_resolution = 256;

  void validate() const;
};

enum class Interpolation { Bilinear };

struct AugmentConfig {
  int resize_shorter_side = 256;
  int crop_size = 224;
  double grayscale_probability = 0.2;
  std::array<double, 3> channel_mean = {0.485, 0.456, 0.406};
  std::array<double, 3> channel_std = {0.229, 0.224, 0.225};
  ResolutionPolicy resolution_policy;
  Interpolation interpolation = Interpolation::Bilinear;

  void validate() const;
};

/// First extraction: Bernoulli(apply_probability) decides whether to degrade.
/// Second extraction (only when the first fires): uniform integer in
/// [min_resolution, max_resolution]. Empty optional = leave the image alone.
std::optional<int> draw_resolution(const ResolutionPolicy& policy, Rng& rng);

/// Shrink so the shorter side equals min(target, shorter side), keeping the
/// aspect ratio, then resize back to the exact input size. When the target is
/// not below the shorter side the input is returned unchanged, bit for bit.
cv::Mat downscale_upscale(const cv::Mat& image, int target_resolution,
                          Interpolation interpolation = Interpolation::Bilinear);

/// Rec. 601 luma, rounded, replicated to all three channels.
cv::Mat luma_grayscale(const cv::Mat& rgb);

/// With probability p replaces the image with its luma; otherwise returns the
/// input untouched. Output is always 3-channel.
cv::Mat random_grayscale(const cv::Mat& rgb, double p, Rng& rng);

/// Aspect-preserving resize so the shorter side equals `shorter`. Identity
/// (no resampling) when the shorter side already matches.
cv::Mat resize_shorter_side(const cv::Mat& image, int shorter,
                            Interpolation interpolation = Interpolation::Bilinear);

/// 8-bit RGB HxWx3 -> float CHW tensor scaled to [0,1].
Tensor<float> to_float_chw(const cv::Mat& rgb);

/// out[c] = (in[c] - mean[c]) / std[c], in place on a CHW tensor.
void channel_normalize(Tensor<float>& chw, const std::array<double, 3>& mean,
                       const std::array<double, 3>& std);

/// Training pipeline: resize shorter side -> random square crop ->
/// multi-resolution degradation on the crop -> random grayscale ->
/// scale to [0,1] and normalize. Consumes rng; reproducible under seeding.
Tensor<float> train_transform(const cv::Mat& rgb, const AugmentConfig& config, Rng& rng);

/// Evaluation pipeline: resize shorter side -> center crop -> scale and
/// normalize. No degradation, no grayscale, no randomness.
Tensor<float> eval_transform(const cv::Mat& rgb, const AugmentConfig& config);

}  // namespace fermr
