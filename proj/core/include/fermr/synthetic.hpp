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

#include <opencv2/core.hpp>

#include "fermr/dataset.hpp"

namespace fermr {

/// Desk-scale stand-in for the license-restricted corpus. Each class has a
/// fixed hue band, texture frequency and orientation; per-image phase,
/// brightness, saturation and pixel noise are drawn from the seed. The
/// brightness and hue jitter ranges overlap between neighboring classes, so
/// raw pixel means do not separate the classes linearly.
struct SyntheticSpec {
  int per_class = 64;
  std::uint64_t seed = 0;
  Split split = Split::Train;
  int videos = 4;
  int image_size = 112;
};

/// Writes `<root>/annotations/<split>/<video>.txt` and
/// `<root>/images/<video>/<frame, 5 digits>.png`. Byte-identical trees for a
/// fixed spec.
void generate_synthetic_dataset(const std::filesystem::path& root, const SyntheticSpec& spec);

/// The image for one synthetic frame (exposed for tests).
cv::Mat synthetic_frame(int label, std::uint64_t frame_seed, int image_size = 112);

}  // namespace fermr
