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
#include <stdexcept>
#include <string>
#include <string_view>

namespace fermr {

/// Seven expression classes. The ordering is fixed and shared by every
/// table, weight vector and confusion-matrix axis in the pipeline.
inline constexpr int kNumClasses = 7;

enum class Expression : int {
  Neutral = 0,
  Anger = 1,
  Disgust = 2,
  Fear = 3,
  Happiness = 4,
  Sadness = 5,
  Surprise = 6,
};

/// Sentinel for unannotated frames. Such frames are kept in the index but
/// excluded from training and evaluation.
inline constexpr int kInvalidLabel = -1;

inline const std::array<std::string_view, kNumClasses>& expression_names() {
  static const std::array<std::string_view, kNumClasses> names = {
      "Neutral", "Anger", "Disgust", "Fear", "Happiness", "Sadness", "Surprise"};
  return names;
}

inline std::string_view expression_name(int label) {
  if (label < 0 || label >= kNumClasses) {
    throw std::out_of_range("expression_name: label " + std::to_string(label) +
                            " outside [0," + std::to_string(kNumClasses) + ")");
  }
  return expression_names()[static_cast<size_t>(label)];
}

inline bool is_valid_label(int label) { return label >= 0 && label < kNumClasses; }

}  // namespace fermr
