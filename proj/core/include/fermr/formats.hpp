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

// Text tables, CSV and JSON emitters for class statistics and metric
// reports. All emitters are byte-stable for fixed inputs.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fermr/dataset.hpp"
#include "fermr/metrics.hpp"

namespace fermr {

/// Class-cardinality table: one counts row plus one percentage row per split,
/// aligned on the seven class columns and a total column.
std::string stats_table_text(const std::vector<std::pair<std::string, ClassStats>>& splits);

/// Long-form CSV: split,class,count,percent.
std::string stats_csv(const std::vector<std::pair<std::string, ClassStats>>& splits);

/// Per-class F1 row followed by the accuracy / macro-F1 / challenge-score
/// summary, three decimals.
std::string report_text(const MetricsReport& report);

std::string metrics_report_to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const std::string& json);

void write_confusion_json(const std::filesystem::path& path, const ConfusionMatrix& cm);
ConfusionMatrix read_confusion_json(const std::filesystem::path& path);

/// Counts fixture: header `split,Neutral,...,Surprise`, one row per split.
std::vector<std::pair<std::string, std::array<std::int64_t, kNumClasses>>> read_counts_csv(
    const std::filesystem::path& path);

}  // namespace fermr
