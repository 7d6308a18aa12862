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

// Shared test utilities: scratch directories, a brute-force metrics oracle
// that stays independent of the library implementation, and helpers for
// finite-difference gradient checks.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "fermr/metrics.hpp"
#include "fermr/rng.hpp"

namespace fermr::test {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    dir_ = std::filesystem::temp_directory_path() /
           ("fermr_test_" + tag + "_" + std::to_string(counter()++));
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
  }
  const std::filesystem::path& path() const { return dir_; }

 private:
  static int& counter() {
    static int n = 0;
    return n;
  }
  std::filesystem::path dir_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << text;
}

/// Brute-force metrics oracle: per-pair counting, no shared code with the
/// library's confusion-matrix path.
struct OracleMetrics {
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<double> f1;
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  double score = 0.0;
};

inline OracleMetrics oracle_metrics(const std::vector<int>& predictions,
                                    const std::vector<int>& labels, int k) {
  OracleMetrics m;
  m.counts.assign(static_cast<std::size_t>(k), std::vector<std::int64_t>(static_cast<std::size_t>(k), 0));
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    m.counts[static_cast<std::size_t>(labels[i])][static_cast<std::size_t>(predictions[i])] += 1;
  }
  std::int64_t correct = 0, total = 0;
  for (int c = 0; c < k; ++c) {
    correct += m.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    for (int p = 0; p < k; ++p) total += m.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(p)];
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  m.f1.assign(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    std::int64_t tp = m.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(c)];
    std::int64_t in_col = 0, in_row = 0;
    for (int j = 0; j < k; ++j) {
      in_col += m.counts[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)];
      in_row += m.counts[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
    }
    // f1 = 2 tp / (in_col + in_row), algebraically 2PR/(P+R) with 0/0 -> 0
    m.f1[static_cast<std::size_t>(c)] =
        (in_col + in_row) > 0 ? 2.0 * static_cast<double>(tp) / static_cast<double>(in_col + in_row)
                              : 0.0;
  }
  double sum = 0.0;
  for (double v : m.f1) sum += v;
  m.macro_f1 = sum / static_cast<double>(k);
  m.score = 0.33 * m.accuracy + 0.67 * m.macro_f1;
  return m;
}

/// Relative error with a floor for near-zero pairs.
inline double rel_err(double a, double b) {
  const double denom = std::max({std::fabs(a), std::fabs(b), 1e-8});
  return std::fabs(a - b) / denom;
}

/// |a - b| <= rel * max(|a|,|b|) + abs. The absolute floor absorbs the
/// cancellation noise of central differences at double precision; any
/// systematic gradient error sits orders of magnitude above it.
inline bool close(double a, double b, double rel, double abs) {
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b)) + abs;
}

}  // namespace fermr::test
