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

#include "fermr/formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace fermr {

using nlohmann::json;

namespace {

std::string fixed(double v, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string pad_left(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

}  // namespace

std::string stats_table_text(const std::vector<std::pair<std::string, ClassStats>>& splits) {
  constexpr int kCol = 11;
  std::size_t label_width = 4;
  for (const auto& [name, stats] : splits) label_width = std::max(label_width, name.size());
  label_width += 2;

  std::ostringstream out;
  out << std::string(label_width, ' ');
  for (const auto& name : expression_names()) {
    out << pad_left(std::string(name), kCol);
  }
  out << pad_left("Total", kCol) << "\n";

  for (const auto& [name, stats] : splits) {
    out << name << std::string(label_width - name.size(), ' ');
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out << pad_left(std::to_string(stats.counts[c]), kCol);
    }
    out << pad_left(std::to_string(stats.total), kCol) << "\n";

    out << "(%)" << std::string(label_width - 3, ' ');
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out << pad_left(fixed(stats.percentages[c], 1), kCol);
    }
    out << "\n";
  }
  return out.str();
}

std::string stats_csv(const std::vector<std::pair<std::string, ClassStats>>& splits) {
  std::ostringstream out;
  out << "split,class,count,percent\n";
  for (const auto& [name, stats] : splits) {
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      out << name << "," << expression_names()[c] << "," << stats.counts[c] << ","
          << fixed(stats.percentages[c], 1) << "\n";
    }
  }
  return out.str();
}

std::string report_text(const MetricsReport& report) {
  constexpr int kCol = 11;
  std::ostringstream out;
  out << std::string(10, ' ');
  for (const auto& name : expression_names()) out << pad_left(std::string(name), kCol);
  out << "\n";
  out << "F1 Score  ";
  for (double v : report.per_class_f1) out << pad_left(fixed(v, 3), 3 + 8);
  out << "\n";
  out << "Support   ";
  for (auto s : report.support) out << pad_left(std::to_string(s), kCol);
  out << "\n\n";
  out << "  Accuracy   F1 Score (macro)   Challenge Score\n";
  out << pad_left(fixed(report.accuracy, 3), 10) << pad_left(fixed(report.macro_f1, 3), 19)
      << pad_left(fixed(report.challenge_score, 3), 18) << "\n";
  return out.str();
}

std::string metrics_report_to_json(const MetricsReport& report) {
  json j;
  j["per_class_f1"] = report.per_class_f1;
  j["macro_f1"] = report.macro_f1;
  j["accuracy"] = report.accuracy;
  j["challenge_score"] = report.challenge_score;
  j["support"] = report.support;
  return j.dump(2);
}

MetricsReport metrics_report_from_json(const std::string& text) {
  const json j = json::parse(text);
  MetricsReport report;
  report.per_class_f1 = j.at("per_class_f1").get<std::vector<double>>();
  report.macro_f1 = j.at("macro_f1").get<double>();
  report.accuracy = j.at("accuracy").get<double>();
  report.challenge_score = j.at("challenge_score").get<double>();
  report.support = j.at("support").get<std::vector<std::int64_t>>();
  return report;
}

void write_confusion_json(const std::filesystem::path& path, const ConfusionMatrix& cm) {
  json rows = json::array();
  for (int t = 0; t < cm.num_classes(); ++t) {
    json row = json::array();
    for (int p = 0; p < cm.num_classes(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(std::move(row));
  }
  json j;
  j["num_classes"] = cm.num_classes();
  j["counts"] = std::move(rows);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << "\n";
}

ConfusionMatrix read_confusion_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json j;
  in >> j;
  const int k = j.at("num_classes").get<int>();
  ConfusionMatrix cm(k);
  const auto& rows = j.at("counts");
  if (static_cast<int>(rows.size()) != k) {
    throw std::runtime_error(path.string() + ": counts row count != num_classes");
  }
  for (int t = 0; t < k; ++t) {
    for (int p = 0; p < k; ++p) cm.at(t, p) = rows[static_cast<size_t>(t)][static_cast<size_t>(p)].get<std::int64_t>();
  }
  return cm;
}

std::vector<std::pair<std::string, std::array<std::int64_t, kNumClasses>>> read_counts_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open counts file: " + path.string());
  std::vector<std::pair<std::string, std::array<std::int64_t, kNumClasses>>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    std::istringstream ss(line);
    std::string field;
    if (!std::getline(ss, field, ',')) continue;
    std::pair<std::string, std::array<std::int64_t, kNumClasses>> row;
    row.first = field;
    for (std::size_t c = 0; c < kNumClasses; ++c) {
      if (!std::getline(ss, field, ',')) {
        throw std::runtime_error(path.string() + ": row '" + row.first + "' needs " +
                                 std::to_string(kNumClasses) + " counts");
      }
      row.second[c] = std::stoll(field);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no data rows");
  return rows;
}

}  // namespace fermr
