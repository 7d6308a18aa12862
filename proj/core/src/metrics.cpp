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

#include "fermr/metrics.hpp"

#include <algorithm>
#include <cfenv>
#include <stdexcept>
#include <string>

namespace fermr {

ConfusionMatrix::ConfusionMatrix(int num_classes) : k_(num_classes) {
  if (num_classes < 1) throw std::invalid_argument("ConfusionMatrix: num_classes < 1");
  counts_.assign(static_cast<std::size_t>(k_) * k_, 0);
}

std::int64_t& ConfusionMatrix::at(int true_class, int predicted_class) {
  if (true_class < 0 || true_class >= k_ || predicted_class < 0 || predicted_class >= k_) {
    throw std::out_of_range("ConfusionMatrix::at: class outside [0," + std::to_string(k_) + ")");
  }
  return counts_[static_cast<std::size_t>(true_class) * k_ + predicted_class];
}

std::int64_t ConfusionMatrix::at(int true_class, int predicted_class) const {
  return const_cast<ConfusionMatrix*>(this)->at(true_class, predicted_class);
}

void ConfusionMatrix::accumulate(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("ConfusionMatrix::accumulate: size mismatch");
  }
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    at(labels[i], predictions[i]) += 1;
  }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.k_ != k_) throw std::invalid_argument("ConfusionMatrix::merge: class count mismatch");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
}

std::int64_t ConfusionMatrix::row_sum(int c) const {
  std::int64_t s = 0;
  for (int j = 0; j < k_; ++j) s += at(c, j);
  return s;
}

std::int64_t ConfusionMatrix::col_sum(int c) const {
  std::int64_t s = 0;
  for (int i = 0; i < k_; ++i) s += at(i, c);
  return s;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t s = 0;
  for (int i = 0; i < k_; ++i) s += at(i, i);
  return s;
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t s = 0;
  for (auto v : counts_) s += v;
  return s;
}

std::vector<double> per_class_f1(const ConfusionMatrix& cm) {
  const int k = cm.num_classes();
  std::vector<double> f1(static_cast<std::size_t>(k), 0.0);
  for (int c = 0; c < k; ++c) {
    const auto tp = cm.at(c, c);
    const auto col = cm.col_sum(c);
    const auto row = cm.row_sum(c);
    const double precision = col > 0 ? static_cast<double>(tp) / static_cast<double>(col) : 0.0;
    const double recall = row > 0 ? static_cast<double>(tp) / static_cast<double>(row) : 0.0;
    f1[static_cast<std::size_t>(c)] =
        (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  return f1;
}

double accuracy(const ConfusionMatrix& cm) {
  const auto total = cm.total();
  if (total == 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

double macro_f1(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw std::invalid_argument("macro_f1: empty confusion matrix");
  const auto f1 = per_class_f1(cm);
  double sum = 0.0;
  for (double v : f1) sum += v;
  return sum / static_cast<double>(f1.size());
}

double challenge_score(double accuracy, double macro_f1) {
  if (accuracy < 0.0 || accuracy > 1.0 || macro_f1 < 0.0 || macro_f1 > 1.0) {
    throw std::invalid_argument("challenge_score: arguments must lie in [0,1]");
  }
  return 0.33 * accuracy + 0.67 * macro_f1;
}

MetricsReport build_report(const ConfusionMatrix& cm) {
  MetricsReport report;
  report.per_class_f1 = per_class_f1(cm);
  report.accuracy = accuracy(cm);
  double sum = 0.0;
  for (double v : report.per_class_f1) sum += v;
  report.macro_f1 = sum / static_cast<double>(report.per_class_f1.size());
  report.challenge_score = challenge_score(report.accuracy, report.macro_f1);
  report.support.resize(static_cast<std::size_t>(cm.num_classes()));
  for (int c = 0; c < cm.num_classes(); ++c) {
    report.support[static_cast<std::size_t>(c)] = cm.row_sum(c);
  }
  return report;
}

double round_display(double x, int decimals) {
  double scale = 1.0;
  for (int i = 0; i < decimals; ++i) scale *= 10.0;
  // nearbyint under the default FE_TONEAREST mode rounds ties to even.
  return std::nearbyint(x * scale) / scale;
}

namespace {

template <typename T>
T log_softmax_at(const T* row, int num_classes, int index) {
  T max_logit = row[0];
  for (int k = 1; k < num_classes; ++k) max_logit = std::max(max_logit, row[k]);
  T sum = T(0);
  for (int k = 0; k < num_classes; ++k) sum += std::exp(row[k] - max_logit);
  return row[index] - max_logit - std::log(sum);
}

template <typename T>
void check_loss_args(std::int64_t batch, int num_classes, std::span<const int> labels,
                     std::span<const T> weights) {
  if (batch < 1) throw std::invalid_argument("balanced_cross_entropy: empty batch");
  if (labels.size() != static_cast<std::size_t>(batch)) {
    throw std::invalid_argument("balanced_cross_entropy: labels size mismatch");
  }
  if (weights.size() != static_cast<std::size_t>(num_classes)) {
    throw std::invalid_argument("balanced_cross_entropy: weights size mismatch");
  }
  for (auto w : weights) {
    if (!(w > T(0))) throw std::invalid_argument("balanced_cross_entropy: weights must be > 0");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw std::out_of_range("balanced_cross_entropy: label " + std::to_string(y) +
                              " outside [0," + std::to_string(num_classes) + ")");
    }
  }
}

}  // namespace

template <typename T>
T balanced_cross_entropy(const T* logits, std::int64_t batch, int num_classes,
                         std::span<const int> labels, std::span<const T> weights) {
  check_loss_args(batch, num_classes, labels, weights);
  T weighted_loss = T(0);
  T weight_sum = T(0);
  for (std::int64_t i = 0; i < batch; ++i) {
    const T w = weights[static_cast<std::size_t>(labels[i])];
    weighted_loss += w * (-log_softmax_at(logits + i * num_classes, num_classes, labels[i]));
    weight_sum += w;
  }
  return weighted_loss / weight_sum;
}

template <typename T>
T balanced_cross_entropy_grad(const T* logits, std::int64_t batch, int num_classes,
                              std::span<const int> labels, std::span<const T> weights,
                              T* dlogits) {
  check_loss_args(batch, num_classes, labels, weights);
  T weighted_loss = T(0);
  T weight_sum = T(0);
  for (std::int64_t i = 0; i < batch; ++i) weight_sum += weights[static_cast<std::size_t>(labels[i])];

  for (std::int64_t i = 0; i < batch; ++i) {
    const T* row = logits + i * num_classes;
    T* drow = dlogits + i * num_classes;
    const T w = weights[static_cast<std::size_t>(labels[i])];

    T max_logit = row[0];
    for (int k = 1; k < num_classes; ++k) max_logit = std::max(max_logit, row[k]);
    T sum = T(0);
    for (int k = 0; k < num_classes; ++k) sum += std::exp(row[k] - max_logit);
    const T log_sum = std::log(sum);

    weighted_loss += w * (max_logit + log_sum - row[labels[i]]);
    for (int k = 0; k < num_classes; ++k) {
      const T softmax_k = std::exp(row[k] - max_logit - log_sum);
      drow[k] = w * (softmax_k - (k == labels[i] ? T(1) : T(0))) / weight_sum;
    }
  }
  return weighted_loss / weight_sum;
}

template float balanced_cross_entropy<float>(const float*, std::int64_t, int,
                                             std::span<const int>, std::span<const float>);
template double balanced_cross_entropy<double>(const double*, std::int64_t, int,
                                               std::span<const int>, std::span<const double>);
template float balanced_cross_entropy_grad<float>(const float*, std::int64_t, int,
                                                  std::span<const int>, std::span<const float>,
                                                  float*);
template double balanced_cross_entropy_grad<double>(const double*, std::int64_t, int,
                                                    std::span<const int>, std::span<const double>,
                                                    double*);

}  // namespace fermr
