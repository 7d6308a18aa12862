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

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fermr/labels.hpp"

namespace fermr {

/// Row = true class, column = predicted class. Merging two matrices is an
/// elementwise sum, so evaluation can be sharded and recombined in any order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes = kNumClasses);

  int num_classes() const { return k_; }

  std::int64_t& at(int true_class, int predicted_class);
  std::int64_t at(int true_class, int predicted_class) const;

  void accumulate(std::span<const int> predictions, std::span<const int> labels);
  void merge(const ConfusionMatrix& other);

  std::int64_t row_sum(int c) const;  // support of class c
  std::int64_t col_sum(int c) const;  // predictions into class c
  std::int64_t trace() const;
  std::int64_t total() const;

 private:
  int k_;
  std::vector<std::int64_t> counts_;
};

struct MetricsReport {
  std::vector<double> per_class_f1;
  double macro_f1 = 0.0;
  double accuracy = 0.0;
  double challenge_score = 0.0;
  std::vector<std::int64_t> support;
};

/// F1 per class with the 0/0 -> 0 convention for degenerate precision/recall.
std::vector<double> per_class_f1(const ConfusionMatrix& cm);

double accuracy(const ConfusionMatrix& cm);
double macro_f1(const ConfusionMatrix& cm);

/// s = 0.33 * accuracy + 0.67 * macro_f1. Both inputs must lie in [0,1].
double challenge_score(double accuracy, double macro_f1);

MetricsReport build_report(const ConfusionMatrix& cm);

/// Round to `decimals` places, ties to even. Display precision only;
/// internal metric values stay at full precision.
double round_display(double x, int decimals);

/// Weighted cross entropy over a batch of logits, normalized by the sum of
/// the applied weights so that uniform weights reduce exactly to mean CE:
///   loss = sum_i w[y_i] * (-log softmax(logits_i)[y_i]) / sum_i w[y_i]
/// Log-sum-exp stabilized.
template <typename T>
T balanced_cross_entropy(const T* logits, std::int64_t batch, int num_classes,
                         std::span<const int> labels, std::span<const T> weights);

/// Same loss, also writing d(loss)/d(logits) into dlogits (batch*num_classes).
template <typename T>
T balanced_cross_entropy_grad(const T* logits, std::int64_t batch, int num_classes,
                              std::span<const int> labels, std::span<const T> weights,
                              T* dlogits);

}  // namespace fermr
