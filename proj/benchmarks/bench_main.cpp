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

#include <benchmark/benchmark.h>

#include <opencv2/core.hpp>

#include "fermr/augment.hpp"
#include "fermr/metrics.hpp"
#include "fermr/nn/model.hpp"
#include "fermr/rng.hpp"

using namespace fermr;

namespace {

cv::Mat bench_image(int rows, int cols) {
  cv::Mat img(rows, cols, CV_8UC3);
  Rng rng(1);
  for (int y = 0; y < rows; ++y) {
    auto* row = img.ptr<cv::Vec3b>(y);
    for (int x = 0; x < cols; ++x) {
      for (int c = 0; c < 3; ++c) row[x][c] = static_cast<uchar>(rng.uniform_int(0, 255));
    }
  }
  return img;
}

void BM_TrainTransform(benchmark::State& state) {
  const cv::Mat img = bench_image(static_cast<int>(state.range(0)), static_cast<int>(state.range(0)));
  AugmentConfig config;
  if (state.range(0) <= 128) {
    config.resize_shorter_side = 128;
    config.crop_size = 112;
    config.resolution_policy.max_resolution = 112;
  }
  Rng rng(7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(train_transform(img, config, rng));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrainTransform)->Arg(112)->Arg(256);

void BM_EvalTransform(benchmark::State& state) {
  const cv::Mat img = bench_image(112, 112);
  AugmentConfig config;
  config.resize_shorter_side = 128;
  config.crop_size = 112;
  for (auto _ : state) {
    benchmark::DoNotOptimize(eval_transform(img, config));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EvalTransform);

void BM_DownscaleUpscale(benchmark::State& state) {
  const cv::Mat img = bench_image(224, 224);
  for (auto _ : state) {
    benchmark::DoNotOptimize(downscale_upscale(img, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_DownscaleUpscale)->Arg(8)->Arg(56)->Arg(128);

void BM_BalancedCrossEntropy(benchmark::State& state) {
  const std::int64_t batch = state.range(0);
  std::vector<float> logits(static_cast<std::size_t>(batch) * 7);
  std::vector<int> labels(static_cast<std::size_t>(batch));
  std::vector<float> weights(7, 1.0f);
  Rng rng(3);
  for (auto& v : logits) v = static_cast<float>(rng.gaussian());
  for (auto& y : labels) y = static_cast<int>(rng.uniform_int(0, 6));
  std::vector<float> grad(logits.size());
  for (auto _ : state) {
    benchmark::DoNotOptimize(balanced_cross_entropy_grad<float>(
        logits.data(), batch, 7, labels, weights, grad.data()));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_BalancedCrossEntropy)->Arg(32)->Arg(128);

void BM_BuildReport(benchmark::State& state) {
  Rng rng(5);
  ConfusionMatrix cm(7);
  std::vector<int> preds(10000), labels(10000);
  for (int i = 0; i < 10000; ++i) {
    preds[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, 6));
    labels[static_cast<std::size_t>(i)] = static_cast<int>(rng.uniform_int(0, 6));
  }
  cm.accumulate(preds, labels);
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_report(cm));
  }
}
BENCHMARK(BM_BuildReport);

void BM_SmallForward(benchmark::State& state) {
  ModelConfig config;
  config.depth = Depth::ResNetSmall;
  auto model = build_model<float>(config, 1);
  const std::int64_t batch = state.range(0);
  Tensor<float> x({batch, 3, 112, 112});
  Rng rng(9);
  for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = static_cast<float>(rng.gaussian());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->forward(x, false));
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_SmallForward)->Arg(1)->Arg(16);

void BM_SmallTrainStep(benchmark::State& state) {
  ModelConfig config;
  config.depth = Depth::ResNetSmall;
  auto model = build_model<float>(config, 1);
  nn::Adam<float> optimizer(model->parameters());
  const std::int64_t batch = 16;
  Tensor<float> x({batch, 3, 112, 112});
  Rng rng(9);
  for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = static_cast<float>(rng.gaussian());
  std::vector<int> labels(static_cast<std::size_t>(batch));
  for (auto& y : labels) y = static_cast<int>(rng.uniform_int(0, 6));
  std::vector<float> weights(7, 1.0f);

  for (auto _ : state) {
    Tensor<float> logits = model->forward(x, true);
    Tensor<float> dlogits(logits.shape());
    balanced_cross_entropy_grad<float>(logits.data(), batch, 7, labels, weights, dlogits.data());
    model->zero_grad();
    model->backward(dlogits);
    optimizer.step(1e-3);
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_SmallTrainStep);

void BM_ResNet50Forward(benchmark::State& state) {
  ModelConfig config;
  config.depth = Depth::ResNet50;
  auto model = build_model<float>(config, 1);
  Tensor<float> x({1, 3, 224, 224});
  Rng rng(9);
  for (std::int64_t i = 0; i < x.numel(); ++i) x[i] = static_cast<float>(rng.gaussian());
  for (auto _ : state) {
    benchmark::DoNotOptimize(model->forward(x, false));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ResNet50Forward)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
