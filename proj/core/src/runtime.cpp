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

#include "fermr/runtime.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>

#include <Eigen/Core>

namespace fermr {

namespace {

int clamp_workers(int n) { return std::max(1, std::min(n, 64)); }

int initial_workers() {
  if (const char* env = std::getenv("MULTIRES_FER_WORKERS")) {
    const int n = std::atoi(env);
    if (n >= 1) return clamp_workers(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return clamp_workers(std::min(4u, hw == 0 ? 1u : hw));
}

int& workers_ref() {
  static int n = [] {
    const int w = initial_workers();
    Eigen::setNbThreads(w);
    return w;
  }();
  return n;
}

}  // namespace

int workers() { return workers_ref(); }

void set_workers(int n) {
  workers_ref() = clamp_workers(n);
  Eigen::setNbThreads(workers_ref());
}

}  // namespace fermr
