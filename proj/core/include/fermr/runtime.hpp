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

namespace fermr {

/// Worker threads used for data loading and batched math. Defaults to
/// min(4, hardware threads); the MULTIRES_FER_WORKERS environment variable
/// overrides the default. Results are reproducible for a fixed setting.
int workers();

void set_workers(int n);

}  // namespace fermr
