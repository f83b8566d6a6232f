// Copyright 2026 The Blockene Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace blockene {

// Monte-Carlo trial counting. Trials are cut into fixed-size chunks and each
// chunk owns an RNG stream derived from (seed, chunk), so the hit count is
// identical for any thread count and for the serial reference.
inline constexpr uint64_t kTrialChunk = 4096;

using TrialFn = std::function<bool(std::mt19937_64&)>;

uint64_t chunk_seed(uint64_t seed, uint64_t chunk);
uint64_t count_hits_serial(uint64_t trials, uint64_t seed, const TrialFn& trial);
uint64_t count_hits_parallel(uint64_t trials, uint64_t seed, const TrialFn& trial);

}  // namespace blockene
