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

#include "blockene/kernels.hpp"

#include <algorithm>

namespace blockene {

uint64_t chunk_seed(uint64_t seed, uint64_t chunk) {
    // splitmix64 over the pair; cheap and well mixed.
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (chunk + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

uint64_t run_chunk(uint64_t trials, uint64_t seed, uint64_t chunk, const TrialFn& trial) {
    std::mt19937_64 rng(chunk_seed(seed, chunk));
    const uint64_t begin = chunk * kTrialChunk;
    const uint64_t end = std::min(trials, begin + kTrialChunk);
    uint64_t hits = 0;
    for (uint64_t t = begin; t < end; ++t) hits += trial(rng) ? 1 : 0;
    return hits;
}

}  // namespace

uint64_t count_hits_serial(uint64_t trials, uint64_t seed, const TrialFn& trial) {
    const uint64_t chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    uint64_t hits = 0;
    for (uint64_t c = 0; c < chunks; ++c) hits += run_chunk(trials, seed, c, trial);
    return hits;
}

uint64_t count_hits_parallel(uint64_t trials, uint64_t seed, const TrialFn& trial) {
    const int64_t chunks = int64_t((trials + kTrialChunk - 1) / kTrialChunk);
    uint64_t hits = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
    for (int64_t c = 0; c < chunks; ++c) hits += run_chunk(trials, seed, uint64_t(c), trial);
    return hits;
}

}  // namespace blockene
