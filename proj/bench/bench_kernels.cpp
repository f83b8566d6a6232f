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

// Serial reference versus OpenMP trial counting on the registered
// Monte-Carlo experiments' trial shapes.

#include <benchmark/benchmark.h>

#include "blockene/experiments.hpp"
#include "blockene/kernels.hpp"

namespace {

using namespace blockene;

bool all_corrupt_25_of_200(std::mt19937_64& rng) {
    std::uniform_int_distribution<uint32_t> pick(0, 199);
    for (int i = 0; i < 25; ++i)
        if (pick(rng) >= 160) return false;
    return true;
}

void BM_CountSerial(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(count_hits_serial(uint64_t(state.range(0)), 1, all_corrupt_25_of_200));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_CountParallel(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(count_hits_parallel(uint64_t(state.range(0)), 1, all_corrupt_25_of_200));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

void BM_Experiment(benchmark::State& state, const char* name, bool parallel) {
    for (auto _ : state) benchmark::DoNotOptimize(run_experiment(name, uint64_t(state.range(0)), 1, parallel).hits);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_CountSerial)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK(BM_CountParallel)->Arg(1 << 16)->Arg(1 << 20);
BENCHMARK_CAPTURE(BM_Experiment, coverage_serial, "honest_proposer_coverage", false)->Arg(2000);
BENCHMARK_CAPTURE(BM_Experiment, coverage_parallel, "honest_proposer_coverage", true)->Arg(2000);
BENCHMARK_CAPTURE(BM_Experiment, read_spotcheck_serial, "read_spotcheck", false)->Arg(10000);
BENCHMARK_CAPTURE(BM_Experiment, read_spotcheck_parallel, "read_spotcheck", true)->Arg(10000);

BENCHMARK_MAIN();
