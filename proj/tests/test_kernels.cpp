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

#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "blockene/experiments.hpp"
#include "blockene/kernels.hpp"

using namespace blockene;

TEST_CASE("parallel trial counting equals the serial reference") {
    TrialFn coin = [](std::mt19937_64& rng) { return rng() % 7 == 0; };
    for (uint64_t trials : {1ull, 4095ull, 4096ull, 4097ull, 50000ull}) {
        CHECK(count_hits_serial(trials, 3, coin) == count_hits_parallel(trials, 3, coin));
    }
    CHECK(count_hits_serial(0, 3, coin) == 0);
    CHECK(count_hits_serial(50000, 3, coin) != count_hits_serial(50000, 4, coin));
}

TEST_CASE("chunk streams are distinct") {
    CHECK(chunk_seed(1, 0) != chunk_seed(1, 1));
    CHECK(chunk_seed(1, 0) != chunk_seed(2, 0));
}

TEST_CASE("closed forms match direct evaluation") {
    CHECK(safe_sample_law(200, 160, 25) == doctest::Approx(std::pow(0.8, 25)).epsilon(1e-12));
    double distinct = 1;
    for (int i = 0; i < 25; ++i) distinct *= double(160 - i) / double(200 - i);
    CHECK(safe_sample_distinct_law(200, 160, 25) == doctest::Approx(distinct).epsilon(1e-9));
    CHECK(safe_sample_distinct_law(200, 160, 25) < safe_sample_law(200, 160, 25));
    CHECK(coverage_bound(45, 5, 0.8, 350) == doctest::Approx(45 * std::pow(44.0 / 45.0, 350)).epsilon(1e-12));
}

TEST_CASE("Wilson interval brackets the point estimate") {
    auto [lo, hi] = wilson99(50, 1000);
    CHECK(lo < 0.05);
    CHECK(hi > 0.05);
    auto [z0, z1] = wilson99(0, 1000);
    CHECK(z0 == 0);
    CHECK(z1 > 0);
}

TEST_CASE("experiments are registered, deterministic and thread-count independent") {
    CHECK(find_experiment("safe_sample"));
    CHECK(find_experiment("read_spotcheck"));
    CHECK_FALSE(find_experiment("nope"));
    CHECK_THROWS_AS(run_experiment("nope", 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_experiment("safe_sample", 0, 1), std::invalid_argument);
    auto a = run_experiment("write_spotcheck", 3000, 9, true);
    auto b = run_experiment("write_spotcheck", 3000, 9, false);
    CHECK(a.hits == b.hits);
    CHECK(describe(a).find(a.pass ? "PASS" : "FAIL") != std::string::npos);
}
