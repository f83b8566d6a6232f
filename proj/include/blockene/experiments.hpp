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
#include <optional>
#include <string>
#include <vector>

namespace blockene {

// How an empirical rate is compared with its analytic value. Two-sided
// experiments must land within 3 sigma of the law; upper-bound experiments
// must not exceed the bound by more than 3 sigma.
enum class McCheck { TwoSided, UpperBound };

struct McResult {
    std::string experiment;
    uint64_t trials = 0;
    uint64_t seed = 0;
    uint64_t hits = 0;
    double estimate = 0;
    double ci_low = 0;   // 99% Wilson interval
    double ci_high = 0;
    double analytic = 0;
    double sigma = 0;    // binomial sigma at the analytic value
    McCheck check = McCheck::TwoSided;
    bool pass = false;
    std::string law;     // human-readable analytic expression
};

struct ExperimentInfo {
    std::string name;
    uint64_t default_trials;
    std::string summary;
};

const std::vector<ExperimentInfo>& experiments();
std::optional<ExperimentInfo> find_experiment(const std::string& name);

// Throws std::invalid_argument for an unknown experiment or zero trials.
McResult run_experiment(const std::string& name, uint64_t trials, uint64_t seed, bool parallel = true);

// 99% Wilson score interval for hits out of n.
std::pair<double, double> wilson99(uint64_t hits, uint64_t n);
std::string describe(const McResult& r);

// Closed forms.
double safe_sample_law(unsigned S, unsigned corrupt, unsigned m);           // independent draws
double safe_sample_distinct_law(unsigned S, unsigned corrupt, unsigned m);  // without replacement
double coverage_bound(unsigned rho, unsigned per_upload, double gamma, unsigned delta);

// Client cost of one global-state read plus one update, measured on a real
// tree. Hash counts are Merkle hashes only; key-position hashes are
// excluded, as in the naive baseline.
struct GsCost {
    uint64_t bytes = 0;         // read and write traffic, bulk values excluded
    uint64_t value_bytes = 0;   // bulk value download
    uint64_t hashes = 0;
    uint64_t read_paths = 0;
    uint64_t write_bundles = 0;
    bool correct = false;       // values and new root match the truth
};

struct EfficiencyReport {
    uint64_t keys = 0;
    uint64_t naive_bytes = 0;   // stated baseline
    uint64_t naive_hashes = 0;
    uint64_t formula_naive_bytes = 0;  // keys * path size
    GsCost honest;
    GsCost worst;
    double byte_ratio(const GsCost& c) const { return double(naive_bytes) / double(c.bytes); }
    double byte_ratio_with_values(const GsCost& c) const {
        return double(naive_bytes) / double(c.bytes + c.value_bytes);
    }
    double hash_ratio(const GsCost& c) const { return double(naive_hashes) / double(c.hashes); }
};

// Reads and then updates \`keys\` keys of a tree holding them, with a safe
// sample of 25 politicians. The honest case has every politician honest.
// The worst case puts first in the sample a liar whose tau wrong values and
// tau_w wrong frontier nodes all slip the spot-checks, so every lie has to
// be corrected from the honest politicians' exception lists and frontiers.
EfficiencyReport measure_efficiency(uint64_t keys, uint64_t seed);

}  // namespace blockene
