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

#include "blockene/experiments.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <set>
#include <stdexcept>

#include "blockene/gstate.hpp"
#include "blockene/kernels.hpp"
#include "blockene/sortition.hpp"

namespace blockene {

namespace {

// Safe sample: S politicians of which the first `corrupt` are bad.
constexpr unsigned kSampleS = 200;
constexpr unsigned kSampleCorrupt = 160;
constexpr unsigned kSampleM = 25;

// Pool coverage at a committee of 2000: every listed pool has exactly delta
// good holders (the fewest the witness threshold admits), drawn from the
// n_g* = 1137 good members.
constexpr unsigned kCoverageGood = 1137;
constexpr unsigned kCoverageRho = 45;
constexpr unsigned kCoverageDelta = 350;
constexpr unsigned kCoveragePerUpload = 5;
constexpr double kCoverageGamma = 0.8;

// Read spot-check at scaled parameters.
constexpr size_t kReadK = 2000;
constexpr double kReadMu = 0.05;
constexpr size_t kReadTau = 100;

// Write spot-check: 2^a frontier nodes, tau_w corrupted, c checks.
constexpr unsigned kWriteA = 10;
constexpr size_t kWriteTau = 100;
constexpr size_t kWriteC = 40;

bool all_corrupt(const std::vector<uint32_t>& sample) {
    return std::all_of(sample.begin(), sample.end(), [](uint32_t i) { return i < kSampleCorrupt; });
}

bool safe_sample_trial(std::mt19937_64& rng) {
    std::uniform_int_distribution<uint32_t> pick(0, kSampleS - 1);
    for (unsigned i = 0; i < kSampleM; ++i)
        if (pick(rng) >= kSampleCorrupt) return false;
    return true;
}

bool safe_sample_distinct_trial(std::mt19937_64& rng) {
    return all_corrupt(draw_safe_sample(rng, kSampleS, kSampleM));
}

// True when some pool has no good holder that re-uploads it to an honest
// politician, i.e. the round could commit a NULL entry.
bool coverage_trial(std::mt19937_64& rng) {
    std::vector<uint64_t> useful(kCoverageGood, 0);  // pools a member delivers to an honest politician
    std::bernoulli_distribution honest_target(1 - kCoverageGamma);
    std::array<uint32_t, kCoverageRho> order;
    for (auto& mask : useful) {
        std::iota(order.begin(), order.end(), 0u);
        uint64_t chosen = 0;
        for (unsigned i = 0; i < kCoveragePerUpload; ++i) {
            std::uniform_int_distribution<uint32_t> pick(i, kCoverageRho - 1);
            std::swap(order[i], order[pick(rng)]);
            chosen |= uint64_t(1) << order[i];
        }
        mask = honest_target(rng) ? chosen : 0;
    }
    std::vector<uint32_t> members(kCoverageGood);
    bool uncovered = false;
    for (unsigned pool = 0; pool < kCoverageRho; ++pool) {
        std::iota(members.begin(), members.end(), 0u);
        bool covered = false;
        for (unsigned i = 0; i < kCoverageDelta; ++i) {
            std::uniform_int_distribution<uint32_t> pick(i, kCoverageGood - 1);
            std::swap(members[i], members[pick(rng)]);
            covered = covered || (useful[members[i]] >> pool & 1);
        }
        uncovered = uncovered || !covered;
    }
    return uncovered;
}

// Corrupted positions form a uniformly random tau-subset of n; the check
// misses when none of the protocol's spot-check indices hits it.
bool spot_miss(std::mt19937_64& rng, size_t n, size_t tau, size_t checks) {
    std::vector<uint32_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0u);
    std::vector<char> bad(n, 0);
    for (size_t i = 0; i < tau; ++i) {
        std::uniform_int_distribution<size_t> pick(i, n - 1);
        std::swap(idx[i], idx[pick(rng)]);
        bad[idx[i]] = 1;
    }
    for (uint32_t i : spot_check_indices(rng, n, checks))
        if (bad[i]) return false;
    return true;
}

bool read_trial(std::mt19937_64& rng) {
    return spot_miss(rng, kReadK, kReadTau, spot_check_count(kReadMu, kReadK));
}

bool write_trial(std::mt19937_64& rng) {
    return spot_miss(rng, size_t(1) << kWriteA, kWriteTau, kWriteC);
}

struct Experiment {
    ExperimentInfo info;
    TrialFn trial;
    double analytic;
    McCheck check;
    std::string law;
};

const std::vector<Experiment>& registry() {
    static const std::vector<Experiment> r = [] {
        char law[128];
        std::vector<Experiment> v;
        std::snprintf(law, sizeof law, "(%u/%u)^%u", kSampleCorrupt, kSampleS, kSampleM);
        v.push_back({{"safe_sample", 1000000, "all-corrupt sample, independent draws of 25 from 200 at 80% corrupt"},
                     safe_sample_trial, safe_sample_law(kSampleS, kSampleCorrupt, kSampleM), McCheck::TwoSided, law});
        std::snprintf(law, sizeof law, "C(%u,%u)/C(%u,%u)", kSampleCorrupt, kSampleM, kSampleS, kSampleM);
        v.push_back({{"safe_sample_distinct", 1000000, "all-corrupt sample, distinct politicians as the protocol draws them"},
                     safe_sample_distinct_trial, safe_sample_distinct_law(kSampleS, kSampleCorrupt, kSampleM),
                     McCheck::TwoSided, law});
        std::snprintf(law, sizeof law, "%u*(1-%u*(1-%.1f)/%u)^%u", kCoverageRho, kCoveragePerUpload, kCoverageGamma,
                      kCoverageRho, kCoverageDelta);
        v.push_back({{"honest_proposer_coverage", 10000, "NULL-entry incidence at committee 2000, rho 45, delta 350"},
                     coverage_trial,
                     coverage_bound(kCoverageRho, kCoveragePerUpload, kCoverageGamma, kCoverageDelta),
                     McCheck::UpperBound, law});
        std::snprintf(law, sizeof law, "exp(-%.2f*%zu)", kReadMu, kReadTau);
        v.push_back({{"read_spotcheck", 10000, "undetected read corruption, k 2000, mu 0.05, tau 100"}, read_trial,
                     std::exp(-kReadMu * double(kReadTau)), McCheck::TwoSided, law});
        std::snprintf(law, sizeof law, "(1-%zu/2^%u)^%zu", kWriteTau, kWriteA, kWriteC);
        v.push_back({{"write_spotcheck", 10000, "undetected frontier corruption, a 10, tau_w 100, c 40"}, write_trial,
                     std::pow(1 - double(kWriteTau) / double(size_t(1) << kWriteA), double(kWriteC)),
                     McCheck::TwoSided, law});
        return v;
    }();
    return r;
}

double log_choose(unsigned n, unsigned k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace

double safe_sample_law(unsigned S, unsigned corrupt, unsigned m) {
    return std::pow(double(corrupt) / S, double(m));
}

double safe_sample_distinct_law(unsigned S, unsigned corrupt, unsigned m) {
    if (m > corrupt) return 0;
    return std::exp(log_choose(corrupt, m) - log_choose(S, m));
}

double coverage_bound(unsigned rho, unsigned per_upload, double gamma, unsigned delta) {
    const double miss = (double(rho) - per_upload + per_upload * gamma) / rho;
    return rho * std::pow(miss, double(delta));
}

const std::vector<ExperimentInfo>& experiments() {
    static const std::vector<ExperimentInfo> v = [] {
        std::vector<ExperimentInfo> out;
        for (const auto& e : registry()) out.push_back(e.info);
        return out;
    }();
    return v;
}

std::optional<ExperimentInfo> find_experiment(const std::string& name) {
    for (const auto& e : experiments())
        if (e.name == name) return e;
    return std::nullopt;
}

std::pair<double, double> wilson99(uint64_t hits, uint64_t n) {
    if (n == 0) return {0, 1};
    const double z = 2.5758293035489004;
    const double p = double(hits) / double(n);
    const double nn = double(n);
    const double denom = 1 + z * z / nn;
    const double centre = (p + z * z / (2 * nn)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / nn + z * z / (4 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

McResult run_experiment(const std::string& name, uint64_t trials, uint64_t seed, bool parallel) {
    if (trials == 0) throw std::invalid_argument("trials must be positive");
    const Experiment* e = nullptr;
    for (const auto& x : registry())
        if (x.info.name == name) e = &x;
    if (!e) throw std::invalid_argument("unknown experiment '" + name + "'");
    McResult r;
    r.experiment = name;
    r.trials = trials;
    r.seed = seed;
    r.hits = parallel ? count_hits_parallel(trials, seed, e->trial) : count_hits_serial(trials, seed, e->trial);
    r.estimate = double(r.hits) / double(trials);
    std::tie(r.ci_low, r.ci_high) = wilson99(r.hits, trials);
    r.analytic = e->analytic;
    r.sigma = std::sqrt(r.analytic * (1 - r.analytic) / double(trials));
    r.check = e->check;
    r.law = e->law;
    const double tol = 3 * r.sigma;
    r.pass = e->check == McCheck::TwoSided ? std::abs(r.estimate - r.analytic) <= tol
                                           : r.estimate <= r.analytic + tol;
    return r;
}

std::string describe(const McResult& r) {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "%s trials=%llu seed=%llu estimate=%.6f ci99=[%.6f, %.6f] analytic=%.6f (%s) %s 3sigma=%.6f %s",
                  r.experiment.c_str(), (unsigned long long)r.trials, (unsigned long long)r.seed, r.estimate,
                  r.ci_low, r.ci_high, r.analytic, r.law.c_str(),
                  r.check == McCheck::TwoSided ? "within" : "below", 3 * r.sigma, r.pass ? "PASS" : "FAIL");
    return buf;
}

}  // namespace blockene

namespace blockene {

namespace {

GsCost measure_case(const TreePtr& tree, const KeyList& keys, const UpdateList& updates,
                    const std::vector<Value>& truth, const ShortDigest& new_root, const MerkleConfig& cfg,
                    const ReadParams& rp, const WriteParams& wp, unsigned m, bool worst, uint64_t seed) {
    GsStateView view(tree);
    std::mt19937_64 read_rng(seed), write_rng(seed + 1);
    GsLies lies;
    if (worst) {
        // The first rng draws of each protocol are the primary's spot-checks;
        // replaying them lets the liar corrupt exactly what goes unchecked.
        std::mt19937_64 probe = read_rng;
        const auto spot = spot_check_indices(probe, keys->size(), spot_check_count(rp.mu, keys->size()));
        std::set<uint32_t> checked(spot.begin(), spot.end());
        for (uint32_t i = 0; lies.value_keys.size() < rp.tau && i < keys->size(); ++i)
            if (!checked.count(i)) lies.value_keys.insert((*keys)[i]);
        lies.hide_exceptions = true;
        std::mt19937_64 wprobe = write_rng;
        const auto wspot = spot_check_indices(wprobe, size_t(1) << wp.a, wp.c);
        std::set<uint32_t> wchecked(wspot.begin(), wspot.end());
        for (const auto& [f, kv] : group_by_frontier(*updates, cfg, wp.a)) {
            if (lies.frontier_nodes.size() >= wp.tau_w) break;
            if (!wchecked.count(f)) lies.frontier_nodes.insert(f);
        }
        lies.salt = seed;
    }
    std::vector<std::unique_ptr<GsServer>> servers;
    for (unsigned i = 0; i < m; ++i) {
        if (worst && i == 0)
            servers.push_back(std::make_unique<LyingGsServer>(&view, lies));
        else
            servers.push_back(std::make_unique<HonestGsServer>(&view));
    }
    std::vector<GsServer*> sample;
    for (auto& s : servers) sample.push_back(s.get());

    GsCost c;
    auto r = gs_read(tree->root(), keys, sample, rp, cfg, read_rng);
    auto w = gs_update(tree->root(), updates, sample, wp, cfg, write_rng);
    c.value_bytes = r.cost.step_down("read.values");
    c.bytes = r.cost.total() + w.cost.total() - c.value_bytes;
    c.hashes = r.hashes.merkle + w.hashes.merkle;
    c.read_paths = r.paths_checked;
    c.write_bundles = w.bundles_checked;
    c.correct = r.status == GsStatus::Ok && w.status == GsStatus::Ok && r.values == truth && w.root == new_root;
    return c;
}

}  // namespace

EfficiencyReport measure_efficiency(uint64_t n, uint64_t seed) {
    const MerkleConfig cfg{30, 10};
    const ReadParams rp{0.015, 500, 2000};
    const WriteParams wp{13, 72, 800};
    const unsigned m = 25;

    std::mt19937_64 rng(seed);
    std::set<Key> ks;
    while (ks.size() < n) ks.insert(Key(rng()));
    auto keys = std::make_shared<std::vector<Key>>(ks.begin(), ks.end());
    std::vector<KeyValue> pairs;
    std::vector<Value> truth;
    auto ups = std::make_shared<std::vector<KeyValue>>();
    for (Key k : *keys) {
        const Value v = Value(rng() % 1000000);
        pairs.push_back({k, v});
        truth.push_back(v);
        ups->push_back({k, Value(v + 1 + rng() % 1000)});
    }
    auto tree = std::make_shared<const SparseMerkleTree>(SparseMerkleTree::from_pairs(cfg, std::move(pairs)));
    const ShortDigest new_root = delta_apply(tree, *ups).second;

    EfficiencyReport rep;
    rep.keys = n;
    rep.naive_bytes = 108'000'000;
    rep.naive_hashes = 18'000'000;
    rep.formula_naive_bytes = naive_bytes(n, cfg);
    rep.honest = measure_case(tree, keys, ups, truth, new_root, cfg, rp, wp, m, false, seed);
    rep.worst = measure_case(tree, keys, ups, truth, new_root, cfg, rp, wp, m, true, seed);
    return rep;
}

}  // namespace blockene
