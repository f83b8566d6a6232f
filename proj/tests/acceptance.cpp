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

// Acceptance suite: one PASS/FAIL line per criterion, exit status nonzero if
// any criterion fails. Thresholds are fixed; nothing is tuned per run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "blockene/audit.hpp"
#include "blockene/bounds.hpp"
#include "blockene/config.hpp"
#include "blockene/experiments.hpp"
#include "blockene/metrics.hpp"
#include "blockene/sim.hpp"

using namespace blockene;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    std::printf("criterion %2d %-28s %s  %s\n", id, name.c_str(), pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += !pass;
}

std::string fmt(const char* f, auto... args) {
    char buf[1024];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double sigma(double p, double n) { return std::sqrt(p * (1 - p) / n); }

const EnvLookup no_env = [](const std::string&) -> std::optional<std::string> { return std::nullopt; };

std::string config_path(const std::string& name) {
    return std::string(BLOCKENE_SOURCE_DIR) + "/configs/" + name + ".cfg";
}

void bounds_criterion() {
    const auto t0 = Clock::now();
    PopulationParams p;  // alpha 0.75, gamma 0.8, m 25, M 1e6
    p.p = 2000 / p.M;
    CommitteeBounds b = derive_bounds(p);
    // Chernoff bound on the committee size leaving [1700, 2300]. The derived
    // tails sit on the budget by construction, so they are compared with a
    // floating-point allowance only.
    const double outside = std::exp(-p.M * kl_bernoulli(1699 / p.M, p.p)) +
                           std::exp(-p.M * kl_bernoulli(2301 / p.M, p.p));
    const double secs = seconds_since(t0);
    const double budget = std::ldexp(1.0, -30);
    const int lo = int(std::ceil(b.size.n_star)), hi = int(std::floor(b.size.n_tilde));
    const int ng = int(std::floor(b.n_g_star)), nb = int(std::ceil(b.n_b_tilde));
    const double worst_tail = std::max({b.size.p_c, b.size.p_c_prime, b.p_g, b.p_f, b.p_m});
    const bool pass = lo >= 1700 && hi <= 2300 && outside < budget && worst_tail <= budget * (1 + 1e-9) && ng >= 1137 &&
                      nb <= 772 && b.gap_min >= 1 && secs < 1;
    report(1, "bounds", pass,
           fmt("derived n in [%d, %d], P(n outside [1700, 2300]) <= %.2e < 2^-30; n_g*=%d, n_b~=%d, gap=%.2f; "
               "each derived tail at the 2^-30 budget (%.4e); %.3fs",
               lo, hi, outside, ng, nb, b.gap_min, worst_tail, secs));
}

void search_criterion() {
    const auto t0 = Clock::now();
    const double bad[] = {0.2, 0.25, 0.3};
    const double expected[] = {820, 2000, 14000};
    double got[3];
    bool pass = true;
    std::string detail;
    for (int i = 0; i < 3; ++i) {
        PopulationParams p;
        p.alpha = 1 - bad[i];
        got[i] = minimal_committee_mean(p).mean;
        const double dev = got[i] / expected[i] - 1;
        pass = pass && std::abs(dev) <= 0.15;
        detail += fmt("%.2f/0.8 -> %.0f (%+.1f%%)  ", bad[i], got[i], 100 * dev);
    }
    pass = pass && got[0] < got[1] && got[1] < got[2];
    const double secs = seconds_since(t0);
    pass = pass && secs < 30;
    report(2, "committee-size search", pass, detail + fmt("%.1fs", secs));
}

void safe_sample_criterion() {
    const auto t0 = Clock::now();
    McResult r = run_experiment("safe_sample", 1000000, 1);
    McResult d = run_experiment("safe_sample_distinct", 1000000, 1);
    const double secs = seconds_since(t0);
    report(3, "safe-sample Monte-Carlo", r.pass && secs < 10,
           fmt("%.6f vs 0.8^25 = %.6f (3 sigma %.6f); distinct-draw protocol %.6f <= bound; %.1fs", r.estimate,
               r.analytic, 3 * r.sigma, d.estimate, secs));
}

void coverage_criterion() {
    const auto t0 = Clock::now();
    const double direct = 45 * std::pow(44.0 / 45.0, 350);
    McResult r = run_experiment("honest_proposer_coverage", 10000, 1);
    const double limit = 0.017 + 3 * sigma(0.017, 10000);
    const double secs = seconds_since(t0);
    const bool pass = std::abs(direct - 0.0173) <= 0.0005 && r.estimate <= limit && secs < 120;
    report(4, "pool coverage", pass,
           fmt("45*(44/45)^350 = %.5f; NULL-entry incidence %.4f <= %.4f over 10^4 rounds; %.1fs", direct, r.estimate,
               limit, secs));
}

void spotcheck_criterion() {
    const auto t0 = Clock::now();
    McResult rd = run_experiment("read_spotcheck", 10000, 1);
    McResult wr = run_experiment("write_spotcheck", 10000, 1);
    const double mu_tau = 0.015 * 500;
    const double write_miss = std::pow(1 - 800.0 / 8192, 72);
    const double secs = seconds_since(t0);
    const bool pass = rd.pass && wr.pass && mu_tau > 7 && write_miss < std::ldexp(1.0, -10) && secs < 300;
    report(5, "spot-check laws", pass,
           fmt("read %.5f vs %.5f, write %.5f vs %.5f (3 sigma %.5f / %.5f); mu*tau = %.2f; (1-800/8192)^72 = %.2e; "
               "%.1fs",
               rd.estimate, rd.analytic, wr.estimate, wr.analytic, 3 * rd.sigma, 3 * wr.sigma, mu_tau, write_miss,
               secs));
}

void efficiency_criterion() {
    const auto t0 = Clock::now();
    EfficiencyReport e = measure_efficiency(300000, 1);
    const double secs = seconds_since(t0);
    const bool pass = e.honest.correct && e.worst.correct && e.byte_ratio(e.honest) >= 18 &&
                      e.hash_ratio(e.honest) >= 66 && e.byte_ratio(e.worst) >= 3 && e.hash_ratio(e.worst) >= 10 &&
                      secs < 300;
    report(6, "read/write efficiency", pass,
           fmt("honest %.1fx bytes (%.1fx with bulk values), %.1fx hashes; worst %.1fx bytes (%.1fx), %.1fx hashes; "
               "%.1fs",
               e.byte_ratio(e.honest), e.byte_ratio_with_values(e.honest), e.hash_ratio(e.honest),
               e.byte_ratio(e.worst), e.byte_ratio_with_values(e.worst), e.hash_ratio(e.worst), secs));
}

struct RunSummary {
    std::string config;
    uint64_t seed = 0;
    bool ok = false;
    bool audit_ok = false;
    std::string audit_detail;
    unsigned forks = 0, stalls = 0, property1 = 0, gossip_incomplete = 0;
    size_t blocks = 0, empties = 0, pools = 0;
    std::vector<uint64_t> honest_up;
    std::string metrics, dump, summary;
    std::string first_failure;
};

RunSummary run_one(SimConfig c) {
    SimResult r = run_simulation(c);
    RunSummary s;
    s.config = c.name;
    s.seed = c.seed;
    s.ok = r.ok();
    if (!r.failures.empty()) s.first_failure = r.failures.front();
    AuditReport a = audit_chain(r.chain);
    s.audit_ok = a.ok;
    s.audit_detail = describe(a);
    s.forks = r.forks;
    s.stalls = r.stalls;
    s.property1 = r.property1_violations;
    s.gossip_incomplete = r.gossip_incomplete;
    s.blocks = r.blocks.size();
    for (const auto& b : r.blocks) {
        s.empties += b.empty;
        s.pools += b.pools;
        s.honest_up.push_back(b.gossip_honest_up_p50);
    }
    s.metrics = metrics_stream(r.blocks);
    s.dump = serialize_chain_dump(r.chain);
    s.summary = summary_record(r).dump();
    return s;
}

uint64_t median(std::vector<uint64_t> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

void battery_criteria() {
    const std::vector<std::string> names = {"battery_honest",     "battery_stale_split", "battery_drop",
                                            "battery_withhold",   "battery_equivocate",  "battery_sinkhole",
                                            "battery_80_25"};
    const unsigned seeds = 5;
    const auto t0 = Clock::now();
    std::map<std::string, std::vector<RunSummary>> runs;
    std::map<std::string, SimConfig> configs;
    for (const auto& n : names) {
        SimConfig base = load_config(config_path(n), no_env);
        configs[n] = base;
        for (unsigned s = 1; s <= seeds; ++s) {
            SimConfig c = base;
            c.seed = s;
            const auto t1 = Clock::now();
            runs[n].push_back(run_one(c));
            const auto& r = runs[n].back();
            std::fprintf(stderr, "  %s seed %u: %zu blocks, %zu empty, %zu pools, %s, audit %s, %.1fs\n", n.c_str(), s,
                         r.blocks, r.empties, r.pools, r.ok ? "ok" : r.first_failure.c_str(),
                         r.audit_ok ? "pass" : r.audit_detail.c_str(), seconds_since(t1));
        }
    }
    const double secs = seconds_since(t0);

    // 7: safety.
    unsigned forks = 0, audit_fail = 0, run_fail = 0, total = 0;
    size_t blocks = 0;
    std::string first_bad;
    for (const auto& [n, rs] : runs)
        for (const auto& r : rs) {
            ++total;
            forks += r.forks;
            audit_fail += !r.audit_ok;
            blocks += r.blocks;
            if (!r.ok) {
                ++run_fail;
                if (first_bad.empty()) first_bad = n + " seed " + std::to_string(r.seed) + ": " + r.first_failure;
            }
            if (!r.audit_ok && first_bad.empty()) first_bad = n + ": " + r.audit_detail;
        }
    report(7, "battery safety", names.size() >= 6 && forks == 0 && audit_fail == 0 && run_fail == 0 && secs < 1800,
           fmt("%zu configs x %u seeds, %zu blocks, %u forks, %u audit failures, %u halted runs, %.0fs%s",
               names.size(), seeds, blocks, forks, audit_fail, run_fail, secs,
               first_bad.empty() ? "" : (" [" + first_bad + "]").c_str()));

    // 8: liveness.
    bool live = true;
    std::string detail;
    unsigned stalls = 0;
    for (const auto& n : names) {
        const auto& rs = runs[n];
        const SimConfig& c = configs[n];
        size_t b = 0, e = 0, p = 0;
        for (const auto& r : rs) {
            b += r.blocks;
            e += r.empties;
            p += r.pools;
            stalls += r.stalls;
        }
        const double empty_frac = double(e) / double(b);
        const double empty_limit = 0.35 + 3 * sigma(0.35, double(b));
        const double mean_pools = double(p) / double(b);
        const double floor_pools = 0.65 * (1 - c.corrupt_politician_frac) * c.rho;
        bool ok = empty_frac <= empty_limit && mean_pools >= floor_pools;
        detail += fmt("%s empty %.3f pools %.2f>=%.2f%s; ", n.c_str(), empty_frac, mean_pools, floor_pools,
                      ok ? "" : " (!)");
        if (n == "battery_withhold") {
            const double target = (1 - c.corrupt_politician_frac) * c.rho;
            const bool near = std::abs(mean_pools - target) <= 0.15 * target;
            ok = ok && near;
            detail += fmt("withhold pools %.2f vs %.2f +-15%%%s; ", mean_pools, target, near ? "" : " (!)");
        }
        live = live && ok;
    }
    report(8, "battery liveness", live && stalls == 0,
           fmt("%u stalls, empty limit 0.35 + 3 sigma; ", stalls) + detail);

    // 10: gossip.
    unsigned incomplete = 0;
    std::vector<uint64_t> honest_up, sink_up;
    for (const auto& [n, rs] : runs)
        for (const auto& r : rs) {
            incomplete += r.gossip_incomplete;
            if (n == "battery_honest") honest_up.insert(honest_up.end(), r.honest_up.begin(), r.honest_up.end());
            if (n == "battery_sinkhole") sink_up.insert(sink_up.end(), r.honest_up.begin(), r.honest_up.end());
        }
    const uint64_t mh = median(honest_up), ms = median(sink_up);
    report(10, "gossip completeness", incomplete == 0 && ms <= 2 * mh,
           fmt("%u incomplete rounds; median honest upload %llu B under sinkhole vs %llu B honest (ratio %.2f <= 2)",
               incomplete, (unsigned long long)ms, (unsigned long long)mh, double(ms) / double(mh)));

    // 11: determinism, re-running two configurations.
    bool same = true;
    for (const auto& [n, s] : {std::pair{std::string("battery_80_25"), 1u}, {std::string("battery_honest"), 2u}}) {
        SimConfig c = configs[n];
        c.seed = s;
        RunSummary again = run_one(c);
        const RunSummary& first = runs[n][s - 1];
        same = same && again.metrics == first.metrics && again.dump == first.dump && again.summary == first.summary;
    }
    report(11, "determinism", same, "battery_80_25 seed 1 and battery_honest seed 2 re-run byte-identically");

    // 12: agreement audit.
    unsigned violations = 0;
    for (const auto& [n, rs] : runs)
        for (const auto& r : rs) violations += r.property1;
    report(12, "consensus input audit", violations == 0,
           fmt("%u violations across %u runs (non-NULL outputs backed by >= ceil((n-1)/3) honest inputs)", violations,
               total));
}

void throughput_criterion() {
    const auto t0 = Clock::now();
    const double pol[] = {0, 0.5, 0.8};
    const double cit[] = {0, 0.1, 0.25};
    double tput[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double txs = 0, time_s = 0;
            for (uint64_t s = 1; s <= 3; ++s) {
                SimConfig c;
                c.name = "matrix";
                c.blocks = 20;
                c.seed = s;
                c.corrupt_politician_frac = pol[i];
                c.corrupt_citizen_frac = cit[j];
                if (pol[i] > 0) c.politician_strategies = *StrategySet::parse("withhold_commitments");
                if (cit[j] > 0) c.citizen_strategies = *StrategySet::parse("malicious_proposer");
                SimResult r = run_simulation(c);
                txs += double(r.txs_committed);
                time_s += double(r.end_time) / 1e6;
            }
            tput[i][j] = txs / time_s;
        }
    bool dec = true;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j + 1 < 3; ++j) dec = dec && tput[i][j] > tput[i][j + 1] && tput[j][i] > tput[j + 1][i];
    std::string detail = "tx/s rows politicians 0/50/80%, cols citizens 0/10/25%:";
    for (int i = 0; i < 3; ++i) detail += fmt(" [%.2f %.2f %.2f]", tput[i][0], tput[i][1], tput[i][2]);
    report(9, "throughput degradation", dec, detail + fmt(" %.0fs", seconds_since(t0)));
}

}  // namespace

int main() {
    bounds_criterion();
    search_criterion();
    safe_sample_criterion();
    coverage_criterion();
    spotcheck_criterion();
    efficiency_criterion();
    battery_criteria();
    throughput_criterion();
    std::printf("acceptance: %d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
