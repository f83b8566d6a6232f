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

// Command-line entry point: bound tables, simulation runs, chain audits and
// Monte-Carlo experiments.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "blockene/audit.hpp"
#include "blockene/bounds.hpp"
#include "blockene/config.hpp"
#include "blockene/experiments.hpp"
#include "blockene/metrics.hpp"
#include "blockene/sim.hpp"

namespace {

using namespace blockene;

constexpr int kExitConfig = 2;
constexpr int kExitAssertion = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed for " + path);
    return ss.str();
}

void print_bounds(const char* label, const PopulationParams& p, const CommitteeBounds& b) {
    std::printf("%s alpha=%.3f gamma=%.3f m=%d M=%.0f mean=%.1f\n", label, p.alpha, p.gamma, p.m, p.M, p.mean());
    std::printf("  committee size   n in [%.1f, %.1f]  P(n<n*)=%.3g  P(n>n~)=%.3g\n", b.size.n_star, b.size.n_tilde,
                b.size.p_c, b.size.p_c_prime);
    std::printf("  good members     n_g* = %.2f  (P tail %.3g, fan-out tail %.3g)\n", b.n_g_star, b.p_g, b.p_f);
    std::printf("  bad members      n_b~ = %.2f  (P tail %.3g)\n", b.n_b_tilde, b.p_m);
    std::printf("  gap_min          %.2f\n", b.gap_min);
    std::printf("  integer bounds   n in [%d, %d]  n_g* >= %d  n_b~ <= %d\n", int(std::ceil(b.size.n_star)),
                int(std::floor(b.size.n_tilde)), int(std::floor(b.n_g_star)), int(std::ceil(b.n_b_tilde)));
}

int cmd_params(const PopulationParams& base, bool search, const std::string& config_path) {
    if (!config_path.empty()) {
        SimConfig c = load_config(config_path);
        RoundParams rp = resolve_round_params(c);
        std::printf("config %s: committee %u citizens, S=%u, m=%u, rho=%u\n", c.name.c_str(), c.citizens,
                    c.politicians, c.m, c.rho);
        std::printf("  t_star=%u delta=%u n_b~=%u n_g*=%u fooled=%u vote_threshold=%u\n", rp.t_star, rp.delta,
                    rp.n_b_tilde, rp.n_g_star, rp.fooled, rp.vote_threshold());
        return 0;
    }
    print_bounds("bounds", base, derive_bounds(base));
    if (search) {
        std::printf("minimal mean committee size (gap_min >= 1):\n");
        std::printf("  %-8s %-8s %s\n", "1-alpha", "gamma", "mean");
        for (double bad : {0.2, 0.25, 0.3}) {
            PopulationParams p = base;
            p.alpha = 1 - bad;
            MeanSearch s = minimal_committee_mean(p);
            std::printf("  %-8.2f %-8.2f %.0f\n", bad, p.gamma, s.mean);
        }
    }
    return 0;
}

int cmd_run(const std::string& config_path, std::optional<uint64_t> seed, std::optional<unsigned> blocks,
            const std::string& out_dir) {
    SimConfig c = load_config(config_path);
    if (seed) c.seed = *seed;
    if (blocks) c.blocks = *blocks;
    validate_config(c);
    SimResult r = run_simulation(c);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
    const std::filesystem::path dir(out_dir);
    write_file(dir / "metrics.jsonl", metrics_stream(r.blocks));
    write_file(dir / "chain.jsonl", serialize_chain_dump(r.chain));
    write_file(dir / "summary.json", summary_record(r).dump(2) + "\n");

    size_t empties = 0;
    for (const auto& b : r.blocks) empties += b.empty;
    std::printf("%s seed=%llu blocks=%zu empty=%zu txs=%llu forks=%u stalls=%u %s\n", c.name.c_str(),
                (unsigned long long)c.seed, r.blocks.size(), empties, (unsigned long long)r.txs_committed, r.forks,
                r.stalls, r.ok() ? "ok" : "FAILED");
    if (!r.ok()) {
        for (const auto& f : r.failures) std::fprintf(stderr, "invariant violated: %s\n", f.c_str());
        return kExitAssertion;
    }
    return 0;
}

int cmd_audit(const std::string& path) {
    const std::string text = read_file(path);
    AuditReport rep;
    try {
        rep = audit_chain(parse_chain_dump(text));
    } catch (const DumpError& e) {
        rep.ok = false;
        rep.check = "parse";
        rep.diagnostic = e.what();
    }
    Json verdict{{"verdict", rep.ok ? "pass" : "fail"},
                 {"blocks", rep.blocks},
                 {"txs", rep.txs},
                 {"height", rep.height},
                 {"check", rep.check},
                 {"diagnostic", rep.diagnostic}};
    std::printf("%s\n", verdict.dump().c_str());
    return rep.ok ? 0 : kExitAssertion;
}

int cmd_mc(const std::string& experiment, std::optional<uint64_t> trials, uint64_t seed) {
    std::vector<ExperimentInfo> todo;
    if (experiment == "all") {
        todo = experiments();
    } else if (auto e = find_experiment(experiment)) {
        todo.push_back(*e);
    } else {
        std::fprintf(stderr, "unknown experiment '%s'; known:", experiment.c_str());
        for (const auto& e : experiments()) std::fprintf(stderr, " %s", e.name.c_str());
        std::fprintf(stderr, "\n");
        return kExitConfig;
    }
    bool ok = true;
    for (const auto& e : todo) {
        McResult r = run_experiment(e.name, trials.value_or(e.default_trials), seed);
        std::printf("%s\n", describe(r).c_str());
        ok = ok && r.pass;
    }
    return ok ? 0 : kExitAssertion;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Blockene protocol simulator"};
    app.require_subcommand(1);

    PopulationParams pop;
    double mean = 2000;
    bool search = false;
    std::string params_config;
    auto* params = app.add_subcommand("params", "Committee bounds and the minimal-mean search");
    params->add_option("--alpha", pop.alpha, "Honest citizen fraction")->envname("BLOCKENE_ALPHA");
    params->add_option("--gamma", pop.gamma, "Corrupt politician fraction")->envname("BLOCKENE_GAMMA");
    params->add_option("--m", pop.m, "Safe-sample size")->envname("BLOCKENE_M");
    params->add_option("--population", pop.M, "Citizen population")->envname("BLOCKENE_POPULATION");
    params->add_option("--mean", mean, "Mean committee size")->envname("BLOCKENE_MEAN");
    params->add_option("--kappa", pop.kappa, "Per-event failure exponent")->envname("BLOCKENE_KAPPA");
    params->add_flag("--search", search, "Also search the minimal mean for 20/25/30% bad citizens");
    params->add_option("--config", params_config, "Print the thresholds a scenario config resolves to");

    std::string config_path, out_dir = ".";
    std::optional<uint64_t> seed;
    std::optional<unsigned> blocks;
    auto* run = app.add_subcommand("run", "Run a scenario and write metrics, chain dump and summary");
    run->add_option("--config", config_path, "Scenario config")->required()->envname("BLOCKENE_CONFIG");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--blocks", blocks, "Override the number of blocks");
    run->add_option("--out-dir", out_dir, "Output directory")->envname("BLOCKENE_OUT_DIR");

    std::string dump_path;
    auto* audit = app.add_subcommand("audit", "Re-verify a chain dump from genesis");
    audit->add_option("dump", dump_path, "Chain dump (JSON lines)")->required();

    std::string experiment = "all";
    std::optional<uint64_t> trials;
    uint64_t mc_seed = 1;
    auto* mc = app.add_subcommand("mc", "Monte-Carlo experiment against its analytic law");
    mc->add_option("--experiment", experiment, "Experiment name or 'all'")->envname("BLOCKENE_EXPERIMENT");
    mc->add_option("--trials", trials, "Trials (default per experiment)")->envname("BLOCKENE_TRIALS");
    mc->add_option("--seed", mc_seed, "RNG seed")->envname("BLOCKENE_SEED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*params) {
            pop.p = mean / pop.M;
            return cmd_params(pop, search, params_config);
        }
        if (*run) return cmd_run(config_path, seed, blocks, out_dir);
        if (*audit) return cmd_audit(dump_path);
        if (*mc) return cmd_mc(experiment, trials, mc_seed);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const InfeasibleConfig& e) {
        std::fprintf(stderr, "infeasible: %s\n", e.what());
        return kExitConfig;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "invalid parameters: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid argument: %s\n", e.what());
        return kExitConfig;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::ios_base::failure& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "assertion failure: %s\n", e.what());
        return kExitAssertion;
    }
    return 0;
}
