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
#include <string>
#include <vector>

#include "blockene/adversary.hpp"
#include "blockene/commit.hpp"
#include "blockene/gstate.hpp"
#include "blockene/network.hpp"

namespace blockene {

struct SimConfig {
    std::string name = "scenario";
    unsigned citizens = 200;
    unsigned politicians = 40;
    double corrupt_citizen_frac = 0;
    double corrupt_politician_frac = 0;
    unsigned sortition_bits = 0;  // committee membership: low bits of the VRF zero
    unsigned proposer_bits = 5;
    unsigned m = 25;  // safe sample size
    unsigned rho = 10;
    // Thresholds; zero means derive from the bound calculator at (alpha, gamma, kappa).
    unsigned delta = 0;
    unsigned t_star = 0;
    unsigned n_b_tilde = 0;
    unsigned n_g_star = 0;
    unsigned fooled = 0;
    double bound_alpha = 0.75;
    double bound_gamma = 0.8;
    unsigned kappa = 30;
    unsigned blocks = 50;
    uint64_t seed = 1;
    unsigned tx_rate = 0;  // new transactions per round; 0 = every idle account submits one
    MerkleConfig merkle{30, 10};
    ReadParams read{0.05, 150, 100};
    WriteParams write{8, 40, 48};
    unsigned gossip_k = 5;
    uint64_t pool_size_bytes = 200000;
    unsigned pool_capacity = 20;
    unsigned accounts = 2000;
    uint32_t initial_balance = 1000000;
    unsigned late_joiners = 4;
    uint64_t join_height = 3;
    unsigned stale_lag = 2;
    unsigned max_consensus_steps = 62;
    NetworkModel network;
    StrategySet politician_strategies;
    StrategySet citizen_strategies;
};

// Thresholds in effect for a configuration (derived where left zero).
RoundParams resolve_round_params(const SimConfig& c);
// Throws ConfigError on invalid settings.
void validate_config(const SimConfig& c);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Percentiles {
    uint64_t p50 = 0, p90 = 0, max = 0;
};

struct BlockMetrics {
    uint64_t height = 0;
    Digest hash{};
    ShortDigest gs_root{};
    bool empty = true;
    unsigned pools = 0;
    size_t tx_count = 0;
    SimTime time_us = 0;        // commit time
    SimTime duration_us = 0;    // since the previous commit
    unsigned consensus_rounds = 0;
    unsigned signatures = 0;
    unsigned rival_signatures = 0;
    unsigned committee = 0;
    unsigned proposers = 0;
    bool winner_honest = true;
    unsigned null_inputs = 0;   // honest members entering consensus with NULL
    bool gossip_complete = true;
    uint64_t gossip_honest_up_p50 = 0;  // first gossip session, honest politicians
    unsigned gossip_ticks = 0;
    unsigned ledger_blamed = 0;
    unsigned read_corrections = 0;
    unsigned write_corrections = 0;
    unsigned evidence = 0;      // commitment conflicts, vote equivocations, bad proofs
    unsigned abstentions = 0;   // honest members that did not sign
    Percentiles citizen_up, citizen_down, politician_up, politician_down;
};

struct GenesisInfo {
    uint64_t seed = 0;
    MerkleConfig merkle;
    unsigned sortition_bits = 0;
    unsigned t_star = 0;
    PublicKey registrar{};
    std::vector<Identity> identities;
    std::vector<KeyValue> state;  // sorted by key
    Block block;
};

struct ChainRecord {
    Block block;
    ShortDigest gs_root{};
    std::vector<CommitSignature> sigs;
};

struct ChainDump {
    GenesisInfo genesis;
    std::vector<ChainRecord> records;  // heights 1..
};

struct SimResult {
    SimConfig config;
    RoundParams params;
    std::vector<BlockMetrics> blocks;
    ChainDump chain;
    std::vector<std::string> failures;  // violated invariants, in order
    unsigned forks = 0;
    unsigned stalls = 0;
    unsigned property1_violations = 0;
    unsigned gossip_incomplete = 0;
    unsigned ledger_divergence = 0;
    unsigned inventory_evidence = 0;
    uint64_t txs_committed = 0;
    uint64_t max_commit_delay = 0;  // blocks from injection to commit
    uint64_t pending_at_end = 0;
    SimTime end_time = 0;
    bool ok() const { return failures.empty(); }
    double throughput() const;  // committed txs per simulated second
};

SimResult run_simulation(const SimConfig& config);

}  // namespace blockene
