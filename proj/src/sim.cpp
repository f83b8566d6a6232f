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

#include "blockene/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <random>
#include <set>

#include "blockene/bounds.hpp"
#include "blockene/consensus.hpp"
#include "blockene/gossip.hpp"
#include "blockene/sortition.hpp"

namespace blockene {

double SimResult::throughput() const {
    return end_time > 0 ? double(txs_committed) / (double(end_time) / kSecond) : 0.0;
}

RoundParams resolve_round_params(const SimConfig& c) {
    RoundParams p;
    p.rho = c.rho;
    if (c.t_star && c.delta && c.n_b_tilde && c.n_g_star) {
        p.t_star = c.t_star;
        p.delta = c.delta;
        p.n_b_tilde = c.n_b_tilde;
        p.n_g_star = c.n_g_star;
        p.fooled = c.fooled;
        return p;
    }
    CommitteeBounds b;
    double n = c.citizens;
    try {
        if (c.sortition_bits == 0) {
            b = full_committee_bounds(c.citizens, c.bound_alpha, c.bound_gamma, int(c.m), c.kappa);
        } else {
            PopulationParams pp;
            pp.M = c.citizens;
            pp.alpha = c.bound_alpha;
            pp.gamma = c.bound_gamma;
            pp.m = int(c.m);
            pp.p = std::ldexp(1.0, -int(c.sortition_bits));
            pp.kappa = c.kappa;
            b = derive_bounds(pp);
            n = b.size.n_tilde;
        }
    } catch (const std::exception& e) {
        throw ConfigError(std::string("thresholds infeasible: ") + e.what());
    }
    const double eps_read = std::exp(-c.read.mu * c.read.tau);
    const double eps_write = std::pow(1.0 - double(c.write.tau_w) / std::ldexp(1.0, int(c.write.a)), double(c.write.c));
    const int fooled = c.fooled ? int(c.fooled)
                                : fooled_allowance(n, eps_read, c.kappa) + fooled_allowance(n, eps_write, c.kappa);
    ThresholdPlan plan;
    try {
        plan = plan_thresholds(b, fooled);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("thresholds infeasible: ") + e.what());
    }
    p.n_g_star = unsigned(plan.n_g_star);
    p.n_b_tilde = unsigned(plan.n_b_tilde);
    p.fooled = unsigned(plan.fooled);
    p.t_star = c.t_star ? c.t_star : unsigned(plan.t_star);
    p.delta = c.delta ? c.delta : unsigned(plan.delta);
    return p;
}

void validate_config(const SimConfig& c) {
    auto frac_ok = [](double f) { return f >= 0 && f <= 1; };
    if (!frac_ok(c.corrupt_citizen_frac) || !frac_ok(c.corrupt_politician_frac))
        throw ConfigError("corrupt fractions must lie in [0, 1]");
    if (c.citizens < 4) throw ConfigError("need at least 4 citizens");
    if (c.politicians < 1) throw ConfigError("need at least one politician");
    if (c.m == 0 || c.m > c.politicians) throw ConfigError("safe sample size must be in [1, politicians]");
    const unsigned pools_per_slot = c.politician_strategies.has(Strategy::Equivocate) ? 2 : 1;
    if (c.rho == 0 || c.rho > c.politicians || pools_per_slot * c.rho > kMaxPools)
        throw ConfigError("rho must be in [1, politicians] and at most 64 pools may exist per round");
    if (c.blocks == 0) throw ConfigError("blocks must be positive");
    if (c.accounts < 2) throw ConfigError("need at least two accounts");
    if (c.pool_capacity == 0) throw ConfigError("pool capacity must be positive");
    if (c.merkle.depth == 0 || c.merkle.depth > 32 || c.merkle.theta == 0) throw ConfigError("bad merkle parameters");
    if (c.read.B == 0 || c.read.mu <= 0 || c.read.mu > 1) throw ConfigError("bad read parameters");
    if (c.write.a == 0 || c.write.a > c.merkle.depth || c.write.c == 0) throw ConfigError("bad write parameters");
    if (c.gossip_k == 0) throw ConfigError("gossip_k must be positive");
    for (auto s : c.politician_strategies.list())
        if (!politician_strategy(s)) throw ConfigError(std::string("not a politician strategy: ") + strategy_name(s));
    for (auto s : c.citizen_strategies.list())
        if (!citizen_strategy(s)) throw ConfigError(std::string("not a citizen strategy: ") + strategy_name(s));
    if (c.network.citizen_rate <= 0 || c.network.politician_rate <= 0) throw ConfigError("network rates must be positive");
    if (c.network.latency_min_s < 0 || c.network.latency_max_s < c.network.latency_min_s)
        throw ConfigError("bad latency range");
    const RoundParams p = resolve_round_params(c);
    if (!round_params_valid(p)) throw ConfigError("threshold arithmetic violated: n_b + fooled < t_star <= n_g - fooled");
    const unsigned corrupt = unsigned(std::lround(c.corrupt_citizen_frac * c.citizens));
    if (corrupt > fault_bound(c.citizens)) throw ConfigError("corrupt citizens exceed the agreement fault bound");
}

namespace {

std::mt19937_64 stream(uint64_t seed, std::string_view label, uint64_t a = 0, uint64_t b = 0) {
    Digest d = Hasher().put("rng").put_u64(seed).put(label).put_u64(a).put_u64(b).finish();
    std::seed_seq seq{uint32_t(d[0]) | uint32_t(d[1]) << 8 | uint32_t(d[2]) << 16 | uint32_t(d[3]) << 24,
                      uint32_t(d[4]) | uint32_t(d[5]) << 8 | uint32_t(d[6]) << 16 | uint32_t(d[7]) << 24,
                      uint32_t(d[8]) | uint32_t(d[9]) << 8 | uint32_t(d[10]) << 16 | uint32_t(d[11]) << 24,
                      uint32_t(d[12]) | uint32_t(d[13]) << 8 | uint32_t(d[14]) << 16 | uint32_t(d[15]) << 24};
    return std::mt19937_64(seq);
}

Percentiles percentiles(std::vector<uint64_t> v) {
    Percentiles p;
    if (v.empty()) return p;
    std::sort(v.begin(), v.end());
    p.p50 = v[(v.size() - 1) / 2];
    p.p90 = v[std::min(v.size() - 1, size_t(std::ceil(0.9 * double(v.size()))) - 1)];
    p.max = v.back();
    return p;
}

std::vector<unsigned> pick_corrupt(uint64_t seed, std::string_view label, unsigned n, double frac) {
    const unsigned k = unsigned(std::lround(frac * n));
    std::vector<unsigned> idx(n);
    for (unsigned i = 0; i < n; ++i) idx[i] = i;
    auto rng = stream(seed, label);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(k);
    std::sort(idx.begin(), idx.end());
    return idx;
}

constexpr uint64_t kVoteBytes = 8 + 4 + 32 + 32 + 64;
constexpr uint64_t kCommitmentBytes = 4 + 8 + 32 + 64;
constexpr uint64_t kCommitSigBytes = 32 + 32 + 64 + 64 + 32 + 10 + 32;

struct Politician {
    KeyPair kp;
    bool corrupt = false;
    StrategySet strategies;
    bool has(Strategy s) const { return corrupt && strategies.has(s); }
    // Serves pool bytes to citizens.
    bool serves_pools() const { return !has(Strategy::Drop) && !has(Strategy::WithholdCommitments) && !has(Strategy::Equivocate); }
};

struct Citizen {
    KeyPair kp;
    bool corrupt = false;
    bool genesis = true;
    Identity identity;
    LocalState ls;
};

struct Account {
    KeyPair kp;
    uint64_t nonce = 0;  // last committed
    bool pending = false;
    uint64_t injected = 0;
};

struct Member {
    unsigned citizen = 0;
    VrfOutput vrf;
    std::vector<uint32_t> sample;
    bool halted = false;
    PoolMask held = 0;
    std::mt19937_64 rng;
};

}  // namespace

SimResult run_simulation(const SimConfig& cfg) {
    validate_config(cfg);
    SimResult res;
    res.config = cfg;
    res.params = resolve_round_params(cfg);
    const RoundParams& rp = res.params;
    const unsigned S = cfg.politicians;
    const unsigned total_citizens = cfg.citizens + cfg.late_joiners;
    Network net(cfg.network, S, total_citizens, cfg.seed);
    VerifyCache cache;
    ProofMemo memo;
    BuildMemo build_memo;

    // Politicians.
    std::vector<Politician> pols(S);
    for (unsigned j = 0; j < S; ++j) pols[j].kp = derive_keypair(cfg.seed, "politician", j);
    for (unsigned j : pick_corrupt(cfg.seed, "corrupt-politicians", S, cfg.corrupt_politician_frac)) {
        pols[j].corrupt = true;
        pols[j].strategies = cfg.politician_strategies;
    }

    // Citizens and identities.
    const KeyPair registrar = derive_keypair(cfg.seed, "registrar", 0);
    IdentityRegistry registry(registrar.vk);
    std::vector<Citizen> cits(total_citizens);
    for (unsigned i = 0; i < total_citizens; ++i) {
        cits[i].kp = derive_keypair(cfg.seed, "citizen", i);
        cits[i].genesis = i < cfg.citizens;
        const Digest tee = Hasher().put("tee").put_u64(cfg.seed).put_u32(i).finish();
        cits[i].identity = make_identity(tee, cits[i].kp.vk, registrar.sk);
        if (cits[i].genesis) registry.register_identity(cits[i].identity, true);
    }
    std::vector<unsigned> corrupt_citizens = pick_corrupt(cfg.seed, "corrupt-citizens", cfg.citizens, cfg.corrupt_citizen_frac);
    for (unsigned i : corrupt_citizens) cits[i].corrupt = true;
    std::vector<const KeyPair*> colluders;
    for (unsigned i : corrupt_citizens) colluders.push_back(&cits[i].kp);

    // Accounts and genesis state.
    std::vector<Account> accts(cfg.accounts);
    std::map<Key, Value> genesis_kv;
    for (unsigned a = 0; a < cfg.accounts; ++a) {
        accts[a].kp = derive_keypair(cfg.seed, "account", a);
        genesis_kv[balance_key(accts[a].kp.vk)] = cfg.initial_balance;
    }
    std::vector<KeyValue> genesis_pairs;
    for (auto [k, v] : genesis_kv) genesis_pairs.push_back({k, v});
    TreePtr tree = std::make_shared<SparseMerkleTree>(SparseMerkleTree::from_pairs(cfg.merkle, genesis_pairs));
    Block genesis;
    genesis.hash_prev_block = Hasher().put("genesis").put_u64(cfg.seed).finish();
    genesis.subblock.hash_prev_block = genesis.hash_prev_block;
    for (unsigned i = 0; i < cfg.citizens; ++i) genesis.subblock.new_identities.push_back(cits[i].identity);
    ChainStore chain({genesis, genesis.hash(), tree->root(), {}});

    res.chain.genesis.seed = cfg.seed;
    res.chain.genesis.merkle = cfg.merkle;
    res.chain.genesis.sortition_bits = cfg.sortition_bits;
    res.chain.genesis.t_star = rp.t_star;
    res.chain.genesis.registrar = registrar.vk;
    res.chain.genesis.identities = registry.all();
    res.chain.genesis.state = genesis_pairs;
    res.chain.genesis.block = genesis;

    const LocalState ls0 = genesis_state(genesis, tree->root(), registry);
    for (auto& c : cits) c.ls = ls0;

    std::deque<std::shared_ptr<GsStateView>> views;  // views.back() = current state
    views.push_back(std::make_shared<GsStateView>(tree));

    // Ledger sources.
    HonestLedgerSource honest_src(&chain);
    StaleLedgerSource stale_src(&chain, cfg.stale_lag);
    ForgingLedgerSource forging_src(&chain, colluders, cfg.sortition_bits);
    SilentLedgerSource silent_src;
    auto ledger_source = [&](unsigned p, unsigned citizen) -> LedgerSource* {
        const auto& P = pols[p];
        if (P.has(Strategy::Drop)) return &silent_src;
        if (P.has(Strategy::SplitView) && citizen % 2 == 1) return &forging_src;
        if (P.has(Strategy::Staleness)) return &stale_src;
        return &honest_src;
    };

    std::vector<Transaction> mempool;
    uint64_t next_uuid = 1000;
    const GetLedgerParams glp{rp.t_star, cfg.sortition_bits, 10};
    GossipParams gparams;
    gparams.k_outstanding = cfg.gossip_k;
    gparams.pool_bytes = cfg.pool_size_bytes;

    SimTime now = 0;
    auto fail = [&](uint64_t h, const std::string& what) {
        res.failures.push_back("height " + std::to_string(h) + ": " + what);
    };

    for (uint64_t N = 1; N <= cfg.blocks; ++N) {
        BlockMetrics bm;
        bm.height = N;
        const SimTime round_start = now;
        net.reset_meters();
        net.prune(now);
        const ChainEntry prev = chain.at(N - 1);
        const Digest prev_subblock = prev.block.subblock.hash();
        const Digest seed_hash = chain.at(seed_height(N)).hash;
        const auto& view = views.back();

        // Client transactions.
        unsigned submitted = 0;
        const unsigned offset = unsigned(((N - 1) * uint64_t(cfg.tx_rate)) % cfg.accounts);
        for (unsigned i = 0; i < cfg.accounts; ++i) {
            if (cfg.tx_rate && submitted == cfg.tx_rate) break;
            const unsigned a = (offset + i) % cfg.accounts;
            auto& ac = accts[a];
            if (ac.pending) continue;
            ++submitted;
            auto rng = stream(cfg.seed, "tx", N, a);
            unsigned to = unsigned(rng() % (cfg.accounts - 1));
            if (to >= a) ++to;
            mempool.push_back(make_transfer(ac.kp, accts[to].kp.vk, ac.nonce + 1, uint32_t(1 + rng() % 100), next_uuid++));
            ac.pending = true;
            ac.injected = N;
        }
        if (N == cfg.join_height)
            for (unsigned i = cfg.citizens; i < total_citizens; ++i)
                mempool.push_back(make_add_identity(cits[i].kp, cits[i].identity, i - cfg.citizens + 1));

        // getLedger.
        SimTime t = now;
        SimTime step_end = t;
        for (unsigned i = 0; i < total_citizens; ++i) {
            auto& c = cits[i];
            if (c.corrupt) continue;
            auto rng = stream(cfg.seed, "ledger-sample", N, i);
            auto sample = draw_safe_sample(rng, S, cfg.m);
            std::vector<LedgerSource*> srcs;
            for (auto p : sample) srcs.push_back(ledger_source(p, i));
            GetLedgerResult g = get_ledger(c.ls, srcs, glp, &cache);
            bm.ledger_blamed += unsigned(g.blamed.size());
            if (g.accepted) c.ls = std::move(g.state);
            step_end = std::max(step_end, net.transfer(sample[0], net.citizen_node(i), std::max<uint64_t>(g.bytes_down, 64), t));
        }
        t = step_end;

        // Committee.
        std::vector<Member> members;
        std::vector<Candidate> cands;
        for (unsigned i = 0; i < total_citizens; ++i) {
            auto& c = cits[i];
            if (!registry.eligible_vk(c.kp.vk, N)) continue;
            VrfOutput vrf = compute_vrf(c.kp.sk, seed_hash, N);
            if (!sortition_member(vrf, cfg.sortition_bits)) continue;
            Member m;
            m.citizen = i;
            m.vrf = vrf;
            m.sample = vrf_safe_sample(vrf.value, S, cfg.m);
            m.rng = stream(cfg.seed, "member", N, i);
            if (!c.corrupt) {
                if (c.ls.height != N - 1 || c.ls.hash_block != prev.hash) {
                    m.halted = true;
                    ++bm.abstentions;
                    if (c.ls.height == N - 1) {
                        ++res.ledger_divergence;
                        fail(N, "citizen " + std::to_string(i) + " accepted a divergent ledger");
                    }
                } else if (c.ls.gs_root != prev.gs_root || c.ls.hash_subblock != prev_subblock) {
                    ++res.ledger_divergence;
                    fail(N, "citizen " + std::to_string(i) + " local state differs from the chain");
                }
            }
            cands.push_back({uint32_t(members.size()), c.kp.vk, &c.kp.sk});
            members.push_back(std::move(m));
        }
        const unsigned n = unsigned(members.size());
        bm.committee = n;
        unsigned corrupt_members = 0;
        for (const auto& m : members) corrupt_members += cits[m.citizen].corrupt;
        if (corrupt_members > fault_bound(n)) fail(N, "corrupt committee members exceed the fault bound");

        // Pools and commitments.
        const auto designated = designated_politicians(N, prev.hash, cfg.rho, S);
        std::vector<std::vector<Transaction>> by_slot(cfg.rho);
        for (const auto& tx : mempool) by_slot[shard_transaction(tx.originator, N, cfg.rho)].push_back(tx);
        std::vector<Commitment> pool_commit;                 // pool id -> commitment
        std::vector<unsigned> pool_slot;                     // pool id -> slot
        std::map<Digest, std::vector<Transaction>> pool_txs;  // by pool digest
        std::vector<std::vector<Commitment>> known(cfg.rho);
        std::vector<std::vector<unsigned>> slot_pools(cfg.rho);
        for (unsigned s = 0; s < cfg.rho; ++s) {
            const auto& P = pols[designated[s]];
            if (P.has(Strategy::Drop)) continue;
            auto add = [&](const FrozenPool& f) {
                if (pool_txs.count(f.pool.digest)) return;
                pool_txs[f.pool.digest] = f.pool.txs;
                slot_pools[s].push_back(unsigned(pool_commit.size()));
                pool_commit.push_back(f.commitment);
                pool_slot.push_back(s);
                known[s].push_back(f.commitment);
            };
            add(freeze_pool(P.kp, designated[s], s, N, cfg.rho, by_slot[s], cfg.pool_capacity));
            if (P.has(Strategy::Equivocate) && cfg.pool_capacity > 1)
                add(freeze_pool(P.kp, designated[s], s, N, cfg.rho, by_slot[s], std::max<size_t>(1, by_slot[s].size()) - 1));
        }
        const unsigned npools = unsigned(pool_commit.size());
        if (npools > kMaxPools) throw std::logic_error("too many pools in a round");

        // Step 1: downloads and witness lists.
        step_end = t;
        for (unsigned k = 0; k < n; ++k) {
            auto& m = members[k];
            if (m.halted) continue;
            const auto& c = cits[m.citizen];
            const unsigned node = net.citizen_node(m.citizen);
            for (unsigned s = 0; s < cfg.rho; ++s) {
                const auto& P = pols[designated[s]];
                if (slot_pools[s].empty()) continue;
                unsigned pid = slot_pools[s][0];
                bool served = true;
                if (!c.corrupt) {
                    if (P.has(Strategy::WithholdCommitments)) served = false;
                    if (P.has(Strategy::Equivocate) && slot_pools[s].size() > 1) pid = slot_pools[s][m.citizen % 2];
                }
                SimTime a = net.transfer(designated[s], node, kCommitmentBytes, t);
                if (served) {
                    a = net.transfer(designated[s], node, cfg.pool_size_bytes, t);
                    m.held |= PoolMask(1) << pid;
                }
                if (!c.corrupt) step_end = std::max(step_end, a);
            }
        }
        t = step_end;
        std::vector<WitnessList> wls;
        std::vector<Commitment> seen_commitments;
        step_end = t;
        for (unsigned k = 0; k < n; ++k) {
            auto& m = members[k];
            if (m.halted) continue;
            std::vector<std::optional<Digest>> slots(cfg.rho);
            for (unsigned pid = 0; pid < npools; ++pid)
                if ((m.held >> pid) & 1) {
                    const unsigned s = pool_slot[pid];
                    if (!slots[s]) slots[s] = pool_commit[pid].digest();
                    seen_commitments.push_back(pool_commit[pid]);
                }
            wls.push_back(make_witness_list(cits[m.citizen].kp, m.vrf, N, std::move(slots)));
            const unsigned node = net.citizen_node(m.citizen);
            for (auto p : m.sample) step_end = std::max(step_end, net.transfer(node, p, wls.back().wire_bytes(), t));
        }
        for (const auto& conflict : find_conflicts(seen_commitments))
            if (conflict_valid(conflict, pols[conflict.first.politician].kp.vk)) ++bm.evidence;
        t = step_end;

        // Proposals.
        std::vector<CommitteeMember> props = select_proposers(cands, prev.hash, N, cfg.proposer_bits);
        bm.proposers = unsigned(props.size());
        std::vector<Proposal> proposals;
        std::vector<bool> proposal_split;  // visible to even citizens only
        const unsigned threshold = rp.vote_threshold();
        step_end = t;
        for (const auto& cm : props) {
            const auto& m = members[cm.id];
            const auto& c = cits[m.citizen];
            if (m.halted) continue;
            const bool malicious = c.corrupt && cfg.citizen_strategies.has(Strategy::MaliciousProposer);
            std::vector<Commitment> ids;
            if (malicious) {
                for (unsigned s = 0; s < cfg.rho; ++s)
                    if (!known[s].empty()) ids.push_back(known[s].front());
            } else {
                ids = select_id_list(known, wls, threshold);
            }
            proposals.push_back(make_proposal(c.kp, cm.vrf, N, std::move(ids)));
            proposal_split.push_back(malicious);
            const unsigned node = net.citizen_node(m.citizen);
            uint64_t wl_bytes = 0;
            for (const auto& wl : wls) wl_bytes += wl.wire_bytes();
            SimTime a = net.transfer(m.sample[0], node, wl_bytes, t);
            const SimTime sent = a;
            for (auto p : m.sample) a = std::max(a, net.transfer(node, p, proposals.back().wire_bytes(), sent));
            step_end = std::max(step_end, a);
        }
        t = step_end;
        bm.winner_honest = proposals.empty() || !proposal_split.front();

        // Politician holdings and the first re-upload.
        std::vector<PoolMask> pol_holds(S, 0);
        for (unsigned pid = 0; pid < npools; ++pid) pol_holds[designated[pool_slot[pid]]] |= PoolMask(1) << pid;
        auto reupload = [&](unsigned count, SimTime start) {
            SimTime end = start;
            for (auto& m : members) {
                if (m.halted || cits[m.citizen].corrupt || !m.held) continue;
                std::vector<unsigned> held;
                for (unsigned pid = 0; pid < npools; ++pid)
                    if ((m.held >> pid) & 1) held.push_back(pid);
                std::shuffle(held.begin(), held.end(), m.rng);
                if (held.size() > count) held.resize(count);
                const unsigned target = m.sample[m.rng() % m.sample.size()];
                for (auto pid : held) {
                    pol_holds[target] |= PoolMask(1) << pid;
                    end = std::max(end, net.transfer(net.citizen_node(m.citizen), target, cfg.pool_size_bytes, start));
                }
            }
            return end;
        };
        t = reupload(rp.reupload_first, t);

        auto gossip = [&](SimTime start, bool record) {
            std::vector<GossipPeer> peers(S);
            for (unsigned j = 0; j < S; ++j) {
                peers[j].role = gossip_role(pols[j].corrupt, pols[j].strategies);
                peers[j].holds = pol_holds[j];
            }
            GossipResult g = run_gossip(peers, gparams, &net, start);
            if (!gossip_complete(g, peers)) {
                bm.gossip_complete = false;
                ++res.gossip_incomplete;
                fail(N, "gossip left an honest politician without a pool held by an honest politician");
            }
            res.inventory_evidence += unsigned(g.evidence.size());
            for (unsigned j = 0; j < S; ++j) pol_holds[j] = g.holds[j];
            if (record) {
                std::vector<uint64_t> up;
                for (unsigned j = 0; j < S; ++j)
                    if (!pols[j].corrupt) up.push_back(g.up[j]);
                bm.gossip_honest_up_p50 = percentiles(up).p50;
                bm.gossip_ticks = g.ticks;
            }
            return g.end;
        };
        t = gossip(t, true);

        // Retry from the safe sample.
        auto fetch = [&](Member& m, PoolMask need, SimTime start, SimTime& end) {
            PoolMask missing = need & ~m.held;
            const unsigned node = net.citizen_node(m.citizen);
            for (PoolMask mm = missing; mm; mm &= mm - 1) {
                const unsigned pid = unsigned(__builtin_ctzll(mm));
                for (auto p : m.sample) {
                    if (!pols[p].serves_pools() || !((pol_holds[p] >> pid) & 1)) continue;
                    end = std::max(end, net.transfer(p, node, cfg.pool_size_bytes, start));
                    m.held |= PoolMask(1) << pid;
                    break;
                }
            }
            return (need & ~m.held) == 0;
        };
        auto pool_mask_of = [&](const Proposal& p, bool& unknown) {
            PoolMask mask = 0;
            for (const auto& c : p.id_list) {
                auto it = std::find(pool_commit.begin(), pool_commit.end(), c);
                if (it == pool_commit.end()) {
                    unknown = true;
                    continue;
                }
                mask |= PoolMask(1) << (it - pool_commit.begin());
            }
            return mask;
        };

        // Initial values.
        ConsensusSetup setup;
        setup.roles.resize(n);
        setup.inputs.assign(n, std::nullopt);
        step_end = t;
        for (unsigned k = 0; k < n; ++k) {
            auto& m = members[k];
            const auto& c = cits[m.citizen];
            setup.roles[k] = c.corrupt ? MemberRole::Corrupt : m.halted ? MemberRole::Halted : MemberRole::Honest;
            setup.vks.push_back(c.kp.vk);
            if (setup.roles[k] != MemberRole::Honest) continue;
            const Proposal* win = nullptr;
            for (size_t q = 0; q < proposals.size(); ++q) {
                if (proposal_split[q] && m.citizen % 2 == 1) continue;
                if (!proposal_valid(proposals[q], &cache)) continue;
                win = &proposals[q];
                break;
            }
            bool ok = win != nullptr;
            if (ok) {
                for (const auto& cm : win->id_list)
                    ok = ok && cm.round == N && cm.politician < S && commitment_valid(cm, pols[cm.politician].kp.vk, &cache);
                bool unknown = false;
                const PoolMask need = pool_mask_of(*win, unknown);
                ok = ok && !unknown && fetch(m, need, t, step_end);
            }
            if (ok)
                setup.inputs[k] = win->digest();
            else
                ++bm.null_inputs;
        }
        t = step_end;

        // Consensus.
        EquivocatingVotes eq_votes;
        ManipulatingVotes manip_votes;
        if (cfg.citizen_strategies.has(Strategy::BbaVoteManipulation))
            setup.adversary = &manip_votes;
        else if (cfg.citizen_strategies.has(Strategy::Equivocate))
            setup.adversary = &eq_votes;
        setup.corrupt_signer = [&](unsigned k, std::span<const uint8_t> msg) {
            return sign(cits[members[k].citizen].kp.sk, msg);
        };
        ConsensusParams cparams{N, prev.hash, cfg.max_consensus_steps};
        ConsensusResult cr = run_string_consensus(setup, cparams);
        bm.consensus_rounds = round_count(cr);
        for (const auto& e : cr.evidence) bm.evidence += equivocation_valid(e);
        const auto violations = audit_transcript(cr.transcript);
        if (!violations.empty()) {
            ++res.property1_violations;
            fail(N, "consensus audit: " + violations.front());
        }
        for (size_t s = 0; s < cr.transcript.steps.size(); ++s) {
            step_end = t;
            for (auto& m : members) {
                if (m.halted || cits[m.citizen].corrupt) continue;
                const unsigned node = net.citizen_node(m.citizen);
                SimTime a = net.transfer(node, m.sample[0], kVoteBytes, t);
                a = net.transfer(m.sample[0], node, uint64_t(n) * kVoteBytes, a);
                step_end = std::max(step_end, a);
            }
            t = step_end;
        }
        if (!cr.terminated) {
            ++res.stalls;
            fail(N, "consensus did not terminate (stalled round)");
            break;
        }
        if (!cr.agreed) fail(N, "honest members disagree on the consensus output");

        // Second re-upload and gossip.
        t = reupload(rp.reupload_second, t);
        t = gossip(t, false);

        // Block construction.
        const Proposal* chosen = nullptr;
        if (cr.output)
            for (const auto& p : proposals)
                if (p.digest() == *cr.output) chosen = &p;
        if (cr.output && !chosen) fail(N, "consensus output names an unknown proposal");

        std::vector<SignedCommit> sigs;
        std::map<Digest, std::shared_ptr<const SharedBlock>> built_by_hash;
        std::map<const SharedBlock*, UpdateList> update_lists;
        KeyList keys;
        BucketLayout layout;
        std::vector<Commitment> id_list;
        std::map<Digest, std::vector<Transaction>> chosen_pools;
        if (chosen) {
            id_list = chosen->id_list;
            for (const auto& c : id_list) chosen_pools[c.pool_digest] = pool_txs.at(c.pool_digest);
            auto txs = ordered_transactions(id_list, chosen_pools);
            keys = std::make_shared<const std::vector<Key>>(keys_read(txs));
            layout = bucket_layout(*keys, cfg.read.B);
        }
        const Block empty = empty_block(N, prev.hash, prev_subblock);
        const Digest empty_hash = empty.hash();
        const Digest empty_subblock = empty.subblock.hash();
        std::vector<GsServer*> servers;
        std::vector<std::unique_ptr<GsServer>> owned;
        auto stale_view = views.front();
        std::vector<std::unique_ptr<GsServer>> honest_srv(S), odd_srv(S);
        for (unsigned j = 0; j < S; ++j) {
            const auto& P = pols[j];
            GsLies lies;
            lies.salt = cfg.seed * 1315423911u + N * 2654435761u + j;
            if (P.has(Strategy::Drop)) {
                lies.silent = true;
                honest_srv[j] = std::make_unique<LyingGsServer>(view.get(), lies);
            } else if (P.has(Strategy::Staleness)) {
                honest_srv[j] = std::make_unique<HonestGsServer>(stale_view.get());
            } else {
                honest_srv[j] = std::make_unique<HonestGsServer>(view.get());
            }
            if (P.has(Strategy::SplitView)) {
                lies.value_fraction = 0.02;
                lies.bogus_exceptions = 2;
                lies.bogus_frontier = 2;
                odd_srv[j] = std::make_unique<LyingGsServer>(view.get(), lies);
            }
        }
        step_end = t;
        for (unsigned k = 0; k < n; ++k) {
            auto& m = members[k];
            auto& c = cits[m.citizen];
            if (m.halted || c.corrupt) continue;
            const unsigned node = net.citizen_node(m.citizen);
            SimTime a = t;
            std::shared_ptr<const SharedBlock> built;
            ShortDigest root = prev.gs_root;
            servers.clear();
            for (auto p : m.sample)
                servers.push_back(odd_srv[p] && m.citizen % 2 == 1 ? odd_srv[p].get() : honest_srv[p].get());
            if (chosen) {
                bool unknown = false;
                if (!fetch(m, pool_mask_of(*chosen, unknown), t, a) || unknown) {
                    fail(N, "honest citizen could not obtain a committed pool");
                    ++bm.abstentions;
                    continue;
                }
                ReadOutcome ro = gs_read(c.ls.gs_root, keys, layout, servers, cfg.read, cfg.merkle, m.rng, &memo);
                a = net.transfer(m.sample[0], node, ro.cost.down(), a);
                a = net.transfer(node, m.sample[0], std::max<uint64_t>(ro.cost.up(), 1), a);
                bm.read_corrections += ro.corrections;
                bm.evidence += unsigned(ro.evidence.size());
                if (ro.status != GsStatus::Ok) {
                    ++bm.abstentions;
                    continue;
                }
                ValueMap values;
                for (size_t q = 0; q < keys->size(); ++q) values[(*keys)[q]] = ro.values[q];
                built = build_memo.build(N, prev.hash, prev_subblock, id_list, chosen_pools, values,
                                         c.ls.registry);
                auto& ul = update_lists[built.get()];
                if (!ul) ul = std::make_shared<const std::vector<KeyValue>>(built->built.updates);
                WriteOutcome wo = gs_update(c.ls.gs_root, ul, servers, cfg.write, cfg.merkle, m.rng, &memo);
                a = net.transfer(m.sample[0], node, wo.cost.down(), a);
                a = net.transfer(node, m.sample[0], std::max<uint64_t>(wo.cost.up(), 1), a);
                bm.write_corrections += wo.corrections;
                bm.evidence += unsigned(wo.evidence.size());
                if (wo.status != GsStatus::Ok) {
                    ++bm.abstentions;
                    continue;
                }
                root = wo.root;
            }
            const Digest& h = built ? built->hash : empty_hash;
            const Digest& sbh = built ? built->subblock_hash : empty_subblock;
            if (built) built_by_hash.emplace(h, built);
            SignedCommit sc;
            sc.sig = sign_commit(c.kp, m.vrf, h, root, sbh, N);
            sc.block_hash = h;
            sc.gs_root = root;
            sc.subblock_hash = sbh;
            sigs.push_back(sc);
            const SimTime sent = a;
            for (auto p : m.sample) a = std::max(a, net.transfer(node, p, kCommitSigBytes, sent));
            step_end = std::max(step_end, a);
        }
        // Corrupt members sign a rival pair.
        if (!cfg.citizen_strategies.empty()) {
            const Digest rival = Hasher().put("rival").put_u64(cfg.seed).put_u64(N).finish();
            for (const auto& m : members) {
                const auto& c = cits[m.citizen];
                if (!c.corrupt) continue;
                SignedCommit sc;
                sc.sig = sign_commit(c.kp, m.vrf, rival, prev.gs_root, empty_subblock, N);
                sc.block_hash = rival;
                sc.gs_root = prev.gs_root;
                sc.subblock_hash = empty_subblock;
                sigs.push_back(sc);
            }
        }
        t = step_end;

        // Tally.
        TallyOutcome tally = tally_commit(N, sigs, rp.t_star, seed_hash, cfg.sortition_bits, registry, &cache);
        bm.rival_signatures = tally.best_rival;
        if (tally.conflict) {
            ++res.forks;
            fail(N, "two blocks reached the commit threshold");
        }
        if (!tally.committed) {
            ++res.stalls;
            fail(N, "no block reached the commit threshold (stalled round)");
            break;
        }
        ChainEntry entry;
        std::shared_ptr<const SharedBlock> committed_built;
        if (tally.block_hash == empty_hash) {
            entry.block = empty;
        } else if (auto it = built_by_hash.find(tally.block_hash); it != built_by_hash.end()) {
            committed_built = it->second;
            entry.block = committed_built->built.block;
        } else {
            ++res.forks;
            fail(N, "committed block is not one built by an honest citizen");
            break;
        }
        entry.hash = tally.block_hash;
        entry.gs_root = tally.gs_root;
        entry.sigs = tally.sigs;

        // Ground truth state.
        if (committed_built && !committed_built->built.updates.empty()) {
            auto [delta, new_root] = delta_apply(tree, committed_built->built.updates);
            tree = std::make_shared<SparseMerkleTree>(delta.materialize());
        }
        if (tree->root() != entry.gs_root) fail(N, "committed root differs from the replayed state");
        if (committed_built)
            for (const auto& id : committed_built->built.new_identities) registry.register_identity(id);
        views.push_back(std::make_shared<GsStateView>(tree));
        while (views.size() > cfg.stale_lag + 1) views.pop_front();

        // Mempool bookkeeping.
        std::set<uint64_t> included;
        for (const auto& [d, txs] : chosen_pools)
            for (const auto& tx : txs) included.insert(tx.uuid);
        std::set<uint64_t> accepted;
        for (const auto& tx : entry.block.txs) accepted.insert(tx.uuid);
        std::map<PublicKey, unsigned> acct_of;
        if (!included.empty())
            for (unsigned a = 0; a < cfg.accounts; ++a) acct_of[accts[a].kp.vk] = a;
        std::erase_if(mempool, [&](const Transaction& tx) {
            if (!included.count(tx.uuid)) return false;
            auto it = acct_of.find(tx.originator);
            if (it != acct_of.end()) {
                auto& ac = accts[it->second];
                ac.pending = false;
                if (accepted.count(tx.uuid)) {
                    ac.nonce = tx.nonce;
                    res.max_commit_delay = std::max<uint64_t>(res.max_commit_delay, N - ac.injected);
                }
            }
            return true;
        });

        bm.hash = entry.hash;
        bm.gs_root = entry.gs_root;
        bm.empty = entry.block.empty();
        bm.pools = unsigned(entry.block.id_list.size());
        bm.tx_count = entry.block.txs.size();
        bm.signatures = tally.signatures;
        res.txs_committed += bm.tx_count;
        now = t;
        bm.time_us = now;
        bm.duration_us = now - round_start;
        std::vector<uint64_t> cu, cd, pu, pd;
        for (unsigned j = 0; j < S; ++j) pu.push_back(net.up_bytes(j)), pd.push_back(net.down_bytes(j));
        for (const auto& m : members)
            if (!cits[m.citizen].corrupt)
                cu.push_back(net.up_bytes(net.citizen_node(m.citizen))),
                    cd.push_back(net.down_bytes(net.citizen_node(m.citizen)));
        uint64_t sent = 0, received = 0;
        for (unsigned j = 0; j < net.size(); ++j) sent += net.up_bytes(j), received += net.down_bytes(j);
        if (sent != received) fail(N, "byte meters out of balance: " + std::to_string(sent) + " sent, " +
                                          std::to_string(received) + " received");
        bm.citizen_up = percentiles(cu);
        bm.citizen_down = percentiles(cd);
        bm.politician_up = percentiles(pu);
        bm.politician_down = percentiles(pd);
        res.blocks.push_back(bm);
        res.chain.records.push_back({entry.block, entry.gs_root, entry.sigs});
        chain.append(std::move(entry));
        memo.clear();
        build_memo.clear();
        if (!res.failures.empty()) break;
    }
    res.end_time = now;
    res.pending_at_end = mempool.size();
    return res;
}

}  // namespace blockene
