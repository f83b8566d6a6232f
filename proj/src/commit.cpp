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

#include "blockene/commit.hpp"

#include <algorithm>
#include <set>

#include "blockene/sortition.hpp"

namespace blockene {

Commitment sign_commitment(const KeyPair& kp, uint32_t politician, uint64_t round, const Digest& pool_digest) {
    Commitment c;
    c.politician = politician;
    c.round = round;
    c.pool_digest = pool_digest;
    c.sig = sign(kp.sk, c.signing_bytes());
    return c;
}

bool commitment_valid(const Commitment& c, const PublicKey& vk, VerifyCache* cache) {
    return cache ? cache->verify(vk, c.signing_bytes(), c.sig) : verify(vk, c.signing_bytes(), c.sig);
}

FrozenPool freeze_pool(const KeyPair& kp, uint32_t politician, unsigned slot, uint64_t round, unsigned rho,
                       std::span<const Transaction> pending, size_t capacity) {
    FrozenPool f;
    f.pool.politician = politician;
    f.pool.round = round;
    std::vector<const Transaction*> mine;
    for (const auto& tx : pending)
        if (shard_transaction(tx.originator, round, rho) == slot) mine.push_back(&tx);
    std::sort(mine.begin(), mine.end(), [](auto* a, auto* b) { return a->uuid < b->uuid; });
    if (mine.size() > capacity) mine.resize(capacity);
    for (auto* tx : mine) f.pool.txs.push_back(*tx);
    f.pool.digest = pool_digest(f.pool.txs);
    f.commitment = sign_commitment(kp, politician, round, f.pool.digest);
    return f;
}

bool pool_on_shard(const TxPool& pool, unsigned slot, unsigned rho) {
    return std::all_of(pool.txs.begin(), pool.txs.end(),
                       [&](const Transaction& tx) { return shard_transaction(tx.originator, pool.round, rho) == slot; });
}

bool conflict_valid(const CommitmentConflict& c, const PublicKey& vk) {
    return c.first.politician == c.second.politician && c.first.round == c.second.round &&
           c.first.pool_digest != c.second.pool_digest && commitment_valid(c.first, vk) &&
           commitment_valid(c.second, vk);
}

std::vector<CommitmentConflict> find_conflicts(std::span<const Commitment> seen) {
    std::map<std::pair<uint32_t, uint64_t>, const Commitment*> first;
    std::set<std::pair<uint32_t, uint64_t>> reported;
    std::vector<CommitmentConflict> out;
    for (const auto& c : seen) {
        const auto key = std::make_pair(c.politician, c.round);
        auto [it, fresh] = first.emplace(key, &c);
        if (fresh || it->second->pool_digest == c.pool_digest) continue;
        if (reported.insert(key).second) out.push_back({*it->second, c});
    }
    return out;
}

Bytes WitnessList::signing_bytes() const {
    Writer w;
    w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("witness"), 7)).raw(citizen).u64(round);
    w.u32(uint32_t(slots.size()));
    for (const auto& s : slots) {
        w.u8(s ? 1 : 0);
        if (s) w.raw(*s);
    }
    return w.bytes();
}

size_t WitnessList::wire_bytes() const {
    size_t b = 32 + 8 + 4 + 64 + 32 + 64;
    for (const auto& s : slots) b += s ? 33 : 1;
    return b;
}

WitnessList make_witness_list(const KeyPair& kp, const VrfOutput& membership, uint64_t round,
                              std::vector<std::optional<Digest>> slots) {
    WitnessList wl;
    wl.citizen = kp.vk;
    wl.round = round;
    wl.slots = std::move(slots);
    wl.membership = membership;
    wl.sig = sign(kp.sk, wl.signing_bytes());
    return wl;
}

bool witness_list_valid(const WitnessList& wl) { return verify(wl.citizen, wl.signing_bytes(), wl.sig); }

Digest Proposal::id_list_hash() const {
    Hasher h;
    h.put("idlist").put_u32(uint32_t(id_list.size()));
    for (const auto& c : id_list) h.put(c.digest());
    return h.finish();
}

Digest Proposal::digest() const { return Hasher().put("proposal").put(proposer).put_u64(round).put(id_list_hash()).finish(); }

size_t Proposal::wire_bytes() const { return 32 + 8 + 32 + 64 + 64 + id_list.size() * (4 + 8 + 32 + 64); }

namespace {
Bytes proposal_message(const Proposal& p) {
    Writer w;
    w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("proposal"), 8)).u64(p.round).raw(p.id_list_hash());
    return w.bytes();
}
}  // namespace

Proposal make_proposal(const KeyPair& kp, const VrfOutput& vrf, uint64_t round, std::vector<Commitment> id_list) {
    Proposal p;
    p.proposer = kp.vk;
    p.round = round;
    p.vrf = vrf;
    p.id_list = std::move(id_list);
    p.sig = sign(kp.sk, proposal_message(p));
    return p;
}

bool proposal_valid(const Proposal& p, VerifyCache* cache) {
    return cache ? cache->verify(p.proposer, proposal_message(p), p.sig) : verify(p.proposer, proposal_message(p), p.sig);
}

std::vector<Commitment> select_id_list(std::span<const std::vector<Commitment>> known_by_slot,
                                       std::span<const WitnessList> lists, unsigned threshold) {
    std::vector<Commitment> out;
    for (size_t slot = 0; slot < known_by_slot.size(); ++slot) {
        std::map<Digest, unsigned> votes;
        for (const auto& wl : lists)
            if (slot < wl.slots.size() && wl.slots[slot]) ++votes[*wl.slots[slot]];
        const Commitment* best = nullptr;
        unsigned best_votes = 0;
        for (const auto& c : known_by_slot[slot]) {
            auto it = votes.find(c.digest());
            const unsigned v = it == votes.end() ? 0 : it->second;
            if (v >= threshold && v > best_votes) best = &c, best_votes = v;
        }
        if (best) out.push_back(*best);
    }
    return out;
}

bool round_params_valid(const RoundParams& p) {
    return p.n_b_tilde + p.fooled < p.t_star && p.t_star + p.fooled <= p.n_g_star && p.rho > 0 && p.rho <= 64;
}

TallyOutcome tally_commit(uint64_t height, std::span<const SignedCommit> sigs, unsigned t_star, const Digest& seed,
                          unsigned k_bits, const IdentityRegistry& registry, VerifyCache* cache) {
    TallyOutcome out;
    struct PairKey {
        Digest h;
        ShortDigest r;
        Digest sb;
        auto operator<=>(const PairKey&) const = default;
    };
    std::map<PairKey, std::vector<const CommitSignature*>> by_pair;
    std::set<PublicKey> seen;
    for (const auto& s : sigs) {
        if (!seen.insert(s.sig.signer).second) {
            ++out.rejected;
            continue;
        }
        const Bytes msg = commit_message(s.block_hash, s.gs_root, s.subblock_hash, height);
        const bool ok = registry.eligible_vk(s.sig.signer, height) &&
                        verify_membership(s.sig.signer, seed, height, k_bits, s.sig.membership, cache) &&
                        (cache ? cache->verify(s.sig.signer, msg, s.sig.sig) : verify(s.sig.signer, msg, s.sig.sig));
        if (!ok) {
            ++out.rejected;
            continue;
        }
        by_pair[{s.block_hash, s.gs_root, s.subblock_hash}].push_back(&s.sig);
    }
    unsigned reached = 0;
    for (const auto& [k, v] : by_pair) {
        const unsigned c = unsigned(v.size());
        if (c >= t_star) {
            ++reached;
            if (c > out.signatures) {
                out.committed = true;
                out.block_hash = k.h;
                out.gs_root = k.r;
                out.subblock_hash = k.sb;
                out.signatures = c;
                out.sigs.clear();
                for (auto* p : v) out.sigs.push_back(*p);
            }
        }
    }
    for (const auto& [k, v] : by_pair)
        if (!(out.committed && k.h == out.block_hash && k.r == out.gs_root && k.sb == out.subblock_hash))
            out.best_rival = std::max(out.best_rival, unsigned(v.size()));
    out.conflict = reached > 1;
    return out;
}

std::shared_ptr<const SharedBlock> BuildMemo::build(uint64_t height, const Digest& prev_hash,
                                                   const Digest& prev_subblock, std::span<const Commitment> id_list,
                                                   const std::map<Digest, std::vector<Transaction>>& pools,
                                                   const ValueMap& values, const IdentityRegistry& registry) {
    Hasher h;
    h.put("build").put_u64(height).put(prev_hash).put(prev_subblock).put_u32(uint32_t(id_list.size()));
    for (const auto& c : id_list) {
        h.put(c.digest());
        auto it = pools.find(c.pool_digest);
        h.put_u8(it != pools.end());
    }
    std::vector<std::pair<Key, Value>> kv(values.begin(), values.end());
    std::sort(kv.begin(), kv.end());
    h.put_u32(uint32_t(kv.size()));
    for (auto [k, v] : kv) h.put_u32(k).put_u32(v);
    h.put_u32(uint32_t(registry.all().size()));
    const Digest key = h.finish();
    if (auto it = memo_.find(key); it != memo_.end()) {
        ++hits_;
        return it->second;
    }
    auto s = std::make_shared<SharedBlock>();
    s->built = build_block(height, prev_hash, prev_subblock, id_list, pools, values, registry);
    s->hash = s->built.block.hash();
    s->subblock_hash = s->built.block.subblock.hash();
    std::shared_ptr<const SharedBlock> b = s;
    memo_.emplace(key, b);
    return b;
}

Block empty_block(uint64_t height, const Digest& prev_hash, const Digest& prev_subblock) {
    Block b;
    b.height = height;
    b.hash_prev_block = prev_hash;
    b.subblock.hash_prev_block = prev_hash;
    b.subblock.hash_prev_subblock = prev_subblock;
    return b;
}

}  // namespace blockene
