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

#include "blockene/commit.hpp"
#include "blockene/sortition.hpp"

using namespace blockene;

namespace {

std::vector<Transaction> pending_txs(unsigned n) {
    std::vector<Transaction> out;
    for (unsigned i = 0; i < n; ++i) {
        KeyPair a = derive_keypair(5, "acct", i);
        KeyPair b = derive_keypair(5, "acct", i + 1000);
        out.push_back(make_transfer(a, b.vk, 0, 10, 100 + i));
    }
    return out;
}

struct Members {
    KeyPair registrar = derive_keypair(9, "registrar", 0);
    IdentityRegistry registry{registrar.vk};
    std::vector<KeyPair> keys;
    Digest seed = hash("seed");

    explicit Members(unsigned n) {
        for (unsigned i = 0; i < n; ++i) {
            keys.push_back(derive_keypair(9, "member", i));
            registry.register_identity(make_identity(hash("tee" + std::to_string(i)), keys.back().vk, registrar.sk),
                                       true);
        }
    }
    SignedCommit signed_commit(unsigned i, const Digest& block, uint64_t height) const {
        const VrfOutput vrf = compute_vrf(keys[i].sk, seed, height);
        const ShortDigest root{};
        const Digest sb = hash("subblock");
        return {sign_commit(keys[i], vrf, block, root, sb, height), block, root, sb};
    }
};

}  // namespace

TEST_CASE("commitments verify only under the signer's key and round") {
    KeyPair p = derive_keypair(1, "pol", 0), q = derive_keypair(1, "pol", 1);
    Commitment c = sign_commitment(p, 3, 7, hash("pool"));
    CHECK(commitment_valid(c, p.vk));
    CHECK_FALSE(commitment_valid(c, q.vk));
    Commitment moved = c;
    moved.round = 8;
    CHECK_FALSE(commitment_valid(moved, p.vk));
    VerifyCache cache;
    CHECK(commitment_valid(c, p.vk, &cache));
    CHECK(commitment_valid(c, p.vk, &cache));
    CHECK(cache.hits() == 1);
}

TEST_CASE("a frozen pool holds only its shard, capped and uuid ordered") {
    KeyPair p = derive_keypair(2, "pol", 0);
    const auto txs = pending_txs(200);
    const unsigned rho = 4;
    for (unsigned slot = 0; slot < rho; ++slot) {
        FrozenPool fp = freeze_pool(p, 0, slot, 11, rho, txs, 10);
        CHECK(fp.pool.txs.size() <= 10);
        CHECK(pool_on_shard(fp.pool, slot, rho));
        for (size_t i = 1; i < fp.pool.txs.size(); ++i) CHECK(fp.pool.txs[i - 1].uuid < fp.pool.txs[i].uuid);
        CHECK(commitment_valid(fp.commitment, p.vk));
        CHECK(fp.commitment.pool_digest == fp.pool.digest);
    }
}

TEST_CASE("two commitments for one round are a verifiable conflict") {
    KeyPair p = derive_keypair(3, "pol", 0);
    Commitment a = sign_commitment(p, 0, 5, hash("a"));
    Commitment b = sign_commitment(p, 0, 5, hash("b"));
    Commitment other_round = sign_commitment(p, 0, 6, hash("c"));
    std::vector<Commitment> seen{a, a, other_round};
    CHECK(find_conflicts(seen).empty());
    seen.push_back(b);
    auto conflicts = find_conflicts(seen);
    REQUIRE(conflicts.size() == 1);
    CHECK(conflict_valid(conflicts[0], p.vk));
    CHECK_FALSE(conflict_valid({a, a}, p.vk));
}

TEST_CASE("witness lists and proposals are signed over their content") {
    KeyPair c = derive_keypair(4, "cit", 0);
    const VrfOutput vrf = compute_vrf(c.sk, hash("s"), 3);
    WitnessList wl = make_witness_list(c, vrf, 3, {hash("x"), std::nullopt});
    CHECK(witness_list_valid(wl));
    wl.slots[1] = hash("y");
    CHECK_FALSE(witness_list_valid(wl));

    KeyPair p = derive_keypair(4, "pol", 0);
    Proposal prop = make_proposal(c, vrf, 3, {sign_commitment(p, 0, 3, hash("x"))});
    CHECK(proposal_valid(prop));
    prop.id_list.clear();
    CHECK_FALSE(proposal_valid(prop));
}

TEST_CASE("the ID list keeps a slot only at the witness threshold") {
    KeyPair p0 = derive_keypair(6, "pol", 0), p1 = derive_keypair(6, "pol", 1);
    Commitment a = sign_commitment(p0, 0, 1, hash("a"));
    Commitment a2 = sign_commitment(p0, 0, 1, hash("a2"));
    Commitment b = sign_commitment(p1, 1, 1, hash("b"));
    std::vector<std::vector<Commitment>> known{{a, a2}, {b}};
    std::vector<WitnessList> lists;
    for (unsigned i = 0; i < 5; ++i) {
        KeyPair c = derive_keypair(6, "cit", i);
        std::optional<Digest> s0 = i < 3 ? a.digest() : a2.digest();
        std::optional<Digest> s1 = i < 2 ? std::optional<Digest>(b.digest()) : std::nullopt;
        lists.push_back(make_witness_list(c, compute_vrf(c.sk, hash("s"), 1), 1, {s0, s1}));
    }
    auto chosen = select_id_list(known, lists, 3);
    REQUIRE(chosen.size() == 1);
    CHECK(chosen[0] == a);
    CHECK(select_id_list(known, lists, 2).size() == 2);
    CHECK(select_id_list(known, lists, 4).empty());
}

TEST_CASE("threshold arithmetic") {
    RoundParams p;  // n_b 772, fooled 36, t_star 850, n_g 1137
    CHECK(round_params_valid(p));
    p.t_star = 808;
    CHECK_FALSE(round_params_valid(p));
    p.t_star = 1101;
    CHECK(round_params_valid(p));
    p.t_star = 1102;
    CHECK_FALSE(round_params_valid(p));
}

TEST_CASE("tally commits at exactly t_star distinct eligible signatures") {
    Members m(12);
    const Digest block = hash("block");
    std::vector<SignedCommit> sigs;
    for (unsigned i = 0; i < 8; ++i) sigs.push_back(m.signed_commit(i, block, 4));
    auto t = tally_commit(4, sigs, 8, m.seed, 0, m.registry);
    CHECK(t.committed);
    CHECK(t.signatures == 8);
    CHECK(t.block_hash == block);

    sigs.pop_back();
    sigs.push_back(sigs.front());  // duplicate signer does not count
    t = tally_commit(4, sigs, 8, m.seed, 0, m.registry);
    CHECK_FALSE(t.committed);
    CHECK(t.rejected == 1);

    sigs.pop_back();
    KeyPair outsider = derive_keypair(9, "outsider", 0);
    const VrfOutput vrf = compute_vrf(outsider.sk, m.seed, 4);
    sigs.push_back({sign_commit(outsider, vrf, block, {}, hash("subblock"), 4), block, {}, hash("subblock")});
    t = tally_commit(4, sigs, 8, m.seed, 0, m.registry);
    CHECK_FALSE(t.committed);
    CHECK(t.rejected == 1);
}

TEST_CASE("tally records rivals and flags two pairs over threshold") {
    Members m(10);
    std::vector<SignedCommit> sigs;
    for (unsigned i = 0; i < 6; ++i) sigs.push_back(m.signed_commit(i, hash("one"), 2));
    for (unsigned i = 6; i < 10; ++i) sigs.push_back(m.signed_commit(i, hash("two"), 2));
    auto t = tally_commit(2, sigs, 5, m.seed, 0, m.registry);
    CHECK(t.committed);
    CHECK(t.best_rival == 4);
    CHECK_FALSE(t.conflict);
    t = tally_commit(2, sigs, 4, m.seed, 0, m.registry);
    CHECK(t.conflict);
}

TEST_CASE("empty blocks are canonical per height") {
    const Digest prev = hash("prev"), sb = hash("sb");
    CHECK(empty_block(5, prev, sb).hash() == empty_block(5, prev, sb).hash());
    CHECK(empty_block(5, prev, sb).hash() != empty_block(6, prev, sb).hash());
}
