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

#include <algorithm>
#include <random>

#include "blockene/ledger.hpp"
#include "blockene/sortition.hpp"

using namespace blockene;

namespace {

KeyPair kp(uint64_t i) { return derive_keypair(7, "acct", i); }

Transaction tx_from(uint64_t who, uint64_t to, uint64_t nonce, uint32_t amount, uint64_t uuid) {
    return make_transfer(kp(who), kp(to).vk, nonce, amount, uuid);
}

Commitment commit_for(uint32_t pol, const std::vector<Transaction>& txs) {
    Commitment c;
    c.politician = pol;
    c.round = 1;
    c.pool_digest = pool_digest(txs);
    return c;
}

// Minimal chain with a fixed committee; every eligible member signs.
struct Chain {
    KeyPair registrar = derive_keypair(9, "registrar", 0);
    std::vector<KeyPair> members;
    std::vector<Block> blocks;
    std::vector<ShortDigest> roots;
    std::vector<std::vector<CommitSignature>> sigs;
    std::vector<LocalState> states;
    IdentityRegistry reg{registrar.vk};

    explicit Chain(size_t n) {
        Block g;
        for (size_t i = 0; i < n; ++i) {
            members.push_back(derive_keypair(9, "member", i));
            Identity id = make_identity(hash("tk" + std::to_string(i)), members.back().vk, registrar.sk);
            reg.register_identity(id, true);
            g.subblock.new_identities.push_back(id);
        }
        blocks.push_back(g);
        roots.push_back(ShortDigest{});
        sigs.emplace_back();
        states.push_back(genesis_state(g, ShortDigest{}, reg));
    }

    void extend(std::vector<Identity> ids = {}) {
        const uint64_t h = blocks.size();
        Block b;
        b.height = h;
        b.hash_prev_block = blocks.back().hash();
        b.subblock.hash_prev_block = b.hash_prev_block;
        b.subblock.hash_prev_subblock = blocks.back().subblock.hash();
        for (auto& id : ids) id.added_at = h;
        b.subblock.new_identities = ids;
        ShortDigest root = truncate(hash("root" + std::to_string(h)));
        const Digest seed = blocks[seed_height(h)].hash();
        std::vector<CommitSignature> s;
        for (const auto& m : members) {
            if (!states.back().registry.eligible_vk(m.vk, h)) continue;
            VrfOutput v = compute_vrf(m.sk, seed, h);
            s.push_back(sign_commit(m, v, b.hash(), root, b.subblock.hash(), h));
        }
        LedgerJump j{h, b.hash(), root, b.subblock.hash(), {b.subblock}, s};
        blocks.push_back(b);
        roots.push_back(root);
        sigs.push_back(s);
        states.push_back(apply_jump(states.back(), j));
    }

    LedgerJump jump(uint64_t from, uint64_t to) const {
        LedgerJump j{to, blocks[to].hash(), roots[to], blocks[to].subblock.hash(), {}, sigs[to]};
        for (uint64_t h = from + 1; h <= to; ++h) j.subblocks.push_back(blocks[h].subblock);
        return j;
    }
};

struct HonestSource : LedgerSource {
    const Chain* c;
    uint64_t top;
    HonestSource(const Chain* ch, uint64_t t) : c(ch), top(t) {}
    std::optional<uint64_t> latest_height() override { return top; }
    std::optional<LedgerJump> jump(uint64_t from, uint64_t to) override {
        if (to > top) return std::nullopt;
        return c->jump(from, to);
    }
};

struct ForgingSource : HonestSource {
    Identity fake;
    using HonestSource::HonestSource;
    std::optional<LedgerJump> jump(uint64_t from, uint64_t to) override {
        auto j = HonestSource::jump(from, to);
        j->subblocks[0].new_identities.push_back(fake);
        return j;
    }
};

}  // namespace

TEST_CASE("transaction validation rules") {
    Transaction t = tx_from(1, 2, 1, 100, 11);
    CHECK(validate_transaction(t, 100, 0) == TxVerdict::Valid);
    CHECK(validate_transaction(tx_from(1, 2, 1, 101, 12), 100, 0) == TxVerdict::Overspend);
    CHECK(validate_transaction(t, 100, 1) == TxVerdict::BadNonce);
    Transaction bad = t;
    bad.amount = 5;
    CHECK(validate_transaction(bad, 100, 0) == TxVerdict::BadSignature);
    CHECK(t.debit_key != t.credit_key);
    CHECK(t.nonce_key() == (t.debit_key | 1u));
}

TEST_CASE("transaction wire format round-trips") {
    Transaction t = tx_from(3, 4, 9, 77, 0x0102030405060708ull);
    auto back = parse_transaction(t.wire());
    REQUIRE(back);
    CHECK(*back == t);
    CHECK(t.wire().size() == 125);
    KeyPair reg = derive_keypair(1, "r", 0);
    Transaction a = make_add_identity(kp(5), make_identity(hash("tk"), kp(5).vk, reg.sk), 3);
    auto back2 = parse_transaction(a.wire());
    REQUIRE(back2);
    CHECK(*back2 == a);
    Bytes w = t.wire();
    w.pop_back();
    CHECK_FALSE(parse_transaction(w));
}

TEST_CASE("identity registry enforces one identity per TEE key") {
    KeyPair reg = derive_keypair(1, "r", 0);
    IdentityRegistry r(reg.vk);
    Identity a = make_identity(hash("tk1"), kp(1).vk, reg.sk);
    a.added_at = 5;
    CHECK(r.register_identity(a) == IdentityRegistry::Result::Accepted);
    Identity b = make_identity(hash("tk1"), kp(2).vk, reg.sk);
    CHECK(r.register_identity(b) == IdentityRegistry::Result::DuplicateTEE);
    Identity forged = make_identity(hash("tk2"), kp(3).vk, derive_keypair(1, "x", 0).sk);
    CHECK(r.register_identity(forged) == IdentityRegistry::Result::BadCert);
    CHECK_FALSE(r.eligible_vk(a.vk, 44));
    CHECK(r.eligible_vk(a.vk, 45));
    CHECK(r.eligible(45).size() == 1);
}

TEST_CASE("block building is deterministic and drops conflicting spends") {
    // Account 1 holds 100: nonce 1 spends 80, nonce 2 spends 50 (overspend).
    std::vector<Transaction> p0 = {tx_from(1, 2, 2, 50, 1), tx_from(3, 2, 1, 10, 2)};
    std::vector<Transaction> p1 = {tx_from(1, 4, 1, 80, 3), tx_from(3, 2, 1, 10, 2)};
    std::vector<Commitment> ids = {commit_for(0, p0), commit_for(1, p1)};
    ValueMap vals;
    for (uint64_t a : {1, 2, 3, 4}) vals[balance_key(kp(a).vk)] = 100;

    std::map<Digest, std::vector<Transaction>> pools_a, pools_b;
    pools_a[ids[0].pool_digest] = p0;
    pools_a[ids[1].pool_digest] = p1;
    pools_b[ids[1].pool_digest] = p1;
    pools_b[ids[0].pool_digest] = p0;
    IdentityRegistry reg;
    auto A = build_block(5, hash("prev"), hash("sb"), ids, pools_a, vals, reg);
    auto B = build_block(5, hash("prev"), hash("sb"), ids, pools_b, vals, reg);
    CHECK(A.block.hash() == B.block.hash());
    // Duplicate uuid 2 is dropped; account 1 applies nonce 1 before nonce 2.
    REQUIRE(A.block.txs.size() == 2);
    CHECK(A.block.txs[0].uuid == 3);
    CHECK(A.block.txs[1].uuid == 2);
    REQUIRE(A.rejected.size() == 1);
    CHECK(A.rejected[0].uuid == 1);
    ValueMap after = vals;
    for (auto [k, v] : A.updates) after[k] = v;
    CHECK(after[balance_key(kp(1).vk)] == 20);
    CHECK(after[balance_key(kp(4).vk)] == 180);
    CHECK(after[balance_key(kp(2).vk)] == 110);
    CHECK(after[nonce_key_of(balance_key(kp(1).vk))] == 1);

    // IDList order matters.
    std::vector<Commitment> rev = {ids[1], ids[0]};
    CHECK(build_block(5, hash("prev"), hash("sb"), rev, pools_a, vals, reg).block.hash() != A.block.hash());
}

TEST_CASE("empty IDList yields the empty block and missing pools are detected") {
    IdentityRegistry reg;
    auto E = build_block(3, hash("p"), hash("s"), {}, {}, {}, reg);
    CHECK(E.block.empty());
    CHECK(E.block.txs.empty());
    CHECK(E.updates.empty());
    CHECK(E.block.subblock.hash_prev_subblock == hash("s"));
    std::vector<Commitment> ids = {commit_for(4, {tx_from(1, 2, 1, 1, 1)})};
    CHECK_THROWS_AS(build_block(3, hash("p"), hash("s"), ids, {}, {}, reg), MissingPool);
}

TEST_CASE("block building matches a sequential replay over random workloads") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<std::vector<Transaction>> pools(4);
        uint64_t uuid = 1;
        for (auto& p : pools)
            for (int i = 0; i < 15; ++i) {
                uint64_t from = rng() % 6, to = rng() % 6;
                p.push_back(tx_from(from, to, 1 + rng() % 3, uint32_t(rng() % 60), uuid++));
            }
        std::vector<Commitment> ids;
        std::map<Digest, std::vector<Transaction>> pm;
        for (uint32_t i = 0; i < pools.size(); ++i) {
            ids.push_back(commit_for(i, pools[i]));
            pm[ids.back().pool_digest] = pools[i];
        }
        ValueMap vals;
        for (uint64_t a = 0; a < 6; ++a) vals[balance_key(kp(a).vk)] = 100;
        IdentityRegistry reg;
        auto out = build_block(1, {}, {}, ids, pm, vals, reg);
        // Replay accepted transactions one at a time.
        std::map<Key, int64_t> bal;
        for (auto [k, v] : vals) bal[k] = v;
        std::map<Key, uint64_t> nonce;
        int64_t total = 600;
        for (const auto& tx : out.block.txs) {
            CHECK(tx.nonce == nonce[tx.nonce_key()] + 1);
            CHECK(bal[tx.debit_key] >= tx.amount);
            nonce[tx.nonce_key()] = tx.nonce;
            bal[tx.debit_key] -= tx.amount;
            bal[tx.credit_key] += tx.amount;
        }
        int64_t sum = 0;
        for (auto& [k, v] : bal) sum += v;
        CHECK(sum == total);
        for (auto [k, v] : out.updates) {
            if (k & 1u)
                CHECK(v == nonce[k]);
            else
                CHECK(v == bal[k]);
        }
        CHECK(out.block.txs.size() + out.rejected.size() == uuid - 1);
    }
}

TEST_CASE("identity transactions enter the sub-block once per TEE key") {
    KeyPair reg = derive_keypair(1, "r", 0);
    IdentityRegistry r(reg.vk);
    KeyPair n1 = derive_keypair(2, "new", 1), n2 = derive_keypair(2, "new", 2);
    std::vector<Transaction> pool = {make_add_identity(n1, make_identity(hash("t"), n1.vk, reg.sk), 1),
                                     make_add_identity(n2, make_identity(hash("t"), n2.vk, reg.sk), 2)};
    std::vector<Commitment> ids = {commit_for(0, pool)};
    std::map<Digest, std::vector<Transaction>> pm{{ids[0].pool_digest, pool}};
    auto out = build_block(8, {}, {}, ids, pm, {}, r);
    REQUIRE(out.new_identities.size() == 1);
    CHECK(out.new_identities[0].vk == n1.vk);
    CHECK(out.new_identities[0].added_at == 8);
    CHECK(out.block.subblock.new_identities == out.new_identities);
    CHECK(out.rejected.size() == 1);
}

TEST_CASE("getLedger jumps ten blocks with honest politicians") {
    Chain c(12);
    for (int i = 0; i < 25; ++i) c.extend();
    GetLedgerParams p{8, 0, 10};
    HonestSource h(&c, 25);
    std::vector<LedgerSource*> sample{&h};
    LocalState ls = c.states[0];
    for (uint64_t want : {10, 20, 25}) {
        auto r = get_ledger(ls, sample, p);
        REQUIRE(r.accepted);
        CHECK(r.state.height == want);
        CHECK(r.state.same_chain_point(c.states[want]));
        ls = r.state;
    }
    auto r = get_ledger(ls, sample, p);
    CHECK(r.accepted);
    CHECK(r.state.height == 25);
}

TEST_CASE("getLedger follows the highest height among stale politicians") {
    Chain c(12);
    for (int i = 0; i < 12; ++i) c.extend();
    std::vector<HonestSource> stale;
    for (int i = 0; i < 24; ++i) stale.emplace_back(&c, 2);
    HonestSource honest(&c, 12);
    std::vector<LedgerSource*> sample;
    for (auto& s : stale) sample.push_back(&s);
    sample.insert(sample.begin() + 13, &honest);
    auto r = get_ledger(c.states[3], sample, GetLedgerParams{8, 0, 10});
    REQUIRE(r.accepted);
    CHECK(r.state.height == 12);
    CHECK(r.state.same_chain_point(c.states[12]));
}

TEST_CASE("getLedger rejects forged sub-blocks and thin signature sets") {
    Chain c(12);
    for (int i = 0; i < 5; ++i) c.extend();
    ForgingSource f(&c, 5);
    f.fake = make_identity(hash("evil"), derive_keypair(3, "evil", 0).vk, c.registrar.sk);
    f.fake.added_at = 1;
    std::vector<LedgerSource*> sample{&f};
    auto r = get_ledger(c.states[0], sample, GetLedgerParams{8, 0, 10});
    CHECK_FALSE(r.accepted);
    CHECK(r.blamed == std::vector<size_t>{0});
    CHECK(r.diagnostic.find("sub-block") != std::string::npos);

    HonestSource h(&c, 5);
    std::vector<LedgerSource*> s2{&h};
    auto r2 = get_ledger(c.states[0], s2, GetLedgerParams{13, 0, 10});
    CHECK_FALSE(r2.accepted);
    CHECK(r2.diagnostic.find("valid commit signatures") != std::string::npos);

    // A forger first, then an honest politician: the citizen recovers.
    std::vector<LedgerSource*> s3{&f, &h};
    auto r3 = get_ledger(c.states[0], s3, GetLedgerParams{8, 0, 10});
    CHECK(r3.accepted);
    CHECK(r3.state.height == 5);
    CHECK(r3.blamed == std::vector<size_t>{0});
}

TEST_CASE("identities added by a block sign only after the cool-off") {
    Chain c(8);
    KeyPair joiner = derive_keypair(4, "joiner", 0);
    c.members.push_back(joiner);
    c.extend({make_identity(hash("jtk"), joiner.vk, c.registrar.sk)});
    for (int i = 0; i < 44; ++i) c.extend();
    CHECK(c.sigs[40].size() == 8);
    CHECK(c.sigs[41].size() == 9);
    CHECK(c.states[45].registry.all().size() == 9);
}

TEST_CASE("structural uniqueness across jump sizes") {
    Chain c(6);
    for (int i = 0; i < 30; ++i) c.extend();
    HonestSource h(&c, 30);
    std::vector<LedgerSource*> s{&h};
    for (unsigned step : {1u, 3u, 7u, 10u}) {
        LocalState ls = c.states[0];
        while (ls.height < 30) {
            auto r = get_ledger(ls, s, GetLedgerParams{5, 0, step});
            REQUIRE(r.accepted);
            ls = r.state;
            CHECK(ls.same_chain_point(c.states[ls.height]));
        }
    }
}
