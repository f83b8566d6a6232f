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

#include <random>

#include "blockene/consensus.hpp"

using namespace blockene;

namespace {

Digest value(int i) { return hash("proposal-" + std::to_string(i)); }

struct Committee {
    std::vector<KeyPair> keys;
    ConsensusSetup setup;

    Committee(unsigned honest, unsigned corrupt, uint64_t seed) {
        for (unsigned i = 0; i < honest + corrupt; ++i) {
            keys.push_back(derive_keypair(seed, "member", i));
            setup.vks.push_back(keys.back().vk);
            setup.roles.push_back(i < honest ? MemberRole::Honest : MemberRole::Corrupt);
        }
        setup.inputs.assign(honest + corrupt, std::nullopt);
        setup.corrupt_signer = [this](unsigned m, std::span<const uint8_t> msg) { return sign(keys[m].sk, msg); };
    }
};

}  // namespace

TEST_CASE("unanimous honest inputs decide the value in three steps") {
    Committee c(4, 0, 1);
    for (auto& in : c.setup.inputs) in = value(1);
    auto r = run_string_consensus(c.setup, {});
    CHECK(r.terminated);
    CHECK(r.agreed);
    REQUIRE(r.output);
    CHECK(*r.output == value(1));
    CHECK(round_count(r) == 3);
    CHECK(round_count(r) <= 5);
    CHECK(audit_transcript(r.transcript).empty());
}

TEST_CASE("all NULL inputs decide NULL") {
    Committee c(20, 6, 2);
    ManipulatingVotes adv;
    c.setup.adversary = &adv;
    auto r = run_string_consensus(c.setup, {});
    CHECK(r.terminated);
    CHECK(r.agreed);
    CHECK_FALSE(r.output);
    CHECK(audit_transcript(r.transcript).empty());
}

TEST_CASE("unanimous inputs survive both adversaries") {
    for (int which = 0; which < 2; ++which) {
        Committee c(67, 33, 3);
        for (unsigned i = 0; i < 67; ++i) c.setup.inputs[i] = value(7);
        EquivocatingVotes eq;
        ManipulatingVotes mv;
        c.setup.adversary = which ? static_cast<VoteAdversary*>(&mv) : &eq;
        auto r = run_string_consensus(c.setup, {.height = 9});
        CHECK(r.terminated);
        CHECK(r.agreed);
        REQUIRE(r.output);
        CHECK(*r.output == value(7));
        CHECK(audit_transcript(r.transcript).empty());
    }
}

TEST_CASE("split inputs with equivocating voters: agreement and Property 1 over 200 runs") {
    std::mt19937_64 rng(11);
    unsigned non_null = 0, evidence_checked = 0;
    for (int run = 0; run < 200; ++run) {
        Committee c(67, 33, 100 + run);
        REQUIRE(fault_bound(100) == 33);
        for (unsigned i = 0; i < 67; ++i) c.setup.inputs[i] = (rng() & 1) ? std::optional<Digest>(value(3)) : std::nullopt;
        EquivocatingVotes eq;
        ManipulatingVotes mv;
        c.setup.adversary = run % 2 ? static_cast<VoteAdversary*>(&mv) : &eq;
        if (run % 10 != 0) c.setup.corrupt_signer = nullptr;
        ConsensusParams p{.height = uint64_t(run), .prev_hash = hash("prev" + std::to_string(run))};
        auto r = run_string_consensus(c.setup, p);
        REQUIRE(r.terminated);
        CHECK(r.agreed);
        if (r.output) {
            CHECK(*r.output == value(3));
            ++non_null;
        }
        CHECK(audit_transcript(r.transcript).empty());
        if (run % 10 == 0) {
            CHECK_FALSE(r.evidence.empty());
            for (size_t k = 0; k < std::min<size_t>(3, r.evidence.size()); ++k)
                evidence_checked += equivocation_valid(r.evidence[k]);
        }
    }
    MESSAGE("non-NULL outputs: " << non_null << "/200");
    CHECK(evidence_checked > 0);
}

TEST_CASE("inputs backed by a supermajority commit even under manipulation") {
    std::mt19937_64 rng(5);
    for (int run = 0; run < 50; ++run) {
        Committee c(150, 50, 300 + run);
        for (unsigned i = 0; i < 150; ++i) c.setup.inputs[i] = value(4);
        for (unsigned i = 0; i < 10; ++i) c.setup.inputs[rng() % 150] = std::nullopt;
        ManipulatingVotes mv;
        c.setup.adversary = &mv;
        auto r = run_string_consensus(c.setup, {.height = uint64_t(run)});
        REQUIRE(r.terminated);
        CHECK(r.agreed);
        CHECK(audit_transcript(r.transcript).empty());
    }
}

TEST_CASE("binary agreement under adversarial split at n=10, t=3") {
    std::mt19937_64 rng(23);
    double total = 0;
    unsigned max_steps = 0;
    for (int run = 0; run < 500; ++run) {
        std::vector<MemberRole> roles(10, MemberRole::Honest);
        for (unsigned i = 7; i < 10; ++i) roles[i] = MemberRole::Corrupt;
        std::vector<uint8_t> bits(10);
        for (unsigned i = 0; i < 7; ++i) bits[i] = uint8_t(rng() & 1);
        ManipulatingVotes mv;
        auto r = bba_bit_consensus(roles, bits, &mv, {.height = uint64_t(run), .prev_hash = hash(std::to_string(run))});
        REQUIRE(r.terminated);
        CHECK(r.agreed);
        bool all_same = true;
        for (unsigned i = 1; i < 7; ++i) all_same = all_same && bits[i] == bits[0];
        if (all_same) CHECK(r.bit == bits[0]);
        total += r.steps;
        max_steps = std::max(max_steps, r.steps);
    }
    MESSAGE("mean binary steps " << total / 500 << ", max " << max_steps);
    CHECK(total / 500 <= 15.0);
}

TEST_CASE("unanimous bits decide in one voting step") {
    std::vector<MemberRole> roles(10, MemberRole::Honest);
    std::vector<uint8_t> zeros(10, 0), ones(10, 1);
    auto r0 = bba_bit_consensus(roles, zeros, nullptr, {});
    CHECK(r0.bit == 0);
    CHECK(r0.steps == 1);
    auto r1 = bba_bit_consensus(roles, ones, nullptr, {});
    CHECK(r1.bit == 1);
    CHECK(r1.steps == 2);
}

TEST_CASE("auditor flags tampered transcripts") {
    Committee c(7, 2, 4);
    for (unsigned i = 0; i < 7; ++i) c.setup.inputs[i] = value(1);
    auto r = run_string_consensus(c.setup, {});
    REQUIRE(audit_transcript(r.transcript).empty());

    auto t1 = r.transcript;
    t1.outputs[0] = kNullValue;
    CHECK_FALSE(audit_transcript(t1).empty());

    // Claimed inputs too thin to back the output.
    auto t2 = r.transcript;
    for (unsigned i = 0; i < 6; ++i) t2.inputs[i] = kNullValue;
    auto v = audit_transcript(t2);
    CHECK_FALSE(v.empty());

    auto t3 = r.transcript;
    t3.steps[0].honest[2] = 5;
    CHECK_FALSE(audit_transcript(t3).empty());
}

TEST_CASE("equivocation evidence is checkable by third parties") {
    Committee c(7, 2, 6);
    EquivocatingVotes eq;
    c.setup.adversary = &eq;
    for (unsigned i = 0; i < 7; ++i) c.setup.inputs[i] = value(2);
    auto r = run_string_consensus(c.setup, {.height = 3});
    REQUIRE_FALSE(r.evidence.empty());
    auto e = r.evidence.front();
    CHECK(equivocation_valid(e));
    e.second.payload = e.first.payload;
    CHECK_FALSE(equivocation_valid(e));
    e = r.evidence.front();
    e.second.sig[0] ^= 1;
    CHECK_FALSE(equivocation_valid(e));
}

TEST_CASE("coin is public and deterministic") {
    const Digest h = hash("x");
    CHECK(common_coin(5, 4, h) == common_coin(5, 4, h));
    int ones = 0;
    for (unsigned s = 0; s < 1000; ++s) ones += common_coin(7, s, h);
    CHECK(ones > 430);
    CHECK(ones < 570);
}
