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

#include <map>
#include <set>

#include "blockene/sortition.hpp"
#include "oracle.hpp"

using namespace blockene;

namespace {

struct Keys {
    std::vector<KeyPair> kps;
    std::vector<Candidate> cands;
    explicit Keys(size_t n, uint64_t seed = 1) {
        kps.reserve(n);
        for (size_t i = 0; i < n; ++i) kps.push_back(derive_keypair(seed, "citizen", i));
        for (size_t i = 0; i < n; ++i) cands.push_back({uint32_t(i), kps[i].vk, &kps[i].sk});
    }
};

}  // namespace

TEST_CASE("k_bits zero puts every eligible citizen on the committee") {
    Keys k(50);
    auto c = select_committee(k.cands, hash("s"), 20, 0);
    CHECK(c.size() == 50);
    for (const auto& m : c) CHECK(verify_membership(m.vk, hash("s"), 20, 0, m.vrf));
}

TEST_CASE("cool-off boundary") {
    CHECK_FALSE(committee_eligible(61, false, 100));
    CHECK(committee_eligible(60, false, 100));
    CHECK(committee_eligible(0, true, 1));
}

TEST_CASE("membership is third-party verifiable and seed-bound") {
    Keys k(64);
    auto c = select_committee(k.cands, hash("seed"), 7, 2);
    REQUIRE_FALSE(c.empty());
    for (const auto& m : c) {
        CHECK(verify_membership(m.vk, hash("seed"), 7, 2, m.vrf));
        CHECK_FALSE(verify_membership(m.vk, hash("other"), 7, 2, m.vrf));
    }
}

TEST_CASE("committee size over ten seeds at k_bits 3") {
    Keys k(1 << 12);
    double total = 0;
    const int seeds = 10;
    for (int s = 0; s < seeds; ++s) total += select_committee(k.cands, hash(std::to_string(s)), 100, 3).size();
    const double n = double(1 << 12) * seeds;
    CHECK(std::abs(total / n - 0.125) <= 3 * oracle::binom_sigma(0.125, n));
}

TEST_CASE("proposer selection and winner") {
    Keys k(40);
    auto all = select_proposers(k.cands, hash("prev"), 9, 0);
    CHECK(all.size() == 40);
    for (size_t i = 1; i < all.size(); ++i) CHECK(vrf_less(all[i - 1].vrf, all[i].vrf));
    auto again = select_proposers(k.cands, hash("prev"), 9, 0);
    CHECK(again.front().id == all.front().id);

    Keys big(1000, 3);
    double total = 0;
    for (int s = 0; s < 40; ++s) total += select_proposers(big.cands, hash(std::to_string(s)), 5, 4).size();
    CHECK(std::abs(total / (1000.0 * 40) - 1.0 / 16) <= 3 * oracle::binom_sigma(1.0 / 16, 1000.0 * 40));
}

TEST_CASE("designated politicians") {
    Digest h = hash("b");
    CHECK(designated_politicians(3, h, 45, 200) == designated_politicians(3, h, 45, 200));
    auto perm = designated_politicians(3, h, 10, 10);
    CHECK(std::set<uint32_t>(perm.begin(), perm.end()).size() == 10);
    auto d = designated_politicians(3, h, 45, 200);
    CHECK(std::set<uint32_t>(d.begin(), d.end()).size() == 45);

    std::vector<int> freq(200);
    const int rounds = 10000;
    for (int r = 0; r < rounds; ++r)
        for (uint32_t p : designated_politicians(r, hash(std::to_string(r)), 45, 200)) ++freq[p];
    const double p = 45.0 / 200;
    for (int f : freq) CHECK(std::abs(f / double(rounds) - p) <= 4 * oracle::binom_sigma(p, rounds));
}

TEST_CASE("transaction sharding") {
    KeyPair o = derive_keypair(1, "orig", 0);
    CHECK(shard_transaction(o.vk, 4, 45) == shard_transaction(o.vk, 4, 45));
    std::vector<int> occ(45);
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        PublicKey vk{};
        Digest d = hash(std::to_string(i));
        std::copy(d.begin(), d.end(), vk.begin());
        ++occ[shard_transaction(vk, 4, 45)];
    }
    const double p = 1.0 / 45;
    for (int c : occ) CHECK(std::abs(c / double(n) - p) <= 4 * oracle::binom_sigma(p, n));

    int differ = 0;
    const int trials = 5000;
    for (int i = 0; i < trials; ++i) {
        PublicKey vk{};
        Digest d = hash("x" + std::to_string(i));
        std::copy(d.begin(), d.end(), vk.begin());
        differ += shard_transaction(vk, 10, 45) != shard_transaction(vk, 11, 45);
    }
    const double q = 1 - 1.0 / 45;
    CHECK(std::abs(differ / double(trials) - q) <= 3 * oracle::binom_sigma(q, trials));
}

TEST_CASE("safe samples") {
    std::mt19937_64 rng(42);
    auto all = draw_safe_sample(rng, 30, 30);
    CHECK(std::set<uint32_t>(all.begin(), all.end()).size() == 30);
    auto s = draw_safe_sample(rng, 200, 25);
    CHECK(std::set<uint32_t>(s.begin(), s.end()).size() == 25);
    CHECK(vrf_safe_sample(hash("v"), 40, 25) == vrf_safe_sample(hash("v"), 40, 25));
    // With no corrupt politicians every sample holds an honest one.
    for (int i = 0; i < 100; ++i) CHECK(draw_safe_sample(rng, 200, 25).size() == 25);
}

TEST_CASE("hash stream bounded draws are uniform") {
    HashStream hs(hash("u"));
    std::vector<int> bins(7);
    const int n = 70000;
    for (int i = 0; i < n; ++i) ++bins[hs.below(7)];
    for (int b : bins) CHECK(std::abs(b / double(n) - 1.0 / 7) <= 4 * oracle::binom_sigma(1.0 / 7, n));
}
