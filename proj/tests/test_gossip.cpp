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
#include <map>
#include <random>
#include <set>

#include "blockene/gossip.hpp"

using namespace blockene;

namespace {

// Set-based restatement of the honest-only rules: truthful claims; each
// missing pool requested from up to k claimants, a request expiring after
// `timeout` ticks and never resent to the same peer; one upload per node per
// tick, selfish (most wanted claims) before frugal (largest claim); and a
// reply from the chosen peer in the selfish case.
unsigned reference_ticks(std::vector<std::set<unsigned>> holds, unsigned k, unsigned timeout) {
    const size_t n = holds.size();
    std::set<unsigned> target;
    for (auto& h : holds) target.insert(h.begin(), h.end());
    std::vector<std::map<unsigned, std::map<size_t, unsigned>>> live(n);  // pool -> peer -> issued
    std::vector<std::map<unsigned, std::set<size_t>>> tried(n);
    auto missing_of = [&](size_t i) {
        std::set<unsigned> m;
        for (unsigned x : target)
            if (!holds[i].count(x)) m.insert(x);
        return m;
    };
    auto overlap = [](const std::set<unsigned>& a, const std::set<unsigned>& b) {
        unsigned c = 0;
        for (unsigned x : a) c += b.count(x);
        return c;
    };
    unsigned tick = 0;
    while (true) {
        bool done = true;
        for (size_t i = 0; i < n; ++i) done = done && missing_of(i).empty();
        if (done) return tick;
        auto claims = holds;
        std::vector<std::vector<std::pair<size_t, unsigned>>> inbox(n);
        for (size_t a = 0; a < n; ++a) {
            auto miss = missing_of(a);
            for (unsigned x : miss) {
                auto& l = live[a][x];
                for (auto it = l.begin(); it != l.end();) it = (tick - it->second >= timeout) ? l.erase(it) : std::next(it);
                std::vector<size_t> cands;
                for (size_t b = 0; b < n; ++b)
                    if (b != a && claims[b].count(x) && !tried[a][x].count(b)) cands.push_back(b);
                std::stable_sort(cands.begin(), cands.end(),
                                 [&](size_t u, size_t v) { return overlap(claims[u], miss) > overlap(claims[v], miss); });
                for (size_t b : cands) {
                    if (l.size() >= k) break;
                    l[b] = tick;
                    tried[a][x].insert(b);
                }
                for (auto& [b, t0] : l) inbox[b].push_back({a, x});
            }
        }
        std::vector<std::tuple<size_t, size_t, unsigned>> sends;
        for (size_t b = 0; b < n; ++b) {
            auto miss = missing_of(b);
            auto requested = [&](size_t d) {
                for (auto [r, x] : inbox[b])
                    if (r == d && holds[b].count(x)) return true;
                return false;
            };
            long best = -1;
            std::tuple<unsigned, unsigned, int> bk{};
            for (size_t d = 0; d < n && !miss.empty(); ++d) {
                unsigned sc = overlap(claims[d], miss);
                if (d == b || sc == 0) continue;
                std::tuple<unsigned, unsigned, int> key{sc, unsigned(claims[d].size()), requested(d)};
                if (best < 0 || key > bk) best = long(d), bk = key;
            }
            if (best < 0)
                for (size_t d = 0; d < n; ++d) {
                    if (d == b) continue;
                    bool need = false;
                    for (unsigned x : holds[b]) need = need || !claims[d].count(x);
                    if (!requested(d) && !need) continue;
                    std::tuple<unsigned, unsigned, int> key{unsigned(claims[d].size()), 0, requested(d)};
                    if (best < 0 || key > bk) best = long(d), bk = key;
                }
            if (best < 0) continue;
            size_t d = size_t(best);
            long pool = -1;
            if (requested(d)) {
                for (auto [r, x] : inbox[b])
                    if (r == d && holds[b].count(x) && (pool < 0 || long(x) < pool)) pool = long(x);
            } else {
                for (unsigned x : holds[b])
                    if (!claims[d].count(x)) { pool = long(x); break; }
            }
            if (pool >= 0) sends.push_back({b, d, unsigned(pool)});
            for (unsigned x : miss)
                if (holds[d].count(x)) { sends.push_back({d, b, x}); break; }
        }
        for (auto [f, t, x] : sends) {
            holds[t].insert(x);
            live[t].erase(x);
        }
        ++tick;
    }
}

std::vector<GossipPeer> random_peers(unsigned n, unsigned rho, unsigned each, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<GossipPeer> peers(n);
    for (auto& p : peers) {
        std::vector<unsigned> idx(rho);
        for (unsigned i = 0; i < rho; ++i) idx[i] = i;
        std::shuffle(idx.begin(), idx.end(), rng);
        for (unsigned i = 0; i < each; ++i) p.holds |= PoolMask(1) << idx[i];
    }
    return peers;
}

}  // namespace

TEST_CASE("inventory claims are monotone") {
    PoolInventory inv;
    CHECK(inv.observe(0b0011));
    CHECK(inv.observe(0b0111));
    CHECK_FALSE(inv.observe(0b0101));
    CHECK(inv.claimed() == 0b0111);
}

TEST_CASE("pick_peer follows selfish then frugal priority") {
    const PoolMask target = full_mask(6);
    std::vector<PoolMask> claims = {0b000011, 0b001100, 0b111100, 0b000001, 0};
    std::vector<uint8_t> none;
    // Node 0 misses 2..5; node 2 claims four of them.
    CHECK(gossip_mode(claims[0], target) == GossipMode::Selfish);
    CHECK(pick_peer(0, claims[0], target, claims, none) == 2);
    // Complete node: largest claim that still lacks something, ties to the lowest index.
    std::vector<PoolMask> c2 = {target, 0b000111, 0b111000, target, 0};
    CHECK(gossip_mode(target, target) == GossipMode::Frugal);
    CHECK(pick_peer(0, target, target, c2, none) == 1);
    // A peer that claims everything is not a destination.
    std::vector<PoolMask> c3 = {target, target, target};
    CHECK(pick_peer(0, target, target, c3, none) == -1);
    // Requests break ties.
    std::vector<uint8_t> req = {0, 0, 1, 0, 0};
    CHECK(pick_peer(0, target, target, c2, req) == 2);
}

TEST_CASE("honest gossip completes and matches the reference tick count") {
    for (uint64_t seed = 1; seed <= 12; ++seed) {
        auto peers = random_peers(10, 45, 5, seed);
        std::vector<std::set<unsigned>> sets(peers.size());
        for (size_t i = 0; i < peers.size(); ++i)
            for (unsigned x = 0; x < 45; ++x)
                if ((peers[i].holds >> x) & 1) sets[i].insert(x);
        GossipParams gp;
        auto r = run_gossip(peers, gp);
        CHECK(r.complete);
        CHECK(gossip_complete(r, peers));
        CHECK(r.ticks == reference_ticks(sets, gp.k_outstanding, gp.timeout_ticks));
        for (int t : r.done_tick) CHECK(t >= 0);
    }
}

TEST_CASE("silent and unclaiming peers cause timeouts and evidence but not stalls") {
    auto peers = random_peers(12, 20, 4, 7);
    peers[0].role = GossipRole::Silent;
    peers[1].role = GossipRole::Unclaim;
    peers[2].role = GossipRole::Silent;
    GossipParams gp;
    auto r = run_gossip(peers, gp);
    CHECK(r.complete);
    CHECK(r.timeouts > 0);
    REQUIRE(r.evidence.size() == 1);
    CHECK(r.evidence[0].peer == 1);
    CHECK(r.evidence[0].tick == 1);
    // Corrupt peers receive nothing they did not already hold.
    CHECK(r.holds[0] == peers[0].holds);
}

TEST_CASE("sinkholes are served only at the lowest priority") {
    GossipParams gp;
    std::vector<double> honest_up, sink_up;
    for (uint64_t seed = 1; seed <= 6; ++seed) {
        auto base = random_peers(40, 10, 3, seed);
        // Baseline: the same honest nodes without the sinkholes.
        std::vector<GossipPeer> alone(base.begin(), base.begin() + 8);
        auto a = run_gossip(alone, gp);
        REQUIRE(a.complete);
        auto mixed = base;
        for (unsigned i = 8; i < 40; ++i) mixed[i].role = GossipRole::Sinkhole;
        auto b = run_gossip(mixed, gp);
        REQUIRE(b.complete);
        CHECK(gossip_complete(b, mixed));
        std::vector<uint64_t> ua(a.up.begin(), a.up.end()), ub(b.up.begin(), b.up.begin() + 8);
        std::sort(ua.begin(), ua.end());
        std::sort(ub.begin(), ub.end());
        honest_up.push_back(double(ua[ua.size() / 2]));
        sink_up.push_back(double(ub[ub.size() / 2]));
        // Sinkholes never upload pools.
        for (unsigned i = 8; i < 40; ++i) CHECK(b.up[i] < gp.pool_bytes);
    }
    for (size_t i = 0; i < honest_up.size(); ++i) CHECK(sink_up[i] <= 2.0 * honest_up[i]);
}

TEST_CASE("gossip timing follows the network") {
    Network net(NetworkModel{}, 10, 0, 3);
    auto peers = random_peers(10, 10, 3, 5);
    GossipParams gp;
    auto r = run_gossip(peers, gp, &net, 1000);
    CHECK(r.complete);
    CHECK(r.end > 1000);
    uint64_t up = 0;
    for (auto u : r.up) up += u;
    CHECK(net.total_up() == up);
    // Each pool takes 5 ms at the politician rate; ticks are at least that plus latency.
    CHECK(r.end - 1000 >= SimTime(r.ticks) * (5000 + 20000));
}

TEST_CASE("network serializes transfers per node") {
    Network net(NetworkModel{}, 2, 2, 9);
    const unsigned c0 = net.citizen_node(0);
    SimTime a1 = net.transfer(0, c0, 1000000, 0);  // 1 s at the citizen rate
    SimTime a2 = net.transfer(1, c0, 1000000, 0);  // queued behind the first on c0's downlink
    CHECK(a1 == kSecond + net.latency(0, c0));
    CHECK(a2 == 2 * kSecond + net.latency(1, c0));
    CHECK(net.latency(0, c0) >= 20000);
    CHECK(net.latency(0, c0) <= 120000);
    CHECK(net.up_bytes(0) == 1000000);
    CHECK(net.down_bytes(c0) == 2000000);
    // A politician's uplink is busy only for size / its own rate, so it
    // feeds two citizens in parallel.
    const unsigned c1 = net.citizen_node(1);
    SimTime b1 = net.transfer(0, c1, 1000000, 3 * kSecond);
    CHECK(b1 == 4 * kSecond + net.latency(0, c1));
    Network par(NetworkModel{}, 1, 2, 9);
    SimTime p0 = par.transfer(0, par.citizen_node(0), 1000000, 0);
    SimTime p1 = par.transfer(0, par.citizen_node(1), 1000000, 0);
    CHECK(p0 == kSecond + par.latency(0, par.citizen_node(0)));
    CHECK(p1 == kSecond + 25000 + par.latency(0, par.citizen_node(1)));
    EventQueue q;
    std::vector<int> order;
    q.schedule(5, [&] { order.push_back(2); });
    q.schedule(1, [&] { order.push_back(1); });
    q.schedule(5, [&] { order.push_back(3); });
    q.run();
    CHECK(order == std::vector<int>{1, 2, 3});
    CHECK(q.now() == 5);
}
