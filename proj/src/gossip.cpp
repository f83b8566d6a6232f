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

#include "blockene/gossip.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

namespace blockene {

bool PoolInventory::observe(PoolMask claimed) {
    if (claimed_ & ~claimed) return false;
    claimed_ = claimed;
    return true;
}

int pick_peer(unsigned self, PoolMask holds, PoolMask target, std::span<const PoolMask> claims,
              std::span<const uint8_t> requested_by, std::span<const uint8_t> shunned) {
    const PoolMask missing = target & ~holds;
    int best = -1;
    std::tuple<unsigned, unsigned, int> best_key{};
    if (missing) {
        for (unsigned d = 0; d < claims.size(); ++d) {
            if (d == self || (!shunned.empty() && shunned[d])) continue;
            const unsigned score = pool_count(claims[d] & missing);
            if (score == 0) continue;
            const bool req = !requested_by.empty() && requested_by[d];
            std::tuple<unsigned, unsigned, int> key{score, pool_count(claims[d]), req ? 1 : 0};
            if (best < 0 || key > best_key) {
                best = int(d);
                best_key = key;
            }
        }
        if (best >= 0) return best;
    }
    for (unsigned d = 0; d < claims.size(); ++d) {
        if (d == self) continue;
        const bool req = !requested_by.empty() && requested_by[d];
        if (!req && !(holds & ~claims[d])) continue;
        std::tuple<unsigned, unsigned, int> key{pool_count(claims[d]), 0, req ? 1 : 0};
        if (best < 0 || key > best_key) {
            best = int(d);
            best_key = key;
        }
    }
    return best;
}

namespace {

PoolMask claim_of(const GossipPeer& p, PoolMask holds, PoolMask all, unsigned tick) {
    switch (p.role) {
        case GossipRole::Honest: return holds;
        case GossipRole::Sinkhole: return 0;
        case GossipRole::Silent: return all;
        case GossipRole::Unclaim: return tick == 0 ? all : 0;
        case GossipRole::Mute: return 0;
    }
    return 0;
}

unsigned lowest(PoolMask m) { return unsigned(__builtin_ctzll(m)); }

struct Outstanding {
    unsigned peer;
    unsigned issued;
};

}  // namespace

GossipResult run_gossip(const std::vector<GossipPeer>& peers, const GossipParams& params, Network* net,
                        SimTime start, PoolMask target) {
    const unsigned n = unsigned(peers.size());
    if (net && n > net->politicians()) throw std::invalid_argument("more gossip peers than politicians");
    PoolMask all = 0;
    for (const auto& p : peers) all |= p.holds;
    if (target == 0)
        for (const auto& p : peers)
            if (p.role == GossipRole::Honest) target |= p.holds;
    all |= target;

    GossipResult r;
    r.target = target;
    r.up.assign(n, 0);
    r.down.assign(n, 0);
    r.done_tick.assign(n, -1);
    r.end = start;
    std::vector<PoolMask> holds(n);
    for (unsigned i = 0; i < n; ++i) holds[i] = peers[i].holds;
    std::vector<PoolMask> last_advert(n, ~PoolMask(0));
    std::vector<PoolInventory> inventory(n);
    std::vector<std::vector<std::vector<Outstanding>>> out(n, std::vector<std::vector<Outstanding>>(kMaxPools));
    std::vector<std::vector<uint64_t>> tried(n, std::vector<uint64_t>(kMaxPools, 0));
    // tried[a][x] is a peer bitmask only when n <= 64; fall back to a vector otherwise.
    std::vector<std::vector<std::vector<uint8_t>>> tried_big;
    if (n > 64) tried_big.assign(n, std::vector<std::vector<uint8_t>>(kMaxPools, std::vector<uint8_t>(n, 0)));
    auto was_tried = [&](unsigned a, unsigned x, unsigned p) {
        return n > 64 ? tried_big[a][x][p] != 0 : ((tried[a][x] >> p) & 1) != 0;
    };
    auto mark_tried = [&](unsigned a, unsigned x, unsigned p) {
        if (n > 64)
            tried_big[a][x][p] = 1;
        else
            tried[a][x] |= uint64_t(1) << p;
    };

    auto honest = [&](unsigned i) { return peers[i].role == GossipRole::Honest; };
    auto all_done = [&] {
        for (unsigned i = 0; i < n; ++i)
            if (honest(i) && (target & ~holds[i])) return false;
        return true;
    };
    for (unsigned i = 0; i < n; ++i)
        if (honest(i) && !(target & ~holds[i])) r.done_tick[i] = 0;

    SimTime now = start;
    std::vector<PoolMask> claims(n);
    std::vector<std::vector<std::pair<unsigned, unsigned>>> inbox(n);  // (requester, pool)
    std::vector<uint8_t> requested_by(n);
    std::vector<std::vector<uint8_t>> shunned(n, std::vector<uint8_t>(n, 0));
    struct Send {
        unsigned from, to, pool;
    };
    std::vector<Send> sends;

    unsigned tick = 0;
    while (!all_done() && tick < params.max_ticks) {
        SimTime tick_end = now;
        auto move = [&](unsigned from, unsigned to, uint64_t bytes) {
            r.up[from] += bytes;
            r.down[to] += bytes;
            if (net) tick_end = std::max(tick_end, net->transfer(from, to, bytes, now));
        };

        // Advertise.
        for (unsigned i = 0; i < n; ++i) {
            claims[i] = claim_of(peers[i], holds[i], all, tick);
            if (claims[i] != last_advert[i]) {
                last_advert[i] = claims[i];
                for (unsigned j = 0; j < n; ++j)
                    if (j != i) move(i, j, params.advert_bytes);
            }
            const PoolMask before = inventory[i].claimed();
            if (!inventory[i].observe(claims[i]) &&
                std::none_of(r.evidence.begin(), r.evidence.end(), [&](const auto& e) { return e.peer == i; }))
                r.evidence.push_back({i, tick, before, claims[i]});
        }
        // Peers are ranked by monotone inventories, so a withdrawn claim still counts.
        for (unsigned i = 0; i < n; ++i) claims[i] = inventory[i].claimed() | claims[i];

        // Requests.
        for (auto& b : inbox) b.clear();
        for (unsigned a = 0; a < n; ++a) {
            if (peers[a].role == GossipRole::Sinkhole) {
                for (unsigned b = 0; b < n; ++b)
                    if (b != a && honest(b)) {
                        for (PoolMask m = all; m; m &= m - 1) inbox[b].push_back({a, lowest(m)});
                        move(a, b, params.request_bytes);
                    }
                continue;
            }
            if (!honest(a)) continue;
            const PoolMask missing = target & ~holds[a];
            for (PoolMask m = missing; m; m &= m - 1) {
                const unsigned x = lowest(m);
                auto& o = out[a][x];
                for (auto it = o.begin(); it != o.end();) {
                    if (tick - it->issued >= params.timeout_ticks) {
                        ++r.timeouts;
                        it = o.erase(it);
                    } else {
                        ++it;
                    }
                }
                std::vector<unsigned> cands;
                for (unsigned b = 0; b < n; ++b)
                    if (b != a && ((claims[b] >> x) & 1) && !was_tried(a, x, b)) cands.push_back(b);
                std::stable_sort(cands.begin(), cands.end(), [&](unsigned u, unsigned v) {
                    return pool_count(claims[u] & missing) > pool_count(claims[v] & missing);
                });
                for (unsigned b : cands) {
                    if (o.size() >= params.k_outstanding) break;
                    o.push_back({b, tick});
                    mark_tried(a, x, b);
                    move(a, b, params.request_bytes);
                }
                for (const auto& q : o) inbox[q.peer].push_back({a, x});
            }
        }

        // One upload per honest node, plus the exchange reply in selfish mode.
        sends.clear();
        for (unsigned b = 0; b < n; ++b) {
            if (!honest(b)) continue;
            std::fill(requested_by.begin(), requested_by.end(), 0);
            for (auto [req, x] : inbox[b])
                if ((holds[b] >> x) & 1) requested_by[req] = 1;
            const int d = pick_peer(b, holds[b], target, claims, requested_by, shunned[b]);
            if (d < 0) continue;
            const unsigned dd = unsigned(d);
            unsigned pool = kMaxPools;
            if (requested_by[dd]) {
                for (auto [req, x] : inbox[b])
                    if (req == dd && ((holds[b] >> x) & 1)) pool = std::min(pool, x);
            } else if (holds[b] & ~claims[dd]) {
                pool = lowest(holds[b] & ~claims[dd]);
            }
            if (pool < kMaxPools) sends.push_back({b, dd, pool});
            const PoolMask missing = target & ~holds[b];
            if (missing && (claims[dd] & missing)) {
                if (honest(dd) && (holds[dd] & missing))
                    sends.push_back({dd, b, lowest(holds[dd] & missing)});
                else
                    shunned[b][dd] = 1;
            }
        }
        for (const auto& s : sends) {
            move(s.from, s.to, params.pool_bytes);
            ++r.pool_transfers;
        }
        for (const auto& s : sends) {
            holds[s.to] |= PoolMask(1) << s.pool;
            out[s.to][s.pool].clear();
        }
        ++tick;
        for (unsigned i = 0; i < n; ++i)
            if (honest(i) && r.done_tick[i] < 0 && !(target & ~holds[i])) r.done_tick[i] = int(tick);
        if (tick_end == now && net) tick_end = now + 1;
        now = tick_end;
    }
    r.ticks = tick;
    r.complete = all_done();
    r.holds = std::move(holds);
    r.end = now;
    return r;
}

bool gossip_complete(const GossipResult& r, std::span<const GossipPeer> peers) {
    for (size_t i = 0; i < peers.size(); ++i)
        if (peers[i].role == GossipRole::Honest && (r.target & ~r.holds[i])) return false;
    return true;
}

}  // namespace blockene
