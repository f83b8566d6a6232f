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
#include <span>
#include <vector>

#include "blockene/network.hpp"

namespace blockene {

// Set of pool slots held for one round (slot i = i-th designated politician).
using PoolMask = uint64_t;
inline constexpr unsigned kMaxPools = 64;

inline PoolMask full_mask(unsigned rho) { return rho >= 64 ? ~PoolMask(0) : (PoolMask(1) << rho) - 1; }
inline unsigned pool_count(PoolMask m) { return unsigned(__builtin_popcountll(m)); }

enum class GossipRole : uint8_t {
    Honest,
    Sinkhole,  // claims nothing, returns nothing, requests everything
    Silent,    // claims everything, never answers
    Unclaim,   // claims everything once, then nothing
    Mute,      // claims nothing, answers nothing, asks nothing
};

enum class GossipMode : uint8_t { Selfish, Frugal };

struct GossipParams {
    unsigned k_outstanding = 5;  // peers asked per missing pool
    unsigned timeout_ticks = 2;
    unsigned max_ticks = 200;
    uint64_t pool_bytes = 200000;
    uint64_t advert_bytes = 48;
    uint64_t request_bytes = 16;
};

struct GossipPeer {
    GossipRole role = GossipRole::Honest;
    PoolMask holds = 0;
};

// Observed claims of one peer. Claims only grow; a shrinking claim is
// evidence of misbehaviour.
class PoolInventory {
public:
    // Returns false (and keeps the old claim) if `claimed` drops a pool.
    bool observe(PoolMask claimed);
    PoolMask claimed() const { return claimed_; }

private:
    PoolMask claimed_ = 0;
};

struct InventoryEvidence {
    unsigned peer = 0;
    unsigned tick = 0;
    PoolMask before = 0;
    PoolMask after = 0;
};

inline GossipMode gossip_mode(PoolMask holds, PoolMask target) {
    return (target & ~holds) ? GossipMode::Selfish : GossipMode::Frugal;
}

// Destination choice for node `self`. Selfish mode takes the peer claiming
// the most of self's missing pools and falls back to frugal when no peer
// claims any. Frugal mode considers peers that lack (by their claim) a pool
// self holds, or that requested one, ranked by claim size. Ties go to a
// requester, then to the lowest index. Shunned peers (an earlier exchange
// returned nothing) are skipped in selfish ranking. Returns -1 if none.
int pick_peer(unsigned self, PoolMask holds, PoolMask target, std::span<const PoolMask> claims,
              std::span<const uint8_t> requested_by, std::span<const uint8_t> shunned = {});

struct GossipResult {
    std::vector<PoolMask> holds;
    PoolMask target = 0;
    bool complete = false;
    unsigned ticks = 0;
    SimTime end = 0;
    std::vector<uint64_t> up, down;  // bytes per peer during the session
    std::vector<int> done_tick;      // first tick an honest peer held target, -1 otherwise
    std::vector<InventoryEvidence> evidence;
    uint64_t pool_transfers = 0;
    uint64_t timeouts = 0;
};

// Runs gossip among politicians until every honest peer holds `target`
// (default: the union of honest holdings) or max_ticks pass. With a
// network, peer i is politician node i and tick boundaries follow transfer
// arrival times.
GossipResult run_gossip(const std::vector<GossipPeer>& peers, const GossipParams& params, Network* net = nullptr,
                        SimTime start = 0, PoolMask target = 0);

// Asserts every honest peer holds the target.
bool gossip_complete(const GossipResult& r, std::span<const GossipPeer> peers);

}  // namespace blockene
