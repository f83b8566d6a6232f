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

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <vector>

#include "blockene/crypto.hpp"

namespace blockene {

inline constexpr uint64_t kCoolOffBlocks = 40;
inline constexpr uint64_t kSeedLag = 10;

// Counter-mode SHA-256 stream; a UniformRandomBitGenerator whose output is
// fixed by the seed digest alone.
class HashStream {
public:
    using result_type = uint64_t;
    explicit HashStream(const Digest& seed) : seed_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<uint64_t>::max(); }
    result_type operator()();
    uint64_t below(uint64_t n);

private:
    Digest seed_;
    Digest block_{};
    uint64_t counter_ = 0;
    unsigned used_ = 4;
};

bool committee_eligible(uint64_t added_at, bool genesis, uint64_t round);

struct Candidate {
    uint32_t id = 0;
    PublicKey vk{};
    const SecretKey* sk = nullptr;
};

struct CommitteeMember {
    uint32_t id = 0;
    PublicKey vk{};
    VrfOutput vrf;
};

// Byte-lexicographic order on VRF values.
inline bool vrf_less(const VrfOutput& a, const VrfOutput& b) { return a.value < b.value; }

std::vector<CommitteeMember> select_committee(std::span<const Candidate> eligible, const Digest& seed, uint64_t round,
                                              unsigned k_bits);
bool verify_membership(const PublicKey& vk, const Digest& seed, uint64_t round, unsigned k_bits,
                       const VrfOutput& vrf, VerifyCache* cache = nullptr);

// Proposer sortition over the committee, seeded by the previous block hash.
// The result is sorted by VRF value; the first entry wins.
std::vector<CommitteeMember> select_proposers(std::span<const Candidate> committee, const Digest& prev_hash,
                                              uint64_t round, unsigned kp_bits);

std::vector<uint32_t> designated_politicians(uint64_t round, const Digest& prev_hash, unsigned rho, unsigned S);

// Index into the designated list.
unsigned shard_transaction(const PublicKey& originator, uint64_t round, unsigned rho);

template <class URBG>
std::vector<uint32_t> draw_safe_sample(URBG& rng, unsigned S, unsigned m) {
    if (m > S) throw std::invalid_argument("safe sample larger than politician set");
    std::vector<uint32_t> idx(S);
    std::iota(idx.begin(), idx.end(), 0u);
    for (unsigned i = 0; i < m; ++i) {
        std::uniform_int_distribution<uint32_t> pick(i, S - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(m);
    return idx;
}

// Safe sample fixed by a citizen's VRF value.
std::vector<uint32_t> vrf_safe_sample(const Digest& vrf_value, unsigned S, unsigned m);

}  // namespace blockene
