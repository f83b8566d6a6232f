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

#include "blockene/sortition.hpp"

namespace blockene {

HashStream::result_type HashStream::operator()() {
    if (used_ == 4) {
        block_ = Hasher().put(seed_).put_u64(counter_++).finish();
        used_ = 0;
    }
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | block_[used_ * 8 + i];
    ++used_;
    return v;
}

uint64_t HashStream::below(uint64_t n) {
    if (n == 0) throw std::invalid_argument("below(0)");
    const uint64_t limit = max() - max() % n;
    for (;;) {
        uint64_t v = (*this)();
        if (v < limit) return v % n;
    }
}

bool committee_eligible(uint64_t added_at, bool genesis, uint64_t round) {
    return genesis || round >= added_at + kCoolOffBlocks;
}

std::vector<CommitteeMember> select_committee(std::span<const Candidate> eligible, const Digest& seed, uint64_t round,
                                              unsigned k_bits) {
    std::vector<CommitteeMember> out;
    for (const auto& c : eligible) {
        VrfOutput v = compute_vrf(*c.sk, seed, round);
        if (sortition_member(v, k_bits)) out.push_back({c.id, c.vk, v});
    }
    return out;
}

bool verify_membership(const PublicKey& vk, const Digest& seed, uint64_t round, unsigned k_bits,
                       const VrfOutput& vrf, VerifyCache* cache) {
    if (!sortition_member(vrf, k_bits)) return false;
    return cache ? cache->verify_vrf(vk, seed, round, vrf) : verify_vrf(vk, seed, round, vrf);
}

std::vector<CommitteeMember> select_proposers(std::span<const Candidate> committee, const Digest& prev_hash,
                                              uint64_t round, unsigned kp_bits) {
    auto out = select_committee(committee, prev_hash, round, kp_bits);
    std::sort(out.begin(), out.end(), [](const CommitteeMember& a, const CommitteeMember& b) {
        return vrf_less(a.vrf, b.vrf);
    });
    return out;
}

std::vector<uint32_t> designated_politicians(uint64_t round, const Digest& prev_hash, unsigned rho, unsigned S) {
    if (rho > S) throw std::invalid_argument("rho exceeds politician count");
    HashStream hs(Hasher().put("designated").put(prev_hash).put_u64(round).finish());
    std::vector<uint32_t> idx(S);
    std::iota(idx.begin(), idx.end(), 0u);
    for (unsigned i = 0; i < rho; ++i) std::swap(idx[i], idx[i + hs.below(S - i)]);
    idx.resize(rho);
    return idx;
}

unsigned shard_transaction(const PublicKey& originator, uint64_t round, unsigned rho) {
    if (rho == 0) throw std::invalid_argument("empty designated list");
    Digest h = Hasher().put_u64(round).put(originator).finish();
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | h[i];
    return unsigned(v % rho);
}

std::vector<uint32_t> vrf_safe_sample(const Digest& vrf_value, unsigned S, unsigned m) {
    HashStream hs(Hasher().put("sample").put(vrf_value).finish());
    return draw_safe_sample(hs, S, m);
}

}  // namespace blockene
