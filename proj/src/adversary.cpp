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

#include "blockene/adversary.hpp"

#include <algorithm>
#include <array>

#include "blockene/sortition.hpp"

namespace blockene {

namespace {
constexpr std::array<std::pair<Strategy, const char*>, 9> kNames{{
    {Strategy::Staleness, "staleness"},
    {Strategy::SplitView, "split_view"},
    {Strategy::Drop, "drop"},
    {Strategy::Equivocate, "equivocate"},
    {Strategy::WithholdCommitments, "withhold_commitments"},
    {Strategy::GossipSinkhole, "gossip_sinkhole"},
    {Strategy::MaliciousProposer, "malicious_proposer"},
    {Strategy::BbaVoteManipulation, "bba_vote_manipulation"},
    {Strategy::BribeImmune, "bribe_immune"},
}};
}  // namespace

const char* strategy_name(Strategy s) {
    for (auto [k, n] : kNames)
        if (k == s) return n;
    return "?";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    for (auto [k, n] : kNames)
        if (name == n) return k;
    return std::nullopt;
}

bool politician_strategy(Strategy s) {
    switch (s) {
        case Strategy::Staleness:
        case Strategy::SplitView:
        case Strategy::Drop:
        case Strategy::Equivocate:
        case Strategy::WithholdCommitments:
        case Strategy::GossipSinkhole:
        case Strategy::BribeImmune: return true;
        default: return false;
    }
}

bool citizen_strategy(Strategy s) {
    switch (s) {
        case Strategy::Equivocate:
        case Strategy::MaliciousProposer:
        case Strategy::BbaVoteManipulation:
        case Strategy::BribeImmune: return true;
        default: return false;
    }
}

std::vector<Strategy> StrategySet::list() const {
    std::vector<Strategy> out;
    for (auto [k, n] : kNames)
        if (has(k)) out.push_back(k);
    return out;
}

std::string StrategySet::str() const {
    std::string s;
    for (auto k : list()) {
        if (!s.empty()) s += ",";
        s += strategy_name(k);
    }
    return s.empty() ? "none" : s;
}

std::optional<StrategySet> StrategySet::parse(std::string_view text) {
    StrategySet set;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t end = text.find(',', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view tok = text.substr(pos, end - pos);
        while (!tok.empty() && tok.front() == ' ') tok.remove_prefix(1);
        while (!tok.empty() && tok.back() == ' ') tok.remove_suffix(1);
        if (!tok.empty() && tok != "none") {
            auto s = parse_strategy(tok);
            if (!s) return std::nullopt;
            set.add(*s);
        }
        pos = end + 1;
    }
    return set;
}

GossipRole gossip_role(bool corrupt, const StrategySet& s) {
    if (!corrupt) return GossipRole::Honest;
    if (s.has(Strategy::GossipSinkhole)) return GossipRole::Sinkhole;
    if (s.has(Strategy::Drop) || s.has(Strategy::WithholdCommitments) || s.has(Strategy::Equivocate))
        return GossipRole::Mute;
    return GossipRole::Honest;
}

LedgerJump ChainStore::jump(uint64_t from, uint64_t to) const {
    LedgerJump j;
    const auto& tip = at(to);
    j.height = to;
    j.hash_block = tip.hash;
    j.gs_root = tip.gs_root;
    j.hash_subblock = tip.block.subblock.hash();
    for (uint64_t h = from + 1; h <= to; ++h) j.subblocks.push_back(at(h).block.subblock);
    j.sigs = tip.sigs;
    return j;
}

std::optional<LedgerJump> HonestLedgerSource::jump(uint64_t from, uint64_t to) {
    if (to > chain_->height() || from >= to) return std::nullopt;
    return chain_->jump(from, to);
}

std::optional<uint64_t> StaleLedgerSource::latest_height() {
    const uint64_t h = chain_->height();
    return h > lag_ ? h - lag_ : 0;
}

std::optional<LedgerJump> StaleLedgerSource::jump(uint64_t from, uint64_t to) {
    if (to > *latest_height()) return std::nullopt;
    return HonestLedgerSource::jump(from, to);
}

std::optional<LedgerJump> ForgingLedgerSource::jump(uint64_t from, uint64_t to) {
    if (to != chain_->height() + 1 || from >= to || to - from > 10) return std::nullopt;
    const auto& tip = chain_->at(chain_->height());
    LedgerJump j;
    j.height = to;
    for (uint64_t h = from + 1; h < to; ++h) j.subblocks.push_back(chain_->at(h).block.subblock);
    SubBlock sb;
    sb.hash_prev_block = tip.hash;
    sb.hash_prev_subblock = tip.block.subblock.hash();
    j.subblocks.push_back(sb);
    j.hash_subblock = sb.hash();
    j.hash_block = Hasher().put("forged").put_u64(to).put(tip.hash).finish();
    j.gs_root = tip.gs_root;
    if (memo_height_ != to || memo_tip_ != tip.hash) {
        memo_sigs_.clear();
        const Digest seed = chain_->at(seed_height(to)).hash;
        for (const KeyPair* kp : colluders_) {
            VrfOutput vrf = compute_vrf(kp->sk, seed, to);
            if (!sortition_member(vrf, k_bits_)) continue;
            memo_sigs_.push_back(sign_commit(*kp, vrf, j.hash_block, j.gs_root, j.hash_subblock, to));
        }
        memo_height_ = to;
        memo_tip_ = tip.hash;
    }
    j.sigs = memo_sigs_;
    return j;
}

}  // namespace blockene
