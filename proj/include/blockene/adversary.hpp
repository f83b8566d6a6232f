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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blockene/gossip.hpp"
#include "blockene/ledger.hpp"

namespace blockene {

enum class Strategy : uint8_t {
    Staleness,
    SplitView,
    Drop,
    Equivocate,
    WithholdCommitments,
    GossipSinkhole,
    MaliciousProposer,
    BbaVoteManipulation,
    BribeImmune,
};

const char* strategy_name(Strategy s);
std::optional<Strategy> parse_strategy(std::string_view name);
bool politician_strategy(Strategy s);
bool citizen_strategy(Strategy s);

class StrategySet {
public:
    bool has(Strategy s) const { return (bits_ >> unsigned(s)) & 1; }
    void add(Strategy s) { bits_ |= 1u << unsigned(s); }
    bool empty() const { return bits_ == 0; }
    std::vector<Strategy> list() const;
    std::string str() const;  // comma-separated names
    // Comma-separated names; "none" or empty for no strategy.
    static std::optional<StrategySet> parse(std::string_view text);
    bool operator==(const StrategySet&) const = default;

private:
    uint32_t bits_ = 0;
};

// Gossip behaviour of a politician running the given strategies.
GossipRole gossip_role(bool corrupt, const StrategySet& s);

// Committed chain as held by politicians.
struct ChainEntry {
    Block block;
    Digest hash{};
    ShortDigest gs_root{};
    std::vector<CommitSignature> sigs;
};

class ChainStore {
public:
    explicit ChainStore(ChainEntry genesis) { entries_.push_back(std::move(genesis)); }
    uint64_t height() const { return entries_.size() - 1; }
    const ChainEntry& at(uint64_t h) const { return entries_.at(h); }
    void append(ChainEntry e) { entries_.push_back(std::move(e)); }
    LedgerJump jump(uint64_t from, uint64_t to) const;

private:
    std::vector<ChainEntry> entries_;
};

class HonestLedgerSource : public LedgerSource {
public:
    explicit HonestLedgerSource(const ChainStore* chain) : chain_(chain) {}
    std::optional<uint64_t> latest_height() override { return chain_->height(); }
    std::optional<LedgerJump> jump(uint64_t from, uint64_t to) override;

protected:
    const ChainStore* chain_;
};

// Reports and serves the chain as of `lag` blocks ago.
class StaleLedgerSource : public HonestLedgerSource {
public:
    StaleLedgerSource(const ChainStore* chain, unsigned lag) : HonestLedgerSource(chain), lag_(lag) {}
    std::optional<uint64_t> latest_height() override;
    std::optional<LedgerJump> jump(uint64_t from, uint64_t to) override;

private:
    unsigned lag_;
};

// Claims one block beyond the tip and serves a forged jump signed by the
// colluding citizens only.
class ForgingLedgerSource : public HonestLedgerSource {
public:
    ForgingLedgerSource(const ChainStore* chain, std::vector<const KeyPair*> colluders, unsigned k_bits)
        : HonestLedgerSource(chain), colluders_(std::move(colluders)), k_bits_(k_bits) {}
    std::optional<uint64_t> latest_height() override { return chain_->height() + 1; }
    std::optional<LedgerJump> jump(uint64_t from, uint64_t to) override;

private:
    std::vector<const KeyPair*> colluders_;
    unsigned k_bits_;
    // The forged signatures depend only on the target height and the tip.
    uint64_t memo_height_ = 0;
    Digest memo_tip_{};
    std::vector<CommitSignature> memo_sigs_;
};

class SilentLedgerSource : public LedgerSource {
public:
    std::optional<uint64_t> latest_height() override { return std::nullopt; }
    std::optional<LedgerJump> jump(uint64_t, uint64_t) override { return std::nullopt; }
};

}  // namespace blockene
