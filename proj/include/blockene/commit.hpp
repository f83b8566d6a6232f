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

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "blockene/crypto.hpp"
#include "blockene/ledger.hpp"

namespace blockene {

struct TxPool {
    uint32_t politician = 0;
    uint64_t round = 0;
    std::vector<Transaction> txs;
    Digest digest{};
};

Commitment sign_commitment(const KeyPair& kp, uint32_t politician, uint64_t round, const Digest& pool_digest);
bool commitment_valid(const Commitment& c, const PublicKey& vk, VerifyCache* cache = nullptr);

struct FrozenPool {
    TxPool pool;
    Commitment commitment;
};

// Freezes the politician's shard (slot index `slot` of rho) of the pending
// transactions, lowest uuid first, at most `capacity` of them.
FrozenPool freeze_pool(const KeyPair& kp, uint32_t politician, unsigned slot, uint64_t round, unsigned rho,
                       std::span<const Transaction> pending, size_t capacity);
// True iff every transaction in the pool shards to `slot`.
bool pool_on_shard(const TxPool& pool, unsigned slot, unsigned rho);

// Two signed commitments from one politician for one round.
struct CommitmentConflict {
    Commitment first, second;
};
bool conflict_valid(const CommitmentConflict& c, const PublicKey& vk);
std::vector<CommitmentConflict> find_conflicts(std::span<const Commitment> seen);

struct WitnessList {
    PublicKey citizen{};
    uint64_t round = 0;
    std::vector<std::optional<Digest>> slots;  // commitment digest per designated politician
    VrfOutput membership;
    Signature sig{};
    Bytes signing_bytes() const;
    size_t wire_bytes() const;
};

WitnessList make_witness_list(const KeyPair& kp, const VrfOutput& membership, uint64_t round,
                              std::vector<std::optional<Digest>> slots);
bool witness_list_valid(const WitnessList& wl);

struct Proposal {
    PublicKey proposer{};
    uint64_t round = 0;
    VrfOutput vrf;
    std::vector<Commitment> id_list;
    Signature sig{};
    Digest id_list_hash() const;
    Digest digest() const;
    size_t wire_bytes() const;
};

Proposal make_proposal(const KeyPair& kp, const VrfOutput& vrf, uint64_t round, std::vector<Commitment> id_list);
bool proposal_valid(const Proposal& p, VerifyCache* cache = nullptr);

// Per slot, the commitment whose digest appears in at least `threshold`
// witness lists, in slot order.
std::vector<Commitment> select_id_list(std::span<const std::vector<Commitment>> known_by_slot,
                                       std::span<const WitnessList> lists, unsigned threshold);

struct RoundParams {
    unsigned rho = 45;
    unsigned delta = 350;
    unsigned t_star = 850;
    unsigned n_b_tilde = 772;
    unsigned n_g_star = 1137;
    unsigned fooled = 36;
    unsigned reupload_first = 5;
    unsigned reupload_second = 10;
    unsigned vote_threshold() const { return n_b_tilde + delta; }
};

// n_b_tilde + fooled < t_star <= n_g_star - fooled.
bool round_params_valid(const RoundParams& p);

struct SignedCommit {
    CommitSignature sig;
    Digest block_hash{};
    ShortDigest gs_root{};
    Digest subblock_hash{};
};

struct TallyOutcome {
    bool committed = false;
    bool conflict = false;  // two pairs reached the threshold
    Digest block_hash{};
    ShortDigest gs_root{};
    Digest subblock_hash{};
    unsigned signatures = 0;
    unsigned rejected = 0;
    unsigned best_rival = 0;
    std::vector<CommitSignature> sigs;  // for the committed pair
};

// Counts verified, deduplicated signatures per (hash, root, sub-block) and
// commits the pair reaching t_star.
TallyOutcome tally_commit(uint64_t height, std::span<const SignedCommit> sigs, unsigned t_star, const Digest& seed,
                          unsigned k_bits, const IdentityRegistry& registry, VerifyCache* cache = nullptr);

struct BlockCommitOutcome {
    uint64_t height = 0;
    Digest block_hash{};
    ShortDigest gs_root{};
    unsigned pools = 0;
    size_t tx_count = 0;
    bool empty = true;
    unsigned consensus_rounds = 0;
    unsigned signatures = 0;
};

// Memo of build_block results. The key covers every input (the previous
// hash fixes the chain and therefore the registry), so sharing it between
// citizens does not change any result.
// A built block with its hashes computed once.
struct SharedBlock {
    BuiltBlock built;
    Digest hash{};
    Digest subblock_hash{};
};

class BuildMemo {
public:
    std::shared_ptr<const SharedBlock> build(uint64_t height, const Digest& prev_hash, const Digest& prev_subblock,
                                            std::span<const Commitment> id_list,
                                            const std::map<Digest, std::vector<Transaction>>& pools,
                                            const ValueMap& values, const IdentityRegistry& registry);
    void clear() { memo_.clear(); }
    uint64_t hits() const { return hits_; }

private:
    std::map<Digest, std::shared_ptr<const SharedBlock>> memo_;
    uint64_t hits_ = 0;
};

// The canonical empty block for a height.
Block empty_block(uint64_t height, const Digest& prev_hash, const Digest& prev_subblock);

}  // namespace blockene
