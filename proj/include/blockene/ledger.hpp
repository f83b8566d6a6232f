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

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "blockene/crypto.hpp"
#include "blockene/merkle.hpp"

namespace blockene {

// Balance and nonce keys of the account owned by a verification key.
Key balance_key(const PublicKey& vk);
inline Key nonce_key_of(Key balance) { return balance | 1u; }

enum class TxKind : uint8_t { Transfer = 0, AddIdentity = 1 };

struct Identity {
    Digest tk{};      // TEE key
    PublicKey vk{};
    Signature cert{};  // registrar signature over (tk, vk)
    uint64_t added_at = 0;
    bool operator==(const Identity&) const = default;
};

Bytes identity_cert_message(const Digest& tk, const PublicKey& vk);
Identity make_identity(const Digest& tk, const PublicKey& vk, const SecretKey& registrar_sk);
bool identity_cert_valid(const Identity& id, const PublicKey& registrar_vk);

struct Transaction {
    uint64_t uuid = 0;
    TxKind kind = TxKind::Transfer;
    PublicKey originator{};
    uint64_t nonce = 0;
    Key debit_key = 0;
    Key credit_key = 0;
    uint32_t amount = 0;
    Identity identity;  // AddIdentity only
    Signature sig{};

    Bytes signing_bytes() const;
    Bytes wire() const;  // signing bytes followed by the signature
    Digest digest() const { return hash(wire()); }
    Key nonce_key() const { return nonce_key_of(debit_key); }
    bool operator==(const Transaction&) const = default;
};

Transaction make_transfer(const KeyPair& from, const PublicKey& to, uint64_t nonce, uint32_t amount, uint64_t uuid);
Transaction make_add_identity(const KeyPair& owner, const Identity& id, uint64_t uuid);
std::optional<Transaction> parse_transaction(std::span<const uint8_t> wire);

enum class TxVerdict { Valid, BadSignature, BadNonce, Overspend, Malformed, DuplicateTEE };
const char* to_string(TxVerdict v);

// Stateless checks plus the value-dependent rules for a transfer.
TxVerdict validate_transaction(const Transaction& tx, Value debit_balance, Value stored_nonce);

class IdentityRegistry {
public:
    enum class Result { Accepted, DuplicateTEE, BadCert };
    explicit IdentityRegistry(PublicKey registrar = {}) : registrar_(registrar) {}

    Result check(const Identity& id) const;
    Result register_identity(const Identity& id, bool genesis = false);
    bool contains_vk(const PublicKey& vk) const { return by_vk_.count(vk) != 0; }
    // Identities committee-eligible at `round` (genesis members always,
    // others after the cool-off).
    std::vector<Identity> eligible(uint64_t round) const;
    bool eligible_vk(const PublicKey& vk, uint64_t round) const;
    const std::vector<Identity>& all() const { return list_; }
    const PublicKey& registrar() const { return registrar_; }

private:
    PublicKey registrar_;
    std::vector<Identity> list_;
    std::vector<bool> genesis_;
    std::set<Digest> tks_;
    std::map<PublicKey, size_t> by_vk_;
};

struct SubBlock {
    std::vector<Identity> new_identities;
    Digest hash_prev_block{};
    Digest hash_prev_subblock{};
    Digest hash() const;
    bool operator==(const SubBlock&) const = default;
};

struct Commitment {
    uint32_t politician = 0;
    uint64_t round = 0;
    Digest pool_digest{};
    Signature sig{};
    Bytes signing_bytes() const;
    Digest digest() const;
    bool operator==(const Commitment&) const = default;
};

struct Block {
    uint64_t height = 0;
    Digest hash_prev_block{};
    std::vector<Transaction> txs;
    std::vector<Commitment> id_list;
    SubBlock subblock;
    Digest hash() const;
    bool empty() const { return id_list.empty(); }
};

Bytes commit_message(const Digest& block_hash, const ShortDigest& gs_root, const Digest& subblock_hash,
                     uint64_t height);

struct CommitSignature {
    PublicKey signer{};
    VrfOutput membership;
    Signature sig{};
    bool operator==(const CommitSignature&) const = default;
};

CommitSignature sign_commit(const KeyPair& kp, const VrfOutput& membership, const Digest& block_hash,
                            const ShortDigest& gs_root, const Digest& subblock_hash, uint64_t height);

// Hash(B_j) for j <= 0 is the genesis hash.
struct LocalState {
    uint64_t height = 0;
    Digest hash_block{};
    ShortDigest gs_root{};
    Digest hash_subblock{};
    IdentityRegistry registry;
    std::deque<Digest> recent;  // Hash(B_{height-9}) .. Hash(B_{height-1})
    Digest genesis_hash{};

    // Hash of block h for height-9 <= h <= height.
    std::optional<Digest> hash_at(uint64_t h) const;
    bool same_chain_point(const LocalState& o) const;
};

LocalState genesis_state(const Block& genesis, const ShortDigest& gs_root, const IdentityRegistry& registry);

// Seed for sortition at round N: Hash(B_{N-10}).
inline uint64_t seed_height(uint64_t round) { return round > 10 ? round - 10 : 0; }

struct LedgerJump {
    uint64_t height = 0;
    Digest hash_block{};
    ShortDigest gs_root{};
    Digest hash_subblock{};
    std::vector<SubBlock> subblocks;  // heights i+1 .. height
    std::vector<CommitSignature> sigs;
};

// Politician side of getLedger.
class LedgerSource {
public:
    virtual ~LedgerSource() = default;
    virtual std::optional<uint64_t> latest_height() = 0;
    virtual std::optional<LedgerJump> jump(uint64_t from, uint64_t to) = 0;
};

struct GetLedgerParams {
    unsigned t_star = 850;
    unsigned k_bits = 0;
    unsigned max_jump = 10;
};

struct GetLedgerResult {
    bool accepted = false;
    LocalState state;
    std::string diagnostic;
    std::vector<size_t> blamed;  // sample positions that served bad data
    uint64_t bytes_down = 0;
};

// Structural check of a jump against the current state; empty string on
// success.
std::string verify_jump(const LocalState& ls, const LedgerJump& j, const GetLedgerParams& p, VerifyCache* cache);
LocalState apply_jump(const LocalState& ls, const LedgerJump& j);

GetLedgerResult get_ledger(const LocalState& ls, std::span<LedgerSource* const> sample, const GetLedgerParams& p,
                           VerifyCache* cache = nullptr);

size_t jump_wire_bytes(const LedgerJump& j);

// Values of the keys a block reads, supplied by the global-state read.
using ValueMap = std::unordered_map<Key, Value>;

struct BuiltBlock {
    Block block;
    std::vector<Transaction> rejected;
    std::vector<KeyValue> updates;  // sorted by key
    std::vector<Identity> new_identities;
};

class MissingPool : public std::runtime_error {
public:
    explicit MissingPool(uint32_t p) : std::runtime_error("missing pool"), politician(p) {}
    uint32_t politician;
};

// Keys read by a set of transactions, sorted and deduplicated.
std::vector<Key> keys_read(std::span<const Transaction> txs);

// Ordered, deduplicated transaction sequence for an IDList.
std::vector<Transaction> ordered_transactions(std::span<const Commitment> id_list,
                                              const std::map<Digest, std::vector<Transaction>>& pools);

BuiltBlock build_block(uint64_t height, const Digest& prev_hash, const Digest& prev_subblock,
                       std::span<const Commitment> id_list,
                       const std::map<Digest, std::vector<Transaction>>& pools, const ValueMap& values,
                       const IdentityRegistry& registry);

Digest pool_digest(std::span<const Transaction> txs);

}  // namespace blockene
