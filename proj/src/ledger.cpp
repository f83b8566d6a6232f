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

#include "blockene/ledger.hpp"

#include <algorithm>
#include <limits>

#include "blockene/sortition.hpp"

namespace blockene {

namespace {

uint32_t be32(const uint8_t* p) { return (uint32_t(p[0]) << 24) | (uint32_t(p[1]) << 16) | (uint32_t(p[2]) << 8) | p[3]; }

class Reader {
public:
    explicit Reader(std::span<const uint8_t> d) : d_(d) {}
    bool ok() const { return ok_; }
    bool done() const { return pos_ == d_.size(); }
    uint64_t uint(int bytes) {
        if (pos_ + bytes > d_.size()) {
            ok_ = false;
            return 0;
        }
        uint64_t v = 0;
        for (int i = 0; i < bytes; ++i) v = (v << 8) | d_[pos_++];
        return v;
    }
    template <size_t N>
    void raw(std::array<uint8_t, N>& out) {
        if (pos_ + N > d_.size()) {
            ok_ = false;
            return;
        }
        std::copy_n(d_.begin() + pos_, N, out.begin());
        pos_ += N;
    }

private:
    std::span<const uint8_t> d_;
    size_t pos_ = 0;
    bool ok_ = true;
};

}  // namespace

Key balance_key(const PublicKey& vk) {
    Digest d = Hasher().put("acct").put(vk).finish();
    return be32(d.data()) & ~1u;
}

Bytes identity_cert_message(const Digest& tk, const PublicKey& vk) {
    Writer w;
    w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("identity"), 8)).raw(tk).raw(vk);
    return w.bytes();
}

Identity make_identity(const Digest& tk, const PublicKey& vk, const SecretKey& registrar_sk) {
    Identity id;
    id.tk = tk;
    id.vk = vk;
    id.cert = sign(registrar_sk, identity_cert_message(tk, vk));
    return id;
}

bool identity_cert_valid(const Identity& id, const PublicKey& registrar_vk) {
    return verify(registrar_vk, identity_cert_message(id.tk, id.vk), id.cert);
}

Bytes Transaction::signing_bytes() const {
    Writer w;
    w.u64(uuid).u8(uint8_t(kind)).raw(originator).u64(nonce).u32(debit_key).u32(credit_key).u32(amount);
    if (kind == TxKind::AddIdentity) w.raw(identity.tk).raw(identity.vk).raw(identity.cert);
    return w.bytes();
}

Bytes Transaction::wire() const {
    Writer w;
    w.raw(signing_bytes()).raw(sig);
    return w.bytes();
}

Transaction make_transfer(const KeyPair& from, const PublicKey& to, uint64_t nonce, uint32_t amount, uint64_t uuid) {
    Transaction tx;
    tx.uuid = uuid;
    tx.originator = from.vk;
    tx.nonce = nonce;
    tx.debit_key = balance_key(from.vk);
    tx.credit_key = balance_key(to);
    tx.amount = amount;
    tx.sig = sign(from.sk, tx.signing_bytes());
    return tx;
}

Transaction make_add_identity(const KeyPair& owner, const Identity& id, uint64_t uuid) {
    Transaction tx;
    tx.uuid = uuid;
    tx.kind = TxKind::AddIdentity;
    tx.originator = owner.vk;
    tx.identity = id;
    tx.sig = sign(owner.sk, tx.signing_bytes());
    return tx;
}

std::optional<Transaction> parse_transaction(std::span<const uint8_t> wire) {
    Reader r(wire);
    Transaction tx;
    tx.uuid = r.uint(8);
    uint64_t kind = r.uint(1);
    if (kind > 1) return std::nullopt;
    tx.kind = TxKind(kind);
    r.raw(tx.originator);
    tx.nonce = r.uint(8);
    tx.debit_key = Key(r.uint(4));
    tx.credit_key = Key(r.uint(4));
    tx.amount = uint32_t(r.uint(4));
    if (tx.kind == TxKind::AddIdentity) {
        r.raw(tx.identity.tk);
        r.raw(tx.identity.vk);
        r.raw(tx.identity.cert);
    }
    r.raw(tx.sig);
    if (!r.ok() || !r.done()) return std::nullopt;
    return tx;
}

const char* to_string(TxVerdict v) {
    switch (v) {
        case TxVerdict::Valid: return "Valid";
        case TxVerdict::BadSignature: return "BadSignature";
        case TxVerdict::BadNonce: return "BadNonce";
        case TxVerdict::Overspend: return "Overspend";
        case TxVerdict::Malformed: return "Malformed";
        case TxVerdict::DuplicateTEE: return "DuplicateTEE";
    }
    return "?";
}

TxVerdict validate_transaction(const Transaction& tx, Value debit_balance, Value stored_nonce) {
    if (!verify(tx.originator, tx.signing_bytes(), tx.sig)) return TxVerdict::BadSignature;
    if (tx.kind != TxKind::Transfer) return TxVerdict::Malformed;
    if (tx.debit_key != balance_key(tx.originator) || (tx.credit_key & 1u)) return TxVerdict::Malformed;
    if (tx.nonce != uint64_t(stored_nonce) + 1) return TxVerdict::BadNonce;
    if (tx.amount > debit_balance) return TxVerdict::Overspend;
    return TxVerdict::Valid;
}

IdentityRegistry::Result IdentityRegistry::check(const Identity& id) const {
    if (!identity_cert_valid(id, registrar_)) return Result::BadCert;
    if (tks_.count(id.tk) || by_vk_.count(id.vk)) return Result::DuplicateTEE;
    return Result::Accepted;
}

IdentityRegistry::Result IdentityRegistry::register_identity(const Identity& id, bool genesis) {
    Result r = check(id);
    if (r != Result::Accepted) return r;
    tks_.insert(id.tk);
    by_vk_[id.vk] = list_.size();
    list_.push_back(id);
    genesis_.push_back(genesis);
    return r;
}

std::vector<Identity> IdentityRegistry::eligible(uint64_t round) const {
    std::vector<Identity> out;
    for (size_t i = 0; i < list_.size(); ++i)
        if (committee_eligible(list_[i].added_at, genesis_[i], round)) out.push_back(list_[i]);
    return out;
}

bool IdentityRegistry::eligible_vk(const PublicKey& vk, uint64_t round) const {
    auto it = by_vk_.find(vk);
    if (it == by_vk_.end()) return false;
    return committee_eligible(list_[it->second].added_at, genesis_[it->second], round);
}

Digest SubBlock::hash() const {
    Hasher h;
    h.put("subblock").put(hash_prev_block).put(hash_prev_subblock).put_u32(uint32_t(new_identities.size()));
    for (const auto& id : new_identities) h.put(id.tk).put(id.vk).put(id.cert).put_u64(id.added_at);
    return h.finish();
}

Bytes Commitment::signing_bytes() const {
    Writer w;
    w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("commitment"), 10))
        .u32(politician)
        .u64(round)
        .raw(pool_digest);
    return w.bytes();
}

Digest Commitment::digest() const { return Hasher().put(signing_bytes()).put(sig).finish(); }

Digest Block::hash() const {
    Hasher h;
    h.put("block").put_u64(height).put(hash_prev_block).put(subblock.hash());
    h.put_u32(uint32_t(txs.size()));
    for (const auto& tx : txs) h.put(tx.digest());
    h.put_u32(uint32_t(id_list.size()));
    for (const auto& c : id_list) h.put(c.digest());
    return h.finish();
}

Bytes commit_message(const Digest& block_hash, const ShortDigest& gs_root, const Digest& subblock_hash,
                     uint64_t height) {
    Writer w;
    w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("commit"), 6))
        .raw(block_hash)
        .raw(gs_root)
        .raw(subblock_hash)
        .u64(height);
    return w.bytes();
}

CommitSignature sign_commit(const KeyPair& kp, const VrfOutput& membership, const Digest& block_hash,
                            const ShortDigest& gs_root, const Digest& subblock_hash, uint64_t height) {
    return {kp.vk, membership, sign(kp.sk, commit_message(block_hash, gs_root, subblock_hash, height))};
}

std::optional<Digest> LocalState::hash_at(uint64_t h) const {
    if (h == height) return hash_block;
    if (h > height) return std::nullopt;
    if (h == 0) return genesis_hash;
    const uint64_t back = height - h;
    if (back > recent.size()) return std::nullopt;
    return recent[recent.size() - back];
}

bool LocalState::same_chain_point(const LocalState& o) const {
    return height == o.height && hash_block == o.hash_block && gs_root == o.gs_root &&
           hash_subblock == o.hash_subblock && recent == o.recent && registry.all() == o.registry.all();
}

LocalState genesis_state(const Block& genesis, const ShortDigest& gs_root, const IdentityRegistry& registry) {
    LocalState ls;
    ls.height = 0;
    ls.hash_block = genesis.hash();
    ls.genesis_hash = ls.hash_block;
    ls.gs_root = gs_root;
    ls.hash_subblock = genesis.subblock.hash();
    ls.registry = registry;
    return ls;
}

std::string verify_jump(const LocalState& ls, const LedgerJump& j, const GetLedgerParams& p, VerifyCache* cache) {
    if (j.height <= ls.height) return "target not above local height";
    const uint64_t span = j.height - ls.height;
    if (span > p.max_jump) return "jump longer than allowed";
    if (j.subblocks.size() != span) return "sub-block count mismatch";
    Digest prev_sb = ls.hash_subblock;
    IdentityRegistry reg = ls.registry;
    for (size_t k = 0; k < span; ++k) {
        const SubBlock& sb = j.subblocks[k];
        if (sb.hash_prev_subblock != prev_sb) return "sub-block chain broken at height " + std::to_string(ls.height + k + 1);
        if (k == 0 && sb.hash_prev_block != ls.hash_block) return "sub-block does not extend local block";
        for (const auto& id : sb.new_identities) {
            if (id.added_at != ls.height + k + 1) return "identity height mismatch";
            if (reg.register_identity(id) != IdentityRegistry::Result::Accepted) return "invalid identity in sub-block";
        }
        prev_sb = sb.hash();
    }
    if (prev_sb != j.hash_subblock) return "sub-block chain does not reach signed hash";

    auto seed = ls.hash_at(seed_height(j.height));
    if (!seed) return "sortition seed unavailable";
    const Bytes msg = commit_message(j.hash_block, j.gs_root, j.hash_subblock, j.height);
    std::set<PublicKey> seen;
    unsigned valid = 0;
    for (const auto& s : j.sigs) {
        if (!seen.insert(s.signer).second) continue;
        if (!ls.registry.eligible_vk(s.signer, j.height)) continue;
        if (!verify_membership(s.signer, *seed, j.height, p.k_bits, s.membership, cache)) continue;
        bool ok = cache ? cache->verify(s.signer, msg, s.sig) : verify(s.signer, msg, s.sig);
        if (ok) ++valid;
    }
    if (valid < p.t_star) return "only " + std::to_string(valid) + " valid commit signatures";
    return {};
}

LocalState apply_jump(const LocalState& ls, const LedgerJump& j) {
    LocalState out = ls;
    out.recent.push_back(ls.hash_block);
    for (size_t k = 1; k < j.subblocks.size(); ++k) out.recent.push_back(j.subblocks[k].hash_prev_block);
    while (out.recent.size() > 9) out.recent.pop_front();
    for (const auto& sb : j.subblocks)
        for (const auto& id : sb.new_identities) out.registry.register_identity(id);
    out.height = j.height;
    out.hash_block = j.hash_block;
    out.gs_root = j.gs_root;
    out.hash_subblock = j.hash_subblock;
    return out;
}

size_t jump_wire_bytes(const LedgerJump& j) {
    size_t b = 32 + kShortDigestBytes + 32 + 8;
    for (const auto& sb : j.subblocks) b += 64 + sb.new_identities.size() * (32 + 32 + 64 + 8);
    b += j.sigs.size() * (32 + 32 + 64 + 64);
    return b;
}

GetLedgerResult get_ledger(const LocalState& ls, std::span<LedgerSource* const> sample, const GetLedgerParams& p,
                           VerifyCache* cache) {
    GetLedgerResult res;
    res.state = ls;
    std::vector<std::pair<uint64_t, size_t>> claims;
    for (size_t i = 0; i < sample.size(); ++i) {
        res.bytes_down += 8;
        if (auto h = sample[i]->latest_height()) claims.push_back({*h, i});
    }
    std::stable_sort(claims.begin(), claims.end(), [](auto& a, auto& b) { return a.first > b.first; });
    for (auto [claimed, pos] : claims) {
        if (claimed <= ls.height) break;
        const uint64_t target = std::min<uint64_t>(claimed, ls.height + p.max_jump);
        auto j = sample[pos]->jump(ls.height, target);
        if (!j) {
            res.diagnostic = "politician silent";
            continue;
        }
        res.bytes_down += jump_wire_bytes(*j);
        std::string err = j->height == target ? verify_jump(ls, *j, p, cache) : "served wrong height";
        if (!err.empty()) {
            res.blamed.push_back(pos);
            res.diagnostic = err;
            continue;
        }
        res.accepted = true;
        res.diagnostic.clear();
        res.state = apply_jump(ls, *j);
        return res;
    }
    if (claims.empty()) {
        res.diagnostic = "no politician answered";
    } else if (claims.front().first <= ls.height) {
        res.accepted = true;
    }
    return res;
}

std::vector<Key> keys_read(std::span<const Transaction> txs) {
    std::vector<Key> keys;
    for (const auto& tx : txs) {
        if (tx.kind != TxKind::Transfer) continue;
        keys.push_back(tx.debit_key);
        keys.push_back(tx.nonce_key());
        keys.push_back(tx.credit_key);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

Digest pool_digest(std::span<const Transaction> txs) {
    Hasher h;
    h.put("pool").put_u32(uint32_t(txs.size()));
    for (const auto& tx : txs) h.put(tx.digest());
    return h.finish();
}

std::vector<Transaction> ordered_transactions(std::span<const Commitment> id_list,
                                              const std::map<Digest, std::vector<Transaction>>& pools) {
    std::vector<Transaction> seq;
    std::set<uint64_t> uuids;
    for (const auto& c : id_list) {
        auto it = pools.find(c.pool_digest);
        if (it == pools.end()) throw MissingPool(c.politician);
        for (const auto& tx : it->second)
            if (uuids.insert(tx.uuid).second) seq.push_back(tx);
    }
    // Within each originator's slots, apply its transactions in nonce order.
    std::map<PublicKey, std::vector<size_t>> slots;
    for (size_t i = 0; i < seq.size(); ++i) slots[seq[i].originator].push_back(i);
    std::vector<Transaction> out(seq.size());
    for (auto& [vk, pos] : slots) {
        std::vector<size_t> by_nonce = pos;
        std::stable_sort(by_nonce.begin(), by_nonce.end(),
                         [&](size_t a, size_t b) { return seq[a].nonce < seq[b].nonce; });
        for (size_t k = 0; k < pos.size(); ++k) out[pos[k]] = seq[by_nonce[k]];
    }
    return out;
}

BuiltBlock build_block(uint64_t height, const Digest& prev_hash, const Digest& prev_subblock,
                       std::span<const Commitment> id_list,
                       const std::map<Digest, std::vector<Transaction>>& pools, const ValueMap& values,
                       const IdentityRegistry& registry) {
    BuiltBlock out;
    out.block.height = height;
    out.block.hash_prev_block = prev_hash;
    out.block.id_list.assign(id_list.begin(), id_list.end());
    out.block.subblock.hash_prev_block = prev_hash;
    out.block.subblock.hash_prev_subblock = prev_subblock;

    std::map<Key, Value> work;
    auto get = [&](Key k) -> Value {
        if (auto it = work.find(k); it != work.end()) return it->second;
        auto it = values.find(k);
        return it == values.end() ? 0 : it->second;
    };
    std::set<Digest> new_tks;
    std::set<PublicKey> new_vks;
    for (auto& tx : ordered_transactions(id_list, pools)) {
        if (tx.kind == TxKind::AddIdentity) {
            bool ok = verify(tx.originator, tx.signing_bytes(), tx.sig) && tx.identity.vk == tx.originator &&
                      registry.check(tx.identity) == IdentityRegistry::Result::Accepted &&
                      !new_tks.count(tx.identity.tk) && !new_vks.count(tx.identity.vk);
            if (!ok) {
                out.rejected.push_back(tx);
                continue;
            }
            new_tks.insert(tx.identity.tk);
            new_vks.insert(tx.identity.vk);
            Identity id = tx.identity;
            id.added_at = height;
            out.new_identities.push_back(id);
            out.block.txs.push_back(tx);
            continue;
        }
        TxVerdict v = validate_transaction(tx, get(tx.debit_key), get(tx.nonce_key()));
        const uint64_t credited = uint64_t(get(tx.credit_key)) + tx.amount;
        if (v == TxVerdict::Valid && tx.credit_key != tx.debit_key &&
            credited > std::numeric_limits<Value>::max())
            v = TxVerdict::Malformed;
        if (v != TxVerdict::Valid) {
            out.rejected.push_back(tx);
            continue;
        }
        work[tx.nonce_key()] = Value(tx.nonce);
        work[tx.debit_key] = get(tx.debit_key) - tx.amount;
        work[tx.credit_key] = get(tx.credit_key) + tx.amount;
        out.block.txs.push_back(tx);
    }
    for (auto [k, v] : work) {
        auto it = values.find(k);
        Value old = it == values.end() ? 0 : it->second;
        if (v != old) out.updates.push_back({k, v});
    }
    out.block.subblock.new_identities = out.new_identities;
    return out;
}

}  // namespace blockene
