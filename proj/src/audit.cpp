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

#include "blockene/audit.hpp"

#include <limits>
#include <map>
#include <set>

#include "blockene/sortition.hpp"

namespace blockene {

namespace {

AuditReport failure(uint64_t height, std::string check, std::string diagnostic, const AuditReport& so_far) {
    AuditReport r = so_far;
    r.ok = false;
    r.height = height;
    r.check = std::move(check);
    r.diagnostic = std::move(diagnostic);
    return r;
}

}  // namespace

AuditReport audit_chain(const ChainDump& dump) {
    AuditReport rep;
    const GenesisInfo& g = dump.genesis;
    IdentityRegistry registry(g.registrar);
    for (const auto& id : g.identities)
        if (registry.register_identity(id, true) != IdentityRegistry::Result::Accepted)
            return failure(0, "genesis-identities", "genesis identity rejected by the registrar", rep);
    if (g.block.subblock.new_identities != g.identities)
        return failure(0, "genesis-identities", "genesis sub-block does not list the genesis identities", rep);
    SparseMerkleTree tree(g.merkle);
    for (const auto& kv : g.state)
        if (tree.put(kv.key, kv.value) != MerkleStatus::Ok)
            return failure(0, "genesis-state", "genesis state overflows a leaf", rep);

    std::vector<Digest> hashes{g.block.hash()};
    Digest prev_subblock = g.block.subblock.hash();
    VerifyCache cache;

    for (size_t i = 0; i < dump.records.size(); ++i) {
        const ChainRecord& rec = dump.records[i];
        const Block& b = rec.block;
        const uint64_t h = i + 1;

        // Links.
        if (b.height != h) return failure(h, "links", "block height " + std::to_string(b.height), rep);
        if (b.hash_prev_block != hashes.back()) return failure(h, "links", "previous block hash mismatch", rep);
        if (b.subblock.hash_prev_block != hashes.back() || b.subblock.hash_prev_subblock != prev_subblock)
            return failure(h, "links", "sub-block chaining mismatch", rep);
        if (b.id_list.empty() && (!b.txs.empty() || !b.subblock.new_identities.empty()))
            return failure(h, "links", "empty block carries transactions", rep);
        for (const auto& c : b.id_list)
            if (c.round != h) return failure(h, "links", "commitment from another round", rep);

        // Replay of values and root.
        std::map<Key, Value> work;
        auto get = [&](Key k) -> Value {
            if (auto it = work.find(k); it != work.end()) return it->second;
            return tree.get(k).value_or(0);
        };
        std::vector<Identity> added;
        std::set<Digest> tks;
        std::set<PublicKey> vks;
        std::set<uint64_t> uuids;
        for (const auto& tx : b.txs) {
            if (!uuids.insert(tx.uuid).second) return failure(h, "replay", "duplicate transaction uuid", rep);
            if (tx.kind == TxKind::AddIdentity) {
                if (tx.identity.vk != tx.originator || registry.check(tx.identity) != IdentityRegistry::Result::Accepted ||
                    !tks.insert(tx.identity.tk).second || !vks.insert(tx.identity.vk).second)
                    return failure(h, "replay", "identity transaction not admissible", rep);
                Identity id = tx.identity;
                id.added_at = h;
                added.push_back(id);
                continue;
            }
            if (tx.kind != TxKind::Transfer || tx.debit_key != balance_key(tx.originator) || (tx.credit_key & 1u))
                return failure(h, "replay", "malformed transfer uuid " + std::to_string(tx.uuid), rep);
            const Value bal = get(tx.debit_key);
            if (tx.nonce != uint64_t(get(tx.nonce_key())) + 1)
                return failure(h, "replay", "nonce out of sequence, uuid " + std::to_string(tx.uuid), rep);
            if (tx.amount > bal) return failure(h, "replay", "overspend, uuid " + std::to_string(tx.uuid), rep);
            if (tx.credit_key != tx.debit_key &&
                uint64_t(get(tx.credit_key)) + tx.amount > std::numeric_limits<Value>::max())
                return failure(h, "replay", "credit overflow, uuid " + std::to_string(tx.uuid), rep);
            work[tx.nonce_key()] = Value(tx.nonce);
            work[tx.debit_key] = bal - tx.amount;
            work[tx.credit_key] = get(tx.credit_key) + tx.amount;
        }
        if (added != b.subblock.new_identities)
            return failure(h, "replay", "sub-block identities differ from the replayed ones", rep);
        for (auto [k, v] : work)
            if (v != tree.get(k).value_or(0) && tree.put(k, v) != MerkleStatus::Ok)
                return failure(h, "replay", "update overflows a leaf", rep);
        if (tree.root() != rec.gs_root)
            return failure(h, "root", "replayed state root " + to_hex(tree.root()) + " != recorded " + to_hex(rec.gs_root),
                           rep);

        // Transaction signatures.
        for (const auto& tx : b.txs)
            if (!cache.verify(tx.originator, tx.signing_bytes(), tx.sig))
                return failure(h, "tx-signature", "bad signature, uuid " + std::to_string(tx.uuid), rep);
        for (const auto& c : b.id_list)
            if (c.sig == Signature{}) return failure(h, "links", "unsigned commitment", rep);

        // Block hash and commit signatures.
        const Digest bh = b.hash();
        const Digest sbh = b.subblock.hash();
        const Bytes msg = commit_message(bh, rec.gs_root, sbh, h);
        const Digest& seed = hashes[seed_height(h)];
        std::set<PublicKey> signers;
        unsigned valid = 0;
        for (const auto& s : rec.sigs) {
            if (!signers.insert(s.signer).second)
                return failure(h, "commit-signatures", "duplicate signer", rep);
            if (!registry.eligible_vk(s.signer, h))
                return failure(h, "commit-signatures", "signer not committee-eligible", rep);
            if (!verify_membership(s.signer, seed, h, g.sortition_bits, s.membership, &cache))
                return failure(h, "commit-signatures", "bad committee membership proof", rep);
            if (!cache.verify(s.signer, msg, s.sig))
                return failure(h, "commit-signatures", "signature does not cover (block, root, sub-block)", rep);
            ++valid;
        }
        if (valid < g.t_star)
            return failure(h, "commit-signatures",
                           std::to_string(valid) + " signatures below the threshold " + std::to_string(g.t_star), rep);

        for (const auto& id : b.subblock.new_identities) registry.register_identity(id);
        hashes.push_back(bh);
        prev_subblock = sbh;
        ++rep.blocks;
        rep.txs += b.txs.size();
    }
    return rep;
}

std::string describe(const AuditReport& r) {
    if (r.ok) return "audit passed: " + std::to_string(r.blocks) + " blocks, " + std::to_string(r.txs) + " transactions";
    return "audit failed at height " + std::to_string(r.height) + " [" + r.check + "]: " + r.diagnostic;
}

}  // namespace blockene
