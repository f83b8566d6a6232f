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

#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "blockene/crypto.hpp"

namespace blockene {

using Key = uint32_t;
using Value = uint32_t;

struct KeyValue {
    Key key = 0;
    Value value = 0;
    bool operator==(const KeyValue&) const = default;
};

struct MerkleConfig {
    unsigned depth = 30;  // d
    unsigned theta = 10;  // max colocated pairs per leaf
};

enum class MerkleStatus { Ok, LeafFull };

class LeafFullError : public std::runtime_error {
public:
    explicit LeafFullError(Key k) : std::runtime_error("leaf full"), key(k) {}
    Key key;
};

uint32_t leaf_index(Key key, unsigned depth);
ShortDigest leaf_digest(std::span<const KeyValue> sorted_pairs);
ShortDigest node_digest(const ShortDigest& left, const ShortDigest& right);
// Digest of an empty subtree rooted at `level` in a tree of the given depth
// (level 0 is the root, level depth is a leaf).
const ShortDigest& null_digest(unsigned depth, unsigned level);

struct ChallengePath {
    Key key = 0;
    std::optional<Value> value;
    uint32_t leaf = 0;
    std::vector<KeyValue> colocated;      // sorted by key
    std::vector<ShortDigest> siblings;    // leaf level first, depth entries
};

// Wire size of one challenge path: d sibling digests plus a colocated set
// padded to theta slots of (key, value).
inline size_t path_wire_bytes(const MerkleConfig& c) {
    return size_t(c.depth) * kShortDigestBytes + size_t(c.theta) * 8;
}

bool verify_path(const ShortDigest& root, const ChallengePath& path, unsigned depth, HashCounter* hc = nullptr);

class SparseMerkleTree {
public:
    struct Entry {
        uint32_t leaf;
        Key key;
        Value value;
    };
    struct Node {
        uint32_t index;
        ShortDigest digest;
    };

    explicit SparseMerkleTree(MerkleConfig cfg = {});
    // Bulk construction; throws LeafFullError.
    static SparseMerkleTree from_pairs(MerkleConfig cfg, std::vector<KeyValue> pairs);

    MerkleStatus put(Key key, Value value);
    std::optional<Value> get(Key key) const;
    ShortDigest root() const { return node(0, 0); }
    ShortDigest node(unsigned level, uint32_t index) const;
    std::vector<KeyValue> leaf_pairs(uint32_t leaf) const;
    ChallengePath prove(Key key) const;

    const MerkleConfig& config() const { return cfg_; }
    size_t size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }
    const std::vector<Node>& level_nodes(unsigned level) const { return levels_[level]; }

private:
    friend class DeltaMerkleTree;
    void rebuild_levels();
    void set_node(unsigned level, uint32_t index, const ShortDigest& d);

    MerkleConfig cfg_;
    std::vector<Entry> entries_;             // sorted by (leaf, key)
    std::vector<std::vector<Node>> levels_;  // per level, sorted by index
};

using TreePtr = std::shared_ptr<const SparseMerkleTree>;

// Copy-on-write overlay holding only touched leaves and the interior nodes
// above them.
class DeltaMerkleTree {
public:
    DeltaMerkleTree() = default;
    explicit DeltaMerkleTree(TreePtr base) : base_(std::move(base)) {}

    // Applies updates; keys that would overflow a leaf are skipped and
    // returned. Must be called once per delta.
    std::vector<Key> apply(std::span<const KeyValue> updates);

    const MerkleConfig& config() const { return base_->config(); }
    ShortDigest root() const { return node(0, 0); }
    ShortDigest node(unsigned level, uint32_t index) const;
    std::vector<KeyValue> leaf_pairs(uint32_t leaf) const;
    std::optional<Value> get(Key key) const;
    ChallengePath prove(Key key) const;
    const TreePtr& base() const { return base_; }
    const std::vector<uint32_t>& touched_leaves() const { return touched_; }
    size_t overlay_nodes() const;
    SparseMerkleTree materialize() const;

private:
    struct LeafOverlay {
        uint32_t leaf;
        std::vector<KeyValue> pairs;
    };
    TreePtr base_;
    std::vector<LeafOverlay> leaves_;                          // sorted by leaf
    std::vector<std::vector<SparseMerkleTree::Node>> levels_;  // overlay nodes
    std::vector<uint32_t> touched_;
};

std::pair<DeltaMerkleTree, ShortDigest> delta_apply(TreePtr base, std::span<const KeyValue> updates);

// 2^a digests at level a, left to right.
std::vector<ShortDigest> frontier_of(const SparseMerkleTree& t, unsigned a);
std::vector<ShortDigest> frontier_of(const DeltaMerkleTree& t, unsigned a);
ShortDigest root_from_frontier(std::span<const ShortDigest> slice, HashCounter* hc = nullptr);

// Proof that a frontier node of T' was derived from T by the changed keys
// beneath it.
struct LeafUpdateProof {
    uint32_t leaf = 0;
    std::vector<KeyValue> old_pairs;
    std::vector<ShortDigest> old_siblings;  // d entries, in T
    std::vector<KeyValue> new_pairs;
    std::vector<ShortDigest> new_siblings;  // d - a entries, in T', up to f
};

struct SubtreeBundle {
    unsigned a = 0;
    uint32_t frontier_index = 0;
    std::vector<LeafUpdateProof> leaves;      // one per changed leaf under f
    std::vector<ShortDigest> frontier_path;   // a siblings of f in T (unchanged f only)
};

size_t bundle_wire_bytes(const SubtreeBundle& b, const MerkleConfig& c);

// `changed_leaves` lists the leaf indices under f touched by the update.
SubtreeBundle subtree_update_proof(const SparseMerkleTree& old_tree, const DeltaMerkleTree& new_tree,
                                   unsigned a, uint32_t f, std::span<const uint32_t> changed_leaves);

// `changed` holds the verifier's new values for every updated key whose
// leaf falls under f, sorted by key.
bool verify_subtree_bundle(const ShortDigest& old_root, const MerkleConfig& cfg, unsigned a, uint32_t f,
                           const ShortDigest& claimed, std::span<const KeyValue> changed,
                           const SubtreeBundle& bundle, HashCounter* hc = nullptr);

}  // namespace blockene
