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

#include "blockene/merkle.hpp"

#include <algorithm>
#include <unordered_map>

namespace blockene {

namespace {

constexpr unsigned kMaxDepth = 32;

uint64_t pos_key(unsigned level, uint32_t index) { return (uint64_t(level) << 32) | index; }

template <class Nodes>
const SparseMerkleTree::Node* find_node(const Nodes& v, uint32_t index) {
    auto it = std::lower_bound(v.begin(), v.end(), index,
                               [](const SparseMerkleTree::Node& n, uint32_t i) { return n.index < i; });
    if (it != v.end() && it->index == index) return &*it;
    return nullptr;
}

ShortDigest combine(uint32_t index, const ShortDigest& cur, const ShortDigest& sib) {
    return (index & 1) ? node_digest(sib, cur) : node_digest(cur, sib);
}

bool strictly_sorted(std::span<const KeyValue> pairs) {
    for (size_t i = 1; i < pairs.size(); ++i)
        if (pairs[i - 1].key >= pairs[i].key) return false;
    return true;
}

// Inserts or replaces kv in a key-sorted vector.
void upsert(std::vector<KeyValue>& pairs, const KeyValue& kv) {
    auto it = std::lower_bound(pairs.begin(), pairs.end(), kv.key,
                               [](const KeyValue& p, Key k) { return p.key < k; });
    if (it != pairs.end() && it->key == kv.key)
        it->value = kv.value;
    else
        pairs.insert(it, kv);
}

}  // namespace

uint32_t leaf_index(Key key, unsigned depth) {
    uint8_t b[4] = {uint8_t(key >> 24), uint8_t(key >> 16), uint8_t(key >> 8), uint8_t(key)};
    Digest h = hash(std::span<const uint8_t>(b, 4));
    uint32_t low = uint32_t(h[28]) << 24 | uint32_t(h[29]) << 16 | uint32_t(h[30]) << 8 | h[31];
    if (depth >= 32) return low;
    return low & ((uint32_t(1) << depth) - 1);
}

ShortDigest leaf_digest(std::span<const KeyValue> sorted_pairs) {
    Hasher h;
    h.put_u8(0x00);
    for (const auto& kv : sorted_pairs) h.put_u32(kv.key).put_u32(kv.value);
    return truncate(h.finish());
}

ShortDigest node_digest(const ShortDigest& left, const ShortDigest& right) {
    uint8_t buf[1 + 2 * kShortDigestBytes];
    buf[0] = 0x01;
    std::memcpy(buf + 1, left.data(), kShortDigestBytes);
    std::memcpy(buf + 1 + kShortDigestBytes, right.data(), kShortDigestBytes);
    return truncate(hash(std::span<const uint8_t>(buf, sizeof(buf))));
}

const ShortDigest& null_digest(unsigned depth, unsigned level) {
    static const std::vector<std::vector<ShortDigest>> table = [] {
        std::vector<std::vector<ShortDigest>> t(kMaxDepth + 1);
        ShortDigest empty_leaf = leaf_digest({});
        for (unsigned d = 0; d <= kMaxDepth; ++d) {
            t[d].resize(d + 1);
            t[d][d] = empty_leaf;
            for (unsigned l = d; l > 0; --l) t[d][l - 1] = node_digest(t[d][l], t[d][l]);
        }
        return t;
    }();
    if (depth > kMaxDepth || level > depth) throw std::out_of_range("null_digest level");
    return table[depth][level];
}

bool verify_path(const ShortDigest& root, const ChallengePath& path, unsigned depth, HashCounter* hc) {
    if (path.siblings.size() != depth) return false;
    if (!strictly_sorted(path.colocated)) return false;
    if (hc) ++hc->index;
    if (leaf_index(path.key, depth) != path.leaf) return false;
    auto it = std::find_if(path.colocated.begin(), path.colocated.end(),
                           [&](const KeyValue& kv) { return kv.key == path.key; });
    if (path.value) {
        if (it == path.colocated.end() || it->value != *path.value) return false;
    } else if (it != path.colocated.end()) {
        return false;
    }
    ShortDigest cur = leaf_digest(path.colocated);
    uint32_t idx = path.leaf;
    for (unsigned l = depth; l > 0; --l) {
        cur = combine(idx, cur, path.siblings[depth - l]);
        idx >>= 1;
    }
    if (hc) hc->merkle += depth + 1;
    return cur == root;
}

// ---------------------------------------------------------------------------

SparseMerkleTree::SparseMerkleTree(MerkleConfig cfg) : cfg_(cfg), levels_(cfg.depth + 1) {
    if (cfg.depth > kMaxDepth || cfg.theta == 0) throw std::invalid_argument("bad merkle config");
}

SparseMerkleTree SparseMerkleTree::from_pairs(MerkleConfig cfg, std::vector<KeyValue> pairs) {
    SparseMerkleTree t(cfg);
    std::stable_sort(pairs.begin(), pairs.end(), [](const KeyValue& x, const KeyValue& y) { return x.key < y.key; });
    t.entries_.reserve(pairs.size());
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (i + 1 < pairs.size() && pairs[i + 1].key == pairs[i].key) continue;  // last write wins
        t.entries_.push_back({leaf_index(pairs[i].key, cfg.depth), pairs[i].key, pairs[i].value});
    }
    std::sort(t.entries_.begin(), t.entries_.end(), [](const Entry& x, const Entry& y) {
        return x.leaf != y.leaf ? x.leaf < y.leaf : x.key < y.key;
    });
    size_t run = 0;
    for (size_t i = 0; i < t.entries_.size(); ++i) {
        run = (i > 0 && t.entries_[i - 1].leaf == t.entries_[i].leaf) ? run + 1 : 1;
        if (run > cfg.theta) throw LeafFullError(t.entries_[i].key);
    }
    t.rebuild_levels();
    return t;
}

void SparseMerkleTree::rebuild_levels() {
    const unsigned d = cfg_.depth;
    levels_.assign(d + 1, {});
    std::vector<KeyValue> buf;
    for (size_t i = 0; i < entries_.size();) {
        size_t j = i;
        buf.clear();
        while (j < entries_.size() && entries_[j].leaf == entries_[i].leaf) {
            buf.push_back({entries_[j].key, entries_[j].value});
            ++j;
        }
        levels_[d].push_back({entries_[i].leaf, leaf_digest(buf)});
        i = j;
    }
    for (unsigned l = d; l > 0; --l) {
        const auto& child = levels_[l];
        auto& parent = levels_[l - 1];
        parent.reserve(child.size());
        for (size_t i = 0; i < child.size();) {
            uint32_t p = child[i].index >> 1;
            ShortDigest left = null_digest(d, l), right = null_digest(d, l);
            while (i < child.size() && (child[i].index >> 1) == p) {
                (child[i].index & 1 ? right : left) = child[i].digest;
                ++i;
            }
            parent.push_back({p, node_digest(left, right)});
        }
    }
}

void SparseMerkleTree::set_node(unsigned level, uint32_t index, const ShortDigest& d) {
    auto& v = levels_[level];
    auto it = std::lower_bound(v.begin(), v.end(), index, [](const Node& n, uint32_t i) { return n.index < i; });
    if (it != v.end() && it->index == index)
        it->digest = d;
    else
        v.insert(it, Node{index, d});
}

ShortDigest SparseMerkleTree::node(unsigned level, uint32_t index) const {
    if (const Node* n = find_node(levels_[level], index)) return n->digest;
    return null_digest(cfg_.depth, level);
}

std::vector<KeyValue> SparseMerkleTree::leaf_pairs(uint32_t leaf) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), leaf,
                               [](const Entry& e, uint32_t l) { return e.leaf < l; });
    std::vector<KeyValue> out;
    for (auto it = lo; it != entries_.end() && it->leaf == leaf; ++it) out.push_back({it->key, it->value});
    return out;
}

MerkleStatus SparseMerkleTree::put(Key key, Value value) {
    const uint32_t leaf = leaf_index(key, cfg_.depth);
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), leaf,
                               [](const Entry& e, uint32_t l) { return e.leaf < l; });
    auto hi = lo;
    while (hi != entries_.end() && hi->leaf == leaf) ++hi;
    auto pos = std::lower_bound(lo, hi, key, [](const Entry& e, Key k) { return e.key < k; });
    if (pos != hi && pos->key == key) {
        pos->value = value;
    } else {
        if (size_t(hi - lo) >= cfg_.theta) return MerkleStatus::LeafFull;
        entries_.insert(pos, Entry{leaf, key, value});
    }
    ShortDigest cur = leaf_digest(leaf_pairs(leaf));
    uint32_t idx = leaf;
    set_node(cfg_.depth, idx, cur);
    for (unsigned l = cfg_.depth; l > 0; --l) {
        cur = combine(idx, cur, node(l, idx ^ 1));
        idx >>= 1;
        set_node(l - 1, idx, cur);
    }
    return MerkleStatus::Ok;
}

std::optional<Value> SparseMerkleTree::get(Key key) const {
    for (const auto& kv : leaf_pairs(leaf_index(key, cfg_.depth)))
        if (kv.key == key) return kv.value;
    return std::nullopt;
}

namespace {

template <class Tree>
ChallengePath prove_in(const Tree& t, Key key) {
    const unsigned d = t.config().depth;
    ChallengePath p;
    p.key = key;
    p.leaf = leaf_index(key, d);
    p.colocated = t.leaf_pairs(p.leaf);
    for (const auto& kv : p.colocated)
        if (kv.key == key) p.value = kv.value;
    uint32_t idx = p.leaf;
    p.siblings.reserve(d);
    for (unsigned l = d; l > 0; --l) {
        p.siblings.push_back(t.node(l, idx ^ 1));
        idx >>= 1;
    }
    return p;
}

}  // namespace

ChallengePath SparseMerkleTree::prove(Key key) const { return prove_in(*this, key); }

// ---------------------------------------------------------------------------

std::vector<Key> DeltaMerkleTree::apply(std::span<const KeyValue> updates) {
    const MerkleConfig& cfg = base_->config();
    const unsigned d = cfg.depth;
    struct U {
        uint32_t leaf;
        size_t order;
        KeyValue kv;
    };
    std::vector<U> us;
    us.reserve(updates.size());
    for (size_t i = 0; i < updates.size(); ++i) us.push_back({leaf_index(updates[i].key, d), i, updates[i]});
    std::sort(us.begin(), us.end(), [](const U& x, const U& y) {
        if (x.leaf != y.leaf) return x.leaf < y.leaf;
        if (x.kv.key != y.kv.key) return x.kv.key < y.kv.key;
        return x.order < y.order;
    });

    std::vector<Key> rejected;
    leaves_.clear();
    touched_.clear();
    levels_.assign(d + 1, {});
    for (size_t i = 0; i < us.size();) {
        const uint32_t leaf = us[i].leaf;
        std::vector<KeyValue> pairs = base_->leaf_pairs(leaf);
        bool any = false;
        for (; i < us.size() && us[i].leaf == leaf; ++i) {
            if (i + 1 < us.size() && us[i + 1].leaf == leaf && us[i + 1].kv.key == us[i].kv.key) continue;
            const KeyValue& kv = us[i].kv;
            bool exists = std::any_of(pairs.begin(), pairs.end(), [&](const KeyValue& p) { return p.key == kv.key; });
            if (!exists && pairs.size() >= cfg.theta) {
                rejected.push_back(kv.key);
                continue;
            }
            upsert(pairs, kv);
            any = true;
        }
        if (!any) continue;
        levels_[d].push_back({leaf, leaf_digest(pairs)});
        leaves_.push_back({leaf, std::move(pairs)});
        touched_.push_back(leaf);
    }
    for (unsigned l = d; l > 0; --l) {
        const auto& child = levels_[l];
        auto& parent = levels_[l - 1];
        for (size_t i = 0; i < child.size();) {
            uint32_t p = child[i].index >> 1;
            while (i < child.size() && (child[i].index >> 1) == p) ++i;
            parent.push_back({p, node_digest(node(l, 2 * p), node(l, 2 * p + 1))});
        }
    }
    return rejected;
}

ShortDigest DeltaMerkleTree::node(unsigned level, uint32_t index) const {
    if (level < levels_.size())
        if (const auto* n = find_node(levels_[level], index)) return n->digest;
    return base_->node(level, index);
}

std::vector<KeyValue> DeltaMerkleTree::leaf_pairs(uint32_t leaf) const {
    auto it = std::lower_bound(leaves_.begin(), leaves_.end(), leaf,
                               [](const LeafOverlay& o, uint32_t l) { return o.leaf < l; });
    if (it != leaves_.end() && it->leaf == leaf) return it->pairs;
    return base_->leaf_pairs(leaf);
}

std::optional<Value> DeltaMerkleTree::get(Key key) const {
    for (const auto& kv : leaf_pairs(leaf_index(key, config().depth)))
        if (kv.key == key) return kv.value;
    return std::nullopt;
}

ChallengePath DeltaMerkleTree::prove(Key key) const { return prove_in(*this, key); }

size_t DeltaMerkleTree::overlay_nodes() const {
    size_t n = 0;
    for (const auto& v : levels_) n += v.size();
    return n;
}

SparseMerkleTree DeltaMerkleTree::materialize() const {
    SparseMerkleTree out(base_->config());
    const auto& be = base_->entries();
    out.entries_.reserve(be.size() + leaves_.size());
    size_t li = 0;
    for (size_t i = 0; i < be.size();) {
        while (li < leaves_.size() && leaves_[li].leaf < be[i].leaf) {
            for (const auto& kv : leaves_[li].pairs) out.entries_.push_back({leaves_[li].leaf, kv.key, kv.value});
            ++li;
        }
        if (li < leaves_.size() && leaves_[li].leaf == be[i].leaf) {
            uint32_t leaf = be[i].leaf;
            while (i < be.size() && be[i].leaf == leaf) ++i;
            continue;  // overlay copy is emitted by the loop above on the next pass
        }
        out.entries_.push_back(be[i]);
        ++i;
    }
    for (; li < leaves_.size(); ++li)
        for (const auto& kv : leaves_[li].pairs) out.entries_.push_back({leaves_[li].leaf, kv.key, kv.value});

    const unsigned d = base_->config().depth;
    out.levels_.assign(d + 1, {});
    for (unsigned l = 0; l <= d; ++l) {
        const auto& b = base_->level_nodes(l);
        const auto& o = levels_[l];
        auto& dst = out.levels_[l];
        dst.reserve(b.size() + o.size());
        size_t i = 0, j = 0;
        while (i < b.size() || j < o.size()) {
            if (j == o.size() || (i < b.size() && b[i].index < o[j].index)) {
                dst.push_back(b[i++]);
            } else {
                if (i < b.size() && b[i].index == o[j].index) ++i;
                dst.push_back(o[j++]);
            }
        }
    }
    return out;
}

std::pair<DeltaMerkleTree, ShortDigest> delta_apply(TreePtr base, std::span<const KeyValue> updates) {
    DeltaMerkleTree delta(std::move(base));
    auto rejected = delta.apply(updates);
    if (!rejected.empty()) throw LeafFullError(rejected.front());
    ShortDigest root = delta.root();
    return {std::move(delta), root};
}

// ---------------------------------------------------------------------------

std::vector<ShortDigest> frontier_of(const SparseMerkleTree& t, unsigned a) {
    if (a > t.config().depth) throw std::out_of_range("frontier level");
    std::vector<ShortDigest> out(size_t(1) << a, null_digest(t.config().depth, a));
    for (const auto& n : t.level_nodes(a)) out[n.index] = n.digest;
    return out;
}

std::vector<ShortDigest> frontier_of(const DeltaMerkleTree& t, unsigned a) {
    std::vector<ShortDigest> out = frontier_of(*t.base(), a);
    for (uint32_t leaf : t.touched_leaves()) {
        uint32_t f = leaf >> (t.config().depth - a);
        out[f] = t.node(a, f);
    }
    return out;
}

ShortDigest root_from_frontier(std::span<const ShortDigest> slice, HashCounter* hc) {
    if (slice.empty() || (slice.size() & (slice.size() - 1)) != 0) throw std::invalid_argument("frontier size");
    std::vector<ShortDigest> cur(slice.begin(), slice.end());
    while (cur.size() > 1) {
        std::vector<ShortDigest> next(cur.size() / 2);
        for (size_t i = 0; i < next.size(); ++i) next[i] = node_digest(cur[2 * i], cur[2 * i + 1]);
        if (hc) hc->merkle += next.size();
        cur.swap(next);
    }
    return cur[0];
}

size_t bundle_wire_bytes(const SubtreeBundle& b, const MerkleConfig& c) {
    const size_t slot = size_t(c.theta) * 8;
    size_t n = b.frontier_path.size() * kShortDigestBytes;
    for (const auto& p : b.leaves)
        n += 2 * slot + (p.old_siblings.size() + p.new_siblings.size()) * kShortDigestBytes;
    return n;
}

SubtreeBundle subtree_update_proof(const SparseMerkleTree& old_tree, const DeltaMerkleTree& new_tree, unsigned a,
                                   uint32_t f, std::span<const uint32_t> changed_leaves) {
    const unsigned d = old_tree.config().depth;
    SubtreeBundle b;
    b.a = a;
    b.frontier_index = f;
    if (changed_leaves.empty()) {
        uint32_t idx = f;
        for (unsigned l = a; l > 0; --l) {
            b.frontier_path.push_back(old_tree.node(l, idx ^ 1));
            idx >>= 1;
        }
        return b;
    }
    for (uint32_t leaf : changed_leaves) {
        LeafUpdateProof p;
        p.leaf = leaf;
        p.old_pairs = old_tree.leaf_pairs(leaf);
        p.new_pairs = new_tree.leaf_pairs(leaf);
        uint32_t idx = leaf;
        for (unsigned l = d; l > 0; --l) {
            p.old_siblings.push_back(old_tree.node(l, idx ^ 1));
            if (l > a) p.new_siblings.push_back(new_tree.node(l, idx ^ 1));
            idx >>= 1;
        }
        b.leaves.push_back(std::move(p));
    }
    return b;
}

bool verify_subtree_bundle(const ShortDigest& old_root, const MerkleConfig& cfg, unsigned a, uint32_t f,
                           const ShortDigest& claimed, std::span<const KeyValue> changed,
                           const SubtreeBundle& bundle, HashCounter* hc) {
    const unsigned d = cfg.depth;
    const unsigned shift = d - a;
    if (bundle.a != a || bundle.frontier_index != f) return false;
    uint64_t hashes = 0;
    struct Charge {
        HashCounter* hc;
        const uint64_t& n;
        ~Charge() {
            if (hc) hc->merkle += n;
        }
    } charge{hc, hashes};

    if (changed.empty()) {
        if (!bundle.leaves.empty() || bundle.frontier_path.size() != a) return false;
        ShortDigest cur = claimed;
        uint32_t idx = f;
        for (unsigned l = a; l > 0; --l) {
            cur = combine(idx, cur, bundle.frontier_path[a - l]);
            idx >>= 1;
        }
        if (hc) hc->merkle += a;
        return cur == old_root;
    }

    struct Item {
        uint32_t leaf;
        KeyValue kv;
    };
    std::vector<Item> items;
    items.reserve(changed.size());
    for (const auto& kv : changed) {
        uint32_t leaf = leaf_index(kv.key, d);
        if ((leaf >> shift) != f) return false;
        items.push_back({leaf, kv});
    }
    if (hc) hc->index += changed.size();
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        return x.leaf != y.leaf ? x.leaf < y.leaf : x.kv.key < y.kv.key;
    });
    for (size_t i = 1; i < items.size(); ++i)
        if (items[i].kv.key == items[i - 1].kv.key) return false;

    std::unordered_map<uint64_t, ShortDigest> known;  // authenticated T digests
    std::unordered_map<uint64_t, ShortDigest> fresh;  // recomputed T' digests
    size_t pi = 0;
    for (size_t i = 0; i < items.size(); ++pi) {
        if (pi >= bundle.leaves.size()) return false;
        const LeafUpdateProof& p = bundle.leaves[pi];
        if (p.leaf != items[i].leaf) return false;
        if (p.old_siblings.size() != d || p.new_siblings.size() != shift) return false;
        if (!strictly_sorted(p.old_pairs) || p.old_pairs.size() > cfg.theta) return false;
        std::vector<KeyValue> expect = p.old_pairs;
        for (; i < items.size() && items[i].leaf == p.leaf; ++i) upsert(expect, items[i].kv);
        if (expect.size() > cfg.theta || expect != p.new_pairs) return false;

        // Old path, stopping at the first position already authenticated.
        ShortDigest cur = leaf_digest(p.old_pairs);
        ++hashes;
        uint32_t idx = p.leaf;
        for (unsigned l = d;; --l) {
            auto it = known.find(pos_key(l, idx));
            if (it != known.end()) {
                if (it->second != cur) return false;
                break;
            }
            known.emplace(pos_key(l, idx), cur);
            if (l == 0) {
                if (cur != old_root) return false;
                break;
            }
            const ShortDigest& sib = p.old_siblings[d - l];
            auto [sit, inserted] = known.emplace(pos_key(l, idx ^ 1), sib);
            if (!inserted && sit->second != sib) return false;
            cur = combine(idx, cur, sib);
            ++hashes;
            idx >>= 1;
        }
        fresh[pos_key(d, p.leaf)] = leaf_digest(p.new_pairs);
        ++hashes;
    }
    if (pi != bundle.leaves.size()) return false;

    std::vector<uint32_t> level_idx;
    for (const auto& p : bundle.leaves) level_idx.push_back(p.leaf);
    for (unsigned l = d; l > a; --l) {
        std::vector<uint32_t> parents;
        for (uint32_t c : level_idx)
            if (parents.empty() || parents.back() != (c >> 1)) parents.push_back(c >> 1);
        for (uint32_t p : parents) {
            ShortDigest child[2];
            for (uint32_t s = 0; s < 2; ++s) {
                uint64_t k = pos_key(l, 2 * p + s);
                auto it = fresh.find(k);
                if (it != fresh.end()) {
                    child[s] = it->second;
                    continue;
                }
                auto kt = known.find(k);
                if (kt == known.end()) return false;
                child[s] = kt->second;
            }
            fresh[pos_key(l - 1, p)] = node_digest(child[0], child[1]);
            ++hashes;
        }
        level_idx.swap(parents);
    }
    // The served T' siblings must agree with what was derived.
    for (const auto& p : bundle.leaves) {
        uint32_t idx = p.leaf;
        for (unsigned l = d; l > a; --l) {
            uint64_t k = pos_key(l, idx ^ 1);
            auto it = fresh.find(k);
            const ShortDigest* want = nullptr;
            if (it != fresh.end()) {
                want = &it->second;
            } else {
                auto kt = known.find(k);
                if (kt == known.end()) return false;
                want = &kt->second;
            }
            if (*want != p.new_siblings[d - l]) return false;
            idx >>= 1;
        }
    }
    return fresh[pos_key(a, f)] == claimed;
}

}  // namespace blockene
