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

#include "blockene/gstate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace blockene {

namespace {

uint64_t salted(uint64_t salt, uint64_t x) {
    Digest d = Hasher().put_u64(salt).put_u64(x).finish();
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
    return v;
}

ShortDigest corrupt(ShortDigest d) {
    d[0] ^= 0x5a;
    return d;
}

}  // namespace

BucketLayout bucket_layout(std::span<const Key> keys, unsigned B, HashCounter* hc) {
    if (B == 0) throw std::invalid_argument("bucket count must be positive");
    BucketLayout L;
    L.B = B;
    const size_t k = keys.size();
    std::vector<Digest> h(k);
    for (size_t i = 0; i < k; ++i) {
        uint8_t b[4] = {uint8_t(keys[i] >> 24), uint8_t(keys[i] >> 16), uint8_t(keys[i] >> 8), uint8_t(keys[i])};
        h[i] = hash(std::span<const uint8_t>(b, 4));
    }
    if (hc) hc->index += k;
    L.order.resize(k);
    std::iota(L.order.begin(), L.order.end(), 0u);
    std::sort(L.order.begin(), L.order.end(), [&](uint32_t x, uint32_t y) { return h[x] < h[y]; });
    const size_t chunk = (k + B - 1) / B;
    L.start.resize(B + 1);
    for (unsigned b = 0; b <= B; ++b) L.start[b] = uint32_t(std::min(k, size_t(b) * chunk));
    return L;
}

ShortDigest bucket_digest(const BucketLayout& L, uint32_t b, std::span<const Key> keys,
                          std::span<const Value> values) {
    Hasher h;
    h.put_u8(0x02);
    for (uint32_t i : L.bucket(b)) h.put_u32(keys[i]).put_u32(values[i]);
    return truncate(h.finish());
}

std::vector<ShortDigest> bucket_digests(const BucketLayout& L, std::span<const Key> keys,
                                        std::span<const Value> values, HashCounter* hc) {
    std::vector<ShortDigest> out(L.B);
    for (uint32_t b = 0; b < L.B; ++b) out[b] = bucket_digest(L, b, keys, values);
    if (hc) hc->merkle += L.B;
    return out;
}

std::vector<ShortDigest> bucketize(std::span<const Key> keys, std::span<const Value> values, unsigned B,
                                   HashCounter* hc) {
    return bucket_digests(bucket_layout(keys, B, hc), keys, values, hc);
}

// ---------------------------------------------------------------------------

GsStateView::GsStateView(TreePtr tree) : tree_(std::move(tree)), root_(tree_->root()) {}

std::shared_ptr<const std::vector<Value>> GsStateView::values(const KeyList& keys) {
    auto it = values_.find(keys.get());
    if (it != values_.end()) return it->second.second;
    auto v = std::make_shared<std::vector<Value>>();
    v->reserve(keys->size());
    for (Key k : *keys) v->push_back(tree_->get(k).value_or(0));
    values_[keys.get()] = {keys, v};
    return v;
}

std::shared_ptr<const ChallengePath> GsStateView::path(Key key) {
    auto& slot = paths_[key];
    if (!slot) slot = std::make_shared<ChallengePath>(tree_->prove(key));
    return slot;
}

GsStateView::Buckets& GsStateView::buckets(const KeyList& keys, unsigned B) {
    auto k = std::make_pair(static_cast<const void*>(keys.get()), B);
    auto it = buckets_.find(k);
    if (it != buckets_.end()) return it->second;
    Buckets b;
    b.keys = keys;
    b.layout = bucket_layout(*keys, B);
    b.digests = bucket_digests(b.layout, *keys, *values(keys));
    return buckets_.emplace(k, std::move(b)).first->second;
}

const BucketLayout& GsStateView::layout(const KeyList& keys, unsigned B) { return buckets(keys, B).layout; }
const std::vector<ShortDigest>& GsStateView::digests(const KeyList& keys, unsigned B) {
    return buckets(keys, B).digests;
}

GsStateView::Delta& GsStateView::delta(const UpdateList& updates) {
    auto it = deltas_.find(updates.get());
    if (it != deltas_.end()) return it->second.second;
    Delta d;
    d.tree = std::make_shared<DeltaMerkleTree>(tree_);
    auto rejected = d.tree->apply(*updates);
    if (!rejected.empty()) throw LeafFullError(rejected.front());
    d.root = d.tree->root();
    return deltas_.emplace(updates.get(), std::make_pair(updates, std::move(d))).first->second.second;
}

std::shared_ptr<const std::vector<ShortDigest>> GsStateView::frontier(const UpdateList& updates, unsigned a) {
    Delta& d = delta(updates);
    auto& slot = d.frontiers[a];
    if (!slot) slot = std::make_shared<std::vector<ShortDigest>>(frontier_of(*d.tree, a));
    return slot;
}

std::shared_ptr<const SubtreeBundle> GsStateView::bundle(const UpdateList& updates, unsigned a, uint32_t f) {
    Delta& d = delta(updates);
    auto& slot = d.bundles[{a, f}];
    if (slot) return slot;
    auto [cl, fresh] = d.changed_leaves.try_emplace(a);
    if (fresh) {
        const unsigned depth = tree_->config().depth;
        for (const auto& kv : *updates) {
            uint32_t leaf = leaf_index(kv.key, depth);
            auto& v = cl->second[leaf >> (depth - a)];
            if (v.empty() || v.back() != leaf) v.push_back(leaf);
        }
        for (auto& [ff, v] : cl->second) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        }
    }
    static const std::vector<uint32_t> none;
    auto lit = cl->second.find(f);
    const auto& leaves = lit == cl->second.end() ? none : lit->second;
    slot = std::make_shared<SubtreeBundle>(subtree_update_proof(*tree_, *d.tree, a, f, leaves));
    return slot;
}

std::optional<std::shared_ptr<const std::vector<Value>>> HonestGsServer::values(const KeyList& keys) {
    return view_->values(keys);
}
std::shared_ptr<const ChallengePath> HonestGsServer::path(Key key) { return view_->path(key); }

std::optional<std::vector<uint32_t>> HonestGsServer::exceptions(const KeyList& keys,
                                                                std::span<const ShortDigest> digests, unsigned B) {
    const auto& mine = view_->digests(keys, B);
    std::vector<uint32_t> out;
    for (uint32_t b = 0; b < B; ++b)
        if (b >= digests.size() || digests[b] != mine[b]) out.push_back(b);
    return out;
}

std::optional<std::vector<Value>> HonestGsServer::bucket(const KeyList& keys, unsigned B, uint32_t b) {
    const auto& L = view_->layout(keys, B);
    if (b >= B) return std::vector<Value>{};
    auto vals = view_->values(keys);
    std::vector<Value> out;
    for (uint32_t i : L.bucket(b)) out.push_back((*vals)[i]);
    return out;
}

std::shared_ptr<const std::vector<ShortDigest>> HonestGsServer::frontier(const UpdateList& updates, unsigned a) {
    return view_->frontier(updates, a);
}

std::shared_ptr<const SubtreeBundle> HonestGsServer::bundle(const UpdateList& updates, unsigned a, uint32_t f) {
    return view_->bundle(updates, a, f);
}

bool LyingGsServer::lies_on(Key k) const {
    if (lies_.value_keys.count(k)) return true;
    if (lies_.value_fraction <= 0) return false;
    return double(salted(lies_.salt, k) >> 11) * 0x1p-53 < lies_.value_fraction;
}

std::optional<std::shared_ptr<const std::vector<Value>>> LyingGsServer::values(const KeyList& keys) {
    if (lies_.silent) return std::nullopt;
    auto it = served_.find(keys.get());
    if (it != served_.end()) return it->second.second;
    auto honest = view_->values(keys);
    std::shared_ptr<const std::vector<Value>> out = honest;
    bool any = false;
    std::vector<Value> v = *honest;
    for (size_t i = 0; i < v.size(); ++i)
        if (lies_on((*keys)[i])) {
            v[i] += 1;
            any = true;
        }
    if (any) out = std::make_shared<std::vector<Value>>(std::move(v));
    served_[keys.get()] = {keys, out};
    return out;
}

std::shared_ptr<const ChallengePath> LyingGsServer::path(Key key) {
    if (lies_.silent) return nullptr;
    auto honest = view_->path(key);
    if (!lies_on(key)) return honest;
    auto p = std::make_shared<ChallengePath>(*honest);
    p->value = p->value.value_or(0) + 1;
    return p;
}

std::vector<uint32_t> LyingGsServer::bogus_buckets(const KeyList& keys, unsigned B) const {
    std::vector<uint32_t> out;
    if (lies_.bogus_exceptions == 0) return out;
    const auto& L = view_->layout(keys, B);
    for (uint32_t b = 0; b < B && out.size() < lies_.bogus_exceptions; ++b) {
        uint32_t pick = uint32_t((b + salted(lies_.salt, 7)) % B);
        if (!L.bucket(pick).empty()) out.push_back(pick);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<std::vector<uint32_t>> LyingGsServer::exceptions(const KeyList& keys,
                                                               std::span<const ShortDigest> digests, unsigned B) {
    if (lies_.silent) return std::nullopt;
    if (lies_.hide_exceptions) return std::vector<uint32_t>{};
    auto base = HonestGsServer::exceptions(keys, digests, B);
    auto extra = bogus_buckets(keys, B);
    base->insert(base->end(), extra.begin(), extra.end());
    std::sort(base->begin(), base->end());
    base->erase(std::unique(base->begin(), base->end()), base->end());
    return base;
}

std::optional<std::vector<Value>> LyingGsServer::bucket(const KeyList& keys, unsigned B, uint32_t b) {
    if (lies_.silent) return std::nullopt;
    const auto& L = view_->layout(keys, B);
    if (b >= B) return std::vector<Value>{};
    auto vals = *values(keys);
    auto bogus = bogus_buckets(keys, B);
    const bool alter = std::binary_search(bogus.begin(), bogus.end(), b);
    std::vector<Value> out;
    for (uint32_t i : L.bucket(b)) out.push_back((*vals)[i] + (alter ? 7 : 0));
    return out;
}

std::shared_ptr<const std::vector<ShortDigest>> LyingGsServer::frontier(const UpdateList& updates, unsigned a) {
    if (lies_.silent) return nullptr;
    auto key = std::make_pair(static_cast<const void*>(updates.get()), a);
    auto it = frontiers_.find(key);
    if (it != frontiers_.end()) return it->second.second;
    auto honest = view_->frontier(updates, a);
    std::shared_ptr<const std::vector<ShortDigest>> out = honest;
    if (!lies_.frontier_nodes.empty() || lies_.bogus_frontier) {
        auto v = std::make_shared<std::vector<ShortDigest>>(*honest);
        for (uint32_t f : lies_.frontier_nodes)
            if (f < v->size()) (*v)[f] = corrupt((*v)[f]);
        const uint64_t n = v->size();
        for (unsigned i = 0; i < lies_.bogus_frontier && i < n; ++i) {
            uint32_t f = uint32_t((salted(lies_.salt, 11) + i) % n);
            (*v)[f] = corrupt((*honest)[f]);
        }
        out = v;
    }
    frontiers_[key] = {updates, out};
    return out;
}

std::shared_ptr<const SubtreeBundle> LyingGsServer::bundle(const UpdateList& updates, unsigned a, uint32_t f) {
    if (lies_.silent) return nullptr;
    return view_->bundle(updates, a, f);
}

// ---------------------------------------------------------------------------

void CostReport::add(const std::string& step, uint64_t up, uint64_t down) {
    for (auto& s : steps_)
        if (s.step == step) {
            s.up += up;
            s.down += down;
            return;
        }
    steps_.push_back({step, up, down});
}

uint64_t CostReport::up() const {
    uint64_t t = 0;
    for (const auto& s : steps_) t += s.up;
    return t;
}

uint64_t CostReport::down() const {
    uint64_t t = 0;
    for (const auto& s : steps_) t += s.down;
    return t;
}

uint64_t CostReport::step_down(const std::string& step) const {
    for (const auto& s : steps_)
        if (s.step == step) return s.down;
    return 0;
}

uint64_t CostReport::step_up(const std::string& step) const {
    for (const auto& s : steps_)
        if (s.step == step) return s.up;
    return 0;
}

void CostReport::merge(const CostReport& o) {
    for (const auto& s : o.steps_) add(s.step, s.up, s.down);
}

bool evidence_valid(const Evidence& e, const ShortDigest& root, const MerkleConfig& cfg,
                    std::span<const KeyValue> changed) {
    if (e.kind == Evidence::Kind::BadPath) {
        if (!e.path) return false;
        if (e.path->key != e.key) return true;
        if (!verify_path(root, *e.path, cfg.depth)) return true;
        return e.path->value.value_or(0) != e.claimed_value;
    }
    if (!e.bundle) return false;
    return !verify_subtree_bundle(root, cfg, e.a, e.frontier_index, e.claimed_digest, changed, *e.bundle);
}

bool ProofMemo::verify_path(const ShortDigest& root, const std::shared_ptr<const ChallengePath>& p, unsigned depth,
                            HashCounter* hc) {
    auto key = std::make_pair(static_cast<const void*>(p.get()), root);
    auto it = paths_.find(key);
    if (it == paths_.end()) {
        Result r{};
        r.ok = blockene::verify_path(root, *p, depth, &r.cost);
        it = paths_.emplace(key, std::make_pair(std::shared_ptr<const void>(p), r)).first;
    }
    const Result& r = it->second.second;
    if (hc) {
        hc->merkle += r.cost.merkle;
        hc->index += r.cost.index;
    }
    return r.ok;
}

const ProofMemo::Groups& ProofMemo::groups(const UpdateList& updates, const MerkleConfig& cfg, unsigned a) {
    auto key = std::make_pair(static_cast<const void*>(updates.get()), a);
    auto it = groups_.find(key);
    if (it == groups_.end())
        it = groups_.emplace(key, std::make_pair(updates, group_by_frontier(*updates, cfg, a))).first;
    return it->second.second;
}

ShortDigest ProofMemo::frontier_root(const std::shared_ptr<const std::vector<ShortDigest>>& f, HashCounter* hc) {
    auto it = roots_.find(f.get());
    if (it == roots_.end()) {
        HashCounter cost;
        const ShortDigest r = root_from_frontier(*f, &cost);
        it = roots_.emplace(f.get(), std::make_pair(std::shared_ptr<const void>(f), std::make_pair(r, cost))).first;
    }
    const auto& [root, cost] = it->second.second;
    if (hc) {
        hc->merkle += cost.merkle;
        hc->index += cost.index;
    }
    return root;
}

bool ProofMemo::verify_bundle(const ShortDigest& old_root, const MerkleConfig& cfg, unsigned a, uint32_t f,
                              const ShortDigest& claimed, std::span<const KeyValue> changed, const void* changed_id,
                              const std::shared_ptr<const SubtreeBundle>& b, HashCounter* hc) {
    auto key = std::make_tuple(static_cast<const void*>(b.get()), changed_id, old_root, claimed, f, a);
    auto it = bundles_.find(key);
    if (it == bundles_.end()) {
        Result r{};
        r.ok = verify_subtree_bundle(old_root, cfg, a, f, claimed, changed, *b, &r.cost);
        it = bundles_.emplace(key, std::make_pair(std::shared_ptr<const void>(b), r)).first;
    }
    const Result& r = it->second.second;
    if (hc) {
        hc->merkle += r.cost.merkle;
        hc->index += r.cost.index;
    }
    return r.ok;
}

// ---------------------------------------------------------------------------

size_t spot_check_count(double mu, size_t k) {
    if (k == 0) return 0;
    return size_t(std::ceil(mu * double(k) - 1e-9));
}

std::vector<uint32_t> spot_check_indices(std::mt19937_64& rng, size_t k, size_t count) {
    std::vector<uint32_t> out;
    if (k == 0) return out;
    std::uniform_int_distribution<uint32_t> pick(0, uint32_t(k - 1));
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) out.push_back(pick(rng));
    return out;
}

namespace {

const char* kReadSteps[] = {"read.values",         "read.spot_request",     "read.spot_paths",
                            "read.bucket_hashes",  "read.exception_lists",  "read.exception_buckets",
                            "read.correction_paths"};
const char* kWriteSteps[] = {"write.frontier", "write.spot_request", "write.spot_bundles", "write.cross_frontiers",
                             "write.correction_bundles"};

bool check_path(ProofMemo* memo, const ShortDigest& root, const std::shared_ptr<const ChallengePath>& p,
                unsigned depth, HashCounter* hc) {
    return memo ? memo->verify_path(root, p, depth, hc) : verify_path(root, *p, depth, hc);
}

}  // namespace

ReadOutcome gs_read(const ShortDigest& root, const KeyList& keys, std::span<GsServer* const> sample,
                    const ReadParams& rp, const MerkleConfig& cfg, std::mt19937_64& rng, ProofMemo* memo) {
    HashCounter layout_cost;
    BucketLayout L = bucket_layout(*keys, rp.B, &layout_cost);
    ReadOutcome out = gs_read(root, keys, L, sample, rp, cfg, rng, memo);
    out.hashes.index += layout_cost.index;
    return out;
}

ReadOutcome gs_read(const ShortDigest& root, const KeyList& keys, const BucketLayout& L,
                    std::span<GsServer* const> sample, const ReadParams& rp, const MerkleConfig& cfg,
                    std::mt19937_64& rng, ProofMemo* memo) {
    ReadOutcome out;
    for (const char* s : kReadSteps) out.cost.add(s, 0, 0);
    const size_t k = keys->size();
    if (k == 0) return out;
    const size_t m = sample.size();
    const uint64_t pb = path_wire_bytes(cfg);
    std::vector<bool> dropped(m, false);
    auto drop = [&](size_t pos) {
        if (!dropped[pos]) {
            dropped[pos] = true;
            out.discarded.push_back(pos);
        }
    };

    // Bulk values from the first politician that passes the spot-check.
    std::shared_ptr<const std::vector<Value>> served;
    size_t s1 = m;
    const size_t kc = spot_check_count(rp.mu, k);
    for (size_t pos = 0; pos < m && s1 == m; ++pos) {
        auto v = sample[pos]->values(keys);
        if (!v || !*v || (*v)->size() != k) {
            drop(pos);
            continue;
        }
        out.cost.add("read.values", 0, k * 4);
        auto idx = spot_check_indices(rng, k, kc);
        out.cost.add("read.spot_request", kc * 4, 0);
        bool ok = true;
        for (uint32_t i : idx) {
            auto p = sample[pos]->path((*keys)[i]);
            if (!p) {
                ok = false;
                break;
            }
            out.cost.add("read.spot_paths", 0, pb);
            ++out.paths_checked;
            const Value claimed = (**v)[i];
            if (p->key != (*keys)[i] || !check_path(memo, root, p, cfg.depth, &out.hashes) ||
                p->value.value_or(0) != claimed) {
                out.evidence.push_back({Evidence::Kind::BadPath, pos, (*keys)[i], claimed, p});
                out.spot_check_failed = true;
                ok = false;
                break;
            }
        }
        if (!ok) {
            drop(pos);
            continue;
        }
        served = *v;
        s1 = pos;
    }
    if (s1 == m) {
        out.status = GsStatus::AbortAllCorrupt;
        return out;
    }
    out.values = *served;

    // Bucket cross-check against the rest of the sample.
    const auto digests = bucket_digests(L, *keys, out.values, &out.hashes);
    struct Claim {
        size_t pos;
        std::vector<uint32_t> buckets;
        std::vector<std::vector<Value>> values;
    };
    std::vector<Claim> claims;
    for (size_t pos = 0; pos < m; ++pos) {
        if (dropped[pos]) continue;
        out.cost.add("read.bucket_hashes", uint64_t(rp.B) * kShortDigestBytes, 0);
        if (pos == s1) continue;
        auto e = sample[pos]->exceptions(keys, digests, rp.B);
        if (!e) continue;
        out.cost.add("read.exception_lists", 0, 4 + 4 * e->size());
        if (e->empty()) continue;
        if (e->size() > rp.tau) {
            drop(pos);
            continue;
        }
        Claim c{pos, *e, {}};
        bool ok = true;
        for (uint32_t b : c.buckets) {
            auto vals = b < rp.B ? sample[pos]->bucket(keys, rp.B, b) : std::nullopt;
            if (!vals || vals->size() != L.bucket(b).size()) {
                ok = false;
                break;
            }
            out.cost.add("read.exception_buckets", 0, 4 * vals->size());
            c.values.push_back(std::move(*vals));
        }
        if (!ok) {
            drop(pos);
            continue;
        }
        claims.push_back(std::move(c));
    }

    // Resolve disagreements with challenge paths, politician by politician.
    for (auto& c : claims) {
        if (out.corrections >= rp.tau) break;
        bool liar = false;
        for (size_t bi = 0; bi < c.buckets.size() && !liar && out.corrections < rp.tau; ++bi) {
            auto slots = L.bucket(c.buckets[bi]);
            for (size_t j = 0; j < slots.size() && out.corrections < rp.tau; ++j) {
                const uint32_t i = slots[j];
                const Value claimed = c.values[bi][j];
                if (claimed == out.values[i]) continue;
                auto p = sample[c.pos]->path((*keys)[i]);
                if (!p) {
                    liar = true;
                    break;
                }
                out.cost.add("read.correction_paths", 0, pb);
                ++out.paths_checked;
                if (p->key != (*keys)[i] || !check_path(memo, root, p, cfg.depth, &out.hashes) ||
                    p->value.value_or(0) != claimed) {
                    out.evidence.push_back({Evidence::Kind::BadPath, c.pos, (*keys)[i], claimed, p});
                    liar = true;
                    break;
                }
                out.values[i] = claimed;
                ++out.corrections;
            }
        }
        if (liar) drop(c.pos);
    }
    return out;
}

std::map<uint32_t, std::vector<KeyValue>> group_by_frontier(std::span<const KeyValue> updates,
                                                            const MerkleConfig& cfg, unsigned a) {
    std::map<uint32_t, std::vector<KeyValue>> g;
    for (const auto& kv : updates) g[leaf_index(kv.key, cfg.depth) >> (cfg.depth - a)].push_back(kv);
    return g;
}

WriteOutcome gs_update(const ShortDigest& old_root, const UpdateList& updates, std::span<GsServer* const> sample,
                       const WriteParams& wp, const MerkleConfig& cfg, std::mt19937_64& rng, ProofMemo* memo) {
    WriteOutcome out;
    for (const char* s : kWriteSteps) out.cost.add(s, 0, 0);
    out.root = old_root;
    if (updates->empty()) return out;
    const size_t m = sample.size();
    const unsigned a = wp.a;
    const size_t nf = size_t(1) << a;
    const uint64_t fbytes = nf * kShortDigestBytes;
    ProofMemo::Groups local;
    if (!memo) local = group_by_frontier(*updates, cfg, a);
    const ProofMemo::Groups& groups = memo ? memo->groups(updates, cfg, a) : local;
    out.hashes.index += updates->size();
    static const std::vector<KeyValue> none;
    auto changed_of = [&](uint32_t f) -> const std::vector<KeyValue>& {
        auto it = groups.find(f);
        return it == groups.end() ? none : it->second;
    };
    auto check = [&](uint32_t f, const ShortDigest& claimed, const std::shared_ptr<const SubtreeBundle>& b) {
        const auto& ch = changed_of(f);
        if (memo) return memo->verify_bundle(old_root, cfg, a, f, claimed, ch, updates.get(), b, &out.hashes);
        return verify_subtree_bundle(old_root, cfg, a, f, claimed, ch, *b, &out.hashes);
    };
    std::vector<bool> dropped(m, false);
    auto drop = [&](size_t pos) {
        if (!dropped[pos]) {
            dropped[pos] = true;
            out.discarded.push_back(pos);
        }
    };

    std::shared_ptr<const std::vector<ShortDigest>> F;
    size_t s1 = m;
    for (size_t pos = 0; pos < m && s1 == m; ++pos) {
        auto fr = sample[pos]->frontier(updates, a);
        if (!fr || fr->size() != nf) {
            drop(pos);
            continue;
        }
        out.cost.add("write.frontier", 0, fbytes);
        auto idx = spot_check_indices(rng, nf, wp.c);
        out.cost.add("write.spot_request", std::max<uint64_t>(1, nf / 8), 0);
        bool ok = true;
        for (uint32_t f : idx) {
            auto b = sample[pos]->bundle(updates, a, f);
            if (!b) {
                ok = false;
                break;
            }
            out.cost.add("write.spot_bundles", 0, bundle_wire_bytes(*b, cfg));
            ++out.bundles_checked;
            if (!check(f, (*fr)[f], b)) {
                Evidence e;
                e.kind = Evidence::Kind::BadBundle;
                e.sample_pos = pos;
                e.frontier_index = f;
                e.a = a;
                e.claimed_digest = (*fr)[f];
                e.bundle = b;
                out.evidence.push_back(e);
                out.spot_check_failed = true;
                ok = false;
                break;
            }
        }
        if (!ok) {
            drop(pos);
            continue;
        }
        F = fr;
        s1 = pos;
    }
    if (s1 == m) {
        out.status = GsStatus::AbortAllCorrupt;
        return out;
    }
    std::vector<ShortDigest> final_f = *F;

    struct Claim {
        size_t pos;
        std::shared_ptr<const std::vector<ShortDigest>> fr;
        std::vector<uint32_t> diff;
    };
    std::vector<Claim> claims;
    for (size_t pos = 0; pos < m; ++pos) {
        if (dropped[pos] || pos == s1) continue;
        auto fr = sample[pos]->frontier(updates, a);
        if (!fr || fr->size() != nf) continue;
        out.cost.add("write.cross_frontiers", 0, fbytes);
        Claim c{pos, fr, {}};
        for (uint32_t f = 0; f < nf; ++f)
            if ((*fr)[f] != (*F)[f]) c.diff.push_back(f);
        if (c.diff.empty()) continue;
        if (c.diff.size() > wp.tau_w) {
            drop(pos);
            continue;
        }
        claims.push_back(std::move(c));
    }

    const size_t budget = size_t(wp.tau_w) + m;
    size_t downloads = 0;
    for (auto& c : claims) {
        if (downloads >= budget) break;
        for (uint32_t f : c.diff) {
            if (final_f[f] == (*c.fr)[f]) continue;
            if (downloads >= budget) break;
            auto b = sample[c.pos]->bundle(updates, a, f);
            ++downloads;
            if (!b) {
                drop(c.pos);
                break;
            }
            out.cost.add("write.correction_bundles", 0, bundle_wire_bytes(*b, cfg));
            ++out.bundles_checked;
            if (!check(f, (*c.fr)[f], b)) {
                Evidence e;
                e.kind = Evidence::Kind::BadBundle;
                e.sample_pos = c.pos;
                e.frontier_index = f;
                e.a = a;
                e.claimed_digest = (*c.fr)[f];
                e.bundle = b;
                out.evidence.push_back(e);
                drop(c.pos);
                break;
            }
            final_f[f] = (*c.fr)[f];
            ++out.corrections;
        }
    }
    out.root = memo && out.corrections == 0 ? memo->frontier_root(F, &out.hashes)
                                            : root_from_frontier(final_f, &out.hashes);
    return out;
}

uint64_t naive_bytes(size_t keys, const MerkleConfig& cfg) { return uint64_t(keys) * path_wire_bytes(cfg); }
uint64_t naive_hashes(size_t keys, const MerkleConfig& cfg) { return uint64_t(keys) * cfg.depth * 2; }

}  // namespace blockene
