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
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "blockene/merkle.hpp"

namespace blockene {

struct ReadParams {
    double mu = 0.015;
    unsigned tau = 500;
    unsigned B = 2000;
};

struct WriteParams {
    unsigned a = 13;
    unsigned c = 72;
    unsigned tau_w = 800;
};

using KeyList = std::shared_ptr<const std::vector<Key>>;          // sorted, unique
using UpdateList = std::shared_ptr<const std::vector<KeyValue>>;  // sorted by key

// Keys ordered by the bytes of hash(key) and cut into B chunks of ceil(k/B).
struct BucketLayout {
    unsigned B = 0;
    std::vector<uint32_t> order;  // positions into the key list
    std::vector<uint32_t> start;  // B + 1 offsets into order
    std::span<const uint32_t> bucket(uint32_t b) const {
        return std::span<const uint32_t>(order).subspan(start[b], start[b + 1] - start[b]);
    }
};

BucketLayout bucket_layout(std::span<const Key> keys, unsigned B, HashCounter* hc = nullptr);
ShortDigest bucket_digest(const BucketLayout& L, uint32_t b, std::span<const Key> keys,
                          std::span<const Value> values);
std::vector<ShortDigest> bucket_digests(const BucketLayout& L, std::span<const Key> keys,
                                        std::span<const Value> values, HashCounter* hc = nullptr);
std::vector<ShortDigest> bucketize(std::span<const Key> keys, std::span<const Value> values, unsigned B,
                                   HashCounter* hc = nullptr);

// Politician side. A disengaged optional models a silent politician.
// Responses are modelled as signed by the serving politician.
class GsServer {
public:
    virtual ~GsServer() = default;
    virtual std::optional<std::shared_ptr<const std::vector<Value>>> values(const KeyList& keys) = 0;
    virtual std::shared_ptr<const ChallengePath> path(Key key) = 0;
    virtual std::optional<std::vector<uint32_t>> exceptions(const KeyList& keys,
                                                            std::span<const ShortDigest> digests, unsigned B) = 0;
    virtual std::optional<std::vector<Value>> bucket(const KeyList& keys, unsigned B, uint32_t b) = 0;
    virtual std::shared_ptr<const std::vector<ShortDigest>> frontier(const UpdateList& updates, unsigned a) = 0;
    virtual std::shared_ptr<const SubtreeBundle> bundle(const UpdateList& updates, unsigned a, uint32_t f) = 0;
};

// Shared honest view of one global state and the deltas requested on it.
class GsStateView {
public:
    explicit GsStateView(TreePtr tree);
    const TreePtr& tree() const { return tree_; }
    const ShortDigest& root() const { return root_; }

    std::shared_ptr<const std::vector<Value>> values(const KeyList& keys);
    std::shared_ptr<const ChallengePath> path(Key key);
    const BucketLayout& layout(const KeyList& keys, unsigned B);
    const std::vector<ShortDigest>& digests(const KeyList& keys, unsigned B);

    struct Delta {
        std::shared_ptr<DeltaMerkleTree> tree;
        ShortDigest root;
        std::map<unsigned, std::shared_ptr<const std::vector<ShortDigest>>> frontiers;
        std::map<std::pair<unsigned, uint32_t>, std::shared_ptr<const SubtreeBundle>> bundles;
        std::map<unsigned, std::map<uint32_t, std::vector<uint32_t>>> changed_leaves;  // by a, then f
    };
    Delta& delta(const UpdateList& updates);
    std::shared_ptr<const std::vector<ShortDigest>> frontier(const UpdateList& updates, unsigned a);
    std::shared_ptr<const SubtreeBundle> bundle(const UpdateList& updates, unsigned a, uint32_t f);

private:
    TreePtr tree_;
    ShortDigest root_;
    std::map<const void*, std::pair<KeyList, std::shared_ptr<const std::vector<Value>>>> values_;
    std::map<Key, std::shared_ptr<const ChallengePath>> paths_;
    struct Buckets {
        KeyList keys;
        BucketLayout layout;
        std::vector<ShortDigest> digests;
    };
    std::map<std::pair<const void*, unsigned>, Buckets> buckets_;
    Buckets& buckets(const KeyList& keys, unsigned B);
    std::map<const void*, std::pair<UpdateList, Delta>> deltas_;
};

class HonestGsServer : public GsServer {
public:
    explicit HonestGsServer(GsStateView* view) : view_(view) {}
    std::optional<std::shared_ptr<const std::vector<Value>>> values(const KeyList& keys) override;
    std::shared_ptr<const ChallengePath> path(Key key) override;
    std::optional<std::vector<uint32_t>> exceptions(const KeyList& keys, std::span<const ShortDigest> digests,
                                                    unsigned B) override;
    std::optional<std::vector<Value>> bucket(const KeyList& keys, unsigned B, uint32_t b) override;
    std::shared_ptr<const std::vector<ShortDigest>> frontier(const UpdateList& updates, unsigned a) override;
    std::shared_ptr<const SubtreeBundle> bundle(const UpdateList& updates, unsigned a, uint32_t f) override;

protected:
    GsStateView* view_;
};

// Misbehaviour knobs for a corrupt politician's global-state responses.
struct GsLies {
    bool silent = false;
    std::set<Key> value_keys;               // serve value + 1 for these keys
    double value_fraction = 0;              // and for this hashed fraction of keys
    bool hide_exceptions = false;           // report no mismatches
    unsigned bogus_exceptions = 0;          // claim this many extra buckets with altered values
    std::set<uint32_t> frontier_nodes;      // serve altered frontier digests here
    unsigned bogus_frontier = 0;            // as a cross-checker, disagree on this many nodes
    uint64_t salt = 0;
};

class LyingGsServer : public HonestGsServer {
public:
    LyingGsServer(GsStateView* view, GsLies lies) : HonestGsServer(view), lies_(std::move(lies)) {}
    std::optional<std::shared_ptr<const std::vector<Value>>> values(const KeyList& keys) override;
    std::shared_ptr<const ChallengePath> path(Key key) override;
    std::optional<std::vector<uint32_t>> exceptions(const KeyList& keys, std::span<const ShortDigest> digests,
                                                    unsigned B) override;
    std::optional<std::vector<Value>> bucket(const KeyList& keys, unsigned B, uint32_t b) override;
    std::shared_ptr<const std::vector<ShortDigest>> frontier(const UpdateList& updates, unsigned a) override;
    std::shared_ptr<const SubtreeBundle> bundle(const UpdateList& updates, unsigned a, uint32_t f) override;
    const GsLies& lies() const { return lies_; }

private:
    bool lies_on(Key k) const;
    std::vector<uint32_t> bogus_buckets(const KeyList& keys, unsigned B) const;
    GsLies lies_;
    std::map<const void*, std::pair<KeyList, std::shared_ptr<const std::vector<Value>>>> served_;
    std::map<std::pair<const void*, unsigned>, std::pair<UpdateList, std::shared_ptr<const std::vector<ShortDigest>>>>
        frontiers_;
};

struct StepCost {
    std::string step;
    uint64_t up = 0;
    uint64_t down = 0;
};

class CostReport {
public:
    void add(const std::string& step, uint64_t up, uint64_t down);
    const std::vector<StepCost>& steps() const { return steps_; }
    uint64_t up() const;
    uint64_t down() const;
    uint64_t total() const { return up() + down(); }
    uint64_t step_down(const std::string& step) const;
    uint64_t step_up(const std::string& step) const;
    void merge(const CostReport& o);

private:
    std::vector<StepCost> steps_;
};

struct Evidence {
    enum class Kind { BadPath, BadBundle } kind = Kind::BadPath;
    size_t sample_pos = 0;
    Key key = 0;
    Value claimed_value = 0;
    std::shared_ptr<const ChallengePath> path;
    uint32_t frontier_index = 0;
    unsigned a = 0;
    ShortDigest claimed_digest{};
    std::shared_ptr<const SubtreeBundle> bundle;
};

// Third-party check: true iff the evidence shows the served data was wrong
// with respect to the signed root (for bundles, `changed` is the public
// update set restricted to the frontier node).
bool evidence_valid(const Evidence& e, const ShortDigest& root, const MerkleConfig& cfg,
                    std::span<const KeyValue> changed = {});

// Memo for verification of shared, immutable proof objects. Results depend
// only on the memo key, so sharing the memo between verifiers is transparent;
// hash counts are still charged on every lookup. For bundles, `changed_id`
// names the update list that `changed` was grouped from; the list must stay
// alive until the memo is cleared.
class ProofMemo {
public:
    using Groups = std::map<uint32_t, std::vector<KeyValue>>;
    // Changed keys grouped by frontier node, computed once per update list.
    const Groups& groups(const UpdateList& updates, const MerkleConfig& cfg, unsigned a);
    ShortDigest frontier_root(const std::shared_ptr<const std::vector<ShortDigest>>& f, HashCounter* hc);
    bool verify_path(const ShortDigest& root, const std::shared_ptr<const ChallengePath>& p, unsigned depth,
                     HashCounter* hc);
    bool verify_bundle(const ShortDigest& old_root, const MerkleConfig& cfg, unsigned a, uint32_t f,
                       const ShortDigest& claimed, std::span<const KeyValue> changed, const void* changed_id,
                       const std::shared_ptr<const SubtreeBundle>& b, HashCounter* hc);
    void clear() {
        paths_.clear();
        bundles_.clear();
        groups_.clear();
        roots_.clear();
    }

private:
    struct Result {
        bool ok;
        HashCounter cost;
    };
    std::map<std::pair<const void*, ShortDigest>, std::pair<std::shared_ptr<const void>, Result>> paths_;
    std::map<std::tuple<const void*, const void*, ShortDigest, ShortDigest, uint32_t, unsigned>,
             std::pair<std::shared_ptr<const void>, Result>>
        bundles_;
    std::map<std::pair<const void*, unsigned>, std::pair<UpdateList, Groups>> groups_;
    std::map<const void*, std::pair<std::shared_ptr<const void>, std::pair<ShortDigest, HashCounter>>> roots_;
};

enum class GsStatus { Ok, AbortAllCorrupt };

struct ReadOutcome {
    GsStatus status = GsStatus::Ok;
    std::vector<Value> values;  // aligned with the key list
    bool spot_check_failed = false;
    unsigned corrections = 0;
    unsigned paths_checked = 0;
    std::vector<Evidence> evidence;
    std::vector<size_t> discarded;
    CostReport cost;
    HashCounter hashes;
};

struct WriteOutcome {
    GsStatus status = GsStatus::Ok;
    ShortDigest root{};
    bool spot_check_failed = false;
    unsigned corrections = 0;
    unsigned bundles_checked = 0;
    std::vector<Evidence> evidence;
    std::vector<size_t> discarded;
    CostReport cost;
    HashCounter hashes;
};

// Indices spot-checked by the read protocol (drawn with replacement).
std::vector<uint32_t> spot_check_indices(std::mt19937_64& rng, size_t k, size_t count);
size_t spot_check_count(double mu, size_t k);

ReadOutcome gs_read(const ShortDigest& root, const KeyList& keys, const BucketLayout& layout,
                    std::span<GsServer* const> sample, const ReadParams& rp, const MerkleConfig& cfg,
                    std::mt19937_64& rng, ProofMemo* memo = nullptr);
ReadOutcome gs_read(const ShortDigest& root, const KeyList& keys, std::span<GsServer* const> sample,
                    const ReadParams& rp, const MerkleConfig& cfg, std::mt19937_64& rng, ProofMemo* memo = nullptr);

// Changed keys grouped by frontier node.
std::map<uint32_t, std::vector<KeyValue>> group_by_frontier(std::span<const KeyValue> updates,
                                                            const MerkleConfig& cfg, unsigned a);

WriteOutcome gs_update(const ShortDigest& old_root, const UpdateList& updates, std::span<GsServer* const> sample,
                       const WriteParams& wp, const MerkleConfig& cfg, std::mt19937_64& rng,
                       ProofMemo* memo = nullptr);

// Baseline that downloads one challenge path per key, verifies it and
// recomputes the new root along it.
uint64_t naive_bytes(size_t keys, const MerkleConfig& cfg);
uint64_t naive_hashes(size_t keys, const MerkleConfig& cfg);

}  // namespace blockene
