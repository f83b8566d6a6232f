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

// Independent reference computations used as test oracles.

#pragma once

#include <cmath>
#include <map>
#include <vector>

#include <sodium.h>

#include "blockene/merkle.hpp"

namespace oracle {

using blockene::Key;
using blockene::ShortDigest;
using blockene::Value;

inline std::array<uint8_t, 32> sha256(const std::vector<uint8_t>& in) {
    std::array<uint8_t, 32> out;
    crypto_hash_sha256(out.data(), in.data(), in.size());
    return out;
}

inline ShortDigest trunc10(const std::array<uint8_t, 32>& d) {
    ShortDigest s;
    for (int i = 0; i < 10; ++i) s[i] = d[i];
    return s;
}

inline uint32_t leaf_of(Key k, unsigned depth) {
    auto h = sha256({uint8_t(k >> 24), uint8_t(k >> 16), uint8_t(k >> 8), uint8_t(k)});
    uint64_t v = (uint64_t(h[28]) << 24) | (uint64_t(h[29]) << 16) | (uint64_t(h[30]) << 8) | h[31];
    return depth >= 32 ? uint32_t(v) : uint32_t(v % (uint64_t(1) << depth));
}

inline ShortDigest leaf_hash(const std::map<Key, Value>& pairs) {
    std::vector<uint8_t> buf{0x00};
    for (auto [k, v] : pairs)
        for (uint32_t x : {k, v})
            for (int s = 24; s >= 0; s -= 8) buf.push_back(uint8_t(x >> s));
    return trunc10(sha256(buf));
}

inline ShortDigest inner_hash(const ShortDigest& l, const ShortDigest& r) {
    std::vector<uint8_t> buf{0x01};
    buf.insert(buf.end(), l.begin(), l.end());
    buf.insert(buf.end(), r.begin(), r.end());
    return trunc10(sha256(buf));
}

// Full recursive rebuild over an explicit key-value map.
struct NaiveTree {
    unsigned depth;
    std::map<uint32_t, std::map<Key, Value>> leaves;

    explicit NaiveTree(unsigned d) : depth(d) {}
    void put(Key k, Value v) { leaves[leaf_of(k, depth)][k] = v; }

    mutable std::vector<ShortDigest> empties;
    ShortDigest empty(unsigned level) const {
        if (empties.empty()) {
            empties.resize(depth + 1);
            empties[depth] = leaf_hash({});
            for (unsigned l = depth; l > 0; --l) empties[l - 1] = inner_hash(empties[l], empties[l]);
        }
        return empties[level];
    }
    ShortDigest node(unsigned level, uint64_t index) const {
        uint64_t lo = index << (depth - level), hi = (index + 1) << (depth - level);
        auto it = leaves.lower_bound(uint32_t(lo));
        if (it == leaves.end() || it->first >= hi) return empty(level);
        if (level == depth) return leaf_hash(it->second);
        return inner_hash(node(level + 1, 2 * index), node(level + 1, 2 * index + 1));
    }
    ShortDigest root() const { return node(0, 0); }
};

inline double binom_sigma(double p, double n) { return std::sqrt(p * (1 - p) / n); }

}  // namespace oracle
