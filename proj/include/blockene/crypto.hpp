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

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <sodium.h>

namespace blockene {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;
using ShortDigest = std::array<uint8_t, 10>;
using PublicKey = std::array<uint8_t, 32>;
using SecretKey = std::array<uint8_t, 64>;
using Signature = std::array<uint8_t, 64>;

inline constexpr size_t kShortDigestBytes = 10;

// SHA-256.
Digest hash(std::span<const uint8_t> data);
Digest hash(std::string_view data);
ShortDigest truncate(const Digest& d);

// Incremental SHA-256 with typed append helpers. Integers are big-endian.
class Hasher {
public:
    Hasher();
    Hasher& put(std::span<const uint8_t> data);
    Hasher& put(std::string_view data);
    Hasher& put_u8(uint8_t v);
    Hasher& put_u32(uint32_t v);
    Hasher& put_u64(uint64_t v);
    template <size_t N>
    Hasher& put(const std::array<uint8_t, N>& a) { return put(std::span<const uint8_t>(a.data(), N)); }
    Digest finish();

private:
    crypto_hash_sha256_state state_;
};

// Growable canonical message buffer for signing.
class Writer {
public:
    Writer& u8(uint8_t v) { buf_.push_back(v); return *this; }
    Writer& u32(uint32_t v);
    Writer& u64(uint64_t v);
    Writer& raw(std::span<const uint8_t> d) { buf_.insert(buf_.end(), d.begin(), d.end()); return *this; }
    template <size_t N>
    Writer& raw(const std::array<uint8_t, N>& a) { return raw(std::span<const uint8_t>(a.data(), N)); }
    const Bytes& bytes() const { return buf_; }

private:
    Bytes buf_;
};

struct KeyPair {
    PublicKey vk{};
    SecretKey sk{};
};

KeyPair keypair_from_seed(const std::array<uint8_t, 32>& seed);
// Deterministic keypair from a 64-bit scenario seed and a label.
KeyPair derive_keypair(uint64_t seed, std::string_view label, uint64_t index);

Signature sign(const SecretKey& sk, std::span<const uint8_t> msg);
bool verify(const PublicKey& vk, std::span<const uint8_t> msg, const Signature& sig);

struct VrfOutput {
    Digest value{};
    Signature proof{};
};

Bytes vrf_message(const Digest& seed, uint64_t round);
VrfOutput compute_vrf(const SecretKey& sk, const Digest& seed, uint64_t round);
bool verify_vrf(const PublicKey& vk, const Digest& seed, uint64_t round, const VrfOutput& out);
bool sortition_member(const VrfOutput& vrf, unsigned k_bits);
bool low_bits_zero(const Digest& value, unsigned k_bits);

std::string to_hex(std::span<const uint8_t> data);
template <size_t N>
std::string to_hex(const std::array<uint8_t, N>& a) { return to_hex(std::span<const uint8_t>(a.data(), N)); }
bool from_hex(std::string_view hex, std::span<uint8_t> out);
template <size_t N>
bool from_hex(std::string_view hex, std::array<uint8_t, N>& out) { return from_hex(hex, std::span<uint8_t>(out.data(), N)); }

struct DigestHash {
    size_t operator()(const Digest& d) const noexcept {
        size_t h;
        std::memcpy(&h, d.data(), sizeof(h));
        return h;
    }
};

// Memoized signature verification. Verification results depend only on
// (vk, msg, sig), so a cache keyed by their exact bytes is transparent.
class VerifyCache {
public:
    bool verify(const PublicKey& vk, std::span<const uint8_t> msg, const Signature& sig);
    bool verify_vrf(const PublicKey& vk, const Digest& seed, uint64_t round, const VrfOutput& out);
    uint64_t hits() const { return hits_; }
    uint64_t misses() const { return misses_; }
    void clear() { memo_.clear(); }

private:
    std::unordered_map<std::string, bool> memo_;
    uint64_t hits_ = 0;
    uint64_t misses_ = 0;
};

// Counts hash evaluations performed by verifiers.
struct HashCounter {
    uint64_t merkle = 0;  // leaf, interior and bucket digests
    uint64_t index = 0;   // key-to-position hashes
    uint64_t total() const { return merkle + index; }
};

}  // namespace blockene
