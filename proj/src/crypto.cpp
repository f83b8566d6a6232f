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

#include "blockene/crypto.hpp"

#include <stdexcept>

namespace blockene {

namespace {

struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0)
            throw std::runtime_error("libsodium initialization failed");
    }
};
const SodiumInit g_sodium_init;

}  // namespace

Digest hash(std::span<const uint8_t> data) {
    Digest out;
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

Digest hash(std::string_view data) {
    return hash(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

ShortDigest truncate(const Digest& d) {
    ShortDigest s;
    std::memcpy(s.data(), d.data(), s.size());
    return s;
}

Hasher::Hasher() { crypto_hash_sha256_init(&state_); }

Hasher& Hasher::put(std::span<const uint8_t> data) {
    crypto_hash_sha256_update(&state_, data.data(), data.size());
    return *this;
}

Hasher& Hasher::put(std::string_view data) {
    return put(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()), data.size()));
}

Hasher& Hasher::put_u8(uint8_t v) { return put(std::span<const uint8_t>(&v, 1)); }

Hasher& Hasher::put_u32(uint32_t v) {
    uint8_t b[4] = {uint8_t(v >> 24), uint8_t(v >> 16), uint8_t(v >> 8), uint8_t(v)};
    return put(std::span<const uint8_t>(b, 4));
}

Hasher& Hasher::put_u64(uint64_t v) {
    uint8_t b[8];
    for (int i = 0; i < 8; ++i) b[i] = uint8_t(v >> (56 - 8 * i));
    return put(std::span<const uint8_t>(b, 8));
}

Digest Hasher::finish() {
    Digest out;
    crypto_hash_sha256_final(&state_, out.data());
    return out;
}

Writer& Writer::u32(uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(uint8_t(v >> (24 - 8 * i)));
    return *this;
}

Writer& Writer::u64(uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(uint8_t(v >> (56 - 8 * i)));
    return *this;
}

KeyPair keypair_from_seed(const std::array<uint8_t, 32>& seed) {
    KeyPair kp;
    crypto_sign_ed25519_seed_keypair(kp.vk.data(), kp.sk.data(), seed.data());
    return kp;
}

KeyPair derive_keypair(uint64_t seed, std::string_view label, uint64_t index) {
    Digest d = Hasher().put("blockene-key").put_u64(seed).put(label).put_u64(index).finish();
    return keypair_from_seed(d);
}

Signature sign(const SecretKey& sk, std::span<const uint8_t> msg) {
    Signature sig;
    crypto_sign_ed25519_detached(sig.data(), nullptr, msg.data(), msg.size(), sk.data());
    return sig;
}

bool verify(const PublicKey& vk, std::span<const uint8_t> msg, const Signature& sig) {
    return crypto_sign_ed25519_verify_detached(sig.data(), msg.data(), msg.size(), vk.data()) == 0;
}

Bytes vrf_message(const Digest& seed, uint64_t round) {
    Writer w;
    w.raw(seed).u64(round);
    return w.bytes();
}

VrfOutput compute_vrf(const SecretKey& sk, const Digest& seed, uint64_t round) {
    VrfOutput out;
    out.proof = sign(sk, vrf_message(seed, round));
    out.value = hash(out.proof);
    return out;
}

bool verify_vrf(const PublicKey& vk, const Digest& seed, uint64_t round, const VrfOutput& out) {
    if (hash(out.proof) != out.value) return false;
    return verify(vk, vrf_message(seed, round), out.proof);
}

bool low_bits_zero(const Digest& value, unsigned k_bits) {
    if (k_bits > value.size() * 8) return false;
    for (unsigned i = 0; i < k_bits; ++i) {
        uint8_t byte = value[value.size() - 1 - i / 8];
        if ((byte >> (i % 8)) & 1) return false;
    }
    return true;
}

bool sortition_member(const VrfOutput& vrf, unsigned k_bits) { return low_bits_zero(vrf.value, k_bits); }

std::string to_hex(std::span<const uint8_t> data) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(data.size() * 2);
    for (uint8_t b : data) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 15]);
    }
    return s;
}

bool from_hex(std::string_view hex, std::span<uint8_t> out) {
    if (hex.size() != out.size() * 2) return false;
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    for (size_t i = 0; i < out.size(); ++i) {
        int hi = nib(hex[2 * i]), lo = nib(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) return false;
        out[i] = uint8_t(hi << 4 | lo);
    }
    return true;
}

bool VerifyCache::verify(const PublicKey& vk, std::span<const uint8_t> msg, const Signature& sig) {
    std::string key;
    key.reserve(vk.size() + sig.size() + msg.size());
    key.append(reinterpret_cast<const char*>(vk.data()), vk.size());
    key.append(reinterpret_cast<const char*>(sig.data()), sig.size());
    key.append(reinterpret_cast<const char*>(msg.data()), msg.size());
    auto it = memo_.find(key);
    if (it != memo_.end()) {
        ++hits_;
        return it->second;
    }
    ++misses_;
    bool ok = blockene::verify(vk, msg, sig);
    memo_.emplace(std::move(key), ok);
    return ok;
}

bool VerifyCache::verify_vrf(const PublicKey& vk, const Digest& seed, uint64_t round, const VrfOutput& out) {
    if (hash(out.proof) != out.value) return false;
    return verify(vk, vrf_message(seed, round), out.proof);
}

}  // namespace blockene
