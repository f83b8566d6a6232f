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

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blockene/crypto.hpp"

namespace blockene {

enum class MemberRole : uint8_t { Honest, Halted, Corrupt };

// Steps 0 and 1 reduce string agreement to a bit; binary agreement then
// cycles fixed-to-0, fixed-to-1, coin flip.
enum class StepKind : uint8_t { Propose, Grade, FixedZero, FixedOne, Flip };
StepKind step_kind(unsigned step);
const char* step_name(StepKind k);

// Value steps carry an index into the run's value table (0 = NULL); bit
// steps carry 0 or 1.
using Payload = uint32_t;
inline constexpr Payload kNullValue = 0;

struct Vote {
    unsigned voter = 0;
    Payload payload = 0;
    bool operator==(const Vote&) const = default;
};

inline unsigned fault_bound(unsigned n) { return n == 0 ? 0 : (n - 1) / 3; }
int common_coin(uint64_t height, unsigned step, const Digest& prev_hash);

struct StepContext {
    uint64_t height = 0;
    unsigned step = 0;
    StepKind kind = StepKind::Propose;
    unsigned n = 0, t = 0;
    std::span<const std::optional<Payload>> honest_votes;  // per member
    std::span<const unsigned> viewers;                      // honest members still voting
    int coin = -1;                                          // known in advance; -1 off flip steps
    std::vector<Digest>* values = nullptr;                  // adversaries may append
};

// Supplies the votes of corrupt members as seen by each honest viewer.
class VoteAdversary {
public:
    virtual ~VoteAdversary() = default;
    virtual void extras(const StepContext& ctx, std::span<const unsigned> corrupt,
                        std::vector<std::vector<Vote>>& per_viewer) = 0;
};

// Shows value A to even viewers and value B to odd ones on every step.
class EquivocatingVotes : public VoteAdversary {
public:
    void extras(const StepContext& ctx, std::span<const unsigned> corrupt,
                std::vector<std::vector<Vote>>& per_viewer) override;
};

// Per viewer, picks among {corrupt vote 0 / NULL, vote 1 / leading value,
// silence} the option that avoids a decision and pushes the viewer toward
// an alternating split.
class ManipulatingVotes : public VoteAdversary {
public:
    void extras(const StepContext& ctx, std::span<const unsigned> corrupt,
                std::vector<std::vector<Vote>>& per_viewer) override;
};

struct StepRecord {
    unsigned step = 0;
    StepKind kind = StepKind::Propose;
    int coin = -1;
    std::vector<std::optional<Payload>> honest;  // votes cast by honest members
    std::vector<std::vector<Vote>> extras;       // per member, corrupt votes it saw
};

struct ConsensusTranscript {
    uint64_t height = 0;
    Digest prev_hash{};
    unsigned n = 0, t = 0;
    std::vector<MemberRole> roles;
    std::vector<Digest> values;             // index 0 is a placeholder for NULL
    std::vector<Payload> inputs;            // per member; honest entries meaningful
    std::vector<StepRecord> steps;
    std::vector<std::optional<Payload>> outputs;  // per honest member
    std::vector<int> decided_step;
};

struct SignedVote {
    uint64_t height = 0;
    unsigned step = 0;
    PublicKey voter{};
    Bytes payload;
    Signature sig{};
};

Bytes vote_message(uint64_t height, unsigned step, std::span<const uint8_t> payload);
bool vote_valid(const SignedVote& v);

struct EquivocationEvidence {
    SignedVote first, second;
};
bool equivocation_valid(const EquivocationEvidence& e);

struct ConsensusParams {
    uint64_t height = 0;
    Digest prev_hash{};
    unsigned max_steps = 62;
};

struct ConsensusSetup {
    std::vector<MemberRole> roles;
    std::vector<std::optional<Digest>> inputs;  // honest inputs; nullopt = NULL
    VoteAdversary* adversary = nullptr;
    // Keys for signing equivocation evidence; optional.
    std::vector<PublicKey> vks;
    std::function<Signature(unsigned member, std::span<const uint8_t> msg)> corrupt_signer;
};

struct ConsensusResult {
    bool terminated = false;
    bool agreed = false;
    std::optional<Digest> output;  // nullopt = NULL (empty block)
    unsigned steps = 0;            // steps until the last honest decision
    ConsensusTranscript transcript;
    std::vector<EquivocationEvidence> evidence;
};

ConsensusResult run_string_consensus(const ConsensusSetup& setup, const ConsensusParams& params);

// Binary agreement alone; inputs are honest bits.
struct BitResult {
    bool terminated = false;
    bool agreed = false;
    int bit = -1;
    unsigned steps = 0;
};
BitResult bba_bit_consensus(std::span<const MemberRole> roles, std::span<const uint8_t> bits,
                            VoteAdversary* adversary, const ConsensusParams& params);

// Steps used by the last deciding honest member.
unsigned round_count(const ConsensusResult& r);

// Replays every honest member from the recorded views and checks
// agreement, validity and that a non-NULL output was the input of at least
// ceil((n-1)/3) honest members. Returns one line per violation.
std::vector<std::string> audit_transcript(const ConsensusTranscript& t);

}  // namespace blockene
