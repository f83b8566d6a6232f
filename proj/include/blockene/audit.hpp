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
#include <string>

#include "blockene/sim.hpp"

namespace blockene {

struct AuditReport {
    bool ok = true;
    uint64_t height = 0;     // first failing height (0 = genesis)
    std::string check;       // name of the violated check
    std::string diagnostic;
    uint64_t blocks = 0;     // blocks verified
    uint64_t txs = 0;        // transactions replayed
};

// Independently re-verifies a chain dump from its genesis: hash and
// sub-block chaining, transaction replay against a from-scratch Merkle
// tree with the recorded roots, transaction signatures, and commit
// signature thresholds with membership proofs. Stops at the first failure.
AuditReport audit_chain(const ChainDump& dump);

std::string describe(const AuditReport& r);

}  // namespace blockene
