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

#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "blockene/sim.hpp"

namespace blockene {

using Json = nlohmann::ordered_json;

inline constexpr int kMetricsSchema = 1;
inline constexpr int kDumpSchema = 1;

class DumpError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// One metrics record per height, fields in a fixed order.
Json metrics_record(const BlockMetrics& m);
BlockMetrics parse_metrics_record(const Json& j);
std::string metrics_stream(const std::vector<BlockMetrics>& blocks);

// Run summary: configuration, derived thresholds, invariant counters.
Json summary_record(const SimResult& r);
Json config_record(const SimConfig& c);

// Chain dump as JSON lines: a genesis line followed by one line per block.
std::string serialize_chain_dump(const ChainDump& d);
ChainDump parse_chain_dump(std::istream& in);
ChainDump parse_chain_dump(const std::string& text);

}  // namespace blockene
