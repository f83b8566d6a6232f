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

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blockene/sim.hpp"

namespace blockene {

// Environment lookup used for overrides; defaults to getenv.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

// Parses INI-style text: top-level scenario keys plus [merkle], [read],
// [write], [network], [adversary] and [thresholds] sections. Every field may
// be overridden by BLOCKENE_<SECTION>_<KEY> (or BLOCKENE_<KEY> for
// top-level keys), upper-cased. Throws ConfigError naming the origin, line
// and field; the result is validated.
SimConfig parse_config(const std::string& text, const std::string& origin = "<config>",
                       const EnvLookup& env = process_env());
// Reads and parses a file; an unreadable file is an std::ios_base::failure.
SimConfig load_config(const std::string& path, const EnvLookup& env = process_env());

// Names of all recognised fields as "section.key" (or "key").
std::vector<std::string> config_fields();
std::string env_name(const std::string& field);

}  // namespace blockene
