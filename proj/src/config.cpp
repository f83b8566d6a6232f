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

#include "blockene/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace blockene {

namespace {

namespace pt = boost::property_tree;

struct BadValue {
    std::string why;
};

std::string trim(std::string s) {
    auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
    return s;
}

template <class T>
T parse_uint(const std::string& v) {
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) throw BadValue{"expected a non-negative integer, got '" + v + "'"};
    return out;
}

double parse_double(const std::string& v) {
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d)) throw BadValue{"expected a number, got '" + v + "'"};
    return d;
}

double parse_fraction(const std::string& v) {
    const double d = parse_double(v);
    if (d < 0 || d > 1) throw BadValue{"expected a fraction in [0, 1], got '" + v + "'"};
    return d;
}

StrategySet parse_strategies(const std::string& v) {
    auto s = StrategySet::parse(v);
    if (!s) throw BadValue{"unknown strategy list '" + v + "'"};
    return *s;
}

using Setter = std::function<void(SimConfig&, const std::string&)>;

struct Field {
    std::string path;
    Setter set;
};

#define U(name, member) Field{name, [](SimConfig& c, const std::string& v) { c.member = parse_uint<decltype(c.member)>(v); }}
#define D(name, member) Field{name, [](SimConfig& c, const std::string& v) { c.member = parse_double(v); }}
#define F(name, member) Field{name, [](SimConfig& c, const std::string& v) { c.member = parse_fraction(v); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> f = {
        Field{"name", [](SimConfig& c, const std::string& v) { c.name = v; }},
        U("citizens", citizens),
        U("politicians", politicians),
        U("sortition_bits", sortition_bits),
        Field{"committee_mean", [](SimConfig&, const std::string& v) { parse_uint<unsigned>(v); }},
        U("proposer_bits", proposer_bits),
        U("m", m),
        U("rho", rho),
        U("blocks", blocks),
        U("seed", seed),
        U("tx_rate", tx_rate),
        U("gossip_k", gossip_k),
        U("pool_size_bytes", pool_size_bytes),
        U("pool_capacity", pool_capacity),
        U("accounts", accounts),
        U("initial_balance", initial_balance),
        U("late_joiners", late_joiners),
        U("join_height", join_height),
        U("max_consensus_steps", max_consensus_steps),
        U("merkle.depth", merkle.depth),
        U("merkle.theta", merkle.theta),
        F("read.mu", read.mu),
        U("read.tau", read.tau),
        U("read.B", read.B),
        U("write.a", write.a),
        U("write.c", write.c),
        U("write.tau_w", write.tau_w),
        D("network.citizen_rate", network.citizen_rate),
        D("network.politician_rate", network.politician_rate),
        D("network.latency_min_s", network.latency_min_s),
        D("network.latency_max_s", network.latency_max_s),
        F("adversary.corrupt_citizen_frac", corrupt_citizen_frac),
        F("adversary.corrupt_politician_frac", corrupt_politician_frac),
        Field{"adversary.politician_strategies",
              [](SimConfig& c, const std::string& v) { c.politician_strategies = parse_strategies(v); }},
        Field{"adversary.citizen_strategies",
              [](SimConfig& c, const std::string& v) { c.citizen_strategies = parse_strategies(v); }},
        U("adversary.stale_lag", stale_lag),
        U("thresholds.delta", delta),
        U("thresholds.t_star", t_star),
        U("thresholds.n_b_tilde", n_b_tilde),
        U("thresholds.n_g_star", n_g_star),
        U("thresholds.fooled", fooled),
        F("thresholds.alpha", bound_alpha),
        F("thresholds.gamma", bound_gamma),
        U("thresholds.kappa", kappa),
    };
    return f;
}

#undef U
#undef D
#undef F

// Line on which `path` is set in the raw text, or 0.
size_t line_of(const std::string& text, const std::string& path) {
    const auto dot = path.find('.');
    const std::string section = dot == std::string::npos ? "" : path.substr(0, dot);
    const std::string key = dot == std::string::npos ? path : path.substr(dot + 1);
    std::istringstream in(text);
    std::string line, current;
    size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        const std::string t = trim(line);
        if (t.empty() || t[0] == ';' || t[0] == '#') continue;
        if (t.front() == '[' && t.back() == ']') {
            current = trim(t.substr(1, t.size() - 2));
            continue;
        }
        const auto eq = t.find('=');
        if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) return n;
    }
    return 0;
}

[[noreturn]] void fail(const std::string& origin, size_t line, const std::string& field, const std::string& why) {
    std::string where = origin;
    if (line) where += ":" + std::to_string(line);
    throw ConfigError(where + ": field '" + field + "': " + why);
}

}  // namespace

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        const char* v = std::getenv(name.c_str());
        if (!v) return std::nullopt;
        return std::string(v);
    };
}

std::vector<std::string> config_fields() {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.path);
    return out;
}

std::string env_name(const std::string& field) {
    std::string out = "BLOCKENE_";
    for (char ch : field) out += ch == '.' ? '_' : char(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

SimConfig parse_config(const std::string& text, const std::string& origin, const EnvLookup& env) {
    pt::ptree tree;
    {
        std::istringstream in(text);
        try {
            pt::ini_parser::read_ini(in, tree);
        } catch (const pt::ini_parser_error& e) {
            throw ConfigError(origin + ":" + std::to_string(e.line()) + ": syntax: " + e.message());
        }
    }
    std::set<std::string> known;
    for (const auto& f : fields()) known.insert(f.path);
    for (const auto& [k, v] : tree) {
        if (v.empty()) {
            if (!known.count(k)) fail(origin, line_of(text, k), k, "unknown field");
            continue;
        }
        for (const auto& [k2, v2] : v) {
            const std::string path = k + "." + k2;
            if (!v2.empty() || !known.count(path)) fail(origin, line_of(text, path), path, "unknown field");
        }
    }

    SimConfig c;
    for (const auto& f : fields()) {
        std::optional<std::string> value;
        size_t line = 0;
        std::string source = origin;
        if (auto ov = env(env_name(f.path))) {
            value = trim(*ov);
            source = "environment " + env_name(f.path);
        } else if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(f.path, '.'))) {
            value = trim(*v);
            line = line_of(text, f.path);
        }
        if (!value) continue;
        try {
            f.set(c, *value);
        } catch (const BadValue& e) {
            fail(source, line, f.path, e.why);
        }
    }
    if (auto mean = env(env_name("committee_mean")).value_or(tree.get<std::string>("committee_mean", "")); !mean.empty()) {
        const unsigned want = parse_uint<unsigned>(trim(mean));
        unsigned bits = 0;
        while (bits < 31 && (c.citizens >> bits) > want) ++bits;
        if (want == 0 || (c.citizens >> bits) != want || (uint64_t(want) << bits) != c.citizens)
            fail(origin, line_of(text, "committee_mean"), "committee_mean",
                 "must equal citizens / 2^k for an integer k");
        c.sortition_bits = bits;
    }
    try {
        validate_config(c);
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

SimConfig load_config(const std::string& path, const EnvLookup& env) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path, env);
}

}  // namespace blockene
