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

#include "blockene/metrics.hpp"

#include <istream>
#include <sstream>

namespace blockene {

namespace {

template <size_t N>
std::string hex(const std::array<uint8_t, N>& a) {
    return to_hex(a);
}

template <size_t N>
std::array<uint8_t, N> unhex(const Json& j, const char* what) {
    std::array<uint8_t, N> out{};
    if (!j.is_string() || j.get_ref<const std::string&>().size() != 2 * N ||
        !from_hex(j.get_ref<const std::string&>(), out))
        throw DumpError(std::string("bad hex field: ") + what);
    return out;
}

const Json& field(const Json& j, const char* name) {
    if (!j.is_object() || !j.contains(name)) throw DumpError(std::string("missing field: ") + name);
    return j.at(name);
}

template <class T>
T num(const Json& j, const char* name) {
    const Json& v = field(j, name);
    if (!v.is_number_integer() && !v.is_boolean()) throw DumpError(std::string("not an integer: ") + name);
    return v.get<T>();
}

Json percentiles_json(const Percentiles& p) { return Json{{"p50", p.p50}, {"p90", p.p90}, {"max", p.max}}; }

Percentiles parse_percentiles(const Json& j) {
    return {num<uint64_t>(j, "p50"), num<uint64_t>(j, "p90"), num<uint64_t>(j, "max")};
}

Json identity_json(const Identity& id) {
    return Json{{"tk", hex(id.tk)}, {"vk", hex(id.vk)}, {"cert", hex(id.cert)}, {"added_at", id.added_at}};
}

Identity parse_identity(const Json& j) {
    Identity id;
    id.tk = unhex<32>(field(j, "tk"), "tk");
    id.vk = unhex<32>(field(j, "vk"), "vk");
    id.cert = unhex<64>(field(j, "cert"), "cert");
    id.added_at = num<uint64_t>(j, "added_at");
    return id;
}

Json tx_json(const Transaction& tx) {
    Json j{{"uuid", tx.uuid},
           {"kind", int(tx.kind)},
           {"originator", hex(tx.originator)},
           {"nonce", tx.nonce},
           {"debit", tx.debit_key},
           {"credit", tx.credit_key},
           {"amount", tx.amount}};
    if (tx.kind == TxKind::AddIdentity) j["identity"] = identity_json(tx.identity);
    j["sig"] = hex(tx.sig);
    return j;
}

Transaction parse_tx(const Json& j) {
    Transaction tx;
    tx.uuid = num<uint64_t>(j, "uuid");
    const int kind = num<int>(j, "kind");
    if (kind != 0 && kind != 1) throw DumpError("bad transaction kind");
    tx.kind = TxKind(kind);
    tx.originator = unhex<32>(field(j, "originator"), "originator");
    tx.nonce = num<uint64_t>(j, "nonce");
    tx.debit_key = num<Key>(j, "debit");
    tx.credit_key = num<Key>(j, "credit");
    tx.amount = num<uint32_t>(j, "amount");
    if (tx.kind == TxKind::AddIdentity) tx.identity = parse_identity(field(j, "identity"));
    tx.sig = unhex<64>(field(j, "sig"), "sig");
    return tx;
}

Json commitment_json(const Commitment& c) {
    return Json{{"politician", c.politician}, {"round", c.round}, {"pool", hex(c.pool_digest)}, {"sig", hex(c.sig)}};
}

Commitment parse_commitment(const Json& j) {
    Commitment c;
    c.politician = num<uint32_t>(j, "politician");
    c.round = num<uint64_t>(j, "round");
    c.pool_digest = unhex<32>(field(j, "pool"), "pool");
    c.sig = unhex<64>(field(j, "sig"), "sig");
    return c;
}

Json block_json(const Block& b) {
    Json txs = Json::array(), ids = Json::array(), news = Json::array();
    for (const auto& tx : b.txs) txs.push_back(tx_json(tx));
    for (const auto& c : b.id_list) ids.push_back(commitment_json(c));
    for (const auto& id : b.subblock.new_identities) news.push_back(identity_json(id));
    return Json{{"height", b.height},
                {"prev", hex(b.hash_prev_block)},
                {"txs", std::move(txs)},
                {"id_list", std::move(ids)},
                {"subblock",
                 Json{{"prev_block", hex(b.subblock.hash_prev_block)},
                      {"prev_subblock", hex(b.subblock.hash_prev_subblock)},
                      {"new_identities", std::move(news)}}}};
}

Block parse_block(const Json& j) {
    Block b;
    b.height = num<uint64_t>(j, "height");
    b.hash_prev_block = unhex<32>(field(j, "prev"), "prev");
    for (const auto& t : field(j, "txs")) b.txs.push_back(parse_tx(t));
    for (const auto& c : field(j, "id_list")) b.id_list.push_back(parse_commitment(c));
    const Json& sb = field(j, "subblock");
    b.subblock.hash_prev_block = unhex<32>(field(sb, "prev_block"), "prev_block");
    b.subblock.hash_prev_subblock = unhex<32>(field(sb, "prev_subblock"), "prev_subblock");
    for (const auto& id : field(sb, "new_identities")) b.subblock.new_identities.push_back(parse_identity(id));
    return b;
}

Json sig_json(const CommitSignature& s) {
    return Json{{"signer", hex(s.signer)},
                {"vrf", hex(s.membership.value)},
                {"vrf_proof", hex(s.membership.proof)},
                {"sig", hex(s.sig)}};
}

CommitSignature parse_sig(const Json& j) {
    CommitSignature s;
    s.signer = unhex<32>(field(j, "signer"), "signer");
    s.membership.value = unhex<32>(field(j, "vrf"), "vrf");
    s.membership.proof = unhex<64>(field(j, "vrf_proof"), "vrf_proof");
    s.sig = unhex<64>(field(j, "sig"), "sig");
    return s;
}

}  // namespace

Json metrics_record(const BlockMetrics& m) {
    return Json{{"schema", kMetricsSchema},
                {"height", m.height},
                {"hash", hex(m.hash)},
                {"gs_root", hex(m.gs_root)},
                {"empty", m.empty},
                {"pools", m.pools},
                {"tx_count", m.tx_count},
                {"sim_time_us", m.time_us},
                {"duration_us", m.duration_us},
                {"consensus_rounds", m.consensus_rounds},
                {"signatures", m.signatures},
                {"rival_signatures", m.rival_signatures},
                {"committee", m.committee},
                {"proposers", m.proposers},
                {"winner_honest", m.winner_honest},
                {"null_inputs", m.null_inputs},
                {"gossip_complete", m.gossip_complete},
                {"gossip_honest_up_p50", m.gossip_honest_up_p50},
                {"gossip_ticks", m.gossip_ticks},
                {"ledger_blamed", m.ledger_blamed},
                {"read_corrections", m.read_corrections},
                {"write_corrections", m.write_corrections},
                {"evidence", m.evidence},
                {"abstentions", m.abstentions},
                {"citizen_up", percentiles_json(m.citizen_up)},
                {"citizen_down", percentiles_json(m.citizen_down)},
                {"politician_up", percentiles_json(m.politician_up)},
                {"politician_down", percentiles_json(m.politician_down)}};
}

BlockMetrics parse_metrics_record(const Json& j) {
    if (num<int>(j, "schema") != kMetricsSchema) throw DumpError("unsupported metrics schema");
    BlockMetrics m;
    m.height = num<uint64_t>(j, "height");
    m.hash = unhex<32>(field(j, "hash"), "hash");
    m.gs_root = unhex<10>(field(j, "gs_root"), "gs_root");
    m.empty = field(j, "empty").get<bool>();
    m.pools = num<unsigned>(j, "pools");
    m.tx_count = num<size_t>(j, "tx_count");
    m.time_us = num<SimTime>(j, "sim_time_us");
    m.duration_us = num<SimTime>(j, "duration_us");
    m.consensus_rounds = num<unsigned>(j, "consensus_rounds");
    m.signatures = num<unsigned>(j, "signatures");
    m.rival_signatures = num<unsigned>(j, "rival_signatures");
    m.committee = num<unsigned>(j, "committee");
    m.proposers = num<unsigned>(j, "proposers");
    m.winner_honest = field(j, "winner_honest").get<bool>();
    m.null_inputs = num<unsigned>(j, "null_inputs");
    m.gossip_complete = field(j, "gossip_complete").get<bool>();
    m.gossip_honest_up_p50 = num<uint64_t>(j, "gossip_honest_up_p50");
    m.gossip_ticks = num<unsigned>(j, "gossip_ticks");
    m.ledger_blamed = num<unsigned>(j, "ledger_blamed");
    m.read_corrections = num<unsigned>(j, "read_corrections");
    m.write_corrections = num<unsigned>(j, "write_corrections");
    m.evidence = num<unsigned>(j, "evidence");
    m.abstentions = num<unsigned>(j, "abstentions");
    m.citizen_up = parse_percentiles(field(j, "citizen_up"));
    m.citizen_down = parse_percentiles(field(j, "citizen_down"));
    m.politician_up = parse_percentiles(field(j, "politician_up"));
    m.politician_down = parse_percentiles(field(j, "politician_down"));
    return m;
}

std::string metrics_stream(const std::vector<BlockMetrics>& blocks) {
    std::string out;
    for (const auto& b : blocks) out += metrics_record(b).dump() + "\n";
    return out;
}

Json config_record(const SimConfig& c) {
    return Json{{"name", c.name},
                {"citizens", c.citizens},
                {"politicians", c.politicians},
                {"corrupt_citizen_frac", c.corrupt_citizen_frac},
                {"corrupt_politician_frac", c.corrupt_politician_frac},
                {"sortition_bits", c.sortition_bits},
                {"proposer_bits", c.proposer_bits},
                {"m", c.m},
                {"rho", c.rho},
                {"blocks", c.blocks},
                {"seed", c.seed},
                {"tx_rate", c.tx_rate},
                {"merkle", Json{{"depth", c.merkle.depth}, {"theta", c.merkle.theta}}},
                {"read", Json{{"mu", c.read.mu}, {"tau", c.read.tau}, {"B", c.read.B}}},
                {"write", Json{{"a", c.write.a}, {"c", c.write.c}, {"tau_w", c.write.tau_w}}},
                {"gossip_k", c.gossip_k},
                {"pool_size_bytes", c.pool_size_bytes},
                {"pool_capacity", c.pool_capacity},
                {"network",
                 Json{{"citizen_rate", c.network.citizen_rate},
                      {"politician_rate", c.network.politician_rate},
                      {"latency_min_s", c.network.latency_min_s},
                      {"latency_max_s", c.network.latency_max_s}}},
                {"politician_strategies", c.politician_strategies.str()},
                {"citizen_strategies", c.citizen_strategies.str()}};
}

Json summary_record(const SimResult& r) {
    size_t empties = 0, pools = 0;
    for (const auto& b : r.blocks) {
        empties += b.empty;
        pools += b.pools;
    }
    const double n = r.blocks.empty() ? 1.0 : double(r.blocks.size());
    Json failures = Json::array();
    for (const auto& f : r.failures) failures.push_back(f);
    return Json{{"schema", kMetricsSchema},
                {"config", config_record(r.config)},
                {"thresholds",
                 Json{{"t_star", r.params.t_star},
                      {"delta", r.params.delta},
                      {"n_b_tilde", r.params.n_b_tilde},
                      {"n_g_star", r.params.n_g_star},
                      {"fooled", r.params.fooled},
                      {"vote_threshold", r.params.vote_threshold()}}},
                {"blocks", r.blocks.size()},
                {"empty_blocks", empties},
                {"mean_pools", double(pools) / n},
                {"txs_committed", r.txs_committed},
                {"throughput_tx_per_s", r.throughput()},
                {"end_time_us", r.end_time},
                {"forks", r.forks},
                {"stalls", r.stalls},
                {"property1_violations", r.property1_violations},
                {"gossip_incomplete", r.gossip_incomplete},
                {"ledger_divergence", r.ledger_divergence},
                {"inventory_evidence", r.inventory_evidence},
                {"max_commit_delay_blocks", r.max_commit_delay},
                {"pending_at_end", r.pending_at_end},
                {"ok", r.ok()},
                {"failures", std::move(failures)}};
}

std::string serialize_chain_dump(const ChainDump& d) {
    const GenesisInfo& g = d.genesis;
    Json ids = Json::array(), state = Json::array();
    for (const auto& id : g.identities) ids.push_back(identity_json(id));
    for (const auto& kv : g.state) state.push_back(Json::array({kv.key, kv.value}));
    Json gj{{"schema", kDumpSchema},
            {"kind", "genesis"},
            {"seed", g.seed},
            {"merkle", Json{{"depth", g.merkle.depth}, {"theta", g.merkle.theta}}},
            {"sortition_bits", g.sortition_bits},
            {"t_star", g.t_star},
            {"registrar", hex(g.registrar)},
            {"identities", std::move(ids)},
            {"state", std::move(state)},
            {"block", block_json(g.block)}};
    std::string out = gj.dump() + "\n";
    for (const auto& r : d.records) {
        Json sigs = Json::array();
        for (const auto& s : r.sigs) sigs.push_back(sig_json(s));
        Json rj{{"kind", "block"}, {"block", block_json(r.block)}, {"gs_root", hex(r.gs_root)}, {"sigs", std::move(sigs)}};
        out += rj.dump() + "\n";
    }
    return out;
}

ChainDump parse_chain_dump(std::istream& in) {
    ChainDump d;
    std::string line;
    size_t lineno = 0;
    bool have_genesis = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            const Json j = Json::parse(line);
            const std::string kind = field(j, "kind").get<std::string>();
            if (kind == "genesis") {
                if (have_genesis) throw DumpError("second genesis record");
                if (num<int>(j, "schema") != kDumpSchema) throw DumpError("unsupported dump schema");
                GenesisInfo& g = d.genesis;
                g.seed = num<uint64_t>(j, "seed");
                g.merkle.depth = num<unsigned>(field(j, "merkle"), "depth");
                g.merkle.theta = num<unsigned>(field(j, "merkle"), "theta");
                g.sortition_bits = num<unsigned>(j, "sortition_bits");
                g.t_star = num<unsigned>(j, "t_star");
                g.registrar = unhex<32>(field(j, "registrar"), "registrar");
                for (const auto& id : field(j, "identities")) g.identities.push_back(parse_identity(id));
                for (const auto& kv : field(j, "state")) {
                    if (!kv.is_array() || kv.size() != 2) throw DumpError("bad state entry");
                    g.state.push_back({kv[0].get<Key>(), kv[1].get<Value>()});
                }
                g.block = parse_block(field(j, "block"));
                have_genesis = true;
            } else if (kind == "block") {
                if (!have_genesis) throw DumpError("block record before genesis");
                ChainRecord r;
                r.block = parse_block(field(j, "block"));
                r.gs_root = unhex<10>(field(j, "gs_root"), "gs_root");
                for (const auto& s : field(j, "sigs")) r.sigs.push_back(parse_sig(s));
                d.records.push_back(std::move(r));
            } else {
                throw DumpError("unknown record kind " + kind);
            }
        } catch (const DumpError& e) {
            throw DumpError("line " + std::to_string(lineno) + ": " + e.what());
        } catch (const nlohmann::json::exception& e) {
            throw DumpError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!have_genesis) throw DumpError("dump has no genesis record");
    return d;
}

ChainDump parse_chain_dump(const std::string& text) {
    std::istringstream in(text);
    return parse_chain_dump(in);
}

}  // namespace blockene
