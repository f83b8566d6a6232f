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

#include "blockene/consensus.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace blockene {

StepKind step_kind(unsigned step) {
    if (step == 0) return StepKind::Propose;
    if (step == 1) return StepKind::Grade;
    switch ((step - 2) % 3) {
        case 0: return StepKind::FixedZero;
        case 1: return StepKind::FixedOne;
        default: return StepKind::Flip;
    }
}

const char* step_name(StepKind k) {
    switch (k) {
        case StepKind::Propose: return "propose";
        case StepKind::Grade: return "grade";
        case StepKind::FixedZero: return "fixed0";
        case StepKind::FixedOne: return "fixed1";
        case StepKind::Flip: return "flip";
    }
    return "?";
}

int common_coin(uint64_t height, unsigned step, const Digest& prev_hash) {
    Digest d = Hasher().put("coin").put_u64(height).put_u32(step).put(prev_hash).finish();
    return d[31] & 1;
}

Bytes vote_message(uint64_t height, unsigned step, std::span<const uint8_t> payload) {
    Writer w;
    w.raw(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>("vote"), 4)).u64(height).u32(step).raw(payload);
    return w.bytes();
}

bool vote_valid(const SignedVote& v) { return verify(v.voter, vote_message(v.height, v.step, v.payload), v.sig); }

bool equivocation_valid(const EquivocationEvidence& e) {
    return e.first.voter == e.second.voter && e.first.height == e.second.height && e.first.step == e.second.step &&
           e.first.payload != e.second.payload && vote_valid(e.first) && vote_valid(e.second);
}

namespace {

struct MemberState {
    Payload vote = 0;  // what the member casts next step
    Payload y = kNullValue;
    bool decided = false;
    int decided_bit = -1;
    int decided_step = -1;
    int carry = 0;  // steps left voting after the decision
    bool stopped = false;
};

struct Outcome {
    Payload vote = 0;
    Payload y = kNullValue;
    bool set_y = false;
    bool decide = false;
};

// Counts over one viewer's step view. Duplicated voters in `extra` with
// conflicting payloads are dropped.
std::map<Payload, unsigned> honest_tally(std::span<const std::optional<Payload>> honest) {
    std::map<Payload, unsigned> c;
    for (const auto& v : honest)
        if (v) ++c[*v];
    return c;
}

std::map<Payload, unsigned> tally(const std::map<Payload, unsigned>& base, std::span<const Vote> extra) {
    std::map<Payload, unsigned> c = base;
    if (extra.empty()) return c;
    std::map<unsigned, std::optional<Payload>> seen;
    for (const auto& v : extra) {
        auto it = seen.find(v.voter);
        if (it == seen.end())
            seen[v.voter] = v.payload;
        else if (it->second && *it->second != v.payload)
            it->second.reset();
    }
    for (const auto& [voter, p] : seen)
        if (p) ++c[*p];
    return c;
}

unsigned count_of(const std::map<Payload, unsigned>& c, Payload p) {
    auto it = c.find(p);
    return it == c.end() ? 0 : it->second;
}

Outcome transition(StepKind kind, const std::map<Payload, unsigned>& c, unsigned n, unsigned t, int coin) {
    const unsigned q = n - t;
    Outcome o;
    switch (kind) {
        case StepKind::Propose: {
            o.vote = kNullValue;
            for (const auto& [p, k] : c)
                if (k >= q) o.vote = p;
            break;
        }
        case StepKind::Grade: {
            Payload w = kNullValue;
            unsigned best = 0;
            for (const auto& [p, k] : c)
                if (p != kNullValue && k > best) w = p, best = k;
            o.vote = best >= q ? 0 : 1;
            o.set_y = true;
            o.y = best >= t + 1 ? w : kNullValue;
            break;
        }
        case StepKind::FixedZero: {
            const unsigned c0 = count_of(c, 0), c1 = count_of(c, 1);
            if (c0 >= q)
                o.vote = 0, o.decide = true;
            else
                o.vote = c1 >= q ? 1 : 0;
            break;
        }
        case StepKind::FixedOne: {
            const unsigned c0 = count_of(c, 0), c1 = count_of(c, 1);
            if (c1 >= q)
                o.vote = 1, o.decide = true;
            else
                o.vote = c0 >= q ? 0 : 1;
            break;
        }
        case StepKind::Flip: {
            const unsigned c0 = count_of(c, 0), c1 = count_of(c, 1);
            o.vote = c0 >= q ? 0 : c1 >= q ? 1 : Payload(coin);
            break;
        }
    }
    return o;
}

Bytes payload_bytes(StepKind kind, Payload p, const std::vector<Digest>& values) {
    if (kind == StepKind::Propose || kind == StepKind::Grade) {
        if (p == kNullValue || p >= values.size()) return {};
        return Bytes(values[p].begin(), values[p].end());
    }
    return Bytes{uint8_t(p)};
}

struct Core {
    bool terminated = false;
    unsigned steps = 0;
    ConsensusTranscript tr;
    std::vector<MemberState> st;
};

Core run_core(std::span<const MemberRole> roles, std::vector<Payload> initial, std::vector<Digest> values,
              unsigned first_step, VoteAdversary* adversary, const ConsensusParams& params) {
    const unsigned n = unsigned(roles.size());
    const unsigned t = fault_bound(n);
    Core core;
    auto& tr = core.tr;
    tr.height = params.height;
    tr.prev_hash = params.prev_hash;
    tr.n = n;
    tr.t = t;
    tr.roles.assign(roles.begin(), roles.end());
    tr.inputs = initial;
    core.st.resize(n);
    std::vector<unsigned> corrupt;
    for (unsigned i = 0; i < n; ++i) {
        core.st[i].vote = initial[i];
        if (roles[i] == MemberRole::Corrupt) corrupt.push_back(i);
    }
    auto& st = core.st;
    std::vector<std::optional<Payload>> honest(n);
    std::vector<unsigned> viewers;
    std::vector<std::vector<Vote>> extras(n);

    for (unsigned s = first_step; s < first_step + params.max_steps; ++s) {
        const StepKind kind = step_kind(s);
        viewers.clear();
        bool pending = false;
        for (unsigned i = 0; i < n; ++i) {
            honest[i].reset();
            if (roles[i] != MemberRole::Honest || st[i].stopped) continue;
            honest[i] = st[i].vote;
            if (!st[i].decided) viewers.push_back(i), pending = true;
        }
        if (!pending) {
            core.terminated = true;
            break;
        }
        for (auto& e : extras) e.clear();
        const int coin = kind == StepKind::Flip ? common_coin(params.height, s, params.prev_hash) : -1;
        if (adversary && !corrupt.empty()) {
            StepContext ctx{params.height, s, kind, n, t, honest, viewers, coin, &values};
            adversary->extras(ctx, corrupt, extras);
            for (unsigned i = 0; i < n; ++i) {
                if (roles[i] != MemberRole::Honest) {
                    extras[i].clear();
                    continue;
                }
                std::erase_if(extras[i], [&](const Vote& v) { return v.voter >= n || roles[v.voter] != MemberRole::Corrupt; });
            }
        }
        StepRecord rec;
        rec.step = s;
        rec.kind = kind;
        rec.coin = coin;
        rec.honest = honest;
        rec.extras = extras;
        tr.steps.push_back(std::move(rec));

        const auto base = honest_tally(honest);
        for (unsigned i = 0; i < n; ++i) {
            if (roles[i] != MemberRole::Honest || st[i].stopped) continue;
            auto& m = st[i];
            if (m.decided) {
                if (--m.carry <= 0) m.stopped = true;
                continue;
            }
            const Outcome o = transition(kind, tally(base, extras[i]), n, t, coin);
            m.vote = o.vote;
            if (o.set_y) m.y = o.y;
            if (o.decide) {
                m.decided = true;
                m.decided_bit = int(o.vote);
                m.decided_step = int(s);
                m.carry = 3;
                core.steps = s + 1 - first_step;
            }
        }
    }
    if (!core.terminated) {
        core.terminated = true;
        for (unsigned i = 0; i < n; ++i)
            if (roles[i] == MemberRole::Honest && !st[i].decided) core.terminated = false;
    }
    tr.values = std::move(values);
    tr.outputs.assign(n, std::nullopt);
    tr.decided_step.assign(n, -1);
    for (unsigned i = 0; i < n; ++i) {
        if (roles[i] != MemberRole::Honest || !st[i].decided) continue;
        tr.decided_step[i] = st[i].decided_step;
        tr.outputs[i] = st[i].decided_bit == 0 ? st[i].y : kNullValue;
    }
    return core;
}

}  // namespace

ConsensusResult run_string_consensus(const ConsensusSetup& setup, const ConsensusParams& params) {
    const unsigned n = unsigned(setup.roles.size());
    if (setup.inputs.size() != n) throw std::invalid_argument("inputs size mismatch");
    std::vector<Digest> values(1);
    std::vector<Payload> initial(n, kNullValue);
    for (unsigned i = 0; i < n; ++i) {
        if (setup.roles[i] != MemberRole::Honest || !setup.inputs[i]) continue;
        auto it = std::find(values.begin() + 1, values.end(), *setup.inputs[i]);
        if (it == values.end()) {
            values.push_back(*setup.inputs[i]);
            initial[i] = Payload(values.size() - 1);
        } else {
            initial[i] = Payload(it - values.begin());
        }
    }
    Core core = run_core(setup.roles, std::move(initial), std::move(values), 0, setup.adversary, params);

    ConsensusResult r;
    r.terminated = core.terminated;
    r.steps = core.steps;
    std::optional<Payload> common;
    r.agreed = true;
    for (unsigned i = 0; i < n; ++i) {
        if (setup.roles[i] != MemberRole::Honest) continue;
        const auto& o = core.tr.outputs[i];
        if (!o) continue;
        if (common && *common != *o) r.agreed = false;
        common = o;
    }
    if (common && *common != kNullValue) r.output = core.tr.values[*common];

    if (setup.corrupt_signer && setup.vks.size() == n) {
        for (const auto& rec : core.tr.steps) {
            std::map<unsigned, std::set<Payload>> by_voter;
            for (const auto& ex : rec.extras)
                for (const auto& v : ex) by_voter[v.voter].insert(v.payload);
            for (const auto& [voter, ps] : by_voter) {
                if (ps.size() < 2) continue;
                auto it = ps.begin();
                EquivocationEvidence e;
                for (SignedVote* sv : {&e.first, &e.second}) {
                    sv->height = params.height;
                    sv->step = rec.step;
                    sv->voter = setup.vks[voter];
                    sv->payload = payload_bytes(rec.kind, *it++, core.tr.values);
                    sv->sig = setup.corrupt_signer(voter, vote_message(sv->height, sv->step, sv->payload));
                }
                r.evidence.push_back(std::move(e));
            }
        }
    }
    r.transcript = std::move(core.tr);
    return r;
}

BitResult bba_bit_consensus(std::span<const MemberRole> roles, std::span<const uint8_t> bits, VoteAdversary* adversary,
                            const ConsensusParams& params) {
    const unsigned n = unsigned(roles.size());
    if (bits.size() != n) throw std::invalid_argument("bits size mismatch");
    std::vector<Payload> initial(n);
    for (unsigned i = 0; i < n; ++i) initial[i] = bits[i] ? 1 : 0;
    Core core = run_core(roles, std::move(initial), std::vector<Digest>(1), 2, adversary, params);
    BitResult r;
    r.terminated = core.terminated;
    r.steps = core.steps;
    r.agreed = true;
    for (unsigned i = 0; i < n; ++i) {
        if (roles[i] != MemberRole::Honest || !core.st[i].decided) continue;
        if (r.bit >= 0 && r.bit != core.st[i].decided_bit) r.agreed = false;
        r.bit = core.st[i].decided_bit;
    }
    return r;
}

unsigned round_count(const ConsensusResult& r) {
    int last = -1;
    for (int s : r.transcript.decided_step) last = std::max(last, s);
    return unsigned(last + 1);
}

std::vector<std::string> audit_transcript(const ConsensusTranscript& tr) {
    std::vector<std::string> out;
    const unsigned n = tr.n;
    if (tr.roles.size() != n || tr.inputs.size() != n || tr.outputs.size() != n) return {"malformed transcript"};
    if (tr.t != fault_bound(n)) out.push_back("fault bound mismatch");
    unsigned corrupt = 0;
    for (auto r : tr.roles) corrupt += r == MemberRole::Corrupt;
    if (corrupt > tr.t) out.push_back("corrupt members exceed fault bound");

    // Replay.
    std::vector<MemberState> st(n);
    for (unsigned i = 0; i < n; ++i) st[i].vote = tr.inputs[i];
    for (const auto& rec : tr.steps) {
        if (rec.honest.size() != n || rec.extras.size() != n) {
            out.push_back("malformed step " + std::to_string(rec.step));
            return out;
        }
        const int coin = rec.kind == StepKind::Flip ? common_coin(tr.height, rec.step, tr.prev_hash) : -1;
        if (coin != rec.coin) out.push_back("coin mismatch at step " + std::to_string(rec.step));
        for (unsigned i = 0; i < n; ++i) {
            if (tr.roles[i] != MemberRole::Honest || st[i].stopped) {
                if (rec.honest[i]) out.push_back("vote from inactive member at step " + std::to_string(rec.step));
                continue;
            }
            if (!rec.honest[i] || *rec.honest[i] != st[i].vote)
                out.push_back("member " + std::to_string(i) + " vote mismatch at step " + std::to_string(rec.step));
        }
        const auto base = honest_tally(rec.honest);
        for (unsigned i = 0; i < n; ++i) {
            if (tr.roles[i] != MemberRole::Honest || st[i].stopped) continue;
            auto& m = st[i];
            if (m.decided) {
                if (--m.carry <= 0) m.stopped = true;
                continue;
            }
            const Outcome o = transition(rec.kind, tally(base, rec.extras[i]), n, tr.t, coin);
            m.vote = o.vote;
            if (o.set_y) m.y = o.y;
            if (o.decide) {
                m.decided = true;
                m.decided_bit = int(o.vote);
                m.decided_step = int(rec.step);
                m.carry = 3;
            }
        }
    }
    std::optional<Payload> common;
    for (unsigned i = 0; i < n; ++i) {
        if (tr.roles[i] != MemberRole::Honest) continue;
        std::optional<Payload> replayed;
        if (st[i].decided) replayed = st[i].decided_bit == 0 ? st[i].y : kNullValue;
        if (replayed != tr.outputs[i]) out.push_back("member " + std::to_string(i) + " output does not replay");
        if (!replayed) continue;
        if (common && *common != *replayed) out.push_back("agreement violated");
        common = replayed;
    }
    // Validity.
    std::optional<Payload> same;
    bool unanimous = true;
    for (unsigned i = 0; i < n; ++i) {
        if (tr.roles[i] != MemberRole::Honest) continue;
        if (same && *same != tr.inputs[i]) unanimous = false;
        same = tr.inputs[i];
    }
    if (unanimous && same && common && *common != *same) out.push_back("validity violated");
    // Property 1.
    if (common && *common != kNullValue) {
        unsigned support = 0;
        for (unsigned i = 0; i < n; ++i)
            if (tr.roles[i] == MemberRole::Honest && tr.inputs[i] == *common) ++support;
        const unsigned need = (n + 1) / 3;  // ceil((n-1)/3)
        if (support < need)
            out.push_back("non-NULL output backed by " + std::to_string(support) + " honest inputs < " + std::to_string(need));
    }
    return out;
}

// Adversaries.

namespace {

Payload leading_value(const StepContext& ctx) {
    std::map<Payload, unsigned> c;
    for (const auto& v : ctx.honest_votes)
        if (v && *v != kNullValue) ++c[*v];
    Payload best = kNullValue;
    unsigned k = 0;
    for (const auto& [p, cnt] : c)
        if (cnt > k) best = p, k = cnt;
    return best;
}

bool value_step(StepKind k) { return k == StepKind::Propose || k == StepKind::Grade; }

}  // namespace

void EquivocatingVotes::extras(const StepContext& ctx, std::span<const unsigned> corrupt,
                               std::vector<std::vector<Vote>>& per_viewer) {
    Payload a = 0, b = 1;
    if (value_step(ctx.kind)) {
        a = leading_value(ctx);
        const Digest bogus = Hasher().put("equivocate").put_u64(ctx.height).finish();
        auto it = std::find(ctx.values->begin() + 1, ctx.values->end(), bogus);
        if (it == ctx.values->end()) {
            ctx.values->push_back(bogus);
            b = Payload(ctx.values->size() - 1);
        } else {
            b = Payload(it - ctx.values->begin());
        }
        if (ctx.kind == StepKind::Grade) b = kNullValue;
    }
    for (size_t k = 0; k < ctx.viewers.size(); ++k) {
        const unsigned v = ctx.viewers[k];
        for (unsigned c : corrupt) per_viewer[v].push_back({c, k % 2 == 0 ? a : b});
    }
}

void ManipulatingVotes::extras(const StepContext& ctx, std::span<const unsigned> corrupt,
                               std::vector<std::vector<Vote>>& per_viewer) {
    const Payload lead = leading_value(ctx);
    const std::optional<Payload> options[3] = {value_step(ctx.kind) ? kNullValue : Payload(0),
                                               value_step(ctx.kind) ? lead : Payload(1), std::nullopt};
    std::vector<Vote> block;
    const auto base = honest_tally(ctx.honest_votes);
    for (size_t k = 0; k < ctx.viewers.size(); ++k) {
        const unsigned v = ctx.viewers[k];
        // Target outcome alternates across viewers; for value steps the
        // target is the leading value on even viewers and NULL otherwise.
        const bool even = k % 2 == 0;
        int best = -1, best_rank = 99;
        for (int o = 0; o < 3; ++o) {
            block.clear();
            if (options[o])
                for (unsigned c : corrupt) block.push_back({c, *options[o]});
            const Outcome out = transition(ctx.kind, tally(base, block), ctx.n, ctx.t, ctx.coin);
            bool hit;
            if (ctx.kind == StepKind::Propose)
                hit = (out.vote != kNullValue) == even;
            else
                hit = out.vote == (even ? 0u : 1u);
            const int rank = (out.decide ? 2 : 0) + (hit ? 0 : 1);
            if (rank < best_rank) best = o, best_rank = rank;
        }
        if (options[best])
            for (unsigned c : corrupt) per_viewer[v].push_back({c, *options[best]});
    }
}

}  // namespace blockene
