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

#include "blockene/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "blockene/crypto.hpp"

namespace blockene {

void EventQueue::schedule(SimTime at, std::function<void()> fn) {
    if (at < now_) at = now_;
    q_.push({at, seq_++, std::move(fn)});
}

bool EventQueue::step() {
    if (q_.empty()) return false;
    Item it = q_.top();
    q_.pop();
    now_ = it.at;
    it.fn();
    return true;
}

void EventQueue::run() {
    while (step()) {
    }
}

void EventQueue::run_until(SimTime t) {
    while (!q_.empty() && q_.top().at <= t) step();
    now_ = std::max(now_, t);
}

SimTime LinkSchedule::reserve(SimTime earliest, SimTime dur) {
    SimTime t = earliest;
    auto it = busy_.upper_bound(t);
    if (it != busy_.begin()) {
        auto prev = std::prev(it);
        if (prev->second > t) t = prev->second;
    }
    while (it != busy_.end() && it->first < t + dur) {
        t = std::max(t, it->second);
        ++it;
    }
    if (dur == 0) return t;
    SimTime start = t, end = t + dur;
    // Coalesce with touching neighbours.
    if (it != busy_.end() && it->first == end) {
        end = it->second;
        it = busy_.erase(it);
    }
    if (it != busy_.begin()) {
        auto prev = std::prev(it);
        if (prev->second == start) {
            prev->second = end;
            return t;
        }
    }
    busy_.emplace_hint(it, start, end);
    return t;
}

void LinkSchedule::prune(SimTime t) {
    for (auto it = busy_.begin(); it != busy_.end() && it->first < t;)
        it = it->second <= t ? busy_.erase(it) : std::next(it);
}

Network::Network(NetworkModel model, unsigned politicians, unsigned citizens, uint64_t seed)
    : model_(model),
      politicians_(politicians),
      seed_(seed),
      up_link_(politicians + citizens),
      down_link_(politicians + citizens),
      up_(politicians + citizens, 0),
      down_(politicians + citizens, 0) {
    if (model.citizen_rate <= 0 || model.politician_rate <= 0) throw std::invalid_argument("rates must be positive");
    if (model.latency_min_s < 0 || model.latency_max_s < model.latency_min_s)
        throw std::invalid_argument("bad latency range");
}

SimTime Network::latency(unsigned from, unsigned to) const {
    Digest d = Hasher().put("link").put_u64(seed_).put_u32(from).put_u32(to).finish();
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | d[i];
    const double u = double(v >> 11) * 0x1p-53;
    const double s = model_.latency_min_s + u * (model_.latency_max_s - model_.latency_min_s);
    return SimTime(std::llround(s * kSecond));
}

SimTime Network::transfer(unsigned from, unsigned to, uint64_t bytes, SimTime start) {
    const SimTime up_dur = SimTime(std::ceil(double(bytes) / rate(from) * kSecond));
    const SimTime down_dur = SimTime(std::ceil(double(bytes) / rate(to) * kSecond));
    const SimTime up_begin = up_link_[from].reserve(start, up_dur);
    const SimTime down_begin = down_link_[to].reserve(up_begin, down_dur);
    const SimTime end = std::max(up_begin + up_dur, down_begin + down_dur);
    up_[from] += bytes;
    down_[to] += bytes;
    ++transfers_;
    return end + latency(from, to);
}

SimTime Network::broadcast(unsigned from, uint64_t bytes, SimTime start) {
    SimTime last = start;
    for (unsigned p = 0; p < politicians_; ++p)
        if (p != from) last = std::max(last, transfer(from, p, bytes, start));
    return last;
}

uint64_t Network::total_up() const {
    uint64_t t = 0;
    for (auto v : up_) t += v;
    return t;
}

uint64_t Network::total_down() const {
    uint64_t t = 0;
    for (auto v : down_) t += v;
    return t;
}

void Network::prune(SimTime t) {
    for (auto& l : up_link_) l.prune(t);
    for (auto& l : down_link_) l.prune(t);
}

void Network::reset_meters() {
    std::fill(up_.begin(), up_.end(), 0);
    std::fill(down_.begin(), down_.end(), 0);
}

}  // namespace blockene
