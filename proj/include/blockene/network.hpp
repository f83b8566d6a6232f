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
#include <map>
#include <queue>
#include <vector>

namespace blockene {

// Simulated time in microseconds.
using SimTime = int64_t;
inline constexpr SimTime kSecond = 1000000;

struct NetworkModel {
    double citizen_rate = 1e6;      // bytes per simulated second
    double politician_rate = 4e7;
    double latency_min_s = 0.020;
    double latency_max_s = 0.120;
};

// Deterministic event loop keyed by (time, insertion sequence).
class EventQueue {
public:
    void schedule(SimTime at, std::function<void()> fn);
    bool step();
    void run();
    void run_until(SimTime t);
    SimTime now() const { return now_; }
    size_t pending() const { return q_.size(); }

private:
    struct Item {
        SimTime at;
        uint64_t seq;
        std::function<void()> fn;
        bool operator>(const Item& o) const { return at != o.at ? at > o.at : seq > o.seq; }
    };
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> q_;
    SimTime now_ = 0;
    uint64_t seq_ = 0;
};

// One direction of a node's link, as a set of disjoint busy intervals.
// Reservations may be made out of time order; each takes the earliest gap.
class LinkSchedule {
public:
    // Reserves `dur` at or after `earliest`; returns the start.
    SimTime reserve(SimTime earliest, SimTime dur);
    // Forgets intervals that end at or before `t`.
    void prune(SimTime t);
    size_t intervals() const { return busy_.size(); }

private:
    std::map<SimTime, SimTime> busy_;  // start -> end
};

// Nodes 0..politicians-1 are politicians, the rest citizens. A transfer
// occupies the sender's uplink for size / sender rate and the receiver's
// downlink for size / receiver rate, the latter starting no earlier than
// the upload. It arrives one link latency after both have finished.
class Network {
public:
    Network(NetworkModel model, unsigned politicians, unsigned citizens, uint64_t seed);

    unsigned politicians() const { return politicians_; }
    unsigned size() const { return unsigned(up_link_.size()); }
    bool is_politician(unsigned node) const { return node < politicians_; }
    unsigned citizen_node(unsigned citizen) const { return politicians_ + citizen; }
    double rate(unsigned node) const { return is_politician(node) ? model_.politician_rate : model_.citizen_rate; }
    SimTime latency(unsigned from, unsigned to) const;

    // Returns the arrival time.
    SimTime transfer(unsigned from, unsigned to, uint64_t bytes, SimTime start);
    // Sender-to-all-politicians broadcast; returns the last arrival.
    SimTime broadcast(unsigned from, uint64_t bytes, SimTime start);

    uint64_t up_bytes(unsigned node) const { return up_[node]; }
    uint64_t down_bytes(unsigned node) const { return down_[node]; }
    uint64_t total_up() const;
    uint64_t total_down() const;
    uint64_t transfers() const { return transfers_; }
    void reset_meters();
    // Drops link reservations that end before `t`; later transfers must not
    // start before it.
    void prune(SimTime t);

private:
    NetworkModel model_;
    unsigned politicians_;
    uint64_t seed_;
    std::vector<LinkSchedule> up_link_, down_link_;
    std::vector<uint64_t> up_, down_;
    uint64_t transfers_ = 0;
};

}  // namespace blockene
