#pragma once

#include <set>
#include <utility>
#include <vector>

#include "regemu/event.hpp"
#include "regemu/rng.hpp"
#include "regemu/types.hpp"

namespace regemu {

// One scheduled high-level invocation. `chained` items form a global sequence:
// item j is ready only once every earlier chained item has returned. Chaining
// all writes yields write-sequential runs; reads are typically unchained.
struct WorkItem {
    ClientId client = 0;
    HighLevelOp op;
    std::uint64_t not_before = 0;  // earliest step (event index) for the invoke
    bool chained = false;
};

using Workload = std::vector<WorkItem>;

// Scheduled crashes. Each entry fires once the history reaches `step` events.
struct FaultPlan {
    std::vector<std::pair<ServerId, std::uint64_t>> server_crashes;
    std::vector<std::pair<ClientId, std::uint64_t>> client_crashes;

    int distinct_servers() const {
        std::set<ServerId> s;
        for (auto& [sv, _] : server_crashes) s.insert(sv);
        return static_cast<int>(s.size());
    }

    // Harness discipline for f-tolerant emulation tests.
    void validate(const SystemConfig& cfg) const {
        if (distinct_servers() > cfg.f)
            throw std::invalid_argument("FaultPlan: more than f distinct servers crash");
        for (auto& [sv, _] : server_crashes)
            if (sv < 0 || sv >= cfg.n)
                throw std::invalid_argument("FaultPlan: unknown server");
    }
};

// Seeded write-sequential workload: 1..max_writes chained writes by random
// writers with distinct values, plus up to max_reads unchained reads by
// dedicated reader clients (ids k, k+1, ...).
inline Workload make_ws_workload(const SystemConfig& cfg, SplitMix64 rng,
                                 int max_writes = 4, int max_reads = 4,
                                 bool final_chained_read = false) {
    Workload w;
    const int writes = 1 + static_cast<int>(rng.below(max_writes));
    const int reads = static_cast<int>(rng.below(max_reads + 1));
    for (int i = 0; i < writes; ++i) {
        WorkItem it;
        it.client = static_cast<ClientId>(rng.below(cfg.k));
        it.op = HighLevelOp::write(1000 + i);
        it.chained = true;
        w.push_back(it);
    }
    for (int i = 0; i < reads; ++i) {
        WorkItem it;
        it.client = static_cast<ClientId>(cfg.k + rng.below(3));
        it.op = HighLevelOp::read();
        it.not_before = rng.below(40);
        w.push_back(it);
    }
    if (final_chained_read) {
        WorkItem it;
        it.client = cfg.k + 3;
        it.op = HighLevelOp::read();
        it.chained = true;  // starts only after every write returned
        w.push_back(it);
    }
    return w;
}

inline FaultPlan make_random_faults(const SystemConfig& cfg, SplitMix64 rng,
                                    int max_crashes) {
    FaultPlan plan;
    const int crashes = static_cast<int>(rng.below(max_crashes + 1));
    std::set<ServerId> chosen;
    while (static_cast<int>(chosen.size()) < crashes)
        chosen.insert(static_cast<ServerId>(rng.below(cfg.n)));
    for (ServerId s : chosen)
        plan.server_crashes.emplace_back(s, rng.below(30));
    return plan;
}

} // namespace regemu
