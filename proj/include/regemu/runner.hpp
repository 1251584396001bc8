#pragma once

#include <memory>
#include <string>

#include "regemu/checker.hpp"
#include "regemu/experiment.hpp"

namespace regemu {

struct SimResult {
    Placement placement;
    RunOutcome outcome;

    const History& history() const { return outcome.history; }
};

// One seeded fair-random run of the named emulation.
inline SimResult run_fair(const std::string& emulation, const SystemConfig& cfg,
                          const Workload& workload, const FaultPlan& faults,
                          std::uint64_t seed,
                          std::uint64_t step_cap = Engine::default_step_cap) {
    SimResult r;
    r.placement = make_placement(emulation, cfg);
    auto emu = make_emulation(emulation, cfg, r.placement);
    FairRandomScheduler sched;
    Engine engine(r.placement, *emu, sched, SplitMix64(seed).split("sched"), step_cap);
    r.outcome = engine.run(workload, faults);
    return r;
}

// A run under a caller-provided scheduler (scripted / blocking tests).
inline SimResult run_with(const std::string& emulation, const SystemConfig& cfg,
                          const Workload& workload, const FaultPlan& faults,
                          Scheduler& sched, std::uint64_t seed = 0,
                          std::uint64_t step_cap = Engine::default_step_cap) {
    SimResult r;
    r.placement = make_placement(emulation, cfg);
    auto emu = make_emulation(emulation, cfg, r.placement);
    Engine engine(r.placement, *emu, sched, SplitMix64(seed).split("sched"), step_cap);
    r.outcome = engine.run(workload, faults);
    return r;
}

} // namespace regemu
