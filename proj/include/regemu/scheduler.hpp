#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "regemu/emulation.hpp"
#include "regemu/event.hpp"
#include "regemu/rng.hpp"
#include "regemu/types.hpp"

namespace regemu {

// A low-level op in flight: triggered, not yet responded.
struct PendingOp {
    OpId id = 0;
    ClientId client = -1;
    ObjectId object = -1;
    LowOp op;
    OpTag tag;
    std::uint64_t triggered_at = 0;
};

struct Action {
    enum Kind { Invoke, Respond } kind = Respond;
    std::size_t invoke_index = 0;  // index into EnabledSet::invokes
    OpId op_id = 0;
};

struct EnabledSet {
    std::vector<std::size_t> invokes;        // ready workload item indices
    std::vector<ClientId> invoke_clients;    // parallel to invokes
    std::vector<const PendingOp*> responds;  // deliverable (object not crashed)

    bool empty() const { return invokes.empty() && responds.empty(); }
};

// A policy may only choose from the enabled set. Returning nullopt on a
// nonempty set means every deliverable action is withheld by the policy
// (the adversary's deadlock report path).
class Scheduler {
public:
    virtual ~Scheduler() = default;
    virtual std::optional<Action> next(const EnabledSet& enabled, SplitMix64& rng) = 0;
    virtual void observe(const Event& e) { (void)e; }
};

// Fair by drain: picks uniformly among enabled actions, so once the workload
// is exhausted every deliverable respond is eventually delivered.
class FairRandomScheduler : public Scheduler {
public:
    std::optional<Action> next(const EnabledSet& enabled, SplitMix64& rng) override {
        const std::size_t total = enabled.invokes.size() + enabled.responds.size();
        if (total == 0) return std::nullopt;
        const std::size_t pick = rng.below(total);
        Action a;
        if (pick < enabled.invokes.size()) {
            a.kind = Action::Invoke;
            a.invoke_index = pick;
        } else {
            a.kind = Action::Respond;
            a.op_id = enabled.responds[pick - enabled.invokes.size()]->id;
        }
        return a;
    }
};

// Deterministic FIFO delivery with an optional block predicate; ops the
// predicate holds for are never responded. Used by tests to pin covering
// writes without the full adversary.
class FifoScheduler : public Scheduler {
public:
    FifoScheduler() = default;
    explicit FifoScheduler(std::function<bool(const PendingOp&)> block)
        : block_(std::move(block)) {}

    std::optional<Action> next(const EnabledSet& enabled, SplitMix64&) override {
        const PendingOp* oldest = nullptr;
        for (const PendingOp* p : enabled.responds) {
            if (block_ && block_(*p)) continue;
            if (!oldest || p->id < oldest->id) oldest = p;
        }
        if (oldest) return Action{Action::Respond, 0, oldest->id};
        if (!enabled.invokes.empty()) return Action{Action::Invoke, 0, 0};
        return std::nullopt;
    }

private:
    std::function<bool(const PendingOp&)> block_;
};

// Invoke-first FIFO: drives clients eagerly, then drains responds in trigger
// order. Handy for reproducing specific traces in unit tests.
class InvokeFirstScheduler : public Scheduler {
public:
    std::optional<Action> next(const EnabledSet& enabled, SplitMix64&) override {
        if (!enabled.invokes.empty()) return Action{Action::Invoke, 0, 0};
        const PendingOp* oldest = nullptr;
        for (const PendingOp* p : enabled.responds)
            if (!oldest || p->id < oldest->id) oldest = p;
        if (oldest) return Action{Action::Respond, 0, oldest->id};
        return std::nullopt;
    }
};

} // namespace regemu
