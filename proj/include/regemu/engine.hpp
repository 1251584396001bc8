#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "regemu/base_object.hpp"
#include "regemu/emulation.hpp"
#include "regemu/event.hpp"
#include "regemu/layout.hpp"
#include "regemu/scheduler.hpp"
#include "regemu/workload.hpp"

namespace regemu {

enum class RunStatus {
    Completed,       // workload done, clients idle, nothing left to deliver
    Deadlock,        // a client waits but no action is enabled
    PolicyDeadlock,  // actions are enabled but the policy withholds them all
    StepCapExceeded, // livelock guard tripped
    AutomatonError,
};

struct RunOutcome {
    History history;
    RunStatus status = RunStatus::Completed;
    std::string diagnostic;

    bool ok() const { return status == RunStatus::Completed; }
};

// Deterministic single-process event engine for the asynchronous fault-prone
// shared-memory model. Low-level writes take effect exactly at their Respond
// step; reads snapshot object state at their Respond step. Client automaton
// handlers (invoke handling, respond handling) run atomically within one
// scheduler step; each emitted event still occupies its own time index.
class Engine {
public:
    static constexpr std::uint64_t default_step_cap = 1'000'000;

    Engine(const Placement& placement, Emulation& emulation, Scheduler& scheduler,
           SplitMix64 rng, std::uint64_t step_cap = default_step_cap)
        : placement_(placement), emu_(emulation), sched_(scheduler), rng_(rng),
          step_cap_(step_cap) {
        for (ObjectId b = 0; b < placement.object_count(); ++b)
            objects_.push_back(BaseObject{placement.kinds[b], ts_v0, false});
        server_crashed_.assign(placement.n_servers, false);
    }

    RunOutcome run(const Workload& workload, const FaultPlan& faults) {
        workload_ = workload;
        issued_.assign(workload.size(), false);
        returned_.assign(workload.size(), false);
        faults_ = faults;
        applied_server_crash_.assign(faults.server_crashes.size(), false);
        applied_client_crash_.assign(faults.client_crashes.size(), false);

        RunOutcome out;
        while (true) {
            if (history_.length() >= step_cap_) {
                out.status = RunStatus::StepCapExceeded;
                out.diagnostic = "step cap " + std::to_string(step_cap_) + " reached";
                break;
            }
            inject_due_crashes();

            EnabledSet enabled = build_enabled();
            if (enabled.empty() && !all_issued()) {
                // Only future-gated items remain: jump time forward to the
                // earliest gate rather than stalling.
                release_earliest_gate();
                enabled = build_enabled();
            }
            if (enabled.empty()) {
                out.status = quiescent() ? RunStatus::Completed : RunStatus::Deadlock;
                if (out.status == RunStatus::Deadlock) out.diagnostic = stuck_report();
                break;
            }
            auto action = sched_.next(enabled, rng_);
            if (!action) {
                out.status = quiescent() ? RunStatus::Completed : RunStatus::PolicyDeadlock;
                if (out.status == RunStatus::PolicyDeadlock) out.diagnostic = stuck_report();
                break;
            }
            try {
                apply(*action, enabled);
            } catch (const std::exception& ex) {
                out.status = RunStatus::AutomatonError;
                out.diagnostic = "client " + std::to_string(acting_client_) + ": " +
                                 ex.what() +
                                 "; state " + emu_.dump_state(acting_client_).dump();
                break;
            }
        }
        out.history = history_;
        return out;
    }

    const History& history() const { return history_; }
    const std::map<OpId, PendingOp>& pending() const { return pending_; }
    const std::vector<BaseObject>& objects() const { return objects_; }
    bool server_crashed(ServerId s) const { return server_crashed_[s]; }
    bool client_busy(ClientId c) const {
        auto it = busy_.find(c);
        return it != busy_.end() && it->second;
    }

private:
    void append(Event e) {
        e.t = history_.length() + 1;
        history_.events.push_back(e);
        sched_.observe(history_.events.back());
    }

    void inject_due_crashes() {
        for (std::size_t i = 0; i < faults_.server_crashes.size(); ++i) {
            auto [s, step] = faults_.server_crashes[i];
            if (!applied_server_crash_[i] && step <= history_.length()) {
                applied_server_crash_[i] = true;
                if (server_crashed_[s]) continue;
                crash_server(s);
            }
        }
        for (std::size_t i = 0; i < faults_.client_crashes.size(); ++i) {
            auto [c, step] = faults_.client_crashes[i];
            if (!applied_client_crash_[i] && step <= history_.length()) {
                applied_client_crash_[i] = true;
                if (client_crashed_.count(c)) continue;
                Event e;
                e.kind = EventKind::CrashClient;
                e.client = c;
                append(e);
                client_crashed_.insert(c);
            }
        }
    }

    // A server crash takes all objects it stores down with it; their pending
    // ops never respond.
    void crash_server(ServerId s) {
        Event e;
        e.kind = EventKind::CrashServer;
        e.server = s;
        append(e);
        server_crashed_[s] = true;
        for (ObjectId b = 0; b < placement_.object_count(); ++b)
            if (placement_.delta[b] == s) objects_[b].crashed = true;
    }

    bool chain_clear(std::size_t idx) const {
        for (std::size_t j = 0; j < idx; ++j)
            if (workload_[j].chained && !returned_[j]) return false;
        return true;
    }

    EnabledSet build_enabled() {
        EnabledSet en;
        for (std::size_t i = 0; i < workload_.size(); ++i) {
            const WorkItem& it = workload_[i];
            if (issued_[i]) continue;
            if (it.not_before > history_.length()) continue;
            if (client_crashed_.count(it.client)) continue;
            if (client_busy(it.client)) continue;
            if (it.chained && !chain_clear(i)) continue;
            en.invokes.push_back(i);
            en.invoke_clients.push_back(it.client);
        }
        for (const auto& [id, p] : pending_)
            if (!objects_[p.object].crashed) en.responds.push_back(&p);
        return en;
    }

    bool all_issued() const {
        for (std::size_t i = 0; i < issued_.size(); ++i) {
            if (issued_[i]) continue;
            if (client_crashed_.count(workload_[i].client)) continue;  // never runnable
            return false;
        }
        return true;
    }

    bool any_client_busy() const {
        for (auto& [c, b] : busy_)
            if (b && !client_crashed_.count(c)) return true;
        return false;
    }

    bool quiescent() const { return all_issued() && !any_client_busy(); }

    void release_earliest_gate() {
        std::size_t best = workload_.size();
        std::uint64_t best_step = 0;
        for (std::size_t i = 0; i < workload_.size(); ++i) {
            if (issued_[i] || client_crashed_.count(workload_[i].client)) continue;
            if (client_busy(workload_[i].client)) continue;
            if (workload_[i].chained && !chain_clear(i)) continue;
            if (best == workload_.size() || workload_[i].not_before < best_step) {
                best = i;
                best_step = workload_[i].not_before;
            }
        }
        if (best < workload_.size()) workload_[best].not_before = 0;
    }

    std::string stuck_report() const {
        std::string s = "stuck at t=" + std::to_string(history_.length()) +
                        "; pending ops:";
        for (const auto& [id, p] : pending_)
            s += " #" + std::to_string(id) + "(c" + std::to_string(p.client) + ",b" +
                 std::to_string(p.object) + ")";
        s += "; busy clients:";
        for (auto& [c, b] : busy_)
            if (b) s += " c" + std::to_string(c);
        return s;
    }

    void emit_effect(ClientId c, const Effect& eff) {
        for (const TriggerReq& tr : eff.triggers) {
            PendingOp p;
            p.id = next_op_id_++;
            p.client = c;
            p.object = tr.object;
            p.op = tr.op;
            p.tag = tr.tag;
            p.triggered_at = history_.length() + 1;
            Event e;
            e.kind = EventKind::Trigger;
            e.client = c;
            e.object = tr.object;
            e.op_id = p.id;
            e.lop = tr.op;
            append(e);
            pending_.emplace(p.id, p);
        }
        if (eff.returns) {
            Event e;
            e.kind = EventKind::Return;
            e.client = c;
            e.ret_value = eff.ret;
            append(e);
            busy_[c] = false;
        }
    }

    void apply(const Action& a, const EnabledSet& enabled) {
        if (a.kind == Action::Invoke) {
            const std::size_t idx = enabled.invokes.at(a.invoke_index);
            const WorkItem& it = workload_[idx];
            acting_client_ = it.client;
            issued_[idx] = true;
            invoked_item_[it.client].push_back(idx);
            busy_[it.client] = true;
            Event e;
            e.kind = EventKind::Invoke;
            e.client = it.client;
            e.hop = it.op;
            append(e);
            Effect eff = emu_.on_invoke(it.client, it.op);
            if (eff.returns) mark_returned(it.client);
            emit_effect(it.client, eff);
            return;
        }
        auto it = pending_.find(a.op_id);
        if (it == pending_.end()) throw std::logic_error("respond of unknown op");
        PendingOp p = it->second;
        acting_client_ = p.client;
        pending_.erase(it);
        if (objects_[p.object].crashed)
            throw std::logic_error("respond of op on crashed object");
        // Linearization point: the op takes effect here.
        BaseOpResult r = apply_base_op(objects_[p.object], p.op);
        objects_[p.object] = r.obj;
        Event e;
        e.kind = EventKind::Respond;
        e.op_id = p.id;
        e.value = r.response;
        append(e);
        // A crashed client's write still takes effect; no handler runs.
        if (client_crashed_.count(p.client)) return;
        TriggerReq back{p.object, p.op, p.tag};
        Effect eff = emu_.on_respond(p.client, back, r.response);
        if (eff.returns) mark_returned(p.client);
        emit_effect(p.client, eff);
    }

    void mark_returned(ClientId c) {
        auto& items = invoked_item_[c];
        if (!items.empty()) {
            returned_[items.front()] = true;
            items.erase(items.begin());
        }
    }

    const Placement& placement_;
    Emulation& emu_;
    Scheduler& sched_;
    SplitMix64 rng_;
    std::uint64_t step_cap_;

    std::vector<BaseObject> objects_;
    std::vector<bool> server_crashed_;
    std::set<ClientId> client_crashed_;
    std::map<ClientId, bool> busy_;
    std::map<ClientId, std::vector<std::size_t>> invoked_item_;
    std::map<OpId, PendingOp> pending_;
    OpId next_op_id_ = 1;
    ClientId acting_client_ = -1;
    History history_;

    Workload workload_;
    std::vector<bool> issued_;
    std::vector<bool> returned_;
    FaultPlan faults_;
    std::vector<bool> applied_server_crash_;
    std::vector<bool> applied_client_crash_;
};

} // namespace regemu
