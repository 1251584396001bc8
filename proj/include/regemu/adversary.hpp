#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "regemu/event.hpp"
#include "regemu/layout.hpp"
#include "regemu/scheduler.hpp"

namespace regemu {

struct FactViolation {
    char item = '?';      // a..k
    int phase = 0;
    std::uint64_t t = 0;
    std::string message;
};

// The Ad_i bookkeeping: per-phase sets over the run so far. Covering is a
// property of low-level register writes; max-register and CAS traffic never
// covers anything, so against those emulations the adversary blocks nothing.
//
//   Tr_i  objects with a write triggered since the phase start
//   Rr_i  objects whose post-phase-start write responded
//   Cov_i newly covered objects (Cov \ Cov(t_{i-1}))
//   Q_i   delta(Cov_i) \ F while that stays <= f servers, else frozen
//   F_i   servers of F with a responded post-phase-start write
//   M_i   delta(Cov_i) restricted to F \ F_i
//   G_i   M_i when |Q_i| < |F_i|, else empty
struct AdversaryState {
    // configuration
    std::vector<ServerId> delta;  // object -> server
    std::set<ServerId> F;         // |F| = f+1, fixed for the whole run
    int f = 0;

    // whole-run tracking
    int phase = 1;
    std::uint64_t t = 0;                 // events seen
    std::uint64_t phase_start = 0;       // t_{i-1}
    std::map<ObjectId, int> cover_count; // pending register writes per object
    struct PendingWrite {
        ObjectId object = -1;
        ClientId client = -1;
        std::uint64_t triggered_at = 0;
    };
    std::map<OpId, PendingWrite> pending_writes;
    std::set<ClientId> completed_writers;
    std::map<ClientId, bool> open_write;

    // per-phase sets
    std::set<ObjectId> cov_at_phase_start;  // Cov(t_{i-1})
    std::set<ClientId> c_frozen;            // C(t_{i-1})
    std::set<ObjectId> tr;                  // Tr_i
    std::set<ObjectId> rr;                  // Rr_i
    std::set<ServerId> q;                   // Q_i, with the freeze rule
    int writes_returned_in_phase = 0;

    // previous-step snapshots for the monotonicity facts
    std::set<ServerId> q_prev, fi_prev, m_prev;

    void init(const Placement& placement, std::set<ServerId> f_set, int f_threshold) {
        delta = placement.delta;
        F = std::move(f_set);
        f = f_threshold;
        if (static_cast<int>(F.size()) != f + 1)
            throw std::invalid_argument("adversary: |F| must be f+1");
    }

    std::set<ObjectId> cov() const {
        std::set<ObjectId> c;
        for (auto& [b, n] : cover_count)
            if (n > 0) c.insert(b);
        return c;
    }

    std::set<ObjectId> cov_i() const {
        std::set<ObjectId> c;
        for (auto& [b, n] : cover_count)
            if (n > 0 && !cov_at_phase_start.count(b)) c.insert(b);
        return c;
    }

    std::set<ServerId> image(const std::set<ObjectId>& objs) const {
        std::set<ServerId> s;
        for (ObjectId b : objs) s.insert(delta[b]);
        return s;
    }

    std::set<ServerId> cov_i_servers_outside_f() const {
        std::set<ServerId> s;
        for (ObjectId b : cov_i())
            if (!F.count(delta[b])) s.insert(delta[b]);
        return s;
    }

    std::set<ServerId> f_i() const {
        std::set<ServerId> s;
        for (ObjectId b : rr)
            if (F.count(delta[b])) s.insert(delta[b]);
        return s;
    }

    std::set<ServerId> m_i() const {
        const std::set<ServerId> fi = f_i();
        std::set<ServerId> s;
        for (ObjectId b : cov_i()) {
            const ServerId sv = delta[b];
            if (F.count(sv) && !fi.count(sv)) s.insert(sv);
        }
        return s;
    }

    std::set<ServerId> g_i() const {
        if (q.size() < f_i().size()) return m_i();
        return {};
    }

    // Definition of BlockedWrites at the current time: pending covering writes
    // triggered by a client that had completed a write at the phase start, or
    // sitting on a server in Q_i u G_i.
    bool blocked(OpId id) const {
        auto it = pending_writes.find(id);
        if (it == pending_writes.end()) return false;
        if (c_frozen.count(it->second.client)) return true;
        const ServerId s = delta[it->second.object];
        if (q.count(s)) return true;
        const auto g = g_i();
        return g.count(s) > 0;
    }

    std::set<OpId> blocked_writes() const {
        std::set<OpId> out;
        for (auto& [id, _] : pending_writes)
            if (blocked(id)) out.insert(id);
        return out;
    }

    // Feeds one event through the bookkeeping (Q's freeze rule is applied per
    // event, i.e. per time step).
    void update(const Event& e) {
        t = e.t;
        switch (e.kind) {
            case EventKind::Invoke:
                if (e.hop.is_write_kind()) open_write[e.client] = true;
                break;
            case EventKind::Return: {
                auto it = open_write.find(e.client);
                if (it != open_write.end() && it->second) {
                    it->second = false;
                    completed_writers.insert(e.client);
                    ++writes_returned_in_phase;
                }
                break;
            }
            case EventKind::Trigger:
                if (e.lop.kind == LowOpKind::Write) {
                    pending_writes[e.op_id] = {e.object, e.client, e.t};
                    ++cover_count[e.object];
                    tr.insert(e.object);
                }
                break;
            case EventKind::Respond: {
                auto it = pending_writes.find(e.op_id);
                if (it != pending_writes.end()) {
                    --cover_count[it->second.object];
                    // Rr_i holds only registers whose write was both triggered
                    // and responded inside the current phase.
                    if (it->second.triggered_at > phase_start)
                        rr.insert(it->second.object);
                    pending_writes.erase(it);
                }
                break;
            }
            default:
                break;
        }
        const std::set<ServerId> d = cov_i_servers_outside_f();
        if (static_cast<int>(d.size()) <= f) q = d;  // else Q_i(t) = Q_i(t-1)
    }

    void snapshot_prev() {
        q_prev = q;
        fi_prev = f_i();
        m_prev = m_i();
    }

    void roll_phase() {
        ++phase;
        phase_start = t;
        cov_at_phase_start = cov();
        c_frozen = completed_writers;
        tr.clear();
        rr.clear();
        q.clear();
        q_prev.clear();
        fi_prev.clear();
        m_prev.clear();
        writes_returned_in_phase = 0;
    }
};

// The adversary bookkeeping facts (items a..k), checked against the state and the
// previous step's snapshot. Returns every violated item.
inline std::vector<FactViolation> assert_facts(const AdversaryState& adv) {
    std::vector<FactViolation> out;
    auto violate = [&](char item, std::string msg) {
        out.push_back({item, adv.phase, adv.t, std::move(msg)});
    };
    const auto covi = adv.cov_i();
    const auto d = adv.cov_i_servers_outside_f();
    const auto fi = adv.f_i();
    const auto mi = adv.m_i();
    const auto f = adv.f;

    for (ServerId s : adv.q)
        if (!d.count(s)) violate('a', "Q_i not within delta(Cov_i)\\F");
    for (ServerId s : adv.q_prev)
        if (!adv.q.count(s)) violate('b', "Q_i shrank");
    for (ServerId s : adv.fi_prev)
        if (!fi.count(s)) violate('c', "F_i shrank");
    if (static_cast<int>(fi.size()) - static_cast<int>(adv.q.size()) > 1)
        violate('d', "|F_i| - |Q_i| > 1");
    if (static_cast<int>(adv.q.size()) > f) violate('e', "|Q_i| > f");
    if (static_cast<int>(fi.size()) > f + 1) violate('f', "|F_i| > f+1");
    if (fi == adv.fi_prev)
        for (ServerId s : adv.m_prev)
            if (!mi.count(s)) violate('g', "M_i shrank while F_i unchanged");
    if (static_cast<int>(mi.size()) > f + 1) violate('h', "|M_i| > f+1");
    if (static_cast<int>(d.size()) >= f && static_cast<int>(adv.q.size()) < f)
        violate('i', "|delta(Cov_i)\\F| >= f but |Q_i| < f");
    if (static_cast<int>(d.size()) < f) {
        for (ObjectId b : adv.rr)
            if (!adv.F.count(adv.delta[b]))
                violate('j', "write responded outside F while |delta(Cov_i)\\F| < f");
    }
    std::set<ServerId> qm = adv.q;
    qm.insert(mi.begin(), mi.end());
    for (ObjectId b : adv.rr)
        if (qm.count(adv.delta[b]))
            violate('k', "server in Q_i u M_i has a responded post-phase write");
    return out;
}

// Per-phase measurements taken at the phase boundary t_i.
struct PhaseStats {
    int phase = 0;
    std::uint64_t t_i = 0;
    int cov_size = 0;               // |Cov(t_i)|
    std::set<ServerId> cov_servers; // delta(Cov(t_i))
    int triggered_servers = 0;      // |delta(Tr_i \ Cov(t_{i-1}))|
    int new_cov = 0;                // |Cov(t_i) \ Cov(t_{i-1})|
    int new_cov_servers = 0;        // |delta(Cov(t_i) \ Cov(t_{i-1}))|
    bool monotone = true;           // Cov(t_{i-1}) included in Cov(t_i)
    std::set<OpId> blocked_at_end;  // permanently blocked writes at t_i
};

// Scheduler realizing Ad_i against the running emulation: blocked writes never
// respond; everything else is delivered oldest-first; the next phase's write
// is invoked only after the previous phase drained (no deliverable non-blocked
// respond remains), which is exactly the t_i extension of the proof.
class AdversaryScheduler : public Scheduler {
public:
    AdversaryScheduler(const Placement& placement, std::set<ServerId> F, int f)
        : check_facts_(true) {
        state_.init(placement, std::move(F), f);
    }

    std::optional<Action> next(const EnabledSet& enabled, SplitMix64&) override {
        const PendingOp* oldest = nullptr;
        for (const PendingOp* p : enabled.responds) {
            if (state_.blocked(p->id)) continue;
            if (!oldest || p->id < oldest->id) oldest = p;
        }
        if (oldest) return Action{Action::Respond, 0, oldest->id};
        if (!enabled.invokes.empty()) {
            if (state_.writes_returned_in_phase > 0) finalize_phase();
            return Action{Action::Invoke, 0, 0};
        }
        // Nothing deliverable. If the run is over this is quiescence; if a
        // write is still waiting it is a deadlock under Ad_i and the engine
        // reports it.
        if (state_.writes_returned_in_phase > 0) finalize_phase();
        return std::nullopt;
    }

    void observe(const Event& e) override {
        state_.snapshot_prev();
        state_.update(e);
        if (check_facts_) {
            auto v = assert_facts(state_);
            violations_.insert(violations_.end(), v.begin(), v.end());
        }
    }

    const AdversaryState& state() const { return state_; }
    const std::vector<FactViolation>& violations() const { return violations_; }
    const std::vector<PhaseStats>& phases() const { return phases_; }

    // Closes the final phase when the run drains to quiescence with nothing
    // pending (the engine never consults the policy again in that case).
    void finalize_if_due() {
        if (state_.writes_returned_in_phase > 0) finalize_phase();
    }

private:
    void finalize_phase() {
        PhaseStats ps;
        ps.phase = state_.phase;
        ps.t_i = state_.t;
        const auto cov_now = state_.cov();
        ps.cov_size = static_cast<int>(cov_now.size());
        ps.cov_servers = state_.image(cov_now);
        std::set<ObjectId> tr_new, cov_new;
        for (ObjectId b : state_.tr)
            if (!state_.cov_at_phase_start.count(b)) tr_new.insert(b);
        for (ObjectId b : cov_now)
            if (!state_.cov_at_phase_start.count(b)) cov_new.insert(b);
        ps.triggered_servers = static_cast<int>(state_.image(tr_new).size());
        ps.new_cov = static_cast<int>(cov_new.size());
        ps.new_cov_servers = static_cast<int>(state_.image(cov_new).size());
        for (ObjectId b : state_.cov_at_phase_start)
            if (!cov_now.count(b)) ps.monotone = false;
        ps.blocked_at_end = state_.blocked_writes();
        phases_.push_back(ps);
        state_.roll_phase();
    }

    AdversaryState state_;
    std::vector<FactViolation> violations_;
    std::vector<PhaseStats> phases_;
    bool check_facts_;
};

} // namespace regemu
