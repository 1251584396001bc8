#pragma once

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "regemu/emulation.hpp"
#include "regemu/engine.hpp"

namespace regemu {

// Per-client op sequences for exhaustive exploration; client c invokes its
// next op as soon as it is idle, with no cross-client ordering.
using ExploreWorkload = std::map<ClientId, std::vector<HighLevelOp>>;

struct ExploreStats {
    std::uint64_t paths = 0;
    std::uint64_t events = 0;
};

namespace detail {

struct ExpState {
    std::vector<BaseObject> objects;
    std::map<OpId, PendingOp> pending;
    OpId next_op_id = 1;
    std::map<ClientId, bool> busy;
    std::map<ClientId, std::size_t> progress;
    std::unique_ptr<Emulation> emu;

    ExpState clone() const {
        ExpState s;
        s.objects = objects;
        s.pending = pending;
        s.next_op_id = next_op_id;
        s.busy = busy;
        s.progress = progress;
        s.emu = emu->clone();
        return s;
    }
};

struct ExpAction {
    bool is_invoke = false;
    ClientId client = -1;
    OpId op_id = 0;
};

class Explorer {
public:
    Explorer(const Placement& placement, const Emulation& prototype,
             const ExploreWorkload& workload,
             const std::function<void(const History&)>& visit)
        : placement_(placement), workload_(workload), visit_(visit) {
        root_.emu = prototype.clone();
        for (ObjectId b = 0; b < placement.object_count(); ++b)
            root_.objects.push_back(BaseObject{placement.kinds[b], ts_v0, false});
        for (auto& [c, ops] : workload) root_.progress[c] = 0;
    }

    ExploreStats run() {
        dfs(std::move(root_));
        return stats_;
    }

private:
    std::vector<ExpAction> enabled(const ExpState& st) const {
        std::vector<ExpAction> out;
        for (auto& [c, idx] : st.progress) {
            auto busy_it = st.busy.find(c);
            const bool busy = busy_it != st.busy.end() && busy_it->second;
            if (!busy && idx < workload_.at(c).size())
                out.push_back({true, c, 0});
        }
        for (auto& [id, p] : st.pending) out.push_back({false, -1, id});
        return out;
    }

    void append(Event e) {
        e.t = history_.events.size() + 1;
        history_.events.push_back(std::move(e));
        ++stats_.events;
    }

    void emit_effect(ExpState& st, ClientId c, const Effect& eff) {
        for (const TriggerReq& tr : eff.triggers) {
            PendingOp p;
            p.id = st.next_op_id++;
            p.client = c;
            p.object = tr.object;
            p.op = tr.op;
            p.tag = tr.tag;
            Event e;
            e.kind = EventKind::Trigger;
            e.client = c;
            e.object = tr.object;
            e.op_id = p.id;
            e.lop = tr.op;
            append(e);
            st.pending.emplace(p.id, p);
        }
        if (eff.returns) {
            Event e;
            e.kind = EventKind::Return;
            e.client = c;
            e.ret_value = eff.ret;
            append(e);
            st.busy[c] = false;
        }
    }

    // Same step semantics as Engine::apply: writes take effect at Respond,
    // respond handlers run atomically.
    void apply(ExpState& st, const ExpAction& a) {
        if (a.is_invoke) {
            const HighLevelOp op = workload_.at(a.client)[st.progress[a.client]++];
            st.busy[a.client] = true;
            Event e;
            e.kind = EventKind::Invoke;
            e.client = a.client;
            e.hop = op;
            append(e);
            emit_effect(st, a.client, st.emu->on_invoke(a.client, op));
            return;
        }
        PendingOp p = st.pending.at(a.op_id);
        st.pending.erase(a.op_id);
        BaseOpResult r = apply_base_op(st.objects[p.object], p.op);
        st.objects[p.object] = r.obj;
        Event e;
        e.kind = EventKind::Respond;
        e.op_id = p.id;
        e.value = r.response;
        append(e);
        TriggerReq back{p.object, p.op, p.tag};
        emit_effect(st, p.client, st.emu->on_respond(p.client, back, r.response));
    }

    void dfs(ExpState st) {
        while (true) {
            const std::vector<ExpAction> acts = enabled(st);
            if (acts.empty()) {
                ++stats_.paths;
                visit_(history_);
                return;
            }
            if (acts.size() == 1) {
                apply(st, acts[0]);
                continue;
            }
            const std::size_t keep = history_.events.size();
            for (std::size_t i = 0; i + 1 < acts.size(); ++i) {
                ExpState branch = st.clone();
                apply(branch, acts[i]);
                dfs(std::move(branch));
                history_.events.resize(keep);
            }
            apply(st, acts.back());
        }
    }

    const Placement& placement_;
    const ExploreWorkload& workload_;
    const std::function<void(const History&)>& visit_;
    ExpState root_;
    History history_;
    ExploreStats stats_;
};

} // namespace detail

// Enumerates every schedule of the workload (all interleavings of invoke and
// respond actions) and calls `visit` with each complete history.
inline ExploreStats explore_all(const Placement& placement, const Emulation& prototype,
                                const ExploreWorkload& workload,
                                const std::function<void(const History&)>& visit) {
    detail::Explorer ex(placement, prototype, workload, visit);
    return ex.run();
}

} // namespace regemu
