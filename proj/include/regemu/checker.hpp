#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "regemu/base_object.hpp"
#include "regemu/event.hpp"

namespace regemu {

// Sequential object kinds the checkers can replay. High* describe the emulated
// object (Value-level ops); Low* describe base objects (TSVal-level ops).
enum class SpecKind { LowRegister, LowMaxRegister, LowCas, HighRegister, HighMaxRegister };

// One operation in a checkable schedule. Times are event indices; a pending
// op has ret_t = infinity and no recorded response.
struct OpRec {
    enum class Kind { Write, Read } kind = Kind::Read;
    TSVal arg;                         // written value (writes) / cas new
    TSVal exp;                         // cas expected
    bool is_cas = false;
    std::uint64_t inv_t = 0;
    std::uint64_t ret_t = kPending;
    std::optional<TSVal> response;     // recorded response for complete reads/cas
    ClientId client = -1;
    std::string label;

    static constexpr std::uint64_t kPending = std::numeric_limits<std::uint64_t>::max();
    bool pending() const { return ret_t == kPending; }
    bool precedes(const OpRec& o) const { return !pending() && ret_t < o.inv_t; }
};

// A linearization witness entry is self-contained: the op it places plus the
// response assigned to it, so the witness can be re-checked with no other
// context.
struct WitnessEntry {
    OpRec op;
    std::optional<TSVal> response;
};

struct Verdict {
    enum class Status { Pass, Fail, Inconclusive, NotApplicable } status = Status::Pass;
    std::vector<WitnessEntry> witness;   // a legal linearization, on pass
    std::string detail;                  // violating read / bound note

    bool pass() const { return status == Status::Pass; }

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["pass"] = pass();
        switch (status) {
            case Status::Fail: j["violating_read"] = detail; break;
            case Status::Inconclusive: j["inconclusive"] = true; break;
            case Status::NotApplicable: j["not_applicable"] = true; break;
            case Status::Pass: {
                auto w = nlohmann::ordered_json::array();
                for (const WitnessEntry& we : witness) {
                    nlohmann::ordered_json entry;
                    entry["op"] = we.op.label;
                    if (we.response) entry["response"] = tsval_to_json(*we.response);
                    w.push_back(entry);
                }
                j["witness"] = std::move(w);
                break;
            }
        }
        return j;
    }
};

namespace detail {

// Sequential replay cursor shared by every SpecKind.
struct SpecState {
    SpecKind kind;
    TSVal state = ts_v0;

    std::optional<TSVal> step(const OpRec& op) {
        switch (kind) {
            case SpecKind::LowRegister:
            case SpecKind::HighRegister:
                if (op.kind == OpRec::Kind::Write) {
                    state = op.arg;
                    return std::nullopt;
                }
                return state;
            case SpecKind::LowMaxRegister:
            case SpecKind::HighMaxRegister:
                if (op.kind == OpRec::Kind::Write) {
                    state = std::max(state, op.arg);
                    return std::nullopt;
                }
                return state;
            case SpecKind::LowCas: {
                TSVal prior = state;
                if (state == op.exp) state = op.arg;
                return prior;
            }
        }
        return std::nullopt;
    }
};

struct SearchCtx {
    const std::vector<OpRec>* ops;
    SpecKind kind;
    std::uint64_t budget;
    std::vector<std::pair<std::size_t, std::optional<TSVal>>> best;
    bool found = false;
    bool exhausted = false;
};

// Backtracking over completion choices for pending ops and orderings
// consistent with the precedence relation. An op is eligible next when every
// op preceding it is already placed or dropped.
inline void search(SearchCtx& ctx, std::vector<bool>& done, std::size_t left,
                   SpecState state,
                   std::vector<std::pair<std::size_t, std::optional<TSVal>>>& acc) {
    if (ctx.found || ctx.exhausted) return;
    if (ctx.budget == 0) {
        ctx.exhausted = true;
        return;
    }
    --ctx.budget;
    const auto& ops = *ctx.ops;
    if (left == 0) {
        ctx.found = true;
        ctx.best = acc;
        return;
    }
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (done[i]) continue;
        bool minimal = true;
        for (std::size_t j = 0; j < ops.size() && minimal; ++j)
            if (!done[j] && j != i && ops[j].precedes(ops[i])) minimal = false;
        if (!minimal) continue;

        // Choice 1: linearize op i here.
        SpecState next = state;
        std::optional<TSVal> resp = next.step(ops[i]);
        const bool resp_ok =
            ops[i].pending() || !ops[i].response || (resp && *resp == *ops[i].response);
        if (resp_ok) {
            done[i] = true;
            acc.emplace_back(i, resp);
            search(ctx, done, left - 1, next, acc);
            acc.pop_back();
            done[i] = false;
            if (ctx.found || ctx.exhausted) return;
        }
        // Choice 2: a pending op may be dropped (it never took effect).
        if (ops[i].pending()) {
            done[i] = true;
            search(ctx, done, left - 1, state, acc);
            done[i] = false;
            if (ctx.found || ctx.exhausted) return;
        }
    }
}

} // namespace detail

// Atomicity: does the schedule admit a linearization? Bounded search; more
// than `op_bound` operations (or a blown node budget) yields Inconclusive
// rather than a verdict.
inline Verdict check_atomic(const std::vector<OpRec>& ops, SpecKind kind,
                            std::size_t op_bound = 12,
                            std::uint64_t node_budget = 10'000'000) {
    Verdict v;
    if (ops.size() > op_bound) {
        v.status = Verdict::Status::Inconclusive;
        v.detail = "operation count " + std::to_string(ops.size()) + " exceeds bound " +
                   std::to_string(op_bound);
        return v;
    }
    detail::SearchCtx ctx{&ops, kind, node_budget, {}, false, false};
    std::vector<bool> done(ops.size(), false);
    std::vector<std::pair<std::size_t, std::optional<TSVal>>> acc;
    detail::search(ctx, done, ops.size(), detail::SpecState{kind, ts_v0}, acc);
    if (ctx.found) {
        v.status = Verdict::Status::Pass;
        for (auto& [idx, resp] : ctx.best) v.witness.push_back({ops[idx], resp});
    } else if (ctx.exhausted) {
        v.status = Verdict::Status::Inconclusive;
        v.detail = "search budget exhausted";
    } else {
        v.status = Verdict::Status::Fail;
        v.detail = "no linearization exists";
    }
    return v;
}

// Independent witness replay: feeding the witness order through the sequential
// specification must reproduce both the assigned responses and every response
// recorded in the original schedule.
inline bool replay_witness(SpecKind kind, const std::vector<WitnessEntry>& witness) {
    detail::SpecState st{kind, ts_v0};
    for (const WitnessEntry& we : witness) {
        std::optional<TSVal> resp = st.step(we.op);
        if (resp.has_value() != we.response.has_value()) return false;
        if (resp && *resp != *we.response) return false;
        if (!we.op.pending() && we.op.response && resp && *resp != *we.op.response)
            return false;
    }
    return true;
}

// --- history decomposition ------------------------------------------------

// Per-object low-level schedules: trigger = invoke, respond = return, with the
// recorded response values.
inline std::map<ObjectId, std::vector<OpRec>> base_object_schedules(const History& h) {
    std::map<ObjectId, std::vector<OpRec>> out;
    std::map<OpId, std::pair<ObjectId, std::size_t>> where;
    for (const Event& e : h.events) {
        if (e.kind == EventKind::Trigger) {
            OpRec op;
            op.client = e.client;
            op.inv_t = e.t;
            op.label = std::string(low_op_name(e.lop.kind)) + "#" + std::to_string(e.op_id);
            switch (e.lop.kind) {
                case LowOpKind::Read:
                case LowOpKind::ReadMax:
                    op.kind = OpRec::Kind::Read;
                    break;
                case LowOpKind::Write:
                case LowOpKind::WriteMax:
                    op.kind = OpRec::Kind::Write;
                    op.arg = e.lop.arg;
                    break;
                case LowOpKind::Cas:
                    op.kind = OpRec::Kind::Read;  // responds with the prior value
                    op.is_cas = true;
                    op.arg = e.lop.arg;
                    op.exp = e.lop.exp;
                    break;
            }
            auto& vec = out[e.object];
            where[e.op_id] = {e.object, vec.size()};
            vec.push_back(op);
        } else if (e.kind == EventKind::Respond) {
            auto it = where.find(e.op_id);
            if (it == where.end()) continue;
            OpRec& op = out[it->second.first][it->second.second];
            op.ret_t = e.t;
            op.response = e.value;
        }
    }
    return out;
}

inline SpecKind low_spec_kind(ObjectKind k) {
    switch (k) {
        case ObjectKind::Register: return SpecKind::LowRegister;
        case ObjectKind::MaxRegister: return SpecKind::LowMaxRegister;
        case ObjectKind::Cas: return SpecKind::LowCas;
    }
    return SpecKind::LowRegister;
}

// High-level operations of the emulated object, in invocation order.
inline std::vector<OpRec> high_level_schedule(const History& h) {
    std::vector<OpRec> out;
    std::map<ClientId, std::size_t> open;
    for (const Event& e : h.events) {
        if (e.kind == EventKind::Invoke) {
            OpRec op;
            op.client = e.client;
            op.inv_t = e.t;
            op.kind = e.hop.is_write_kind() ? OpRec::Kind::Write : OpRec::Kind::Read;
            if (op.kind == OpRec::Kind::Write) op.arg = TSVal{{0, 0}, e.hop.val};
            op.label = std::string(high_op_name(e.hop.kind)) + "(c" +
                       std::to_string(e.client) +
                       (op.kind == OpRec::Kind::Write ? "," + std::to_string(e.hop.val) : "") +
                       ")@" + std::to_string(e.t);
            open[e.client] = out.size();
            out.push_back(op);
        } else if (e.kind == EventKind::Return) {
            auto it = open.find(e.client);
            if (it == open.end()) continue;
            OpRec& op = out[it->second];
            op.ret_t = e.t;
            if (e.ret_value) op.response = TSVal{{0, 0}, *e.ret_value};
            open.erase(it);
        }
    }
    return out;
}

inline bool write_sequential(const std::vector<OpRec>& ops) {
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].kind != OpRec::Kind::Write) continue;
        for (std::size_t j = i + 1; j < ops.size(); ++j) {
            if (ops[j].kind != OpRec::Kind::Write) continue;
            if (!ops[i].precedes(ops[j]) && !ops[j].precedes(ops[i])) return false;
        }
    }
    return true;
}

namespace detail {

inline Verdict check_ws(const History& h, bool safety_only, std::size_t op_bound,
                        SpecKind spec) {
    const std::vector<OpRec> ops = high_level_schedule(h);
    if (!write_sequential(ops)) {
        Verdict v;
        v.status = Verdict::Status::NotApplicable;
        v.detail = "history is not write-sequential";
        return v;
    }
    Verdict result;
    result.status = Verdict::Status::Pass;
    for (std::size_t i = 0; i < ops.size(); ++i) {
        if (ops[i].kind != OpRec::Kind::Read || ops[i].pending()) continue;
        if (safety_only) {
            bool concurrent = false;
            for (std::size_t j = 0; j < ops.size() && !concurrent; ++j)
                if (ops[j].kind == OpRec::Kind::Write && !ops[j].precedes(ops[i]) &&
                    !ops[i].precedes(ops[j]))
                    concurrent = true;
            if (concurrent) continue;  // safety leaves concurrent reads unconstrained
        }
        // Linearize this read against all high-level writes. The run being
        // write-sequential, only the read's placement (and inclusion of
        // pending writes) is searched.
        std::vector<OpRec> sub;
        for (const OpRec& o : ops)
            if (o.kind == OpRec::Kind::Write) sub.push_back(o);
        sub.push_back(ops[i]);
        Verdict v = check_atomic(sub, spec, op_bound);
        if (v.status == Verdict::Status::Fail) {
            v.detail = ops[i].label;
            return v;
        }
        if (v.status == Verdict::Status::Inconclusive) result = v;
        if (result.status == Verdict::Status::Pass && result.witness.empty())
            result.witness = v.witness;
    }
    return result;
}

} // namespace detail

// WS-Regularity: in a write-sequential history, every complete high-level read
// admits a linearization together with all high-level writes.
inline Verdict check_ws_regular(const History& h, std::size_t op_bound = 12) {
    return detail::check_ws(h, false, op_bound, SpecKind::HighRegister);
}

// WS-Safety: as WS-Regularity, but only reads concurrent with no write are
// constrained.
inline Verdict check_ws_safe(const History& h, std::size_t op_bound = 12) {
    return detail::check_ws(h, true, op_bound, SpecKind::HighRegister);
}

// Atomicity of the emulated object's high-level schedule (the max-register
// emulations promise full linearizability).
inline Verdict check_atomic_high(const History& h, SpecKind spec,
                                 std::size_t op_bound = 12) {
    return check_atomic(high_level_schedule(h), spec, op_bound);
}

// Atomicity of every per-object low-level subhistory.
inline Verdict check_atomic_base(const History& h, const std::vector<ObjectKind>& kinds,
                                 std::size_t op_bound = 12) {
    Verdict result;
    result.status = Verdict::Status::Pass;
    for (const auto& [obj, sched] : base_object_schedules(h)) {
        Verdict v = check_atomic(sched, low_spec_kind(kinds.at(obj)), op_bound);
        if (v.status == Verdict::Status::Fail) {
            v.detail = "object " + std::to_string(obj) + ": " + v.detail;
            return v;
        }
        if (v.status == Verdict::Status::Inconclusive) result = v;
    }
    return result;
}

} // namespace regemu
