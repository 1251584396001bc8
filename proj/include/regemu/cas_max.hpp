#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include "regemu/emulation.hpp"
#include "regemu/layout.hpp"

namespace regemu {

// Wait-free max-register from a single CAS object b.
//
//   write-max(v): loop { tmp <- b.CAS(v0,v0); if tmp >= v return ok;
//                        b.CAS(tmp, v) }
//   read-max():   tmp <- b.CAS(v0,v0); return tmp
//
// tmp is non-decreasing across iterations of one write-max; a write-max
// returns within (values strictly between the first tmp and v) + 2 loop
// iterations.
class CasMaxEmulation : public Emulation {
public:
    explicit CasMaxEmulation(const Placement& placement) {
        if (placement.object_count() != 1 ||
            placement.kinds[0] != ObjectKind::Cas)
            throw std::invalid_argument("cas-max: placement must hold one CAS object");
    }

    Effect on_invoke(ClientId c, const HighLevelOp& op) override {
        ClientState& st = states_[c];
        if (st.phase != Phase::Idle)
            throw std::logic_error("cas-max: client invoked while busy");
        Effect eff;
        switch (op.kind) {
            case HighOpKind::WriteMax:
                st.phase = Phase::LoopRead;
                st.target = TSVal{{0, 0}, op.val};
                st.tmp = ts_v0;
                st.have_tmp = false;
                eff.triggers.push_back({0, LowOp::cas(ts_v0, ts_v0), OpTag{kLoopRead, 0, -1}});
                return eff;
            case HighOpKind::ReadMax:
                st.phase = Phase::SingleRead;
                eff.triggers.push_back({0, LowOp::cas(ts_v0, ts_v0), OpTag{kSingleRead, 0, -1}});
                return eff;
            default:
                throw std::logic_error("cas-max: unsupported high-level op");
        }
    }

    Effect on_respond(ClientId c, const TriggerReq& op,
                      const std::optional<TSVal>& value) override {
        ClientState& st = states_[c];
        if (!value) throw std::logic_error("cas-max: CAS respond without prior value");
        Effect eff;
        switch (op.tag.purpose) {
            case kSingleRead:
                st.phase = Phase::Idle;
                eff.returns = true;
                eff.ret = value->val;
                return eff;
            case kLoopRead: {
                if (st.have_tmp && *value < st.tmp)
                    throw std::logic_error("cas-max: tmp decreased across iterations");
                st.tmp = *value;
                st.have_tmp = true;
                if (st.tmp >= st.target) {
                    st.phase = Phase::Idle;
                    eff.returns = true;  // ok
                    return eff;
                }
                st.phase = Phase::LoopCas;
                eff.triggers.push_back({0, LowOp::cas(st.tmp, st.target), OpTag{kLoopCas, 0, -1}});
                return eff;
            }
            case kLoopCas:
                st.phase = Phase::LoopRead;
                eff.triggers.push_back({0, LowOp::cas(ts_v0, ts_v0), OpTag{kLoopRead, 0, -1}});
                return eff;
            default:
                throw std::logic_error("cas-max: unknown trigger tag");
        }
    }

    nlohmann::ordered_json dump_state(ClientId c) const override {
        nlohmann::ordered_json j;
        auto it = states_.find(c);
        if (it == states_.end()) return j;
        const ClientState& st = it->second;
        j["phase"] = st.phase == Phase::Idle ? "idle"
                     : st.phase == Phase::LoopRead ? "loop-read"
                     : st.phase == Phase::LoopCas ? "loop-cas" : "single-read";
        j["tmp"] = tsval_to_json(st.tmp);
        j["target"] = tsval_to_json(st.target);
        return j;
    }

    std::unique_ptr<Emulation> clone() const override {
        return std::make_unique<CasMaxEmulation>(*this);
    }

private:
    static constexpr int kLoopRead = 1;
    static constexpr int kLoopCas = 2;
    static constexpr int kSingleRead = 3;

    enum class Phase { Idle, LoopRead, LoopCas, SingleRead };

    struct ClientState {
        Phase phase = Phase::Idle;
        TSVal target = ts_v0;
        TSVal tmp = ts_v0;
        bool have_tmp = false;
    };

    std::map<ClientId, ClientState> states_;
};

// Loop accounting for one write-max, recovered from a history.
struct CasMaxLoopStats {
    ClientId client = -1;
    Value value = v0;           // the v being written
    Value first_observed = v0;  // first CAS(v0,v0) result inside the op
    int iterations = 0;
    int bound = 0;              // (values strictly between first_observed and v) + 2

    bool within_bound() const { return iterations <= bound; }
};

// Per write-max loop counts. An iteration is one execution of the loop body,
// identified by its leading CAS(v0,v0) respond.
inline std::vector<CasMaxLoopStats> casmax_iteration_stats(const History& h) {
    struct OpenOp {
        Value value = v0;
        int iterations = 0;
        bool saw_first = false;
        Value first = v0;
    };
    std::map<ClientId, OpenOp> open;
    std::map<OpId, ClientId> loop_read_owner;
    std::vector<CasMaxLoopStats> out;

    for (const Event& e : h.events) {
        switch (e.kind) {
            case EventKind::Invoke:
                if (e.hop.kind == HighOpKind::WriteMax)
                    open[e.client] = OpenOp{e.hop.val, 0, false, v0};
                break;
            case EventKind::Trigger:
                if (open.count(e.client) && e.lop.kind == LowOpKind::Cas &&
                    e.lop.exp == ts_v0 && e.lop.arg == ts_v0)
                    loop_read_owner[e.op_id] = e.client;
                break;
            case EventKind::Respond: {
                auto it = loop_read_owner.find(e.op_id);
                if (it == loop_read_owner.end()) break;
                auto op = open.find(it->second);
                loop_read_owner.erase(it);
                if (op == open.end()) break;
                ++op->second.iterations;
                if (!op->second.saw_first && e.value) {
                    op->second.saw_first = true;
                    op->second.first = e.value->val;
                }
                break;
            }
            case EventKind::Return: {
                auto op = open.find(e.client);
                if (op == open.end()) break;
                CasMaxLoopStats st;
                st.client = e.client;
                st.value = op->second.value;
                st.first_observed = op->second.first;
                st.iterations = op->second.iterations;
                const Value v = st.value, f = st.first_observed;
                st.bound = static_cast<int>(v > f ? v - f - 1 : 0) + 2;
                out.push_back(st);
                open.erase(op);
                break;
            }
            default:
                break;
        }
    }
    return out;
}

inline bool casmax_iteration_bound_holds(const History& h) {
    for (const CasMaxLoopStats& st : casmax_iteration_stats(h))
        if (!st.within_bound()) return false;
    return true;
}

} // namespace regemu
