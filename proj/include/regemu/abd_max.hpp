#pragma once

#include <map>
#include <stdexcept>

#include "regemu/emulation.hpp"
#include "regemu/layout.hpp"

namespace regemu {

// Multi-writer ABD with the server code folded into write-max / read-max on
// one max-register per server. The emulation lives on 2f+1 designated servers
// and waits for f+1 of them per quorum access, so any two quorums intersect
// and every run uses exactly 2f+1 base objects.
//
// write(v): read-max from a quorum, pick ts = max+1, write-max <ts,writer,v>
// to a quorum, return ack. read(): read-max from a quorum, return the value
// of the maximum triple.
class AbdMaxEmulation : public Emulation {
public:
    AbdMaxEmulation(const SystemConfig& cfg, const Placement& placement)
        : cfg_(cfg), placement_(placement) {
        if (placement.object_count() != 2 * cfg.f + 1)
            throw std::invalid_argument("abd-max: placement must hold 2f+1 max-registers");
    }

    Effect on_invoke(ClientId c, const HighLevelOp& op) override {
        ClientState& st = states_[c];
        if (st.phase != Phase::Idle)
            throw std::logic_error("abd-max: client invoked while busy");
        switch (op.kind) {
            case HighOpKind::Write:
                if (c < 0 || c >= cfg_.k)
                    throw std::logic_error("abd-max: write by non-writer client");
                st.op_is_write = true;
                st.pending_value = op.val;
                break;
            case HighOpKind::Read:
                st.op_is_write = false;
                break;
            default:
                throw std::logic_error("abd-max: unsupported high-level op");
        }
        st.phase = Phase::Reading;
        st.max_seen = ts_v0;
        st.replies = 0;
        ++st.gen;
        Effect eff;
        for (ObjectId b = 0; b < placement_.object_count(); ++b)
            eff.triggers.push_back({b, LowOp::read_max(), OpTag{kRead, st.gen, -1}});
        return eff;
    }

    Effect on_respond(ClientId c, const TriggerReq& op,
                      const std::optional<TSVal>& value) override {
        ClientState& st = states_[c];
        Effect eff;
        if (op.tag.gen != st.gen) return eff;  // reply for an earlier quorum access
        const int quorum = cfg_.f + 1;
        if (op.tag.purpose == kRead && st.phase == Phase::Reading) {
            if (!value) throw std::logic_error("abd-max: read-max respond without value");
            st.max_seen = std::max(st.max_seen, *value);
            if (++st.replies < quorum) return eff;
            if (!st.op_is_write) {
                st.phase = Phase::Idle;
                eff.returns = true;
                eff.ret = st.max_seen.val;
                return eff;
            }
            st.phase = Phase::Writing;
            st.replies = 0;
            ++st.gen;
            const TSVal v{{st.max_seen.ts.seq + 1, static_cast<std::uint32_t>(c)},
                          st.pending_value};
            for (ObjectId b = 0; b < placement_.object_count(); ++b)
                eff.triggers.push_back({b, LowOp::write_max(v), OpTag{kWrite, st.gen, -1}});
            return eff;
        }
        if (op.tag.purpose == kWrite && st.phase == Phase::Writing) {
            if (++st.replies >= quorum) {
                st.phase = Phase::Idle;
                eff.returns = true;  // ack
            }
        }
        return eff;
    }

    nlohmann::ordered_json dump_state(ClientId c) const override {
        nlohmann::ordered_json j;
        auto it = states_.find(c);
        if (it == states_.end()) return j;
        const ClientState& st = it->second;
        j["phase"] = st.phase == Phase::Idle ? "idle"
                     : st.phase == Phase::Reading ? "reading" : "writing";
        j["maxSeen"] = tsval_to_json(st.max_seen);
        j["replies"] = st.replies;
        return j;
    }

    std::unique_ptr<Emulation> clone() const override {
        return std::make_unique<AbdMaxEmulation>(*this);
    }

private:
    static constexpr int kRead = 1;
    static constexpr int kWrite = 2;

    enum class Phase { Idle, Reading, Writing };

    struct ClientState {
        Phase phase = Phase::Idle;
        bool op_is_write = false;
        Value pending_value = v0;
        TSVal max_seen = ts_v0;
        int replies = 0;
        int gen = 0;
    };

    SystemConfig cfg_;
    Placement placement_;
    std::map<ClientId, ClientState> states_;
};

} // namespace regemu
