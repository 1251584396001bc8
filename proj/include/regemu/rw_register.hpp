#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "regemu/emulation.hpp"
#include "regemu/layout.hpp"

namespace regemu {

// k-register emulation from fault-prone read/write registers.
//
// Writers share rows of registers; a write collects timestamps from all
// objects on n-f servers, picks a bigger one, triggers writes on every row
// object it does not currently cover, and returns after |R_j|-f acks. A
// register stays in coverSet until the old pending write responds, at which
// point the write is re-triggered with the client's current tsVal. Readers
// collect and return the value with the maximum timestamp.
class RwRegisterEmulation : public Emulation {
public:
    RwRegisterEmulation(const SystemConfig& cfg, const Placement& placement)
        : cfg_(cfg), placement_(placement) {
        lp_ = layout_params(cfg);
        per_server_.assign(cfg.n, {});
        for (ObjectId b = 0; b < placement.object_count(); ++b)
            per_server_[placement.delta[b]].push_back(b);
    }

    Effect on_invoke(ClientId c, const HighLevelOp& op) override {
        ClientState& st = state(c);
        if (st.phase != Phase::Idle)
            throw std::logic_error("rw-register: client invoked while busy");
        switch (op.kind) {
            case HighOpKind::Write: {
                if (c < 0 || c >= cfg_.k)
                    throw std::logic_error("rw-register: write by non-writer client");
                st.op_is_write = true;
                st.pending_value = op.val;
                break;
            }
            case HighOpKind::Read:
                st.op_is_write = false;
                break;
            default:
                throw std::logic_error("rw-register: unsupported high-level op");
        }
        st.phase = Phase::Collecting;
        Effect eff;
        start_collect(st, eff);
        return eff;
    }

    Effect on_respond(ClientId c, const TriggerReq& op,
                      const std::optional<TSVal>& value) override {
        ClientState& st = state(c);
        if (op.tag.purpose == kCollectRead) return on_read_respond(c, st, op, value);
        return on_write_respond(c, st, op.object);
    }

    nlohmann::ordered_json dump_state(ClientId c) const override {
        nlohmann::ordered_json j;
        auto it = states_.find(c);
        if (it == states_.end()) return j;
        const ClientState& st = it->second;
        j["phase"] = st.phase == Phase::Idle ? "idle"
                     : st.phase == Phase::Collecting ? "collecting" : "writing";
        j["tsVal"] = tsval_to_json(st.ts_val);
        j["rdSet"] = nlohmann::ordered_json::array();
        for (const TSVal& v : st.rd_set) j["rdSet"].push_back(tsval_to_json(v));
        j["wrSet"] = std::vector<ObjectId>(st.wr_set.begin(), st.wr_set.end());
        j["coverSet"] = std::vector<ObjectId>(st.cover_set.begin(), st.cover_set.end());
        return j;
    }

    std::unique_ptr<Emulation> clone() const override {
        return std::make_unique<RwRegisterEmulation>(*this);
    }

    // Objects currently covered by this client's pending writes, per its own
    // bookkeeping: row objects neither acked (wrSet) nor waiting re-trigger.
    std::set<ObjectId> cover_set(ClientId c) const {
        auto it = states_.find(c);
        return it == states_.end() ? std::set<ObjectId>{} : it->second.cover_set;
    }

    int row_of_writer(ClientId c) const { return c / lp_.z; }

private:
    static constexpr int kCollectRead = 1;
    static constexpr int kRegWrite = 2;

    enum class Phase { Idle, Collecting, Writing };

    struct ClientState {
        Phase phase = Phase::Idle;
        bool op_is_write = false;
        Value pending_value = v0;
        TSVal ts_val = ts_v0;
        std::set<TSVal> rd_set;
        std::set<ObjectId> wr_set;
        std::set<ObjectId> cover_set;
        // collect bookkeeping
        int gen = 0;
        int scans_done = 0;
        std::vector<std::size_t> chain_next;  // per server, next object index
    };

    ClientState& state(ClientId c) {
        auto [it, fresh] = states_.try_emplace(c);
        if (fresh && c >= 0 && c < cfg_.k) {
            // A writer starts with wrSet = R_j, so the first
            // write's coverSet = R_j \ wrSet comes out empty.
            const auto& row = placement_.rows.at(row_of_writer(c));
            it->second.wr_set.insert(row.begin(), row.end());
        }
        return it->second;
    }

    void start_collect(ClientState& st, Effect& eff) {
        ++st.gen;
        st.rd_set.clear();
        st.scans_done = 0;
        st.chain_next.assign(cfg_.n, 0);
        for (ServerId s = 0; s < cfg_.n; ++s) {
            if (per_server_[s].empty()) {
                ++st.scans_done;  // nothing stored here; the scan is trivially done
                continue;
            }
            st.chain_next[s] = 1;
            eff.triggers.push_back(
                {per_server_[s][0], LowOp::read(), OpTag{kCollectRead, st.gen, s}});
        }
    }

    Effect on_read_respond(ClientId c, ClientState& st, const TriggerReq& op,
                           const std::optional<TSVal>& value) {
        Effect eff;
        if (st.phase != Phase::Collecting || op.tag.gen != st.gen) return eff;  // stale scan
        if (!value) throw std::logic_error("rw-register: read respond without value");
        st.rd_set.insert(*value);
        const ServerId s = op.tag.server;
        const auto& chain = per_server_[s];
        if (st.chain_next[s] < chain.size()) {
            const ObjectId next = chain[st.chain_next[s]++];
            eff.triggers.push_back({next, LowOp::read(), OpTag{kCollectRead, st.gen, s}});
            return eff;
        }
        if (++st.scans_done < cfg_.n - cfg_.f) return eff;

        // n-f scans complete: the collect returns its maximum-timestamp value.
        TSVal max_seen = ts_v0;
        for (const TSVal& v : st.rd_set) max_seen = std::max(max_seen, v);
        if (!st.op_is_write) {
            st.phase = Phase::Idle;
            eff.returns = true;
            eff.ret = max_seen.val;
            return eff;
        }
        // WRITE phase 2, handled atomically (no responds interleave here):
        // coverSet <- R_j \ wrSet; wrSet <- {}; trigger on the uncovered rest.
        st.ts_val = TSVal{{max_seen.ts.seq + 1, static_cast<std::uint32_t>(c)},
                          st.pending_value};
        st.phase = Phase::Writing;
        const auto& row = placement_.rows.at(row_of_writer(c));
        st.cover_set.clear();
        for (ObjectId b : row)
            if (!st.wr_set.count(b)) st.cover_set.insert(b);
        st.wr_set.clear();
        for (ObjectId b : row)
            if (!st.cover_set.count(b)) trigger_write(st, b, eff);
        return eff;
    }

    Effect on_write_respond(ClientId c, ClientState& st, ObjectId b) {
        Effect eff;
        if (st.cover_set.count(b)) {
            // The old covering write finally took effect; refresh the register
            // with the current tsVal (which may belong to a later WRITE).
            st.cover_set.erase(b);
            trigger_write(st, b, eff);
            return eff;
        }
        st.wr_set.insert(b);
        if (st.phase == Phase::Writing) {
            const auto& row = placement_.rows.at(row_of_writer(c));
            const int quorum = static_cast<int>(row.size()) - cfg_.f;
            int acked = 0;
            for (ObjectId o : row) acked += st.wr_set.count(o) ? 1 : 0;
            if (acked >= quorum) {
                st.phase = Phase::Idle;
                eff.returns = true;  // ack
            }
        }
        return eff;
    }

    void trigger_write(ClientState& st, ObjectId b, Effect& eff) {
        if (st.cover_set.count(b))
            throw std::logic_error("rw-register: triggering write on covered object");
        eff.triggers.push_back({b, LowOp::write(st.ts_val), OpTag{kRegWrite, 0, -1}});
    }

    SystemConfig cfg_;
    Placement placement_;
    LayoutParams lp_;
    std::vector<std::vector<ObjectId>> per_server_;
    std::map<ClientId, ClientState> states_;
};

} // namespace regemu
