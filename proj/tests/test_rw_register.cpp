#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "regemu/checker.hpp"
#include "regemu/runner.hpp"

using namespace regemu;

namespace {

Workload chained_writes(std::vector<std::pair<ClientId, Value>> writes) {
    Workload w;
    for (auto [c, v] : writes) {
        WorkItem it;
        it.client = c;
        it.op = HighLevelOp::write(v);
        it.chained = true;
        w.push_back(it);
    }
    return w;
}

// FIFO delivery that withholds write responds on one object until the given
// number of high-level returns has occurred.
class HoldObjectWrites : public Scheduler {
public:
    HoldObjectWrites(ObjectId obj, int release_after_returns)
        : obj_(obj), release_after_(release_after_returns) {}

    std::optional<Action> next(const EnabledSet& enabled, SplitMix64&) override {
        const PendingOp* oldest = nullptr;
        for (const PendingOp* p : enabled.responds) {
            if (held(*p)) continue;
            if (!oldest || p->id < oldest->id) oldest = p;
        }
        if (oldest) return Action{Action::Respond, 0, oldest->id};
        if (!enabled.invokes.empty()) return Action{Action::Invoke, 0, 0};
        return std::nullopt;
    }

    void observe(const Event& e) override {
        if (e.kind == EventKind::Return) ++returns_;
    }

private:
    bool held(const PendingOp& p) const {
        return p.object == obj_ && p.op.kind == LowOpKind::Write &&
               returns_ < release_after_;
    }
    ObjectId obj_;
    int release_after_;
    int returns_ = 0;
};

std::vector<Event> write_triggers(const History& h) {
    std::vector<Event> out;
    for (const Event& e : h.events)
        if (e.kind == EventKind::Trigger && e.lop.kind == LowOpKind::Write)
            out.push_back(e);
    return out;
}

} // namespace

TEST_CASE("first write on a fresh system, traced step by step", "[rw]") {
    SystemConfig cfg{3, 1, 1};
    FifoScheduler fifo;
    auto r = run_with("rw-register", cfg, chained_writes({{0, 9}}), {}, fifo);
    REQUIRE(r.outcome.ok());

    const auto wts = write_triggers(r.history());
    REQUIRE(wts.size() == 3);  // coverSet empty, all 3 row objects triggered
    std::set<ObjectId> objs;
    for (const Event& e : wts) {
        objs.insert(e.object);
        CHECK(e.lop.arg == TSVal{{1, 0}, 9});  // collect saw v0 everywhere
    }
    CHECK(objs == std::set<ObjectId>{0, 1, 2});

    // returns after |R_0|-f = 2 write responds
    int responds_before_return = 0;
    bool returned = false;
    std::set<OpId> wids;
    for (const Event& e : wts) wids.insert(e.op_id);
    for (const Event& e : r.history().events) {
        if (e.kind == EventKind::Return) returned = true;
        if (!returned && e.kind == EventKind::Respond && wids.count(e.op_id))
            ++responds_before_return;
    }
    CHECK(responds_before_return == 2);
}

TEST_CASE("a blocked respond leaves one covered register behind", "[rw]") {
    SystemConfig cfg{3, 1, 1};
    HoldObjectWrites hold(2, 1000);  // never released
    auto r = run_with("rw-register", cfg, chained_writes({{0, 9}}), {}, hold);
    REQUIRE(r.outcome.ok());  // returns after the other 2 responds
    CHECK(covered_set(r.history(), r.history().length()) == std::set<ObjectId>{2});
}

TEST_CASE("second write skips its covered register and re-triggers on uncover", "[rw]") {
    SystemConfig cfg{3, 1, 1};
    // Hold object 2's first write until both high-level writes returned.
    HoldObjectWrites hold(2, 2);
    auto r = run_with("rw-register", cfg, chained_writes({{0, 9}, {0, 11}}), {}, hold);
    REQUIRE(r.outcome.ok());

    const auto wts = write_triggers(r.history());
    // write 1: objects 0,1,2 at ts 1; write 2: objects 0,1 only at ts 2;
    // after the stale respond arrives, a re-trigger on object 2 at ts 2.
    std::map<std::uint64_t, std::set<ObjectId>> by_seq;
    for (const Event& e : wts) by_seq[e.lop.arg.ts.seq].insert(e.object);
    CHECK(by_seq[1] == std::set<ObjectId>{0, 1, 2});
    CHECK(by_seq[2] == std::set<ObjectId>{0, 1, 2});

    // the ts-2 trigger on object 2 comes after the ts-1 respond on object 2
    std::uint64_t t_stale_respond = 0, t_retrigger = 0;
    OpId first_write_obj2 = 0;
    for (const Event& e : wts)
        if (e.object == 2 && e.lop.arg.ts.seq == 1) first_write_obj2 = e.op_id;
    for (const Event& e : r.history().events) {
        if (e.kind == EventKind::Respond && e.op_id == first_write_obj2)
            t_stale_respond = e.t;
        if (e.kind == EventKind::Trigger && e.object == 2 && e.lop.kind == LowOpKind::Write &&
            e.lop.arg.ts.seq == 2)
            t_retrigger = e.t;
    }
    REQUIRE(t_stale_respond > 0);
    REQUIRE(t_retrigger > t_stale_respond);

    // while held, write 2 triggered on exactly 2 objects before its return
    CHECK(check_ws_regular(r.history(), 16).pass());
}

TEST_CASE("reads return the latest value, fresh / sequential / after crashes", "[rw]") {
    SystemConfig cfg{3, 1, 1};
    SECTION("fresh system reads v0") {
        Workload w;
        WorkItem rd;
        rd.client = 1;
        rd.op = HighLevelOp::read();
        w.push_back(rd);
        auto r = run_fair("rw-register", cfg, w, {}, 3);
        REQUIRE(r.outcome.ok());
        for (const Event& e : r.history().events)
            if (e.kind == EventKind::Return) CHECK(e.ret_value == v0);
    }
    SECTION("read after completed write returns it") {
        Workload w = chained_writes({{0, 9}});
        WorkItem rd;
        rd.client = 1;
        rd.op = HighLevelOp::read();
        rd.chained = true;
        w.push_back(rd);
        auto r = run_fair("rw-register", cfg, w, {}, 4);
        REQUIRE(r.outcome.ok());
        for (const Event& e : r.history().events)
            if (e.kind == EventKind::Return && e.client == 1) CHECK(e.ret_value == 9);
    }
    SECTION("read after write survives f crashes between them") {
        // find the write's return step under FIFO, then crash just after it
        Workload w = chained_writes({{0, 9}});
        FifoScheduler fifo;
        auto probe = run_with("rw-register", cfg, w, {}, fifo);
        REQUIRE(probe.outcome.ok());
        std::uint64_t t_ret = 0;
        for (const Event& e : probe.history().events)
            if (e.kind == EventKind::Return) t_ret = e.t;

        WorkItem rd;
        rd.client = 1;
        rd.op = HighLevelOp::read();
        rd.chained = true;
        w.push_back(rd);
        FaultPlan faults;
        faults.server_crashes.emplace_back(0, t_ret);
        FifoScheduler fifo2;
        auto r = run_with("rw-register", cfg, w, faults, fifo2);
        REQUIRE(r.outcome.ok());
        bool read_done = false;
        for (const Event& e : r.history().events)
            if (e.kind == EventKind::Return && e.client == 1) {
                read_done = true;
                CHECK(e.ret_value == 9);
            }
        CHECK(read_done);
    }
}

TEST_CASE("an idle writer covers at most f registers", "[rw]") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        SystemConfig cfg{3, 1, 2};
        const Workload w = make_ws_workload(cfg, SplitMix64(seed).split("w"), 4, 2);
        auto r = run_fair("rw-register", cfg, w, {}, seed);
        REQUIRE(r.outcome.ok());

        // replay: track busy intervals and per-client pending writes
        std::map<ClientId, bool> busy;
        std::map<OpId, std::pair<ClientId, ObjectId>> open_writes;
        std::map<ClientId, std::set<ObjectId>> covers;
        for (const Event& e : r.history().events) {
            switch (e.kind) {
                case EventKind::Invoke: busy[e.client] = true; break;
                case EventKind::Return: busy[e.client] = false; break;
                case EventKind::Trigger:
                    if (e.lop.kind == LowOpKind::Write) {
                        open_writes[e.op_id] = {e.client, e.object};
                        covers[e.client].insert(e.object);
                    }
                    break;
                case EventKind::Respond: {
                    auto it = open_writes.find(e.op_id);
                    if (it != open_writes.end()) {
                        // recompute that client's covered objects
                        auto [c, obj] = it->second;
                        open_writes.erase(it);
                        covers[c].clear();
                        for (auto& [id, co] : open_writes)
                            if (co.first == c) covers[c].insert(co.second);
                    }
                    break;
                }
                default: break;
            }
            for (auto& [c, b] : busy)
                if (!b) CHECK(covers[c].size() <= static_cast<std::size_t>(cfg.f));
        }
    }
}

TEST_CASE("timestamps grow strictly across sequential writes", "[rw]") {
    for (std::uint64_t seed = 0; seed < 15; ++seed) {
        SystemConfig cfg{6, 2, 3};
        const Workload w = make_ws_workload(cfg, SplitMix64(seed).split("w"), 4, 0);
        auto r = run_fair("rw-register", cfg, w, {}, seed);
        REQUIRE(r.outcome.ok());

        // timestamp of each write = ts of its first triggered low-level write
        std::map<ClientId, bool> in_write;
        std::map<ClientId, std::optional<Timestamp>> current;
        std::vector<Timestamp> order;
        for (const Event& e : r.history().events) {
            if (e.kind == EventKind::Invoke && e.hop.kind == HighOpKind::Write) {
                in_write[e.client] = true;
                current[e.client] = std::nullopt;
            } else if (e.kind == EventKind::Trigger && e.lop.kind == LowOpKind::Write &&
                       in_write[e.client] && !current[e.client]) {
                current[e.client] = e.lop.arg.ts;
            } else if (e.kind == EventKind::Return && in_write[e.client]) {
                in_write[e.client] = false;
                REQUIRE(current[e.client].has_value());
                order.push_back(*current[e.client]);
            }
        }
        for (std::size_t i = 1; i < order.size(); ++i) CHECK(order[i - 1] < order[i]);
    }
}

TEST_CASE("wait freedom across the grid for all three emulations", "[rw]") {
    for (const char* emu : {"rw-register", "abd-max", "cas-max"}) {
        for (int f = 1; f <= 2; ++f) {
            for (int k = 1; k <= 4; ++k) {
                for (int n : {2 * f + 1, 2 * f + 2}) {
                    SystemConfig cfg{n, f, k};
                    for (std::uint64_t seed = 0; seed < 2; ++seed) {
                        Workload w;
                        SplitMix64 rng = SplitMix64(seed + 31 * k).split("wf");
                        for (int i = 0; i < 3; ++i) {
                            WorkItem it;
                            it.client = static_cast<ClientId>(rng.below(k));
                            const bool is_write = rng.below(2) == 0;
                            if (std::string(emu) == "cas-max")
                                it.op = is_write ? HighLevelOp::write_max(rng.below(9))
                                                 : HighLevelOp::read_max();
                            else
                                it.op = is_write ? HighLevelOp::write(rng.below(9))
                                                 : HighLevelOp::read();
                            it.chained = true;
                            w.push_back(it);
                        }
                        // the single-CAS emulation lives in the crash-free
                        // shared-memory model; only the replicated ones take
                        // server crashes
                        FaultPlan faults;
                        if (std::string(emu) != "cas-max")
                            faults = make_random_faults(cfg, SplitMix64(seed).split("f"), f);
                        auto r = run_fair(emu, cfg, w, faults, seed);
                        REQUIRE(r.outcome.ok());
                        int invokes = 0, returns = 0;
                        for (const Event& e : r.history().events) {
                            if (e.kind == EventKind::Invoke) ++invokes;
                            if (e.kind == EventKind::Return) ++returns;
                        }
                        CHECK(invokes == returns);
                        CHECK(invokes == 3);
                    }
                }
            }
        }
    }
}
