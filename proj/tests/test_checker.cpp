#include <catch2/catch_amalgamated.hpp>

#include "regemu/checker.hpp"
#include "regemu/runner.hpp"

using namespace regemu;

namespace {

// compact builder for high-level histories: each entry appends one event
struct HB {
    History h;
    std::uint64_t t = 0;

    HB& inv(ClientId c, HighLevelOp op) {
        Event e;
        e.t = ++t;
        e.kind = EventKind::Invoke;
        e.client = c;
        e.hop = op;
        h.events.push_back(e);
        return *this;
    }
    HB& ret(ClientId c, std::optional<Value> v = std::nullopt) {
        Event e;
        e.t = ++t;
        e.kind = EventKind::Return;
        e.client = c;
        e.ret_value = v;
        h.events.push_back(e);
        return *this;
    }
};

OpRec rec(OpRec::Kind kind, Value arg, std::uint64_t inv, std::uint64_t ret,
          std::optional<Value> resp = std::nullopt) {
    OpRec r;
    r.kind = kind;
    r.arg = TSVal{{0, 0}, arg};
    r.inv_t = inv;
    r.ret_t = ret;
    if (resp) r.response = TSVal{{0, 0}, *resp};
    r.label = "op@" + std::to_string(inv);
    return r;
}

} // namespace

TEST_CASE("check_atomic on simple schedules", "[checker]") {
    SECTION("sequential write(1); read->1 passes") {
        std::vector<OpRec> ops{rec(OpRec::Kind::Write, 1, 1, 2),
                               rec(OpRec::Kind::Read, 0, 3, 4, 1)};
        auto v = check_atomic(ops, SpecKind::HighRegister);
        CHECK(v.pass());
        CHECK(replay_witness(SpecKind::HighRegister, v.witness));
    }
    SECTION("concurrent write-max(2)/write-max(7); read-max->7 passes") {
        std::vector<OpRec> ops{rec(OpRec::Kind::Write, 2, 1, 5),
                               rec(OpRec::Kind::Write, 7, 2, 4),
                               rec(OpRec::Kind::Read, 0, 6, 7, 7)};
        auto v = check_atomic(ops, SpecKind::HighMaxRegister);
        CHECK(v.pass());
        CHECK(replay_witness(SpecKind::HighMaxRegister, v.witness));
    }
    SECTION("read->5 with no write(5) anywhere fails") {
        std::vector<OpRec> ops{rec(OpRec::Kind::Write, 1, 1, 2),
                               rec(OpRec::Kind::Read, 0, 3, 4, 5)};
        CHECK(check_atomic(ops, SpecKind::HighRegister).status ==
              Verdict::Status::Fail);
    }
    SECTION("a pending write may be linearized or dropped") {
        // pending write(9); later read->9 forces inclusion
        std::vector<OpRec> ops{rec(OpRec::Kind::Write, 9, 1, OpRec::kPending),
                               rec(OpRec::Kind::Read, 0, 2, 3, 9)};
        CHECK(check_atomic(ops, SpecKind::HighRegister).pass());
        // and read->0 forces exclusion
        std::vector<OpRec> ops2{rec(OpRec::Kind::Write, 9, 1, OpRec::kPending),
                                rec(OpRec::Kind::Read, 0, 2, 3, 0)};
        CHECK(check_atomic(ops2, SpecKind::HighRegister).pass());
    }
    SECTION("exceeding the op bound is inconclusive, not a verdict") {
        std::vector<OpRec> ops;
        for (int i = 0; i < 13; ++i)
            ops.push_back(rec(OpRec::Kind::Write, i, 2 * i + 1, 2 * i + 2));
        CHECK(check_atomic(ops, SpecKind::HighRegister, 12).status ==
              Verdict::Status::Inconclusive);
        CHECK(check_atomic(ops, SpecKind::HighRegister, 16).pass());
    }
}

TEST_CASE("WS-Regularity per-read placements", "[checker]") {
    SECTION("complete W(1) then R->1 passes") {
        auto h = HB{}.inv(0, HighLevelOp::write(1)).ret(0)
                     .inv(9, HighLevelOp::read()).ret(9, 1).h;
        CHECK(check_ws_regular(h).pass());
    }
    SECTION("complete W(1) then non-concurrent R->v0 fails (and WS-Safe too)") {
        auto h = HB{}.inv(0, HighLevelOp::write(1)).ret(0)
                     .inv(9, HighLevelOp::read()).ret(9, 0).h;
        CHECK(check_ws_regular(h).status == Verdict::Status::Fail);
        CHECK(check_ws_safe(h).status == Verdict::Status::Fail);
    }
    SECTION("R concurrent with W(2) after complete W(1): 1 and 2 pass, v0 fails") {
        auto mk = [](Value read_val) {
            HB b;
            b.inv(0, HighLevelOp::write(1)).ret(0);
            b.inv(1, HighLevelOp::write(2));       // W(2) invoked
            b.inv(9, HighLevelOp::read());         // R concurrent with W(2)
            b.ret(9, read_val);
            b.ret(1);                              // W(2) returns
            return b.h;
        };
        CHECK(check_ws_regular(mk(1)).pass());
        CHECK(check_ws_regular(mk(2)).pass());
        CHECK(check_ws_regular(mk(0)).status == Verdict::Status::Fail);
    }
    SECTION("non-write-sequential history is not applicable") {
        auto h = HB{}.inv(0, HighLevelOp::write(1)).inv(1, HighLevelOp::write(2))
                     .ret(0).ret(1).h;
        CHECK(check_ws_regular(h).status == Verdict::Status::NotApplicable);
    }
}

TEST_CASE("WS-Safety constrains only non-concurrent reads", "[checker]") {
    SECTION("junk from a read concurrent with a write is allowed") {
        HB b;
        b.inv(0, HighLevelOp::write(1));
        b.inv(9, HighLevelOp::read());
        b.ret(9, 424242);  // arbitrary junk, concurrent with W(1)
        b.ret(0);
        CHECK(check_ws_safe(b.h).pass());
        CHECK(check_ws_regular(b.h).status == Verdict::Status::Fail);
    }
    SECTION("non-concurrent read of the latest write passes") {
        auto h = HB{}.inv(0, HighLevelOp::write(5)).ret(0)
                     .inv(9, HighLevelOp::read()).ret(9, 5).h;
        CHECK(check_ws_safe(h).pass());
    }
    SECTION("non-concurrent read of a never-written value fails") {
        auto h = HB{}.inv(0, HighLevelOp::write(5)).ret(0)
                     .inv(9, HighLevelOp::read()).ret(9, 6).h;
        CHECK(check_ws_safe(h).status == Verdict::Status::Fail);
    }
}

TEST_CASE("count_resources", "[checker]") {
    CHECK(count_resources(History{}) == 0);
}

TEST_CASE("safety is weaker than regularity on generated runs", "[checker]") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        SystemConfig cfg{3, 1, 2};
        const Workload w = make_ws_workload(cfg, SplitMix64(seed).split("w"), 4, 4);
        auto r = run_fair("rw-register", cfg, w, {}, seed);
        REQUIRE(r.outcome.ok());
        auto reg = check_ws_regular(r.history(), 16);
        auto safe = check_ws_safe(r.history(), 16);
        REQUIRE(reg.pass());
        CHECK(safe.pass());
        if (!reg.witness.empty()) CHECK(replay_witness(SpecKind::HighRegister, reg.witness));
    }
}

TEST_CASE("mutation of a non-concurrent read flips WS-Safe to fail", "[checker]") {
    int mutated_checked = 0;
    for (std::uint64_t seed = 0; seed < 30 && mutated_checked < 12; ++seed) {
        SystemConfig cfg{3, 1, 2};
        const Workload w =
            make_ws_workload(cfg, SplitMix64(seed).split("w"), 3, 2, true);
        auto r = run_fair("rw-register", cfg, w, {}, seed);
        REQUIRE(r.outcome.ok());
        REQUIRE(check_ws_safe(r.history(), 16).pass());

        // find reads whose window is concurrent with no write
        const auto ops = high_level_schedule(r.history());
        for (const OpRec& rd : ops) {
            if (rd.kind != OpRec::Kind::Read || rd.pending()) continue;
            bool concurrent = false;
            for (const OpRec& wr : ops)
                if (wr.kind == OpRec::Kind::Write && !wr.precedes(rd) && !rd.precedes(wr))
                    concurrent = true;
            if (concurrent) continue;
            History mutated = r.history();
            for (Event& e : mutated.events)
                if (e.kind == EventKind::Return && e.client == rd.client &&
                    e.t == rd.ret_t)
                    e.ret_value = 999983;  // never written anywhere
            CHECK(check_ws_safe(mutated, 16).status == Verdict::Status::Fail);
            ++mutated_checked;
        }
    }
    CHECK(mutated_checked >= 12);
}
