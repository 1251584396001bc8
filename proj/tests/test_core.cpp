#include <catch2/catch_amalgamated.hpp>

#include "regemu/base_object.hpp"
#include "regemu/bounds.hpp"
#include "regemu/layout.hpp"
#include "regemu/rng.hpp"

using namespace regemu;

TEST_CASE("layout parameters match the row construction", "[core]") {
    SECTION("n=6 f=2 k=5 (the five-rows-of-five instance)") {
        auto lp = layout_params({6, 2, 5});
        CHECK(lp.z == 1);
        CHECK(lp.y == 5);
        CHECK(lp.m == 5);
        CHECK(lp.row_sizes == std::vector<int>{5, 5, 5, 5, 5});
    }
    SECTION("n=3 f=1 k=1 (minimal quorum system)") {
        auto lp = layout_params({3, 1, 1});
        CHECK(lp.z == 1);
        CHECK(lp.y == 3);
        CHECK(lp.m == 1);
        CHECK(lp.row_sizes == std::vector<int>{3});
    }
    SECTION("n=7 f=2 k=3 (overflow row)") {
        auto lp = layout_params({7, 2, 3});
        CHECK(lp.z == 2);
        CHECK(lp.y == 7);
        CHECK(lp.m == 2);
        // last row = (3 - floor(3/2)*2)*2 + 2 + 1 = 5
        CHECK(lp.row_sizes == std::vector<int>{7, 5});
    }
    SECTION("rejects n <= 2f") {
        CHECK_THROWS_AS(layout_params({4, 2, 1}), std::invalid_argument);
        CHECK_THROWS_AS(layout_params({2, 1, 1}), std::invalid_argument);
    }
    SECTION("row sizes stay within [2f+1, n] on the grid") {
        for (int f = 1; f <= 3; ++f)
            for (int k = 1; k <= 6; ++k)
                for (int n = 2 * f + 1; n <= k * f + f + 3; ++n) {
                    auto lp = layout_params({n, f, k});
                    for (int size : lp.row_sizes) {
                        CHECK(size >= 2 * f + 1);
                        CHECK(size <= n);
                    }
                }
    }
}

TEST_CASE("placement geometry", "[core]") {
    SECTION("n=6 f=2 k=5 yields 25 registers in 5 rows of 5") {
        auto p = build_placement({6, 2, 5});
        CHECK(p.object_count() == 25);
        REQUIRE(p.rows.size() == 5);
        for (auto& row : p.rows) CHECK(row.size() == 5);
        validate_placement(p);
    }
    SECTION("n=3 f=1 k=2 yields rows [3,3], total (2f+1)k") {
        auto p = build_placement({3, 1, 2});
        CHECK(p.object_count() == 6);
        REQUIRE(p.rows.size() == 2);
        CHECK(p.rows[0].size() == 3);
        CHECK(p.rows[1].size() == 3);
    }
    SECTION("n=10 f=1 k=2: z >= k collapses to one row of kf+f+1") {
        auto p = build_placement({10, 1, 2});
        REQUIRE(p.rows.size() == 1);
        CHECK(p.rows[0].size() == 4);
    }
    SECTION("object totals equal the upper bound across the grid") {
        for (int f = 1; f <= 3; ++f)
            for (int k = 1; k <= 6; ++k)
                for (int n = 2 * f + 1; n <= k * f + f + 3; ++n) {
                    SystemConfig cfg{n, f, k};
                    auto p = build_placement(cfg);
                    CHECK(static_cast<std::uint64_t>(p.object_count()) ==
                          upper_bound_registers(cfg));
                    validate_placement(p);
                }
    }
    SECTION("placement JSON document shape") {
        auto doc = placement_to_json(build_placement({3, 1, 1}));
        CHECK(doc["rows"].size() == 1);
        CHECK(doc["delta"]["0"] == 0);
        CHECK(doc["delta"]["2"] == 2);
    }
}

TEST_CASE("bound calculators", "[core]") {
    SECTION("upper bound") {
        CHECK(upper_bound_registers({5, 2, 3}) == 15);
        CHECK(upper_bound_registers({7, 2, 2}) == 7);  // kf+f+1 regime
        CHECK(upper_bound_registers({3, 1, 1}) == 3);
    }
    SECTION("lower bound") {
        CHECK(lower_bound_registers({5, 2, 3}) == 15);
        CHECK(lower_bound_registers({10, 1, 2}) == 4);
        CHECK(lower_bound_registers({3, 1, 1}) == 3);
    }
    SECTION("server lower bound at capped per-server storage") {
        CHECK(lower_bound_servers(1, 1, 3) == 5);
        CHECK(lower_bound_servers(4, 1, 4) == 3);  // cap >= k collapses to 2f+1
        CHECK(lower_bound_servers(2, 2, 3) == 6);
    }
    SECTION("lower <= upper on the grid; equality at the two regimes") {
        for (int f = 1; f <= 3; ++f)
            for (int k = 1; k <= 6; ++k)
                for (int n = 2 * f + 1; n <= k * f + f + 3; ++n) {
                    SystemConfig cfg{n, f, k};
                    const auto lo = lower_bound_registers(cfg);
                    const auto hi = upper_bound_registers(cfg);
                    CHECK(lo <= hi);
                    if (n == 2 * f + 1) {
                        CHECK(lo == static_cast<std::uint64_t>((2 * f + 1) * k));
                        CHECK(hi == lo);
                    }
                    if (n >= k * f + f + 1) {
                        CHECK(hi == static_cast<std::uint64_t>(k * f + f + 1));
                        CHECK(lo == hi);
                    }
                }
    }
    SECTION("max-register and CAS cost 2f+1") {
        for (int f = 1; f <= 4; ++f) {
            CHECK(bound_max_register(f) == static_cast<std::uint64_t>(2 * f + 1));
            CHECK(bound_cas(f) == static_cast<std::uint64_t>(2 * f + 1));
        }
    }
}

TEST_CASE("base object sequential specifications", "[core]") {
    SECTION("write-max below the current state is a no-op") {
        BaseObject mr{ObjectKind::MaxRegister, TSVal{{0, 0}, 5}, false};
        auto r = apply_base_op(mr, LowOp::write_max(TSVal{{0, 0}, 3}));
        CHECK(r.obj.state.val == 5);
        CHECK(!r.response.has_value());  // ok/ack
    }
    SECTION("CAS success path returns the prior value") {
        BaseObject cas{ObjectKind::Cas, ts_v0, false};
        auto r = apply_base_op(cas, LowOp::cas(ts_v0, TSVal{{0, 0}, 7}));
        REQUIRE(r.response.has_value());
        CHECK(*r.response == ts_v0);
        CHECK(r.obj.state.val == 7);
    }
    SECTION("initial register read") {
        BaseObject reg{ObjectKind::Register, ts_v0, false};
        auto r = apply_base_op(reg, LowOp::read());
        REQUIRE(r.response.has_value());
        CHECK(*r.response == ts_v0);
    }
    SECTION("kind mismatch is a logic error") {
        BaseObject reg{ObjectKind::Register, ts_v0, false};
        CHECK_THROWS_AS(apply_base_op(reg, LowOp::read_max()), std::logic_error);
    }
}

TEST_CASE("max-register writes are idempotent at or below the state", "[core]") {
    SplitMix64 rng(7);
    BaseObject mr{ObjectKind::MaxRegister, ts_v0, false};
    TSVal high = ts_v0;
    for (int i = 0; i < 200; ++i) {
        TSVal v{{rng.below(4), static_cast<std::uint32_t>(rng.below(3))}, rng.below(50)};
        auto r = apply_base_op(mr, LowOp::write_max(v));
        high = std::max(high, v);
        CHECK(r.obj.state == high);
        mr = r.obj;
        // repeated read-max with no interleaved writes
        auto r1 = apply_base_op(mr, LowOp::read_max());
        auto r2 = apply_base_op(r1.obj, LowOp::read_max());
        CHECK(*r1.response == *r2.response);
    }
}

TEST_CASE("CAS responses are monotone when exp <= new", "[core]") {
    SplitMix64 rng(13);
    BaseObject cas{ObjectKind::Cas, ts_v0, false};
    TSVal last_return = ts_v0;
    for (int i = 0; i < 500; ++i) {
        Value a = rng.below(40), b = rng.below(40);
        if (a > b) std::swap(a, b);
        auto r = apply_base_op(cas, LowOp::cas(TSVal{{0, 0}, a}, TSVal{{0, 0}, b}));
        REQUIRE(r.response.has_value());
        CHECK(last_return <= *r.response);
        last_return = *r.response;
        cas = r.obj;
    }
}
