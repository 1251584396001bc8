#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace regemu {

using ObjectId = int;
using ServerId = int;
using ClientId = int;  // writers are 0..k-1; reader ids live at >= k
using OpId = std::uint64_t;
using Value = std::uint64_t;  // the value domain V; v0 = 0

inline constexpr Value v0 = 0;

// System parameters: n servers, failure threshold f, k writers.
struct SystemConfig {
    int n = 0;
    int f = 0;
    int k = 0;

    void validate() const {
        if (f < 1) throw std::invalid_argument("SystemConfig: f must be >= 1");
        if (k < 1) throw std::invalid_argument("SystemConfig: k must be >= 1");
        if (n < 2 * f + 1)
            throw std::invalid_argument("SystemConfig: n must be >= 2f+1, got n=" +
                                        std::to_string(n) + " f=" + std::to_string(f));
    }
};

// Totally ordered by (seq, writer). Ties between concurrent writers are broken
// by writer id so that non-write-sequential runs still have a unique maximum.
struct Timestamp {
    std::uint64_t seq = 0;
    std::uint32_t writer = 0;

    auto operator<=>(const Timestamp&) const = default;
};

// A timestamped value; the unit stored in base registers and, for the
// max-register emulations, the ordered element written by write-max.
// Ordered lexicographically by (seq, writer, val).
struct TSVal {
    Timestamp ts;
    Value val = v0;

    auto operator<=>(const TSVal&) const = default;
};

inline const TSVal ts_v0{};  // <(0,0), v0>: the initial content of every base object

} // namespace regemu
