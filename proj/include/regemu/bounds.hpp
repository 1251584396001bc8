#pragma once

#include <cstdint>
#include <stdexcept>

#include "regemu/layout.hpp"
#include "regemu/types.hpp"

namespace regemu {

namespace detail {
inline std::uint64_t ceil_div(std::uint64_t a, std::uint64_t b) {
    return (a + b - 1) / b;
}
} // namespace detail

// Registers needed by the row construction: kf + ceil(k/z)(f+1),
// z = floor((n-(f+1))/f).
inline std::uint64_t upper_bound_registers(const SystemConfig& cfg) {
    const LayoutParams lp = layout_params(cfg);
    const auto f = static_cast<std::uint64_t>(cfg.f);
    const auto k = static_cast<std::uint64_t>(cfg.k);
    return k * f + detail::ceil_div(k, static_cast<std::uint64_t>(lp.z)) * (f + 1);
}

// Registers any f-tolerant WS-Safe obstruction-free emulation must use:
// kf + ceil(kf/(n-(f+1)))(f+1).
inline std::uint64_t lower_bound_registers(const SystemConfig& cfg) {
    cfg.validate();
    const auto f = static_cast<std::uint64_t>(cfg.f);
    const auto k = static_cast<std::uint64_t>(cfg.k);
    const auto denom = static_cast<std::uint64_t>(cfg.n) - (f + 1);
    return k * f + detail::ceil_div(k * f, denom) * (f + 1);
}

// Minimum server count when each server stores at most `cap` registers:
// ceil(kf/cap) + f + 1.
inline std::uint64_t lower_bound_servers(std::uint64_t cap, int f, int k) {
    if (cap < 1) throw std::invalid_argument("lower_bound_servers: cap must be >= 1");
    if (f < 1 || k < 1) throw std::invalid_argument("lower_bound_servers: f,k must be >= 1");
    const auto ff = static_cast<std::uint64_t>(f);
    const auto kk = static_cast<std::uint64_t>(k);
    return detail::ceil_div(kk * ff, cap) + ff + 1;
}

// Max-register and CAS emulations both cost 2f+1 objects, tight.
inline std::uint64_t bound_max_register(int f) { return 2 * static_cast<std::uint64_t>(f) + 1; }
inline std::uint64_t bound_cas(int f) { return 2 * static_cast<std::uint64_t>(f) + 1; }

} // namespace regemu
