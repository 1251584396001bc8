#pragma once

#include <cstdint>
#include <string_view>

namespace regemu {

// SplitMix64: the project's single named generator. Every random choice in a
// run flows from one 64-bit seed, optionally split by a label so independent
// components (scheduler, workload, F sampling) draw from disjoint streams.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, bound); bound > 0. Rejection-free modulo is fine here:
    // bounds are tiny relative to 2^64, bias is immaterial for scheduling.
    std::uint64_t below(std::uint64_t bound) { return next() % bound; }

    SplitMix64 split(std::string_view label) const {
        std::uint64_t h = state_ ^ 0x6a09e667f3bcc909ULL;
        for (char c : label) {
            h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
            h *= 0x100000001b3ULL;
        }
        return SplitMix64(h);
    }

private:
    std::uint64_t state_;
};

} // namespace regemu
