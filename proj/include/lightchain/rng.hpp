#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace lightchain {

/// One labeled sub-stream of the run-wide seed. Streams with different
/// (label, index) pairs are independent, so adding draws in one subsystem
/// never shifts another subsystem's sequence.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound); bound must be > 0.
    std::uint64_t uniform_below(std::uint64_t bound);

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01();

    bool bernoulli(double p) { return uniform01() < p; }

    /// Standard normal via Box-Muller (no cached second value).
    double standard_normal();

private:
    std::mt19937_64 engine_;
};

}  // namespace lightchain
