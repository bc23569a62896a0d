#include "lightchain/rng.hpp"

#include "lightchain/identity.hpp"

#include <cmath>
#include <numbers>

namespace lightchain {

RandomStream::RandomStream(std::uint64_t seed, std::string_view label, std::uint64_t index)
    : engine_(Hasher().update("lightchain-rng").update_u64(seed).update(label).update_u64(index).finish().high64())
{
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound)
{
    // Rejection sampling keeps the result exactly uniform.
    const std::uint64_t limit = bound * (UINT64_MAX / bound);
    std::uint64_t draw = 0;
    do {
        draw = engine_();
    } while (draw >= limit);
    return draw % bound;
}

double RandomStream::uniform01()
{
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::standard_normal()
{
    double u1 = 0.0;
    do {
        u1 = uniform01();
    } while (u1 <= 0.0);
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace lightchain
