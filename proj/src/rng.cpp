#include "coopgrow/rng.hpp"

#include <cmath>
#include <numbers>

namespace coopgrow {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t splitmix64_mix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Substream::Substream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids)
    : key_(splitmix64_mix(seed + kGamma))
{
    for (std::uint64_t id : ids) {
        key_ = splitmix64_mix(key_ ^ splitmix64_mix(id + kGamma));
    }
}

Substream::Substream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> ids)
    : Substream(seed, {static_cast<std::uint64_t>(tag)})
{
    for (std::uint64_t id : ids) {
        key_ = splitmix64_mix(key_ ^ splitmix64_mix(id + kGamma));
    }
}

std::uint64_t Substream::next_u64()
{
    ++counter_;
    return splitmix64_mix(key_ + counter_ * kGamma);
}

double Substream::uniform()
{
    // 53 random bits, shifted by half an ulp so 0 is never returned.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double Substream::normal()
{
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(angle);
    has_cached_ = true;
    return r * std::cos(angle);
}

std::int64_t Substream::uniform_int(std::int64_t lo, std::int64_t hi)
{
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) {
        return static_cast<std::int64_t>(next_u64());
    }
    // Rejection to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
}

}  // namespace coopgrow
