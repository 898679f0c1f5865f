#pragma once

#include <cstdint>
#include <initializer_list>

namespace coopgrow {

// Stream tags keep the independent random quantities of a run apart.
enum class StreamTag : std::uint64_t {
    params = 1,
    observation = 2,
    cooperativity = 3,
    synthetic = 4,
};

/// Counter-based generator: the n-th draw is a SplitMix64 finalisation of
/// (key + n * golden gamma). The key is derived from a seed and any number of
/// stream identifiers, so substreams are addressable without advancing a
/// shared state. Output is identical on every platform.
class Substream {
public:
    Substream(std::uint64_t seed, std::initializer_list<std::uint64_t> ids);
    Substream(std::uint64_t seed, StreamTag tag, std::initializer_list<std::uint64_t> ids);

    std::uint64_t next_u64();
    /// Uniform in (0, 1).
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Uniform integer in [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64_mix(std::uint64_t z);

}  // namespace coopgrow
