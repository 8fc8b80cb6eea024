#pragma once

#include "qadv/bignum.hpp"

#include <cstdint>
#include <random>

namespace qadv {

/// Seeded generator used for every random choice in the library.
///
/// Only the raw 64-bit engine output is consumed, and the derived samplers
/// below are written out explicitly, so a seed reproduces the same stream on
/// any standard library.
class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    static constexpr result_type min() { return std::mt19937_64::min(); }
    static constexpr result_type max() { return std::mt19937_64::max(); }
    result_type operator()() { return engine_(); }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, bound); bound must be nonzero.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform();

    bool bernoulli(double p) { return uniform() < p; }
    bool coin() { return (engine_() >> 63) != 0; }

    /// Uniform over [0, 2^bits).
    BigNat random_bits(unsigned bits);
    /// Uniform over [0, bound); bound must be positive.
    BigNat below(const BigNat& bound);

    /// Child stream whose seed mixes this stream's seed material with `tag`.
    Rng derive(std::uint64_t tag);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer, used to mix seeds with stream tags.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace qadv
