#include "qadv/rng.hpp"

#include "qadv/errors.hpp"

namespace qadv {

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw PreconditionError("Rng::below requires a positive bound");
    // 2^64 mod bound; values below it would bias the low residues.
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
        std::uint64_t v = engine_();
        if (v >= threshold) return v % bound;
    }
}

double Rng::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

BigNat Rng::random_bits(unsigned bits) {
    BigNat out = 0;
    unsigned filled = 0;
    while (filled < bits) {
        std::uint64_t w = engine_();
        unsigned take = std::min(64u, bits - filled);
        if (take < 64) w &= (std::uint64_t{1} << take) - 1;
        out |= BigNat(w) << filled;
        filled += take;
    }
    return out;
}

BigNat Rng::below(const BigNat& bound) {
    if (bound <= 0) throw PreconditionError("Rng::below requires a positive bound");
    const unsigned bits = bit_length(bound - 1) == 0 ? 1 : bit_length(bound - 1);
    for (;;) {
        BigNat v = random_bits(bits);
        if (v < bound) return v;
    }
}

Rng Rng::derive(std::uint64_t tag) {
    return Rng(mix_seed(engine_(), tag));
}

}  // namespace qadv
