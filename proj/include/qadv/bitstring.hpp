#pragma once

#include "qadv/bignum.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qadv {

class Rng;

/// Fixed-length bit string, little-endian: bit i is the coefficient of 2^i.
class BitString {
public:
    BitString() = default;
    explicit BitString(std::size_t length) : length_(length), words_((length + 63) / 64, 0) {}
    /// Low `length` bits of `value`; throws DomainError if value does not fit.
    BitString(const BigNat& value, std::size_t length);

    static BitString random(std::size_t length, Rng& rng);

    std::size_t size() const { return length_; }
    bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
    void set(std::size_t i, bool v) {
        const std::uint64_t mask = std::uint64_t{1} << (i % 64);
        if (v) words_[i / 64] |= mask;
        else words_[i / 64] &= ~mask;
    }
    void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

    bool any() const;
    std::size_t popcount() const;

    /// Parity of the bitwise AND; lengths must match.
    bool dot(const BitString& other) const;
    BitString operator^(const BitString& other) const;

    BigNat to_bignat() const;
    /// Most-significant bit first, e.g. "01011" for 11 at length 5.
    std::string to_binary() const;

    const std::vector<std::uint64_t>& words() const { return words_; }

    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::size_t length_ = 0;
    std::vector<std::uint64_t> words_;
};

/// Convenience: parity of (a AND b) for naturals viewed as little-endian strings.
bool dot_parity(const BigNat& a, const BigNat& b);

}  // namespace qadv
