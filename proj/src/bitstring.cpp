#include "qadv/bitstring.hpp"

#include "qadv/errors.hpp"
#include "qadv/rng.hpp"

#include <bit>

namespace qadv {

BitString::BitString(const BigNat& value, std::size_t length) : BitString(length) {
    if (value < 0 || bit_length(value) > length)
        throw DomainError("value " + to_decimal(value) + " does not fit in " + std::to_string(length) + " bits");
    BigNat v = value;
    for (std::size_t w = 0; w < words_.size() && v != 0; ++w) {
        words_[w] = static_cast<std::uint64_t>(v & BigNat(~std::uint64_t{0}));
        v >>= 64;
    }
}

BitString BitString::random(std::size_t length, Rng& rng) {
    BitString out(length);
    for (auto& w : out.words_) w = rng.next_u64();
    if (length % 64 != 0 && !out.words_.empty())
        out.words_.back() &= (std::uint64_t{1} << (length % 64)) - 1;
    return out;
}

bool BitString::any() const {
    for (auto w : words_)
        if (w) return true;
    return false;
}

std::size_t BitString::popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
}

bool BitString::dot(const BitString& other) const {
    if (other.length_ != length_) throw DomainError("bit string length mismatch in inner product");
    std::uint64_t acc = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) acc ^= words_[i] & other.words_[i];
    return std::popcount(acc) & 1;
}

BitString BitString::operator^(const BitString& other) const {
    if (other.length_ != length_) throw DomainError("bit string length mismatch in xor");
    BitString out(*this);
    for (std::size_t i = 0; i < words_.size(); ++i) out.words_[i] ^= other.words_[i];
    return out;
}

BigNat BitString::to_bignat() const {
    BigNat out = 0;
    for (std::size_t w = words_.size(); w-- > 0;) {
        out <<= 64;
        out |= words_[w];
    }
    return out;
}

std::string BitString::to_binary() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i)
        if (get(i)) s[length_ - 1 - i] = '1';
    return s;
}

bool dot_parity(const BigNat& a, const BigNat& b) {
    BigNat both = a & b;
    bool parity = false;
    while (both != 0) {
        auto w = static_cast<std::uint64_t>(both & BigNat(~std::uint64_t{0}));
        parity ^= (std::popcount(w) & 1) != 0;
        both >>= 64;
    }
    return parity;
}

}  // namespace qadv
