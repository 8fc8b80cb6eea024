#include "qadv/bignum.hpp"

#include "qadv/errors.hpp"
#include "qadv/rng.hpp"

#include <boost/multiprecision/miller_rabin.hpp>

namespace qadv {

unsigned bit_length(const BigNat& v) {
    if (v <= 0) return 0;
    return static_cast<unsigned>(boost::multiprecision::msb(v)) + 1;
}

bool bit_test(const BigNat& v, unsigned i) {
    return boost::multiprecision::bit_test(v, i);
}

BigNat pow_mod(const BigNat& base, const BigNat& exp, const BigNat& mod) {
    if (mod == 1) return 0;
    return boost::multiprecision::powm(mod_floor(base, mod), exp, mod);
}

BigNat gcd(const BigNat& a, const BigNat& b) {
    return boost::multiprecision::gcd(a, b);
}

BigNat mod_floor(const BigNat& a, const BigNat& m) {
    BigNat r = a % m;
    if (r < 0) r += m;
    return r;
}

BigNat inverse_mod(const BigNat& a, const BigNat& m) {
    BigNat old_r = mod_floor(a, m), r = m;
    BigNat old_s = 1, s = 0;
    while (r != 0) {
        BigNat q = old_r / r;
        BigNat t = old_r - q * r;
        old_r = r;
        r = t;
        t = old_s - q * s;
        old_s = s;
        s = t;
    }
    if (old_r != 1) throw DomainError("value has no inverse modulo " + to_decimal(m));
    return mod_floor(old_s, m);
}

bool is_probable_prime(const BigNat& n, Rng& rng, unsigned rounds) {
    if (n < 2) return false;
    return boost::multiprecision::miller_rabin_test(n, rounds, rng.engine());
}

std::string to_decimal(const BigNat& v) { return v.str(); }

BigNat from_decimal(std::string_view s) {
    if (s.empty()) throw DomainError("empty decimal string");
    BigNat out = 0;
    for (char c : s) {
        if (c < '0' || c > '9') throw DomainError("invalid decimal digit in '" + std::string(s) + "'");
        out = out * 10 + (c - '0');
    }
    return out;
}

std::uint64_t to_u64(const BigNat& v) {
    if (v < 0 || bit_length(v) > 64) throw DomainError("value does not fit in 64 bits");
    return static_cast<std::uint64_t>(v);
}

}  // namespace qadv
