#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <string>
#include <string_view>

namespace qadv {

/// Arbitrary-precision natural number. Signed under the hood so that
/// intermediate differences (x0 - x1, CRT combinations) stay representable.
using BigNat = boost::multiprecision::cpp_int;

class Rng;

unsigned bit_length(const BigNat& v);
bool bit_test(const BigNat& v, unsigned i);

BigNat pow_mod(const BigNat& base, const BigNat& exp, const BigNat& mod);
BigNat gcd(const BigNat& a, const BigNat& b);
/// Inverse of a modulo m; throws DomainError when gcd(a, m) != 1.
BigNat inverse_mod(const BigNat& a, const BigNat& m);
/// Non-negative residue of a modulo m.
BigNat mod_floor(const BigNat& a, const BigNat& m);

bool is_probable_prime(const BigNat& n, Rng& rng, unsigned rounds = 40);

std::string to_decimal(const BigNat& v);
/// Parses a non-negative decimal string; throws DomainError on junk.
BigNat from_decimal(std::string_view s);

std::uint64_t to_u64(const BigNat& v);

}  // namespace qadv
