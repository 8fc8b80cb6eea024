#pragma once

#include "qadv/bignum.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace qadv::tcf {

using Rational = boost::multiprecision::cpp_rational;

struct DdhKeyPair {
    BigNat P;  // group prime
    BigNat q;  // subgroup order, q | P-1
    BigNat g;
    unsigned k = 0;
    std::uint64_t m = 0;  // input range per coordinate, power of two
    std::vector<std::vector<BigNat>> gM;
    std::vector<BigNat> gMs;
    // Secret part; empty in a public key.
    std::vector<std::vector<BigNat>> M;
    std::vector<bool> s;

    bool has_trapdoor() const { return !M.empty(); }
};

/// One DDH domain element: branch bit b and x in Z_m^k.
struct DdhInput {
    bool b = false;
    std::vector<std::uint64_t> x;
    friend bool operator==(const DdhInput&, const DdhInput&) = default;
};

/// Builds a key from explicit data (used by tests and key files).
/// Fills gM and gMs from M and s.
DdhKeyPair ddh_from_secret(const BigNat& P, const BigNat& q, const BigNat& g,
                           std::vector<std::vector<BigNat>> M, std::vector<bool> s);

/// k >= 1; the group prime has roughly group_bits bits and its subgroup
/// order must exceed 2m so discrete logs over [0, m] are unambiguous.
DdhKeyPair ddh_gen(unsigned k, unsigned group_bits, std::uint64_t seed);

std::uint64_t ddh_range_for(unsigned k);

std::vector<BigNat> ddh_eval(const DdhKeyPair& key, bool b, const std::vector<std::uint64_t>& x);

/// Every preimage of y, at most one per branch, b=0 first. Throws
/// NotInImage when a discrete log fails or no branch lands in range.
std::vector<DdhInput> ddh_invert(const DdhKeyPair& key, const std::vector<BigNat>& y);

/// M^-1 mod q; throws DomainError when M is singular.
std::vector<std::vector<BigNat>> matrix_inverse_mod(const std::vector<std::vector<BigNat>>& M,
                                                    const BigNat& q);

/// Fraction of the 2 m^k inputs that have no partner, by enumeration.
/// Throws TooLarge when m^k exceeds 10^6.
Rational unpaired_fraction(unsigned k, std::uint64_t m, const std::vector<bool>& s);

/// The closed form 1 - (1 - 1/m)^k, kept for comparison only.
double unpaired_fraction_closed_form(unsigned k, std::uint64_t m);

}  // namespace qadv::tcf
