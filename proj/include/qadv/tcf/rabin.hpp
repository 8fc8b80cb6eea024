#pragma once

#include "qadv/bignum.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace qadv::tcf {

struct SecurityParams {
    unsigned n_bits = 0;
    std::uint64_t rng_seed = 0;
};

/// N = p*q with p, q distinct primes congruent to 3 mod 4.
struct RabinKeyPair {
    BigNat N;
    BigNat p;
    BigNat q;
};

/// A colliding pair under one key. For the Rabin family `y` has one element.
struct Claw {
    BigNat x0;
    BigNat x1;
    std::vector<BigNat> y;
};

/// Generates a Blum semiprime with bit length n_bits (n_bits +/- 1 only when
/// no exact-length modulus exists). Requires n_bits >= 6.
RabinKeyPair rabin_gen(const SecurityParams& params);

/// Exclusive upper bound of the domain: ceil(N/2).
BigNat rabin_domain_bound(const BigNat& N);

/// x^2 mod N for 0 <= x < ceil(N/2); throws DomainError otherwise.
BigNat rabin_eval(const BigNat& N, const BigNat& x);

/// Every x in [0, ceil(N/2)) with x^2 = y (mod N), ascending. Empty when y
/// has no square root. Each candidate is verified by squaring.
std::vector<BigNat> rabin_invert(const RabinKeyPair& keys, const BigNat& y);

/// Recovers (p, q), p < q, from a claw. Throws NotAClaw if neither
/// gcd(x0 + x1, N) nor gcd(|x0 - x1|, N) is a proper factor.
std::pair<BigNat, BigNat> factor_from_claw(const BigNat& N, const Claw& claw);

/// Checks N = p*q, p != q, p = q = 3 mod 4, both probable primes.
bool rabin_keys_valid(const RabinKeyPair& keys);

/// Pollard-rho factorization of a Blum semiprime; used only by the prover
/// simulator, which stands in for the superposition it cannot otherwise hold.
std::pair<BigNat, BigNat> factor_semiprime(const BigNat& N, std::uint64_t seed = 1);

}  // namespace qadv::tcf
