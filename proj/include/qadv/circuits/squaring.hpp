#pragma once

#include "qadv/circuits/builder.hpp"

#include <string>

namespace qadv::circuits {

/// out (2|x| qubits, all zero) <- x^2. Row i adds x_i 2^(2i) + sum_{j>i} x_i x_j 2^(i+j+1)
/// with the pairwise ANDs held in ancillas that are discarded after the row.
void square_schoolbook(Builder& b, const std::vector<Qubit>& x, const std::vector<Qubit>& out);

/// Karatsuba squaring: x = a 2^h + b, x^2 = a^2 2^(2h) + ((a+b)^2 - a^2 - b^2) 2^h + b^2.
/// Intermediate registers are discarded rather than uncomputed. Widths at or
/// below `cutoff` fall back to schoolbook.
void square_karatsuba(Builder& b, const std::vector<Qubit>& x, const std::vector<Qubit>& out, unsigned cutoff);

/// R = 2^w with w = bitlen(N); R' = R^-1 mod N.
BigNat montgomery_r_prime(const BigNat& N);

/// Consumes T (T < N R, at most 2w+1 qubits) and returns w qubits holding
/// T R^-1 mod N. Everything else is discarded.
std::vector<Qubit> montgomery_reduce(Builder& b, std::vector<Qubit> T, const BigNat& N);

/// x <- 3x mod 2^|x| in place. The register is relabeled: the returned
/// qubits are not the ones passed in.
void mul3_inplace(Builder& b, std::vector<Qubit>& x);

struct CircuitSpec {
    std::string builder = "karatsuba";  // "schoolbook" | "karatsuba"
    BigNat N = 0;                       // base modulus
    unsigned lift = 0;                  // computes (3^lift x)^2 mod 9^lift N
    unsigned cutoff = 16;
};

/// Full round-1 circuit: x register of bitlen(k (ceil(N/2) - 1)) qubits
/// holding x, y register holding (kx)^2 R' mod k^2 N.
Circuit build_circuit(const CircuitSpec& spec);
/// Same gate stream, counted without being stored.
ResourceReport circuit_resources(const CircuitSpec& spec);

Circuit build_schoolbook(unsigned n, const BigNat& N);
Circuit build_karatsuba(unsigned n, const BigNat& N, unsigned cutoff = 16);
/// Standalone reduction: x register is a 2n-bit product T, y = T R^-1 mod N.
Circuit build_montgomery_stage(unsigned n, const BigNat& N);
/// x register of n qubits, y register aliases the relabeled x.
Circuit build_mul3_inplace(unsigned n);

/// Deterministic odd n-bit modulus, coprime to 3, for resource estimates.
BigNat resource_modulus(unsigned n);

}  // namespace qadv::circuits
