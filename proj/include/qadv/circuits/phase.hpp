#pragma once

#include "qadv/circuits/circuit.hpp"

namespace qadv::circuits {

/// 2 pi 2^(i+j+k) / N reduced to [0, 2 pi). Depends on i+j+k only.
double phase_angle(unsigned i, unsigned j, unsigned k, const BigNat& N);
double phase_angle_sum(unsigned s, const BigNat& N);

/// Output bits used to resolve x^2/N: n + 3.
unsigned phase_output_bits(unsigned n);

/// Phase-estimation circuits for x^2 mod N with x on n = bitlen(N) qubits.
///
/// Variant 1 applies, per output bit, a Toffoli onto one ancilla per row i
/// followed by singly controlled phases. With `reuse_output` a single output
/// qubit is measured and recycled for every bit (semiclassical inverse
/// Fourier transform; the classically chosen correction appears as an
/// uncontrolled CPHASE with angle 0). Without it, all output qubits are kept
/// and a full inverse Fourier transform is appended.
///
/// Variant 2 groups the pairs with equal i+j: a counter register counts
/// x_i x_j = 1 over the group and drives one phase per counter bit.
///
/// The "y" register lists output qubits so that its integer value w gives
/// x^2 mod N = round(w N / 2^m).
Circuit build_phase_circuit(unsigned variant, const BigNat& N, bool reuse_output);

/// Counts for variant 1 (reuse_output) or variant 2 at size n, streamed
/// without storing gates.
ResourceReport phase_circuit_resources(unsigned variant, unsigned n);

}  // namespace qadv::circuits
