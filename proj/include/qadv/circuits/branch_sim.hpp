#pragma once

#include "qadv/circuits/circuit.hpp"
#include "qadv/rng.hpp"

#include <cstdint>
#include <vector>

namespace qadv::circuits {

/// Result of running up to 64 lanes, each lane one two-branch trajectory.
struct BranchBatch {
    std::size_t lanes = 0;
    std::vector<BitString> y0, y1;  // "y" register per branch
    std::vector<BitString> x0, x1;  // "x" register per branch
    std::uint64_t phase = 0;        // bit per lane: relative sign is (-1)^bit
    std::vector<std::uint32_t> errors;
    /// One word per discarded qubit, in discard order; bit `lane` is that
    /// lane's Hadamard-basis outcome.
    std::vector<std::uint64_t> h;

    BitString h_of(std::size_t lane) const;
};

/// Classical simulation of a permutation circuit on a superposition of two
/// basis states, bit-sliced over 64 lanes.
///
/// Pauli errors: after each counted gate, with probability `gate_error` per
/// lane, X, Y or Z (uniform) hits one of the gate's qubits (uniform). X flips
/// the bit in both branches; Z flips the relative sign when the branches
/// disagree on that qubit; Y does both. A discard measured with outcome h
/// flips the sign when h = 1 and the branches disagree.
class BranchSimulator {
public:
    explicit BranchSimulator(const Circuit& circuit);

    std::size_t counted_gates() const { return counted_; }
    std::size_t discarded_qubits() const { return discarded_; }
    std::size_t input_width() const { return input_.size(); }

    /// `in0[l]`, `in1[l]` are lane l's branch inputs (at most 64 lanes).
    /// Discard outcomes are drawn from `rng` unless `h` supplies them.
    BranchBatch run(const std::vector<BitString>& in0, const std::vector<BitString>& in1, double gate_error,
                    Rng& rng, const std::vector<std::uint64_t>* h = nullptr) const;

    /// Noise-free sign (+1/-1) that the discards with outcomes `h` impose on
    /// inputs (a, b): what a verifier recomputes from the claw.
    int discard_sign(const BitString& a, const BitString& b, const BitString& h) const;

private:
    struct Op {
        GateKind kind;
        std::uint32_t a, b, c;      // operands; for lists, [a, a+b) in list_
        std::uint32_t gate_index;   // index among counted gates
    };
    std::uint32_t n_qubits_ = 0;
    std::vector<Op> ops_;
    std::vector<Qubit> list_;
    std::vector<Qubit> input_, x_, y_;
    std::size_t counted_ = 0;
    std::size_t discarded_ = 0;
};

}  // namespace qadv::circuits
