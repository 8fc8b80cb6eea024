#pragma once

#include "qadv/bignum.hpp"
#include "qadv/bitstring.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qadv::circuits {

using Qubit = std::uint32_t;

enum class GateKind : std::uint8_t {
    X,
    CNOT,
    Toffoli,
    MCX,     // multi-controlled X, used by the counter in the second phase circuit
    H,
    CPhase,  // diagonal phase on the all-ones subspace of controls + target
    Alloc,   // (re)initialize qubits to |0>
    Discard, // Hadamard-basis measurement of garbage
    Measure,
};

/// `qubits` lists controls first and the target last. Alloc, Discard and
/// Measure use it as a plain qubit list.
struct Gate {
    GateKind kind;
    std::vector<Qubit> qubits;
    double angle = 0.0;

    Qubit target() const { return qubits.back(); }
    /// True for operations that count as gates (everything but bookkeeping).
    bool is_unitary() const {
        return kind != GateKind::Alloc && kind != GateKind::Discard && kind != GateKind::Measure;
    }
    friend bool operator==(const Gate&, const Gate&) = default;
};

const char* gate_name(GateKind kind);

struct ResourceReport {
    std::uint64_t qubits = 0;
    std::uint64_t total_gates = 0;
    std::uint64_t toffoli_count = 0;
    std::uint64_t depth = 0;
    /// Gate count after expanding each Toffoli into 15 Clifford+T gates; the
    /// unit in which published tables for arithmetic circuits are quoted.
    std::uint64_t decomposed_gates = 0;
    friend bool operator==(const ResourceReport&, const ResourceReport&) = default;
};

/// Receives gates as a builder emits them.
class GateSink {
public:
    virtual ~GateSink() = default;
    virtual void emit(Gate gate) = 0;
};

/// Streaming counter: qubit count is supplied by the builder at the end, all
/// other figures accumulate gate by gate. Depth uses earliest-layer greedy
/// scheduling over unitary gates.
class ResourceCounter : public GateSink {
public:
    void emit(Gate gate) override;
    ResourceReport report(std::uint64_t qubits) const;

private:
    std::vector<std::uint64_t> ready_;  // first free layer per qubit
    ResourceReport r_;
};

struct Register {
    std::string name;
    std::vector<Qubit> qubits;
};

struct Circuit : GateSink {
    std::uint32_t n_qubits = 0;
    std::vector<Gate> gates;
    std::vector<Register> registers;
    std::string builder;
    unsigned n = 0;
    BigNat N = 0;
    BigNat r_prime = 1;  // outputs are f(x) * r_prime mod N
    unsigned lift = 0;

    void emit(Gate gate) override { gates.push_back(std::move(gate)); }
    const Register& reg(const std::string& name) const;
    Register& reg(const std::string& name);
    /// Qubits that receive the input: "x_in" when the builder relabels the
    /// x register during the computation, "x" otherwise.
    const Register& input_register() const;
    std::size_t discard_count() const;
};

ResourceReport count_resources(const Circuit& circuit);

struct EvalResult {
    BigNat output;        // value of the "y" register
    BitString x_after;    // final contents of the "x" register
    BitString garbage;    // bit per discarded qubit, in discard order
};

/// Bit-level reference evaluation. Throws MalformedCircuit on H gates (not
/// classical), out-of-range qubits, or a missing x/y register.
EvalResult evaluate_classical(const Circuit& circuit, const BitString& x);
EvalResult evaluate_classical(const Circuit& circuit, const BigNat& x);

struct GarbageRecord {
    BitString h;
    BitString g0;
    BitString g1;
};

/// (-1)^(h . (g0 xor g1)) as +1 / -1.
int discard_phase(const GarbageRecord& record);

/// Line format: header comments, then one gate per line.
std::string to_text(const Circuit& circuit);
Circuit from_text(const std::string& text);

}  // namespace qadv::circuits
