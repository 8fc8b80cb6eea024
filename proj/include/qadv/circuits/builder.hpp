#pragma once

#include "qadv/circuits/circuit.hpp"

#include <set>
#include <vector>

namespace qadv::circuits {

/// An operand bit: a qubit, or one of the classical constants.
struct Bit {
    static constexpr std::int64_t kZero = -1;
    static constexpr std::int64_t kOne = -2;
    std::int64_t v = kZero;

    static Bit zero() { return {kZero}; }
    static Bit one() { return {kOne}; }
    static Bit q(Qubit q) { return {static_cast<std::int64_t>(q)}; }
    bool is_qubit() const { return v >= 0; }
    Qubit qubit() const { return static_cast<Qubit>(v); }
};

std::vector<Bit> bits_of(const std::vector<Qubit>& reg);
/// Constant c as `width` classical bits.
std::vector<Bit> const_bits(const BigNat& c, std::size_t width);
/// Bit i is `ctrl` where c has a one, zero elsewhere: adds ctrl * c.
std::vector<Bit> controlled_const_bits(Qubit ctrl, const BigNat& c, std::size_t width);

/// Emits gates into a sink and manages ancillas. Discarded qubits go back on
/// a free list and are handed out again (after an Alloc) by later requests.
class Builder {
public:
    explicit Builder(GateSink& sink) : sink_(sink) {}

    /// Fresh input qubits that are never recycled (no Alloc emitted).
    std::vector<Qubit> input(std::size_t n);
    Qubit alloc();
    std::vector<Qubit> alloc(std::size_t n);
    void discard(Qubit q);
    void discard(const std::vector<Qubit>& qs);
    void measure(const std::vector<Qubit>& qs);
    /// Re-prepares a measured qubit in |0> without returning it to the pool.
    void reset(Qubit q);

    void x(Qubit t);
    void cnot(Qubit c, Qubit t);
    void toffoli(Qubit a, Qubit b, Qubit t);
    void mcx(const std::vector<Qubit>& controls, Qubit t);
    void h(Qubit t);
    void cphase(const std::vector<Qubit>& controls, Qubit t, double angle);

    std::uint32_t peak() const { return next_; }
    std::size_t live() const { return next_ - free_.size(); }

private:
    GateSink& sink_;
    std::uint32_t next_ = 0;
    std::set<Qubit> free_;
};

/// acc += addend (mod 2^|acc|). One Toffoli per position that can carry;
/// every carry qubit is discarded as garbage right after use.
void add_into(Builder& b, const std::vector<Qubit>& acc, const std::vector<Bit>& addend);
/// acc -= addend (mod 2^|acc|).
void sub_into(Builder& b, const std::vector<Qubit>& acc, const std::vector<Bit>& addend);

}  // namespace qadv::circuits
