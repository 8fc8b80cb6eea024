#include "qadv/circuits/builder.hpp"

#include "qadv/errors.hpp"

#include <optional>

namespace qadv::circuits {

std::vector<Bit> bits_of(const std::vector<Qubit>& reg) {
    std::vector<Bit> out;
    out.reserve(reg.size());
    for (Qubit q : reg) out.push_back(Bit::q(q));
    return out;
}

std::vector<Bit> const_bits(const BigNat& c, std::size_t width) {
    std::vector<Bit> out(width);
    for (std::size_t i = 0; i < width; ++i) out[i] = bit_test(c, static_cast<unsigned>(i)) ? Bit::one() : Bit::zero();
    return out;
}

std::vector<Bit> controlled_const_bits(Qubit ctrl, const BigNat& c, std::size_t width) {
    std::vector<Bit> out(width);
    for (std::size_t i = 0; i < width; ++i) out[i] = bit_test(c, static_cast<unsigned>(i)) ? Bit::q(ctrl) : Bit::zero();
    return out;
}

std::vector<Qubit> Builder::input(std::size_t n) {
    std::vector<Qubit> out(n);
    for (auto& q : out) q = next_++;
    return out;
}

Qubit Builder::alloc() {
    Qubit q;
    if (!free_.empty()) {
        q = *free_.begin();
        free_.erase(free_.begin());
    } else {
        q = next_++;
    }
    sink_.emit({GateKind::Alloc, {q}});
    return q;
}

std::vector<Qubit> Builder::alloc(std::size_t n) {
    std::vector<Qubit> out(n);
    for (auto& q : out) q = alloc();
    return out;
}

void Builder::discard(Qubit q) {
    sink_.emit({GateKind::Discard, {q}});
    free_.insert(q);
}

void Builder::discard(const std::vector<Qubit>& qs) {
    if (qs.empty()) return;
    sink_.emit({GateKind::Discard, qs});
    free_.insert(qs.begin(), qs.end());
}

void Builder::measure(const std::vector<Qubit>& qs) { sink_.emit({GateKind::Measure, qs}); }
void Builder::reset(Qubit q) { sink_.emit({GateKind::Alloc, {q}}); }

void Builder::x(Qubit t) { sink_.emit({GateKind::X, {t}}); }
void Builder::cnot(Qubit c, Qubit t) { sink_.emit({GateKind::CNOT, {c, t}}); }
void Builder::toffoli(Qubit a, Qubit b, Qubit t) { sink_.emit({GateKind::Toffoli, {a, b, t}}); }
void Builder::h(Qubit t) { sink_.emit({GateKind::H, {t}}); }

void Builder::mcx(const std::vector<Qubit>& controls, Qubit t) {
    if (controls.empty()) return x(t);
    if (controls.size() == 1) return cnot(controls[0], t);
    if (controls.size() == 2) return toffoli(controls[0], controls[1], t);
    Gate g{GateKind::MCX, controls};
    g.qubits.push_back(t);
    sink_.emit(std::move(g));
}

void Builder::cphase(const std::vector<Qubit>& controls, Qubit t, double angle) {
    Gate g{GateKind::CPhase, controls, angle};
    g.qubits.push_back(t);
    sink_.emit(std::move(g));
}

void add_into(Builder& b, const std::vector<Qubit>& acc, const std::vector<Bit>& addend) {
    if (addend.size() > acc.size()) throw PreconditionError("addend wider than accumulator");
    std::optional<Qubit> carry;
    const std::size_t w = acc.size();
    for (std::size_t i = 0; i < w; ++i) {
        const Qubit a = acc[i];
        const Bit bit = i < addend.size() ? addend[i] : Bit::zero();
        const bool last = i + 1 == w;
        std::optional<Qubit> next;
        if (bit.is_qubit() && bit.qubit() == a) throw PreconditionError("addend aliases the accumulator");

        if (!bit.is_qubit() && bit.v == Bit::kZero) {
            if (carry) {
                if (!last) {
                    next = b.alloc();
                    b.toffoli(a, *carry, *next);
                }
                b.cnot(*carry, a);
            }
        } else if (!bit.is_qubit()) {  // constant one
            if (!carry) {
                if (!last) {
                    next = b.alloc();
                    b.cnot(a, *next);
                }
            } else {
                if (!last) {
                    // a OR c = a ^ c ^ ac
                    next = b.alloc();
                    b.toffoli(a, *carry, *next);
                    b.cnot(a, *next);
                    b.cnot(*carry, *next);
                }
                b.cnot(*carry, a);
            }
            b.x(a);
        } else {
            const Qubit q = bit.qubit();
            if (!carry) {
                if (!last) {
                    next = b.alloc();
                    b.toffoli(a, q, *next);
                }
                b.cnot(q, a);
            } else if (last) {
                b.cnot(q, a);
                b.cnot(*carry, a);
            } else {
                // majority via (a^c)(b^c) ^ c, then sum into a and restore b
                const Qubit c = *carry;
                next = b.alloc();
                b.cnot(c, a);
                b.cnot(c, q);
                b.toffoli(a, q, *next);
                b.cnot(c, *next);
                b.cnot(q, a);
                b.cnot(c, a);
                b.cnot(c, q);
            }
        }
        if (carry) b.discard(*carry);
        carry = next;
    }
}

void sub_into(Builder& b, const std::vector<Qubit>& acc, const std::vector<Bit>& addend) {
    // a - s = ~(~a + s)
    for (Qubit q : acc) b.x(q);
    add_into(b, acc, addend);
    for (Qubit q : acc) b.x(q);
}

}  // namespace qadv::circuits
