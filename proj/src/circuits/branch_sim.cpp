#include "qadv/circuits/branch_sim.hpp"

#include "qadv/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace qadv::circuits {

BitString BranchBatch::h_of(std::size_t lane) const {
    std::vector<std::uint64_t> w((h.size() + 63) / 64, 0);
    for (std::size_t i = 0; i < h.size(); ++i) w[i / 64] |= ((h[i] >> lane) & 1u) << (i % 64);
    BitString out(h.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::uint64_t v = w[i]; v; v &= v - 1) out.set(i * 64 + std::countr_zero(v), true);
    return out;
}

BranchSimulator::BranchSimulator(const Circuit& c)
    : n_qubits_(c.n_qubits), input_(c.input_register().qubits), x_(c.reg("x").qubits), y_(c.reg("y").qubits) {
    auto check = [&](Qubit q) {
        if (q >= c.n_qubits) throw MalformedCircuit("qubit index " + std::to_string(q) + " out of range");
    };
    for (const auto& g : c.gates) {
        for (Qubit q : g.qubits) check(q);
        const auto idx = static_cast<std::uint32_t>(counted_);
        switch (g.kind) {
            case GateKind::X: ops_.push_back({g.kind, g.qubits[0], 0, 0, idx}); break;
            case GateKind::CNOT: ops_.push_back({g.kind, g.qubits[0], 0, g.qubits[1], idx}); break;
            case GateKind::Toffoli: ops_.push_back({g.kind, g.qubits[0], g.qubits[1], g.qubits[2], idx}); break;
            case GateKind::MCX: {
                const auto at = static_cast<std::uint32_t>(list_.size());
                list_.insert(list_.end(), g.qubits.begin(), g.qubits.end() - 1);
                ops_.push_back({g.kind, at, static_cast<std::uint32_t>(g.qubits.size() - 1), g.target(), idx});
                break;
            }
            case GateKind::Alloc:
            case GateKind::Discard: {
                const auto at = static_cast<std::uint32_t>(list_.size());
                list_.insert(list_.end(), g.qubits.begin(), g.qubits.end());
                ops_.push_back({g.kind, at, static_cast<std::uint32_t>(g.qubits.size()), 0, idx});
                if (g.kind == GateKind::Discard) discarded_ += g.qubits.size();
                break;
            }
            case GateKind::Measure: break;
            case GateKind::H:
            case GateKind::CPhase:
                throw MalformedCircuit(std::string(gate_name(g.kind)) + " cannot be simulated on two branches");
        }
        if (g.is_unitary()) ++counted_;
    }
}

BranchBatch BranchSimulator::run(const std::vector<BitString>& in0, const std::vector<BitString>& in1,
                                 double gate_error, Rng& rng, const std::vector<std::uint64_t>* h) const {
    const std::size_t lanes = in0.size();
    if (lanes == 0 || lanes > 64 || in1.size() != lanes) throw PreconditionError("a batch holds 1 to 64 lanes");
    if (h && h->size() != discarded_) throw PreconditionError("discard outcome count mismatch");
    std::vector<std::uint64_t> b0(n_qubits_, 0), b1(n_qubits_, 0);
    for (std::size_t l = 0; l < lanes; ++l) {
        if (in0[l].size() > input_.size() || in1[l].size() > input_.size())
            throw PreconditionError("input wider than the x register");
        for (std::size_t i = 0; i < in0[l].size(); ++i)
            if (in0[l].get(i)) b0[input_[i]] |= std::uint64_t{1} << l;
        for (std::size_t i = 0; i < in1[l].size(); ++i)
            if (in1[l].get(i)) b1[input_[i]] |= std::uint64_t{1} << l;
    }

    BranchBatch out;
    out.lanes = lanes;
    out.errors.assign(lanes, 0);

    // (gate index, lane) of every error, by geometric skipping per lane
    std::vector<std::pair<std::uint32_t, std::uint32_t>> events;
    if (gate_error > 0) {
        const double log_keep = std::log1p(-std::min(gate_error, 1.0));
        auto skip = [&]() -> std::uint64_t {
            if (gate_error >= 1.0) return 0;
            const double u = 1.0 - rng.uniform();  // (0, 1]
            const double s = std::floor(std::log(u) / log_keep);
            return s >= static_cast<double>(counted_) ? counted_ : static_cast<std::uint64_t>(s);
        };
        for (std::uint32_t l = 0; l < lanes; ++l)
            for (std::uint64_t pos = skip(); pos < counted_; pos += 1 + skip())
                events.emplace_back(static_cast<std::uint32_t>(pos), l);
        std::sort(events.begin(), events.end());
    }
    std::size_t next_event = 0;

    std::uint64_t phase = 0;
    std::size_t next_h = 0;
    out.h.reserve(discarded_);
    std::vector<Qubit> touched;
    for (const Op& op : ops_) {
        switch (op.kind) {
            case GateKind::X:
                b0[op.a] = ~b0[op.a];
                b1[op.a] = ~b1[op.a];
                break;
            case GateKind::CNOT:
                b0[op.c] ^= b0[op.a];
                b1[op.c] ^= b1[op.a];
                break;
            case GateKind::Toffoli:
                b0[op.c] ^= b0[op.a] & b0[op.b];
                b1[op.c] ^= b1[op.a] & b1[op.b];
                break;
            case GateKind::MCX: {
                std::uint64_t m0 = ~std::uint64_t{0}, m1 = m0;
                for (std::uint32_t i = 0; i < op.b; ++i) {
                    m0 &= b0[list_[op.a + i]];
                    m1 &= b1[list_[op.a + i]];
                }
                b0[op.c] ^= m0;
                b1[op.c] ^= m1;
                break;
            }
            case GateKind::Alloc:
                for (std::uint32_t i = 0; i < op.b; ++i) b0[list_[op.a + i]] = b1[list_[op.a + i]] = 0;
                continue;
            case GateKind::Discard:
                for (std::uint32_t i = 0; i < op.b; ++i) {
                    const Qubit q = list_[op.a + i];
                    const std::uint64_t hw = h ? (*h)[next_h] : rng.next_u64();
                    ++next_h;
                    out.h.push_back(hw);
                    phase ^= hw & (b0[q] ^ b1[q]);
                }
                continue;
            default: continue;
        }
        while (next_event < events.size() && events[next_event].first == op.gate_index) {
            const std::uint32_t lane = events[next_event++].second;
            touched.clear();
            switch (op.kind) {
                case GateKind::X: touched = {op.a}; break;
                case GateKind::CNOT: touched = {op.a, op.c}; break;
                case GateKind::Toffoli: touched = {op.a, op.b, op.c}; break;
                default:
                    touched.assign(list_.begin() + op.a, list_.begin() + op.a + op.b);
                    touched.push_back(op.c);
            }
            const Qubit q = touched[rng.below(touched.size())];
            const auto pauli = rng.below(3);  // 0 = X, 1 = Y, 2 = Z
            const std::uint64_t bit = std::uint64_t{1} << lane;
            if (pauli != 0) phase ^= bit & (b0[q] ^ b1[q]);
            if (pauli != 2) {
                b0[q] ^= bit;
                b1[q] ^= bit;
            }
            ++out.errors[lane];
        }
    }

    const std::uint64_t mask = lanes == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << lanes) - 1;
    out.phase = phase & mask;
    auto extract = [&](const std::vector<std::uint64_t>& b, const std::vector<Qubit>& reg, std::size_t lane) {
        BitString s(reg.size());
        for (std::size_t i = 0; i < reg.size(); ++i) s.set(i, (b[reg[i]] >> lane) & 1u);
        return s;
    };
    for (std::size_t l = 0; l < lanes; ++l) {
        out.y0.push_back(extract(b0, y_, l));
        out.y1.push_back(extract(b1, y_, l));
        out.x0.push_back(extract(b0, x_, l));
        out.x1.push_back(extract(b1, x_, l));
    }
    return out;
}

int BranchSimulator::discard_sign(const BitString& a, const BitString& b, const BitString& h) const {
    if (h.size() != discarded_) throw PreconditionError("discard outcome count mismatch");
    std::vector<std::uint64_t> words(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) words[i] = h.get(i) ? 1 : 0;
    Rng unused(0);
    const BranchBatch r = run({a}, {b}, 0.0, unused, &words);
    return (r.phase & 1u) ? -1 : 1;
}

}  // namespace qadv::circuits
