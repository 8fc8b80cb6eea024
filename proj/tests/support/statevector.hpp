#pragma once

// Dense state-vector simulator used only as a test oracle for small circuits.

#include "qadv/circuits/circuit.hpp"

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace qadv::testing {

class StateVector {
public:
    using amp = std::complex<double>;

    explicit StateVector(unsigned n_qubits) : n_(n_qubits), a_(std::size_t{1} << n_qubits, 0.0) { a_[0] = 1.0; }

    unsigned size() const { return n_; }
    const std::vector<amp>& amplitudes() const { return a_; }
    std::vector<amp>& amplitudes() { return a_; }

    void set_basis(std::uint64_t index) {
        std::fill(a_.begin(), a_.end(), 0.0);
        a_[index] = 1.0;
    }

    void x(unsigned q) {
        const std::uint64_t m = std::uint64_t{1} << q;
        for (std::uint64_t i = 0; i < a_.size(); ++i)
            if (!(i & m)) std::swap(a_[i], a_[i | m]);
    }
    void mcx(const std::vector<unsigned>& controls, unsigned t) {
        std::uint64_t cm = 0;
        for (unsigned c : controls) cm |= std::uint64_t{1} << c;
        const std::uint64_t tm = std::uint64_t{1} << t;
        for (std::uint64_t i = 0; i < a_.size(); ++i)
            if ((i & cm) == cm && !(i & tm)) std::swap(a_[i], a_[i | tm]);
    }
    void z(unsigned q) { phase_on({q}, M_PI); }
    void y(unsigned q) {
        // Y = i X Z
        z(q);
        x(q);
        for (auto& v : a_) v *= amp(0, 1);
    }
    void h(unsigned q) {
        const std::uint64_t m = std::uint64_t{1} << q;
        const double s = 1.0 / std::sqrt(2.0);
        for (std::uint64_t i = 0; i < a_.size(); ++i) {
            if (i & m) continue;
            const amp u = a_[i], v = a_[i | m];
            a_[i] = s * (u + v);
            a_[i | m] = s * (u - v);
        }
    }
    void phase_on(const std::vector<unsigned>& qs, double angle) {
        std::uint64_t cm = 0;
        for (unsigned c : qs) cm |= std::uint64_t{1} << c;
        const amp f = std::polar(1.0, angle);
        for (std::uint64_t i = 0; i < a_.size(); ++i)
            if ((i & cm) == cm) a_[i] *= f;
    }
    double prob_one(unsigned q) const {
        const std::uint64_t m = std::uint64_t{1} << q;
        double p = 0;
        for (std::uint64_t i = 0; i < a_.size(); ++i)
            if (i & m) p += std::norm(a_[i]);
        return p;
    }
    /// Projects qubit q onto `outcome`; returns the outcome probability.
    double project(unsigned q, bool outcome) {
        const std::uint64_t m = std::uint64_t{1} << q;
        double p = 0;
        for (std::uint64_t i = 0; i < a_.size(); ++i) {
            if (((i & m) != 0) != outcome) a_[i] = 0;
            else p += std::norm(a_[i]);
        }
        if (p > 0)
            for (auto& v : a_) v /= std::sqrt(p);
        return p;
    }
    /// Hadamard-basis measurement with a chosen outcome, then reset to |0>.
    double discard(unsigned q, bool h_outcome) {
        h(q);
        const double p = project(q, h_outcome);
        if (h_outcome) x(q);
        return p;
    }

    /// Applies a circuit's unitary part. Discard outcomes are read from
    /// `h_outcomes` in order; Measure is ignored (read the state afterwards).
    void run(const circuits::Circuit& c, const std::vector<bool>& h_outcomes = {}) {
        std::size_t next_h = 0;
        for (const auto& g : c.gates) {
            std::vector<unsigned> qs(g.qubits.begin(), g.qubits.end());
            switch (g.kind) {
                case circuits::GateKind::X: x(qs[0]); break;
                case circuits::GateKind::CNOT:
                case circuits::GateKind::Toffoli:
                case circuits::GateKind::MCX: {
                    const unsigned t = qs.back();
                    qs.pop_back();
                    mcx(qs, t);
                    break;
                }
                case circuits::GateKind::H: h(qs[0]); break;
                case circuits::GateKind::CPhase: phase_on(qs, g.angle); break;
                case circuits::GateKind::Alloc:
                    for (unsigned q : qs)
                        if (prob_one(q) > 1e-9) throw std::logic_error("alloc on a non-zero qubit");
                    break;
                case circuits::GateKind::Discard:
                    for (unsigned q : qs) discard(q, next_h < h_outcomes.size() ? h_outcomes[next_h++] : false);
                    break;
                case circuits::GateKind::Measure: break;
            }
        }
    }

private:
    unsigned n_;
    std::vector<amp> a_;
};

}  // namespace qadv::testing
