#pragma once

// Independent reference computations shared by the unit and acceptance tests.

#include "qadv/circuits/circuit.hpp"
#include "support/statevector.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

namespace qadv::testing {

inline bool prime_by_division(unsigned v) {
    if (v < 2) return false;
    for (unsigned d = 2; d * d <= v; ++d)
        if (v % d == 0) return false;
    return true;
}

/// Products p q <= limit of distinct primes p, q = 3 mod 4.
inline std::vector<unsigned> blum_semiprimes(unsigned limit) {
    std::vector<unsigned> ps, out;
    for (unsigned p = 3; p < limit; ++p)
        if (p % 4 == 3 && prime_by_division(p)) ps.push_back(p);
    for (std::size_t i = 0; i < ps.size(); ++i)
        for (std::size_t j = i + 1; j < ps.size() && ps[i] * ps[j] <= limit; ++j) out.push_back(ps[i] * ps[j]);
    return out;
}

/// a^-1 mod m by search; m is small.
inline std::uint64_t inverse_by_search(std::uint64_t a, std::uint64_t m) {
    for (std::uint64_t t = 1; t < m; ++t)
        if ((a % m) * t % m == 1) return t;
    return 0;
}

struct PhaseReadout {
    long value = -1;     // round(w N / 2^m) mod N for the most likely w
    double weight = 0;   // probability of that w
};

/// Runs a phase-estimation circuit on |x> and reads the y register.
inline PhaseReadout phase_readout(const circuits::Circuit& c, unsigned x, unsigned N) {
    const auto& xr = c.reg("x").qubits;
    const auto& yr = c.reg("y").qubits;
    StateVector sv(c.n_qubits);
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < xr.size(); ++i)
        if ((x >> i) & 1u) idx |= std::uint64_t{1} << xr[i];
    sv.set_basis(idx);
    sv.run(c);
    std::vector<double> pw(std::size_t{1} << yr.size(), 0.0);
    const auto& a = sv.amplitudes();
    for (std::uint64_t i = 0; i < a.size(); ++i) {
        const double p = std::norm(a[i]);
        if (p < 1e-14) continue;
        std::uint64_t w = 0;
        for (std::size_t t = 0; t < yr.size(); ++t)
            if ((i >> yr[t]) & 1u) w |= std::uint64_t{1} << t;
        pw[w] += p;
    }
    std::size_t best = 0;
    for (std::size_t w = 0; w < pw.size(); ++w)
        if (pw[w] > pw[best]) best = w;
    return {std::lround(double(best) * N / double(pw.size())) % long(N), pw[best]};
}

}  // namespace qadv::testing
