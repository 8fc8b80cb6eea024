#include "qadv/circuits/phase.hpp"

#include "qadv/circuits/builder.hpp"
#include "qadv/circuits/squaring.hpp"
#include "qadv/errors.hpp"

#include <numbers>

namespace qadv::circuits {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Emitted {
    std::vector<Qubit> x, y;
};

// Undoes the phases of already-measured (or already-decoded) lower bits and
// rotates qubit `q` back to the computational basis. `lower[s]` holds w_s.
void iqft_step(Builder& b, Qubit q, const std::vector<Qubit>& lower, bool classical) {
    const std::size_t t = lower.size();
    if (classical) {
        b.cphase({}, q, 0.0);
    } else {
        for (std::size_t s = 0; s < t; ++s)
            b.cphase({lower[s]}, q, -kTwoPi / static_cast<double>(std::uint64_t{1} << (t - s + 1)));
    }
    b.h(q);
}

void variant1_schedule(Builder& b, const std::vector<Qubit>& x, Qubit z, unsigned k, const BigNat& N, Qubit anc) {
    const auto n = static_cast<unsigned>(x.size());
    for (unsigned i = 0; i < n; ++i) {
        b.cphase({x[i]}, z, phase_angle(i, i, k, N));
        if (i + 1 == n) break;
        b.toffoli(x[i], z, anc);
        for (unsigned j = i + 1; j < n; ++j) b.cphase({anc}, x[j], phase_angle(i, j + 1, k, N));
        b.toffoli(x[i], z, anc);
    }
}

Emitted emit_variant1(Builder& b, const BigNat& N, bool reuse) {
    const unsigned n = bit_length(N);
    const unsigned m = phase_output_bits(n);
    Emitted e;
    e.x = b.input(n);
    const Qubit anc = b.alloc();
    if (reuse) {
        const Qubit z = b.alloc();
        std::vector<Qubit> done;
        // w_t comes from multiplier 2^(m-1-t); least significant bit first.
        for (unsigned t = 0; t < m; ++t) {
            b.h(z);
            variant1_schedule(b, e.x, z, m - 1 - t, N, anc);
            iqft_step(b, z, done, true);
            b.measure({z});
            if (t + 1 < m) b.reset(z);
            done.push_back(z);
        }
        e.y = {z};
        return e;
    }
    std::vector<Qubit> z = b.alloc(m);
    for (Qubit q : z) b.h(q);
    for (unsigned k = 0; k < m; ++k) variant1_schedule(b, e.x, z[k], k, N, anc);
    std::vector<Qubit> decoded;
    for (unsigned t = 0; t < m; ++t) {
        iqft_step(b, z[m - 1 - t], decoded, false);
        decoded.push_back(z[m - 1 - t]);
    }
    b.measure(decoded);
    e.y = decoded;
    return e;
}

void increment(Builder& b, Qubit c1, Qubit c2, const std::vector<Qubit>& ctr, bool inverse) {
    const std::size_t L = ctr.size();
    auto step = [&](std::size_t bit) {
        std::vector<Qubit> controls{c1, c2};
        for (std::size_t i = 0; i < bit; ++i) controls.push_back(ctr[i]);
        b.mcx(controls, ctr[bit]);
    };
    if (!inverse)
        for (std::size_t bit = L; bit-- > 0;) step(bit);
    else
        for (std::size_t bit = 0; bit < L; ++bit) step(bit);
}

Emitted emit_variant2(Builder& b, const BigNat& N) {
    const unsigned n = bit_length(N);
    const unsigned m = phase_output_bits(n);
    Emitted e;
    e.x = b.input(n);
    std::vector<Qubit> z = b.alloc(m);
    const unsigned L = std::max(1u, bit_length(BigNat(n / 2)));
    std::vector<Qubit> ctr = b.alloc(L);
    for (Qubit q : z) b.h(q);
    for (unsigned i = 0; i < n; ++i)
        for (unsigned k = 0; k < m; ++k) b.cphase({e.x[i]}, z[k], phase_angle(i, i, k, N));
    for (unsigned s = 1; s + 2 < 2 * n; ++s) {
        std::vector<std::pair<unsigned, unsigned>> pairs;
        for (unsigned i = 0; 2 * i < s; ++i)
            if (s - i < n) pairs.emplace_back(i, s - i);
        if (pairs.empty()) continue;
        for (auto [i, j] : pairs) increment(b, e.x[i], e.x[j], ctr, false);
        // counter value c contributes 2 c 2^s; bit b of c weighs 2^(s+b+1)
        for (unsigned k = 0; k < m; ++k)
            for (unsigned bit = 0; bit < L; ++bit) b.cphase({ctr[bit]}, z[k], phase_angle_sum(s + bit + 1 + k, N));
        for (auto it = pairs.rbegin(); it != pairs.rend(); ++it) increment(b, e.x[it->first], e.x[it->second], ctr, true);
    }
    std::vector<Qubit> decoded;
    for (unsigned t = 0; t < m; ++t) {
        iqft_step(b, z[m - 1 - t], decoded, false);
        decoded.push_back(z[m - 1 - t]);
    }
    b.measure(decoded);
    e.y = decoded;
    return e;
}

Emitted emit(Builder& b, unsigned variant, const BigNat& N, bool reuse) {
    if (N < 3) throw PreconditionError("phase circuits need N >= 3");
    if (variant == 1) return emit_variant1(b, N, reuse);
    if (variant == 2) return emit_variant2(b, N);
    throw PreconditionError("phase circuit variant must be 1 or 2");
}

}  // namespace

double phase_angle_sum(unsigned s, const BigNat& N) {
    const BigNat r = pow_mod(2, s, N);
    // r / N in [0, 1) as a double without overflowing for large N
    const unsigned shift = bit_length(N) > 60 ? bit_length(N) - 60 : 0;
    const double num = static_cast<double>(r >> shift), den = static_cast<double>(N >> shift);
    return kTwoPi * (num / den);
}

double phase_angle(unsigned i, unsigned j, unsigned k, const BigNat& N) { return phase_angle_sum(i + j + k, N); }

unsigned phase_output_bits(unsigned n) { return n + 3; }

Circuit build_phase_circuit(unsigned variant, const BigNat& N, bool reuse_output) {
    Circuit c;
    Builder b(c);
    Emitted e = emit(b, variant, N, reuse_output);
    c.n_qubits = b.peak();
    c.registers = {{"x", e.x}, {"y", e.y}};
    c.builder = "phase" + std::to_string(variant);
    c.n = bit_length(N);
    c.N = N;
    return c;
}

ResourceReport phase_circuit_resources(unsigned variant, unsigned n) {
    if (n < 8) throw PreconditionError("phase circuit resources need n >= 8");
    ResourceCounter counter;
    Builder b(counter);
    emit(b, variant, resource_modulus(n), true);
    return counter.report(b.peak());
}

}  // namespace qadv::circuits
