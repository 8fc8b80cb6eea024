#include "qadv/circuits/squaring.hpp"

#include "qadv/errors.hpp"
#include "qadv/rng.hpp"

#include <algorithm>
#include <optional>

namespace qadv::circuits {
namespace {

std::vector<Qubit> slice(const std::vector<Qubit>& v, std::size_t from, std::size_t to) {
    to = std::min(to, v.size());
    if (from >= to) return {};
    return {v.begin() + static_cast<std::ptrdiff_t>(from), v.begin() + static_cast<std::ptrdiff_t>(to)};
}

BigNat pow3(unsigned e) {
    BigNat k = 1;
    for (unsigned i = 0; i < e; ++i) k *= 3;
    return k;
}

void check_modulus(const BigNat& N) {
    if (N < 3 || N % 2 == 0) throw PreconditionError("modulus must be odd and at least 3");
}

struct Layout {
    unsigned x_width;
    BigNat lifted;
};

Layout layout_for(const CircuitSpec& spec) {
    check_modulus(spec.N);
    const BigNat k = pow3(spec.lift);
    if (spec.lift > 0 && spec.N % 3 == 0) throw PreconditionError("lifting needs N coprime to 3");
    const BigNat bound = (spec.N + 1) / 2;
    return {std::max(1u, bit_length(k * (bound - 1))), k * k * spec.N};
}

struct Emitted {
    std::vector<Qubit> x_in, x, y;
};

Emitted emit_circuit(Builder& b, const CircuitSpec& spec) {
    const Layout lay = layout_for(spec);
    if (spec.builder != "schoolbook" && spec.builder != "karatsuba")
        throw PreconditionError("unknown builder '" + spec.builder + "'");
    if (spec.builder == "karatsuba" && spec.cutoff < 8) throw PreconditionError("Karatsuba cutoff must be >= 8");
    std::vector<Qubit> x = b.input(lay.x_width);
    const std::vector<Qubit> x_in = x;
    for (unsigned i = 0; i < spec.lift; ++i) mul3_inplace(b, x);
    std::vector<Qubit> T = b.alloc(2 * x.size());
    if (spec.builder == "schoolbook") square_schoolbook(b, x, T);
    else square_karatsuba(b, x, T, spec.cutoff);
    std::vector<Qubit> y = montgomery_reduce(b, std::move(T), lay.lifted);
    b.measure(y);
    return {x_in, x, y};
}

}  // namespace

void square_schoolbook(Builder& b, const std::vector<Qubit>& x, const std::vector<Qubit>& out) {
    const std::size_t n = x.size();
    if (out.size() != 2 * n) throw PreconditionError("square output must have twice the input width");
    if (n == 0) return;
    // Row 0 lands in an all-zero register: write it directly.
    b.cnot(x[0], out[0]);
    for (std::size_t j = 1; j < n; ++j) b.toffoli(x[0], x[j], out[j + 1]);
    for (std::size_t i = 1; i < n; ++i) {
        // partial sums over rows <= i stay below 2^(n+i+2)
        const std::size_t hi = std::min(2 * n, n + i + 2);
        std::vector<Bit> addend(hi - 2 * i, Bit::zero());
        addend[0] = Bit::q(x[i]);
        std::vector<Qubit> ands;
        for (std::size_t j = i + 1; j < n; ++j) {
            const Qubit t = b.alloc();
            b.toffoli(x[i], x[j], t);
            ands.push_back(t);
            addend[j - i + 1] = Bit::q(t);
        }
        add_into(b, slice(out, 2 * i, hi), addend);
        b.discard(ands);
    }
}

void square_karatsuba(Builder& b, const std::vector<Qubit>& x, const std::vector<Qubit>& out, unsigned cutoff) {
    const std::size_t n = x.size();
    if (out.size() != 2 * n) throw PreconditionError("square output must have twice the input width");
    if (n <= cutoff) return square_schoolbook(b, x, out);
    const std::size_t h = n / 2;
    const auto lo = slice(x, 0, h), hi = slice(x, h, n);
    const auto B = slice(out, 0, 2 * h), A = slice(out, 2 * h, 2 * n);
    square_karatsuba(b, lo, B, cutoff);
    square_karatsuba(b, hi, A, cutoff);

    std::vector<Qubit> s = b.alloc(hi.size() + 1);
    for (std::size_t i = 0; i < hi.size(); ++i) b.cnot(hi[i], s[i]);
    add_into(b, s, bits_of(lo));
    std::vector<Qubit> C = b.alloc(2 * s.size());
    square_karatsuba(b, s, C, cutoff);
    b.discard(s);
    sub_into(b, C, bits_of(A));
    sub_into(b, C, bits_of(B));
    // C = 2ab now; fold it in at offset h.
    auto acc = slice(out, h, 2 * n);
    auto addend = bits_of(C);
    addend.resize(std::min(addend.size(), acc.size()));
    add_into(b, acc, addend);
    b.discard(C);
}

BigNat montgomery_r_prime(const BigNat& N) {
    check_modulus(N);
    const BigNat R = BigNat(1) << bit_length(N);
    return inverse_mod(R % N, N);
}

std::vector<Qubit> montgomery_reduce(Builder& b, std::vector<Qubit> T, const BigNat& N) {
    check_modulus(N);
    const unsigned w = bit_length(N);
    if (T.size() > 2 * w + 1) throw PreconditionError("product register wider than 2w+1");
    while (T.size() < 2 * w + 1) T.push_back(b.alloc());
    const BigNat R = BigNat(1) << w;
    const BigNat n_prime = mod_floor(-inverse_mod(N, R), R);

    // q = (T mod R) N' mod R
    std::vector<Qubit> q = b.alloc(w);
    bool first = true;
    for (unsigned i = 0; i < w; ++i) {
        if (!bit_test(n_prime, i)) continue;
        if (first) {
            for (unsigned j = 0; i + j < w; ++j) b.cnot(T[j], q[i + j]);
            first = false;
        } else {
            add_into(b, slice(q, i, w), bits_of(slice(T, 0, w - i)));
        }
    }
    // T += q N; the low w bits become zero
    for (unsigned j = 0; j < w; ++j)
        if (bit_test(N, j)) add_into(b, slice(T, j, 2 * w + 1), bits_of(q));
    b.discard(q);
    b.discard(slice(T, 0, w));

    // u in [0, 2N): one conditional subtraction makes the output canonical
    std::vector<Qubit> u = slice(T, w, 2 * w + 1);
    sub_into(b, u, const_bits(N, w + 1));
    const Qubit sign = b.alloc();
    b.cnot(u[w], sign);
    add_into(b, u, controlled_const_bits(sign, N, w + 1));
    b.discard(sign);
    b.discard(u[w]);
    u.pop_back();
    return u;
}

void mul3_inplace(Builder& b, std::vector<Qubit>& x) {
    // 3x = x + 2x. The sum for bit i is written over the qubit that held
    // x_{i-1}; x_i itself survives to play x_{i-1} for the next bit.
    const std::size_t W = x.size();
    if (W == 0) return;
    std::vector<Qubit> out;
    const Qubit p = b.alloc();
    b.cnot(x[0], p);
    out.push_back(p);
    Qubit prev = x[0];
    std::optional<Qubit> carry;
    for (std::size_t i = 1; i < W; ++i) {
        const Qubit a = x[i];
        const bool last = i + 1 == W;
        std::optional<Qubit> next;
        if (!carry) {
            if (!last) {
                next = b.alloc();
                b.toffoli(a, prev, *next);
            }
            b.cnot(a, prev);
        } else if (last) {
            b.cnot(a, prev);
            b.cnot(*carry, prev);
        } else {
            const Qubit c = *carry;
            next = b.alloc();
            b.cnot(c, a);
            b.cnot(c, prev);
            b.toffoli(a, prev, *next);
            b.cnot(c, *next);
            b.cnot(a, prev);
            b.cnot(c, prev);
            b.cnot(c, a);
        }
        if (carry) b.discard(*carry);
        carry = next;
        out.push_back(prev);
        prev = a;
    }
    b.discard(prev);
    x = std::move(out);
}

Circuit build_circuit(const CircuitSpec& spec) {
    Circuit c;
    Builder b(c);
    Emitted e = emit_circuit(b, spec);
    const Layout lay = layout_for(spec);
    c.n_qubits = b.peak();
    c.registers = {{"x_in", e.x_in}, {"x", e.x}, {"y", e.y}};
    c.builder = spec.builder;
    c.n = bit_length(spec.N);
    c.N = lay.lifted;
    c.r_prime = montgomery_r_prime(lay.lifted);
    c.lift = spec.lift;
    return c;
}

ResourceReport circuit_resources(const CircuitSpec& spec) {
    ResourceCounter counter;
    Builder b(counter);
    emit_circuit(b, spec);
    return counter.report(b.peak());
}

Circuit build_schoolbook(unsigned n, const BigNat& N) {
    if (bit_length(N) != n) throw PreconditionError("N must have exactly n bits");
    return build_circuit({"schoolbook", N, 0, 16});
}

Circuit build_karatsuba(unsigned n, const BigNat& N, unsigned cutoff) {
    if (bit_length(N) != n) throw PreconditionError("N must have exactly n bits");
    return build_circuit({"karatsuba", N, 0, cutoff});
}

Circuit build_montgomery_stage(unsigned n, const BigNat& N) {
    if (bit_length(N) != n) throw PreconditionError("N must have exactly n bits");
    Circuit c;
    Builder b(c);
    std::vector<Qubit> T = b.input(2 * n);
    std::vector<Qubit> y = montgomery_reduce(b, T, N);
    b.measure(y);
    c.n_qubits = b.peak();
    c.registers = {{"x_in", T}, {"x", T}, {"y", y}};
    c.builder = "montgomery";
    c.n = n;
    c.N = N;
    c.r_prime = montgomery_r_prime(N);
    return c;
}

Circuit build_mul3_inplace(unsigned n) {
    Circuit c;
    Builder b(c);
    std::vector<Qubit> x = b.input(n);
    const std::vector<Qubit> x_in = x;
    mul3_inplace(b, x);
    c.n_qubits = b.peak();
    c.registers = {{"x_in", x_in}, {"x", x}, {"y", x}};
    c.builder = "mul3";
    c.n = n;
    return c;
}

BigNat resource_modulus(unsigned n) {
    if (n < 3) throw PreconditionError("resource modulus needs n >= 3");
    Rng rng(mix_seed(0x7265736f75726365ULL, n));
    for (;;) {
        BigNat N = rng.random_bits(n) | (BigNat(1) << (n - 1)) | 1;
        if (N % 3 != 0) return N;
    }
}

}  // namespace qadv::circuits
