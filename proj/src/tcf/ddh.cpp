#include "qadv/tcf/ddh.hpp"

#include "qadv/errors.hpp"
#include "qadv/rng.hpp"

#include <cmath>

namespace qadv::tcf {
namespace {

BigNat random_prime(unsigned bits, Rng& rng) {
    for (;;) {
        BigNat c = rng.random_bits(bits) | (BigNat(1) << (bits - 1)) | 1;
        if (bits <= 2) c = bits == 2 ? 3 : 2;
        if (is_probable_prime(c, rng)) return c;
    }
}

std::uint64_t discrete_log_upto(const BigNat& g, const BigNat& z, const BigNat& P, std::uint64_t limit) {
    BigNat acc = 1;
    for (std::uint64_t e = 0; e <= limit; ++e) {
        if (acc == z) return e;
        acc = (acc * g) % P;
    }
    throw NotInImage("no discrete log in [0, " + std::to_string(limit) + "]");
}

}  // namespace

std::uint64_t ddh_range_for(unsigned k) {
    std::uint64_t m = 2;
    while (m < std::uint64_t{k} * k) m <<= 1;
    return m;
}

std::vector<std::vector<BigNat>> matrix_inverse_mod(const std::vector<std::vector<BigNat>>& M,
                                                    const BigNat& q) {
    const std::size_t k = M.size();
    std::vector<std::vector<BigNat>> a(k, std::vector<BigNat>(2 * k, 0));
    for (std::size_t i = 0; i < k; ++i) {
        if (M[i].size() != k) throw DomainError("matrix is not square");
        for (std::size_t j = 0; j < k; ++j) a[i][j] = mod_floor(M[i][j], q);
        a[i][k + i] = 1;
    }
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t piv = col;
        while (piv < k && a[piv][col] == 0) ++piv;
        if (piv == k) throw DomainError("matrix is singular modulo " + to_decimal(q));
        std::swap(a[piv], a[col]);
        const BigNat inv = inverse_mod(a[col][col], q);
        for (auto& v : a[col]) v = (v * inv) % q;
        for (std::size_t r = 0; r < k; ++r) {
            if (r == col || a[r][col] == 0) continue;
            const BigNat factor = a[r][col];
            for (std::size_t j = 0; j < 2 * k; ++j) a[r][j] = mod_floor(a[r][j] - factor * a[col][j], q);
        }
    }
    std::vector<std::vector<BigNat>> out(k, std::vector<BigNat>(k));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) out[i][j] = a[i][k + j];
    return out;
}

DdhKeyPair ddh_from_secret(const BigNat& P, const BigNat& q, const BigNat& g,
                           std::vector<std::vector<BigNat>> M, std::vector<bool> s) {
    const auto k = static_cast<unsigned>(M.size());
    if (k == 0 || s.size() != k) throw PreconditionError("DDH secret dimensions do not match");
    matrix_inverse_mod(M, q);  // throws when singular
    DdhKeyPair key{P, q, g, k, ddh_range_for(k), {}, {}, std::move(M), std::move(s)};
    key.gM.assign(k, std::vector<BigNat>(k));
    key.gMs.assign(k, 0);
    for (unsigned i = 0; i < k; ++i) {
        BigNat row_s = 0;
        for (unsigned j = 0; j < k; ++j) {
            key.gM[i][j] = pow_mod(g, key.M[i][j], P);
            if (key.s[j]) row_s += key.M[i][j];
        }
        key.gMs[i] = pow_mod(g, row_s % q, P);
    }
    return key;
}

DdhKeyPair ddh_gen(unsigned k, unsigned group_bits, std::uint64_t seed) {
    if (k == 0) throw PreconditionError("ddh_gen requires k >= 1");
    const std::uint64_t m = ddh_range_for(k);
    const unsigned q_bits = group_bits > 3 ? group_bits - 2 : 2;
    if (BigNat(1) << q_bits <= BigNat(2 * m))
        throw PreconditionError("group_bits " + std::to_string(group_bits) + " too small for m = " +
                                std::to_string(m));
    Rng rng(seed);
    BigNat P, q;
    for (bool found = false; !found;) {
        q = random_prime(q_bits, rng);
        if (q <= 2 * m) continue;
        for (unsigned j = 2; j <= 64 && !found; j += 2) {
            P = q * j + 1;
            found = is_probable_prime(P, rng);
        }
    }
    BigNat g = 1;
    while (g == 1) g = pow_mod(rng.below(P - 3) + 2, (P - 1) / q, P);
    for (;;) {
        std::vector<std::vector<BigNat>> M(k, std::vector<BigNat>(k));
        for (auto& row : M)
            for (auto& v : row) v = rng.below(q);
        std::vector<bool> s(k);
        for (unsigned i = 0; i < k; ++i) s[i] = rng.coin();
        try {
            return ddh_from_secret(P, q, g, std::move(M), std::move(s));
        } catch (const DomainError&) {
            // singular M: draw again
        }
    }
}

std::vector<BigNat> ddh_eval(const DdhKeyPair& key, bool b, const std::vector<std::uint64_t>& x) {
    if (x.size() != key.k) throw DomainError("DDH input has wrong dimension");
    for (auto v : x)
        if (v >= key.m) throw DomainError("DDH input coordinate " + std::to_string(v) + " >= m");
    std::vector<BigNat> out(key.k);
    for (unsigned i = 0; i < key.k; ++i) {
        BigNat acc = b ? key.gMs[i] : BigNat(1);
        for (unsigned j = 0; j < key.k; ++j)
            if (x[j]) acc = (acc * pow_mod(key.gM[i][j], x[j], key.P)) % key.P;
        out[i] = acc;
    }
    return out;
}

std::vector<DdhInput> ddh_invert(const DdhKeyPair& key, const std::vector<BigNat>& y) {
    if (!key.has_trapdoor()) throw PreconditionError("DDH inversion needs the secret matrix");
    if (y.size() != key.k) throw NotInImage("image has wrong dimension");
    const auto Minv = matrix_inverse_mod(key.M, key.q);
    // g^(M^-1 y_exp) = g^(x + b s), one coordinate at a time.
    std::vector<std::uint64_t> w(key.k);
    for (unsigned i = 0; i < key.k; ++i) {
        BigNat z = 1;
        for (unsigned j = 0; j < key.k; ++j) z = (z * pow_mod(y[j], Minv[i][j], key.P)) % key.P;
        w[i] = discrete_log_upto(key.g, z, key.P, key.m);
    }
    std::vector<DdhInput> out;
    bool ok0 = true, ok1 = true;
    DdhInput in0{false, w}, in1{true, w};
    for (unsigned i = 0; i < key.k; ++i) {
        if (w[i] >= key.m) ok0 = false;
        if (key.s[i]) {
            if (w[i] == 0) ok1 = false;
            else in1.x[i] -= 1;
        }
        if (in1.x[i] >= key.m) ok1 = false;
    }
    if (ok0) out.push_back(in0);
    if (ok1) out.push_back(in1);
    if (out.empty()) throw NotInImage("no preimage lands in [0, m)^k");
    return out;
}

Rational unpaired_fraction(unsigned k, std::uint64_t m, const std::vector<bool>& s) {
    if (m < 2) throw PreconditionError("unpaired_fraction requires m >= 2");
    if (s.size() != k) throw PreconditionError("s must have length k");
    std::uint64_t total = 1;
    for (unsigned i = 0; i < k; ++i) {
        total *= m;
        if (total > 1000000) throw TooLarge("m^k exceeds the enumeration budget of 10^6");
    }
    std::vector<std::uint64_t> x(k, 0);
    std::uint64_t orphans = 0;
    for (std::uint64_t idx = 0; idx < total; ++idx) {
        std::uint64_t rest = idx;
        for (unsigned i = 0; i < k; ++i) {
            x[i] = rest % m;
            rest /= m;
        }
        // (0, x) pairs with (1, x - s); (1, x) pairs with (0, x + s).
        bool has_down = true, has_up = true;
        for (unsigned i = 0; i < k; ++i) {
            if (!s[i]) continue;
            if (x[i] == 0) has_down = false;
            if (x[i] + 1 >= m) has_up = false;
        }
        orphans += !has_down;
        orphans += !has_up;
    }
    return Rational(orphans) / Rational(2 * total);
}

double unpaired_fraction_closed_form(unsigned k, std::uint64_t m) {
    return 1.0 - std::pow(1.0 - 1.0 / static_cast<double>(m), static_cast<double>(k));
}

}  // namespace qadv::tcf
