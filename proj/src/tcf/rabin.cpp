#include "qadv/tcf/rabin.hpp"

#include "qadv/errors.hpp"
#include "qadv/rng.hpp"

#include <algorithm>

namespace qadv::tcf {
namespace {

std::vector<std::uint32_t> blum_primes_below(std::uint32_t limit) {
    std::vector<bool> composite(limit + 1, false);
    std::vector<std::uint32_t> out;
    for (std::uint32_t i = 2; i <= limit; ++i) {
        if (composite[i]) continue;
        if (i % 4 == 3) out.push_back(i);
        for (std::uint64_t j = std::uint64_t{i} * i; j <= limit; j += i) composite[j] = true;
    }
    return out;
}

// Small moduli are drawn uniformly from the full list of Blum semiprimes of
// the requested length; random sampling would loop forever when, e.g., only
// one 3-bit Blum prime exists.
RabinKeyPair small_rabin_gen(unsigned n, Rng& rng) {
    const std::uint64_t hi = std::uint64_t{1} << (n + 1);
    const auto primes = blum_primes_below(static_cast<std::uint32_t>(hi / 3 + 1));
    for (unsigned bits : {n, n - 1, n + 1}) {
        const std::uint64_t lo_n = std::uint64_t{1} << (bits - 1);
        const std::uint64_t hi_n = std::uint64_t{1} << bits;
        std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
        for (std::size_t i = 0; i < primes.size(); ++i) {
            const std::uint64_t p = primes[i];
            if (p * p >= hi_n) break;
            for (std::size_t j = i + 1; j < primes.size(); ++j) {
                const std::uint64_t N = p * primes[j];
                if (N >= hi_n) break;
                if (N >= lo_n) pairs.emplace_back(primes[i], primes[j]);
            }
        }
        if (pairs.empty()) continue;
        const auto [p, q] = pairs[rng.below(pairs.size())];
        return RabinKeyPair{BigNat(std::uint64_t{p} * q), BigNat(p), BigNat(q)};
    }
    throw PreconditionError("no Blum semiprime near " + std::to_string(n) + " bits");
}

BigNat random_blum_prime(unsigned bits, Rng& rng) {
    // Top two bits set forces the product of two such primes to full length.
    const BigNat top = BigNat(3) << (bits - 2);
    for (;;) {
        BigNat c = rng.random_bits(bits) | top | 3;
        if (is_probable_prime(c, rng, 40)) return c;
    }
}

}  // namespace

RabinKeyPair rabin_gen(const SecurityParams& params) {
    const unsigned n = params.n_bits;
    if (n < 6) throw PreconditionError("rabin_gen requires n_bits >= 6, got " + std::to_string(n));
    Rng rng(params.rng_seed);
    if (n <= 20) return small_rabin_gen(n, rng);
    const unsigned bits_p = (n + 1) / 2;
    const unsigned bits_q = n / 2;
    for (;;) {
        BigNat p = random_blum_prime(bits_p, rng);
        BigNat q = random_blum_prime(bits_q, rng);
        if (p == q) continue;
        if (p > q) std::swap(p, q);
        return RabinKeyPair{p * q, p, q};
    }
}

BigNat rabin_domain_bound(const BigNat& N) { return (N + 1) / 2; }

BigNat rabin_eval(const BigNat& N, const BigNat& x) {
    if (x < 0 || x >= rabin_domain_bound(N))
        throw DomainError("x = " + to_decimal(x) + " outside [0, ceil(N/2)) for N = " + to_decimal(N));
    return (x * x) % N;
}

std::vector<BigNat> rabin_invert(const RabinKeyPair& keys, const BigNat& y) {
    const BigNat& N = keys.N;
    if (y < 0 || y >= N) throw DomainError("image " + to_decimal(y) + " outside [0, N)");
    const BigNat& p = keys.p;
    const BigNat& q = keys.q;
    const BigNat a = pow_mod(y, (p + 1) / 4, p);
    if ((a * a - y) % p != 0) return {};
    const BigNat b = pow_mod(y, (q + 1) / 4, q);
    if ((b * b - y) % q != 0) return {};
    const BigNat c = q * inverse_mod(q, p);  // 1 mod p, 0 mod q
    const BigNat d = p * inverse_mod(p, q);  // 0 mod p, 1 mod q
    const BigNat bound = rabin_domain_bound(N);
    std::vector<BigNat> roots;
    for (int sa : {1, -1}) {
        for (int sb : {1, -1}) {
            BigNat r = mod_floor(sa * a * c + sb * b * d, N);
            if (r < bound && (r * r) % N == y) roots.push_back(r);
        }
    }
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
    return roots;
}

std::pair<BigNat, BigNat> factor_from_claw(const BigNat& N, const Claw& claw) {
    const BigNat& x0 = claw.x0;
    const BigNat& x1 = claw.x1;
    if (x0 == x1 || mod_floor(x0 * x0 - x1 * x1, N) != 0)
        throw NotAClaw("inputs do not collide under x^2 mod N");
    for (const BigNat& probe : {BigNat(x0 + x1), BigNat(abs(x0 - x1))}) {
        BigNat g = gcd(probe, N);
        if (g != 1 && g != N) {
            BigNat other = N / g;
            return g < other ? std::make_pair(g, other) : std::make_pair(other, g);
        }
    }
    throw NotAClaw("claw gives only trivial factors of " + to_decimal(N));
}

bool rabin_keys_valid(const RabinKeyPair& keys) {
    Rng rng(0x5eed);
    return keys.p * keys.q == keys.N && keys.p != keys.q && keys.p % 4 == 3 && keys.q % 4 == 3 &&
           is_probable_prime(keys.p, rng) && is_probable_prime(keys.q, rng);
}

std::pair<BigNat, BigNat> factor_semiprime(const BigNat& N, std::uint64_t seed) {
    if (N < 4) throw DomainError("nothing to factor");
    for (std::uint32_t d = 2; d < 1u << 16; ++d) {
        if (BigNat(d) * d > N) break;
        if (N % d == 0) return {BigNat(d), N / d};
    }
    // Brent's variant of Pollard rho.
    Rng rng(seed);
    for (int attempt = 0; attempt < 64; ++attempt) {
        const BigNat c = rng.below(N - 1) + 1;
        BigNat y = rng.below(N), x, ys, g = 1, acc = 1;
        const std::size_t batch = 128;
        for (std::size_t r = 1; g == 1; r <<= 1) {
            x = y;
            for (std::size_t i = 0; i < r; ++i) y = (y * y + c) % N;
            for (std::size_t k = 0; k < r && g == 1; k += batch) {
                ys = y;
                for (std::size_t i = 0; i < std::min(batch, r - k); ++i) {
                    y = (y * y + c) % N;
                    acc = (acc * abs(x - y)) % N;
                }
                g = gcd(acc, N);
            }
        }
        if (g == N) {
            do {
                ys = (ys * ys + c) % N;
                g = gcd(abs(x - ys), N);
            } while (g == 1);
        }
        if (g != N) {
            BigNat other = N / g;
            return g < other ? std::make_pair(g, other) : std::make_pair(other, g);
        }
    }
    throw DomainError("failed to factor " + to_decimal(N));
}

}  // namespace qadv::tcf
