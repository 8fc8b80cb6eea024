#include "qadv/extractor/extractor.hpp"

#include "qadv/errors.hpp"

#include <cmath>

namespace qadv::extractor {

using protocol::Basis;
using protocol::QubitState;

GlParams GlParams::for_accuracy(std::size_t n, double mu) {
    if (!(mu > 0 && mu < 0.5)) throw PreconditionError("mu must lie in (0, 1/2)");
    const double votes = std::ceil(8.0 * std::log(4.0 * static_cast<double>(std::max<std::size_t>(n, 1))) / (mu * mu));
    GlParams p;
    p.mu = mu;
    p.t = 1;
    while (static_cast<double>((std::size_t{1} << p.t) - 1) < votes) ++p.t;
    p.max_candidates = std::max(p.max_candidates, std::size_t{1} << p.t);
    return p;
}

void GlParams::validate() const {
    if (t < 1 || t > 24) throw PreconditionError("GL parameter t must lie in [1, 24]");
    if (!(mu > 0 && mu < 0.5)) throw PreconditionError("mu must lie in (0, 1/2)");
    if ((std::size_t{1} << t) > max_candidates) throw BudgetExceeded("2^t candidates exceed max_candidates");
}

QubitState infer_state(bool bit_plus, bool bit_minus) {
    for (QubitState s : {QubitState::Zero, QubitState::One, QubitState::Plus, QubitState::Minus})
        if (protocol::expected_bit(s, Basis::PlusPi4) == bit_plus && protocol::expected_bit(s, Basis::MinusPi4) == bit_minus)
            return s;
    throw std::logic_error("expected_bit table is not a bijection");
}

RewindableOracle::RewindableOracle(protocol::ProverInterface& prover, BitString x0)
    : prover_(prover), x0_(std::move(x0)) {}

std::optional<bool> RewindableOracle::parity_guess(const BitString& r) {
    std::vector<std::uint64_t> key = r.words();
    key.push_back(r.size());
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    std::optional<bool> out;
    try {
        prover_.reset();
        const BitString d = prover_.round2(r);
        const bool plus = prover_.round3(Basis::PlusPi4);
        prover_.reset();
        const BitString d2 = prover_.round2(r);
        const bool minus = prover_.round3(Basis::MinusPi4);
        queries_ += 2;
        if (d.size() == r.size() && d2.size() == r.size()) {
            const QubitState s = infer_state(plus, minus);
            const bool same = s == QubitState::Zero || s == QubitState::One;
            out = r.dot(x0_) != !same;
        }
    } catch (const ProtocolViolation&) {
        queries_ += 2;
    }
    cache_.emplace(std::move(key), out);
    return out;
}

namespace {

// In-place Walsh-Hadamard transform of length 2^t.
void wht(std::vector<std::int64_t>& a) {
    for (std::size_t len = 1; len < a.size(); len <<= 1)
        for (std::size_t i = 0; i < a.size(); i += len << 1)
            for (std::size_t j = i; j < i + len; ++j) {
                const std::int64_t u = a[j], v = a[j + len];
                a[j] = u + v;
                a[j + len] = u - v;
            }
}

}  // namespace

std::vector<BitString> gl_list_decode(const ParityOracle& oracle, std::size_t n, const GlParams& params, Rng& rng) {
    params.validate();
    if (n == 0) throw PreconditionError("cannot decode an empty string");
    const std::size_t size = std::size_t{1} << params.t;
    std::vector<BitString> probes;
    for (unsigned j = 0; j < params.t; ++j) probes.push_back(BitString::random(n, rng));
    std::vector<BitString> combos(size, BitString(n));
    for (std::size_t J = 1; J < size; ++J) {
        const unsigned low = static_cast<unsigned>(__builtin_ctzll(J));
        combos[J] = combos[J & (J - 1)] ^ probes[low];
    }
    // For bit i and assignment s: votes = sum_J a_J (-1)^(s.J) where a_J is the
    // signed oracle answer at r_J + e_i, i.e. the transform of a.
    std::vector<BitString> out(size, BitString(n));
    std::vector<std::int64_t> a(size);
    for (std::size_t i = 0; i < n; ++i) {
        a[0] = 0;
        for (std::size_t J = 1; J < size; ++J) {
            BitString r = combos[J];
            r.flip(i);
            const auto g = oracle(r);
            a[J] = !g ? 0 : (*g ? -1 : 1);
        }
        wht(a);
        for (std::size_t s = 0; s < size; ++s)
            if (a[s] < 0) out[s].set(i, true);
    }
    return out;
}

nlohmann::json ExtractionReport::to_json() const {
    nlohmann::json j{{"x0", protocol::bits_to_json(x0)}, {"queries_used", queries_used}, {"candidates", candidates}};
    j["x1"] = x1 ? protocol::bits_to_json(*x1) : nlohmann::json(nullptr);
    if (claw) j["claw"] = {{"x0", to_decimal(claw->x0)}, {"x1", to_decimal(claw->x1)}, {"y", to_decimal(claw->y.at(0))}};
    else j["claw"] = nullptr;
    if (factors) j["factors"] = {to_decimal(factors->first), to_decimal(factors->second)};
    else j["factors"] = nullptr;
    return j;
}

ExtractionReport extract_and_factor(protocol::ProverInterface& prover, const tcf::TcfKey& public_key,
                                    const GlParams& params, Rng& rng) {
    params.validate();
    const tcf::TcfKey key = public_key.public_part();
    prover.setup(protocol::KeyMsg{key});
    const protocol::ImageMsg img = prover.round1();
    tcf::Image y = img.y;
    if (img.circuit) {
        if (key.family() != tcf::Family::Rabin || y.size() != 1)
            throw ExtractionFailed("circuit image for a non-Rabin key", 1);
        const BigNat& NL = key.modulus();
        y = {mod_floor(y[0] * (BigNat(1) << bit_length(NL)), NL)};
    }
    ExtractionReport rep;
    std::size_t queries = 1;
    prover.reset();
    rep.x0 = prover.answer_preimage();
    ++queries;
    if (rep.x0.size() != key.domain_bits() || !key.in_domain(rep.x0) || key.eval(rep.x0) != y)
        throw ExtractionFailed("prover gave no valid preimage", queries);

    RewindableOracle oracle(prover, rep.x0);
    const auto candidates = gl_list_decode(oracle.as_oracle(), key.domain_bits(), params, rng);
    rep.queries_used = queries + oracle.queries();
    rep.candidates = candidates.size();
    for (const auto& c : candidates) {
        if (c == rep.x0 || !key.in_domain(c) || key.eval(c) != y) continue;
        rep.x1 = c;
        if (key.family() == tcf::Family::Rabin) {
            const BigNat& k = key.k();
            tcf::Claw claw{rep.x0.to_bignat() / k, c.to_bignat() / k, {y[0] / (k * k)}};
            rep.factors = tcf::factor_from_claw(key.rabin_keys().N, claw);
            rep.claw = std::move(claw);
        }
        return rep;
    }
    throw ExtractionFailed("no candidate completes a claw", rep.queries_used);
}

double lemma1_bound(double epsilon, double mu) {
    if (epsilon < 0 || epsilon > 1) throw PreconditionError("epsilon must lie in [0, 1]");
    if (!(mu > 0 && mu < 0.5)) throw PreconditionError("mu must lie in (0, 1/2)");
    return std::max(0.0, 1.0 - 2 * epsilon - 2 * mu);
}

Lemma1Trial lemma1_trial(Rng& rng, double mu, std::size_t ys, std::size_t queries_per_y, std::size_t n) {
    if (ys == 0 || queries_per_y == 0) throw PreconditionError("need at least one y and one query");
    // A random share of y sit at or above the 1/2 - mu line; the rest are
    // spread below it.
    const double bad_share = 0.6 * rng.uniform();
    const double cut = 0.5 - mu;
    double total = 0;
    std::size_t good = 0;
    for (std::size_t i = 0; i < ys; ++i) {
        const double eps_y = rng.bernoulli(bad_share) ? cut + rng.uniform() * (mu + 0.1) : rng.uniform() * cut;
        const BitString x = BitString::random(n, rng);
        std::size_t wrong = 0;
        for (std::size_t q = 0; q < queries_per_y; ++q) {
            const BitString r = BitString::random(n, rng);
            const bool answer = r.dot(x) != rng.bernoulli(eps_y);
            if (answer != r.dot(x)) ++wrong;
        }
        const double measured = static_cast<double>(wrong) / static_cast<double>(queries_per_y);
        total += measured;
        if (measured < cut) ++good;
    }
    Lemma1Trial t;
    t.epsilon = total / static_cast<double>(ys);
    t.good_fraction = static_cast<double>(good) / static_cast<double>(ys);
    t.bound = lemma1_bound(t.epsilon, mu);
    return t;
}

}  // namespace qadv::extractor
