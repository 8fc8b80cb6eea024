#include "doctest.h"

#include "qadv/errors.hpp"
#include "qadv/extractor/extractor.hpp"
#include "qadv/protocol/verifier.hpp"
#include "qadv/provers/provers.hpp"
#include "qadv/tcf/rabin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace qadv;
using namespace qadv::extractor;
using protocol::Basis;
using protocol::QubitState;

namespace {

// Answers r.x correctly except on a fixed pseudo-random set of r of density
// 1 - accuracy; deterministic per r like a rewound classical prover.
ParityOracle planted(const BitString& x, double accuracy, std::uint64_t seed) {
    return [x, accuracy, seed](const BitString& r) -> std::optional<bool> {
        std::uint64_t h = seed;
        for (auto w : r.words()) h = mix_seed(h, w);
        const bool lie = double(h >> 11) * 0x1.0p-53 >= accuracy;
        return r.dot(x) != lie;
    };
}

bool contains(const std::vector<BitString>& v, const BitString& x) { return std::find(v.begin(), v.end(), x) != v.end(); }

struct RefusingProver : protocol::ProverInterface {
    std::unique_ptr<protocol::ProverInterface> inner = provers::make_prover("ideal", 1);
    void setup(const protocol::KeyMsg& k) override { inner->setup(k); }
    protocol::ImageMsg round1() override { return inner->round1(); }
    BitString answer_preimage() override { return BitString(3); }
    BitString round2(const BitString& r) override { return inner->round2(r); }
    bool round3(Basis m) override { return inner->round3(m); }
    void reset() override { inner->reset(); }
};

// Truthful about the true qubit state, with no sampling noise.
struct ExactProver : protocol::ProverInterface {
    provers::IdealProver inner;
    BitString r, d;
    explicit ExactProver(const tcf::TcfKey& key) : inner(3, key) {}
    void setup(const protocol::KeyMsg& k) override { inner.setup(k); }
    protocol::ImageMsg round1() override { return inner.round1(); }
    BitString answer_preimage() override { return inner.answer_preimage(); }
    BitString round2(const BitString& rr) override {
        r = rr;
        d = inner.round2(rr);
        return d;
    }
    bool round3(Basis m) override { return protocol::expected_bit(provers::prover_qubit(inner.state(), r, d), m); }
    void reset() override { inner.reset(); }
};

}  // namespace

TEST_CASE("lemma1_bound examples") {
    CHECK(std::abs(lemma1_bound(0.1, 0.05) - 0.7) < 1e-12);
    CHECK(std::abs(lemma1_bound(0.0, 1e-9) - 1.0) < 1e-8);
    CHECK(lemma1_bound(0.5, 0.1) == 0.0);
}

TEST_CASE("Lemma 1 holds on planted oracle families") {
    Rng rng(1);
    for (int plant = 0; plant < 50; ++plant) {
        const double mu = 0.02 + 0.2 * rng.uniform();
        const auto t = lemma1_trial(rng, mu, 100, 200, 16);
        CHECK(t.good_fraction >= t.bound);
        CHECK(t.bound == doctest::Approx(lemma1_bound(t.epsilon, mu)));
    }
}

TEST_CASE("state inference inverts expected_bit") {
    for (QubitState s : {QubitState::Zero, QubitState::One, QubitState::Plus, QubitState::Minus})
        CHECK(infer_state(protocol::expected_bit(s, Basis::PlusPi4), protocol::expected_bit(s, Basis::MinusPi4)) == s);
    // four bit pairs, four distinct states
    std::vector<QubitState> seen;
    for (bool a : {false, true})
        for (bool b : {false, true}) seen.push_back(infer_state(a, b));
    std::sort(seen.begin(), seen.end());
    CHECK(std::unique(seen.begin(), seen.end()) == seen.end());
}

TEST_CASE("GL decoding with a noise-free oracle") {
    Rng rng(2);
    for (int i = 0; i < 20; ++i) {
        const BitString x = BitString::random(16, rng);
        GlParams p;
        p.t = 4;
        CHECK(contains(gl_list_decode(planted(x, 1.0, i), 16, p, rng), x));
    }
}

TEST_CASE("GL decoding at 95% and 50% accuracy") {
    Rng rng(3);
    GlParams p;
    p.t = 6;
    p.mu = 0.45;
    int good = 0, blind = 0;
    for (int i = 0; i < 100; ++i) {
        const BitString x = BitString::random(16, rng);
        good += contains(gl_list_decode(planted(x, 0.95, 100 + i), 16, p, rng), x);
        blind += contains(gl_list_decode(planted(x, 0.5, 200 + i), 16, p, rng), x);
    }
    CHECK(good >= 90);
    CHECK(blind <= 5);
}

TEST_CASE("GL parameters") {
    const auto p = GlParams::for_accuracy(32, 0.2);
    CHECK(double(p.votes_per_bit()) >= std::ceil(8 * std::log(128.0) / 0.04));
    CHECK(p.votes_per_bit() < 2 * std::ceil(8 * std::log(128.0) / 0.04) + 1);
    CHECK_THROWS_AS(GlParams::for_accuracy(32, 0.6), PreconditionError);
    GlParams bad;
    bad.t = 20;
    bad.max_candidates = 1024;
    CHECK_THROWS_AS(bad.validate(), BudgetExceeded);
}

TEST_CASE("parity guesses against the ideal prover") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({24, 4}));
    provers::IdealProver p(5, key);
    p.setup({key.public_part()});
    p.round1();
    const auto st = p.state();
    RewindableOracle o(p, st.x0);
    Rng rng(6);
    int right = 0, asked = 0;
    for (int i = 0; i < 4000; ++i) {
        const BitString r = BitString::random(key.domain_bits(), rng);
        const auto g = o.parity_guess(r);
        if (!g) continue;
        ++asked;
        right += *g == r.dot(st.x1);
    }
    const double bound = 1 - 2 * (1 - std::pow(std::cos(std::numbers::pi / 8), 2));
    CHECK(right / double(asked) >= bound - 4 * std::sqrt(0.25 / asked));
    CHECK(o.queries() > 0);

    ExactProver e(key);
    e.setup({key.public_part()});
    e.round1();
    const auto st2 = e.inner.state();
    RewindableOracle oe(e, st2.x0);
    for (int i = 0; i < 300; ++i) {
        const BitString r = BitString::random(key.domain_bits(), rng);
        CHECK(oe.parity_guess(r) == std::optional<bool>(r.dot(st2.x1)));
    }
}

TEST_CASE("extraction from ideal, cheating and refusing provers") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({24, 7}));
    const auto params = GlParams::for_accuracy(key.domain_bits(), 0.2);
    int ok = 0;
    for (int i = 0; i < 10; ++i) {
        auto p = provers::make_prover("ideal", 100 + i, key);
        Rng rng(i);
        try {
            const auto rep = extract_and_factor(*p, key.public_part(), params, rng);
            REQUIRE(rep.factors.has_value());
            CHECK(rep.factors->first * rep.factors->second == key.rabin_keys().N);
            CHECK(rep.claw.has_value());
            CHECK(rep.queries_used > 0);
            ++ok;
        } catch (const ExtractionFailed&) {
        }
    }
    CHECK(ok >= 8);

    int cheats = 0;
    for (int i = 0; i < 10; ++i) {
        auto p = provers::make_prover("cheater", 200 + i);
        Rng rng(50 + i);
        try {
            extract_and_factor(*p, key.public_part(), params, rng);
            ++cheats;
        } catch (const ExtractionFailed& e) {
            CHECK(e.queries_used > 0);
        }
    }
    CHECK(cheats == 0);

    RefusingProver r;
    Rng rng(9);
    CHECK_THROWS_AS(extract_and_factor(r, key.public_part(), params, rng), ExtractionFailed);
}

TEST_CASE("a prover scoring above 0.2 can be turned into a factoring algorithm") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({24, 8}));
    const auto params = GlParams::for_accuracy(key.domain_bits(), 0.2);
    // delta = 0.4 at the adjusted angle scores about 0.27
    const double model = 1 + 4 * provers::pm_of_theta({1, 0.9, provers::optimal_theta(1, 0.9)}) - 4;
    REQUIRE(model >= 0.2);
    int ok = 0;
    for (int i = 0; i < 40; ++i) {
        auto p = provers::make_prover("phase:delta=0.4,theta=opt", 300 + i, key);
        Rng rng(400 + i);
        try {
            extract_and_factor(*p, key.public_part(), params, rng);
            ++ok;
        } catch (const ExtractionFailed&) {
        }
    }
    CHECK(ok >= 20);
}

TEST_CASE("extraction report json") {
    const auto key = tcf::TcfKey::rabin(tcf::rabin_gen({20, 3}));
    auto p = provers::make_prover("ideal", 1, key);
    Rng rng(2);
    const auto rep = extract_and_factor(*p, key.public_part(), GlParams::for_accuracy(key.domain_bits(), 0.2), rng);
    const auto j = rep.to_json();
    CHECK(j.contains("queries_used"));
    CHECK(j.contains("x0"));
}
