#include "doctest.h"

#include "qadv/errors.hpp"
#include "qadv/protocol/verifier.hpp"
#include "qadv/provers/provers.hpp"
#include "qadv/tcf/rabin.hpp"
#include "qadv/wire/session.hpp"

#include <array>
#include <cmath>
#include <numbers>

using namespace qadv;
using namespace qadv::protocol;

namespace {

BitString bits(unsigned v, std::size_t n) { return BitString(BigNat(v), n); }

tcf::TcfKey key77() { return tcf::TcfKey::rabin({BigNat(77), BigNat(7), BigNat(11)}); }

// explicit 2-vectors: outcome 0 is (cos t/2, sin t/2)
double p0_bruteforce(QubitState s, double t) {
    const double r = 1 / std::sqrt(2.0);
    const std::array<double, 2> v = s == QubitState::Zero  ? std::array<double, 2>{1, 0}
                                    : s == QubitState::One  ? std::array<double, 2>{0, 1}
                                    : s == QubitState::Plus ? std::array<double, 2>{r, r}
                                                            : std::array<double, 2>{r, -r};
    const double amp = std::cos(t / 2) * v[0] + std::sin(t / 2) * v[1];
    return amp * amp;
}

// Scripted prover for malformed answers.
struct ShortPreimageProver : ProverInterface {
    tcf::TcfKey key = key77();
    void setup(const KeyMsg&) override {}
    ImageMsg round1() override { return {{BigNat(4)}, std::nullopt, std::nullopt}; }
    BitString answer_preimage() override { return bits(1, 3); }
    BitString round2(const BitString& r) override { return BitString(r.size()); }
    bool round3(Basis) override { return false; }
    void reset() override {}
};

// Sends a fresh non-residue every other round.
struct InvalidHalfProver : ProverInterface {
    std::unique_ptr<ProverInterface> inner;
    int count = 0;
    bool bad = false;
    InvalidHalfProver() : inner(provers::make_prover("ideal", 3, key77())) {}
    void setup(const KeyMsg& k) override { inner->setup(k); }
    ImageMsg round1() override {
        bad = (count++ % 2) == 1;
        auto m = inner->round1();
        if (bad) m.y = {BigNat(5)};
        return m;
    }
    BitString answer_preimage() override { return inner->answer_preimage(); }
    BitString round2(const BitString& r) override { return inner->round2(r); }
    bool round3(Basis b) override { return inner->round3(b); }
    void reset() override { inner->reset(); }
};

}  // namespace

TEST_CASE("verifier_check_image classifies images") {
    const auto key = key77();
    auto c = verifier_check_image(key, {BigNat(4)});
    CHECK(c.kind == ImageCheck::Claw);
    REQUIRE(c.preimages.size() == 2);
    CHECK(c.preimages[0].to_bignat() == 2);
    CHECK(c.preimages[1].to_bignat() == 9);
    CHECK(verifier_check_image(key, {BigNat(5)}).kind == ImageCheck::Invalid);
    c = verifier_check_image(key, {BigNat(0)});
    CHECK(c.kind == ImageCheck::SinglePreimage);
    CHECK(c.preimages[0].to_bignat() == 0);
}

TEST_CASE("choose_challenge honours the ratio") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) CHECK(choose_challenge(rng, 1.0) == Challenge::Preimage);
    int pre = 0;
    for (int i = 0; i < 100000; ++i) pre += choose_challenge(rng, 0.5) == Challenge::Preimage;
    CHECK(std::abs(pre / 1e5 - 0.5) < 0.01);
    CHECK_THROWS_AS(choose_challenge(rng, 0.0), PreconditionError);
}

TEST_CASE("check_preimage examples") {
    const auto key = key77();
    const std::size_t n = key.domain_bits();
    CHECK(check_preimage(key, bits(9, n), {BigNat(4)}));
    CHECK_FALSE(check_preimage(key, bits(3, n), {BigNat(4)}));
    CHECK_FALSE(check_preimage(key, bits(40, n), {BigNat(4)}));
    CHECK_FALSE(check_preimage(key, bits(9, n + 1), {BigNat(4)}));
}

TEST_CASE("compute_qubit_state examples") {
    const auto x0 = bits(2, 5), x1 = bits(9, 5);
    CHECK(compute_qubit_state(x0, x1, bits(0b00011, 5), bits(0, 5)) == QubitState::One);
    CHECK(compute_qubit_state(x0, x1, bits(0b00001, 5), bits(0, 5)) == QubitState::Plus);
    CHECK(compute_qubit_state(x0, x1, bits(0b00001, 5), bits(0b01000, 5)) == QubitState::Minus);
    CHECK(compute_qubit_state(x0, x1, bits(0, 5), bits(0b01000, 5)) == QubitState::Zero);
}

TEST_CASE("claw order does not change the qubit state") {
    Rng rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto a = BitString::random(12, rng), b = BitString::random(12, rng);
        const auto r = BitString::random(12, rng), d = BitString::random(12, rng);
        CHECK(compute_qubit_state(a, b, r, d) == compute_qubit_state(b, a, r, d));
    }
}

TEST_CASE("expected_bit against explicit vectors") {
    CHECK(expected_bit(QubitState::Zero, Basis::PlusPi4) == 0);
    CHECK(expected_bit(QubitState::Zero, Basis::MinusPi4) == 0);
    CHECK(expected_bit(QubitState::One, Basis::PlusPi4) == 1);
    CHECK(expected_bit(QubitState::One, Basis::MinusPi4) == 1);
    CHECK(expected_bit(QubitState::Plus, Basis::PlusPi4) == 0);
    CHECK(expected_bit(QubitState::Plus, Basis::MinusPi4) == 1);
    CHECK(expected_bit(QubitState::Minus, Basis::PlusPi4) == 1);
    CHECK(expected_bit(QubitState::Minus, Basis::MinusPi4) == 0);
    const double best = std::pow(std::cos(std::numbers::pi / 8), 2);
    for (QubitState s : {QubitState::Zero, QubitState::One, QubitState::Plus, QubitState::Minus}) {
        for (Basis m : {Basis::PlusPi4, Basis::MinusPi4}) {
            const double p0 = p0_bruteforce(s, angle_of(m));
            CHECK(expected_bit(s, m) == (p0 < 0.5));
            CHECK(std::abs(prob_zero(s, angle_of(m)) - p0) < 1e-12);
            CHECK(std::abs(std::max(p0, 1 - p0) - best) < 1e-12);
        }
    }
    CHECK(std::abs(best - 0.8536) < 1e-4);
}

TEST_CASE("score arithmetic is exact") {
    CHECK_THROWS_AS(score({}), InsufficientData);
    std::vector<Transcript> ts(7);
    ts[0].outcome = ts[1].outcome = Outcome::AcceptedPreimage;
    ts[2].outcome = Outcome::RejectedPreimage;
    ts[3].outcome = ts[4].outcome = Outcome::AcceptedMeasurement;
    ts[5].outcome = Outcome::RejectedMeasurement;
    ts[6].outcome = Outcome::DiscardedInvalidY;
    const auto r = score(ts);
    CHECK(r.p_x == tcf::Rational(2, 3));
    CHECK(r.p_m == tcf::Rational(2, 3));
    CHECK(r.score == tcf::Rational(2, 3) + 4 * tcf::Rational(2, 3) - 4);
    CHECK(r.discarded == 1);
    CHECK(r.trials_x == 3);
    CHECK(r.trials_m == 3);
    CHECK(r.to_json()["score_exact"] == "-2/3");
    ts.pop_back();
    ts.erase(ts.begin() + 3, ts.end());
    CHECK_THROWS_AS(score(ts), InsufficientData);
}

TEST_CASE("transcripts survive a json round trip") {
    const auto key = key77();
    Verifier v(key);
    auto p = provers::make_prover("ideal", 1, key);
    p->setup(v.key_message());
    Rng rng(4);
    for (int i = 0; i < 40; ++i) {
        const Transcript t = run_iteration(v, *p, rng, i);
        const Transcript u = transcript_from_json(nlohmann::json::parse(transcript_to_json(t).dump()));
        CHECK(u.iter == t.iter);
        CHECK(u.outcome == t.outcome);
        REQUIRE(u.msgs.size() == t.msgs.size());
        for (std::size_t k = 0; k < t.msgs.size(); ++k) CHECK(same_message(u.msgs[k], t.msgs[k]));
    }
    CHECK_THROWS_AS(transcript_from_json({{"iter", 1}}), ProtocolViolation);
    CHECK_THROWS_AS(outcome_from_name("Maybe"), ProtocolViolation);
}

TEST_CASE("ideal prover always passes the preimage test") {
    const auto key = key77();
    Verifier v(key, {1.0, true});
    auto p = provers::make_prover("ideal", 2, key);
    p->setup(v.key_message());
    Rng rng(5);
    for (int i = 0; i < 500; ++i) CHECK(run_iteration(v, *p, rng).outcome == Outcome::AcceptedPreimage);
}

TEST_CASE("malformed preimage length is rejected") {
    const auto key = key77();
    Verifier v(key, {1.0, true});
    ShortPreimageProver p;
    Rng rng(6);
    CHECK(run_iteration(v, p, rng).outcome == Outcome::RejectedPreimage);
}

TEST_CASE("discarded iterations carry no later rounds and change no counts") {
    const auto key = key77();
    wire::VerifyOptions o;
    o.trials = 400;
    o.seed = 8;
    o.keep_transcripts = true;
    InvalidHalfProver p;
    const auto res = wire::run_local(p, key, o);
    std::uint64_t discarded = 0;
    for (const auto& t : res.transcripts) {
        if (t.outcome == Outcome::DiscardedInvalidY) {
            ++discarded;
            CHECK(t.msgs.size() == 1);
        }
    }
    CHECK(discarded == res.report.discarded);
    CHECK(res.report.trials_x + res.report.trials_m + discarded == res.transcripts.size());

    // dropping the discarded transcripts leaves the same accept counts
    std::vector<Transcript> kept;
    for (const auto& t : res.transcripts)
        if (t.outcome != Outcome::DiscardedInvalidY) kept.push_back(t);
    const auto r2 = score(kept);
    CHECK(r2.accepts_x == res.report.accepts_x);
    CHECK(r2.accepts_m == res.report.accepts_m);
    CHECK(r2.score == res.report.score);

    // without post-selection the same images are scored, and lose
    o.verifier.postselect = false;
    InvalidHalfProver q;
    const auto res3 = wire::run_local(q, key, o);
    CHECK(res3.report.discarded == 0);
    CHECK(res3.report.score < res.report.score);
}

TEST_CASE("hoeffding half-width") {
    CHECK(hoeffding_halfwidth(0) == 1.0);
    CHECK(std::abs(hoeffding_halfwidth(1000) - std::sqrt(std::log(40.0) / 2000)) < 1e-12);
}
