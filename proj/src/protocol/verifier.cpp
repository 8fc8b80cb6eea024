#include "qadv/protocol/verifier.hpp"

#include "qadv/circuits/squaring.hpp"
#include "qadv/errors.hpp"

#include <cmath>

namespace qadv::protocol {

using nlohmann::json;

const char* state_name(QubitState s) {
    switch (s) {
        case QubitState::Zero: return "0";
        case QubitState::One: return "1";
        case QubitState::Plus: return "+";
        case QubitState::Minus: return "-";
    }
    return "?";
}

double prob_zero(QubitState s, double theta) {
    switch (s) {
        case QubitState::Zero: return std::cos(theta / 2) * std::cos(theta / 2);
        case QubitState::One: return std::sin(theta / 2) * std::sin(theta / 2);
        case QubitState::Plus: return (1 + std::sin(theta)) / 2;
        case QubitState::Minus: return (1 - std::sin(theta)) / 2;
    }
    return 0.5;
}

QubitState compute_qubit_state(const BitString& x0, const BitString& x1, const BitString& r, const BitString& d) {
    const bool b0 = r.dot(x0), b1 = r.dot(x1);
    if (b0 == b1) return b0 ? QubitState::One : QubitState::Zero;
    return d.dot(x0 ^ x1) ? QubitState::Minus : QubitState::Plus;
}

QubitState flip_sign(QubitState s) {
    if (s == QubitState::Plus) return QubitState::Minus;
    if (s == QubitState::Minus) return QubitState::Plus;
    return s;
}

bool expected_bit(QubitState s, Basis m) { return prob_zero(s, angle_of(m)) < 0.5; }

ImageCheck verifier_check_image(const tcf::TcfKey& key, const tcf::Image& y) {
    ImageCheck out;
    out.preimages = key.invert(y);
    if (out.preimages.size() >= 2) out.kind = ImageCheck::Claw;
    else if (out.preimages.size() == 1) out.kind = ImageCheck::SinglePreimage;
    return out;
}

Challenge choose_challenge(Rng& rng, double ratio) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw PreconditionError("challenge ratio must lie in (0, 1]");
    return rng.uniform() < ratio ? Challenge::Preimage : Challenge::Continue;
}

bool check_preimage(const tcf::TcfKey& key, const BitString& x, const tcf::Image& y) {
    if (x.size() != key.domain_bits() || !key.in_domain(x)) return false;
    return key.eval(x) == y;
}

const char* outcome_name(Outcome o) {
    switch (o) {
        case Outcome::AcceptedPreimage: return "AcceptedPreimage";
        case Outcome::RejectedPreimage: return "RejectedPreimage";
        case Outcome::AcceptedMeasurement: return "AcceptedMeasurement";
        case Outcome::RejectedMeasurement: return "RejectedMeasurement";
        case Outcome::DiscardedInvalidY: return "DiscardedInvalidY";
    }
    return "?";
}

Outcome outcome_from_name(const std::string& name) {
    for (Outcome o : {Outcome::AcceptedPreimage, Outcome::RejectedPreimage, Outcome::AcceptedMeasurement,
                      Outcome::RejectedMeasurement, Outcome::DiscardedInvalidY})
        if (name == outcome_name(o)) return o;
    throw ProtocolViolation("unknown outcome '" + name + "'");
}

json transcript_to_json(const Transcript& t) {
    json msgs = json::array();
    for (const auto& m : t.msgs) msgs.push_back({{"tag", tag_of(m)}, {"payload", payload_of(m)}});
    return {{"iter", t.iter}, {"msgs", msgs}, {"outcome", outcome_name(t.outcome)}};
}

Transcript transcript_from_json(const json& j) {
    if (!j.is_object() || !j.contains("iter") || !j.contains("msgs") || !j.contains("outcome") ||
        !j["msgs"].is_array() || !j["outcome"].is_string() || !j["iter"].is_number_unsigned())
        throw ProtocolViolation("transcript needs iter, msgs and outcome");
    Transcript t;
    t.iter = j["iter"].get<std::uint64_t>();
    for (const auto& m : j["msgs"]) {
        if (!m.is_object() || !m.contains("tag") || !m["tag"].is_string() || !m.contains("payload"))
            throw ProtocolViolation("transcript message needs tag and payload");
        t.msgs.push_back(message_from(m["tag"].get<std::string>(), m["payload"]));
    }
    t.outcome = outcome_from_name(j["outcome"].get<std::string>());
    return t;
}

Verifier::Verifier(tcf::TcfKey key, VerifierConfig config) : key_(std::move(key)), config_(config) {
    if (!key_.has_trapdoor()) throw PreconditionError("the verifier needs the trapdoor");
    if (!(config_.challenge_ratio > 0.0 && config_.challenge_ratio <= 1.0))
        throw PreconditionError("challenge ratio must lie in (0, 1]");
}

const circuits::BranchSimulator& Verifier::simulator(const CircuitRef& ref) const {
    if (key_.family() != tcf::Family::Rabin) throw ProtocolViolation("circuit outputs are only defined for Rabin keys");
    if (ref.builder != "schoolbook" && ref.builder != "karatsuba")
        throw ProtocolViolation("unknown circuit builder '" + ref.builder + "'");
    if (ref.cutoff < 8 || ref.cutoff > 4096) throw ProtocolViolation("circuit cutoff out of range");
    auto& slot = sims_[{ref.builder, ref.cutoff}];
    if (!slot) {
        const auto c = circuits::build_circuit({ref.builder, key_.rabin_keys().N, key_.lift(), ref.cutoff});
        slot = std::make_unique<circuits::BranchSimulator>(c);
    }
    return *slot;
}

tcf::Image Verifier::normalize_image(const ImageMsg& msg) const {
    if (!msg.circuit) return msg.y;
    simulator(*msg.circuit);  // validates the reference
    if (msg.y.size() != 1) throw ProtocolViolation("circuit image must be one residue");
    const BigNat& NL = key_.modulus();
    const BigNat R = BigNat(1) << bit_length(NL);
    return {mod_floor(msg.y[0] * R, NL)};
}

int Verifier::garbage_sign(const ImageMsg& msg, const BitString& x0, const BitString& x1) const {
    if (!msg.circuit || !msg.h) return 1;
    const auto& sim = simulator(*msg.circuit);
    if (msg.h->size() != sim.discarded_qubits()) throw ProtocolViolation("h has the wrong length");
    const BigNat& k = key_.k();
    auto input = [&](const BitString& X) { return BitString(X.to_bignat() / k, sim.input_width()); };
    return sim.discard_sign(input(x0), input(x1), *msg.h);
}

Transcript run_iteration(const Verifier& v, ProverInterface& prover, Rng& rng, std::uint64_t iter) {
    Transcript t;
    t.iter = iter;
    const ImageMsg image = prover.round1();
    t.msgs.emplace_back(image);

    tcf::Image y;
    ImageCheck check;
    try {
        y = v.normalize_image(image);
        check = verifier_check_image(v.key(), y);
    } catch (const ProtocolViolation&) {
        check = {};
    }
    if (check.kind == ImageCheck::Invalid && v.config().postselect) {
        t.outcome = Outcome::DiscardedInvalidY;
        return t;
    }

    const Challenge ch = choose_challenge(rng, v.config().challenge_ratio);
    t.msgs.emplace_back(ChallengeMsg{ch});
    if (ch == Challenge::Preimage) {
        const BitString x = prover.answer_preimage();
        t.msgs.emplace_back(PreimageMsg{x});
        const bool ok = check.kind != ImageCheck::Invalid && check_preimage(v.key(), x, y);
        t.outcome = ok ? Outcome::AcceptedPreimage : Outcome::RejectedPreimage;
        return t;
    }

    const std::size_t n = v.key().domain_bits();
    const BitString r = BitString::random(n, rng);
    t.msgs.emplace_back(VectorMsg{r});
    const BitString d = prover.round2(r);
    t.msgs.emplace_back(EquationMsg{d});
    const Basis m = rng.coin() ? Basis::PlusPi4 : Basis::MinusPi4;
    t.msgs.emplace_back(BasisMsg{m});
    const bool bit = prover.round3(m);
    t.msgs.emplace_back(ResultMsg{bit});

    bool ok = false;
    if (d.size() == n) {
        if (check.kind == ImageCheck::Claw) {
            const auto& xs = check.preimages;
            QubitState s = compute_qubit_state(xs[0], xs[1], r, d);
            const bool diagonal = s == QubitState::Plus || s == QubitState::Minus;
            if (diagonal && v.garbage_sign(image, xs[0], xs[1]) < 0) s = flip_sign(s);
            ok = bit == expected_bit(s, m);
        } else if (check.kind == ImageCheck::SinglePreimage) {
            const QubitState s = r.dot(check.preimages[0]) ? QubitState::One : QubitState::Zero;
            ok = bit == expected_bit(s, m);
        }
    }
    t.outcome = ok ? Outcome::AcceptedMeasurement : Outcome::RejectedMeasurement;
    return t;
}

double hoeffding_halfwidth(std::uint64_t n) {
    if (n == 0) return 1.0;
    return std::sqrt(std::log(2.0 / 0.05) / (2.0 * static_cast<double>(n)));
}

void ScoreTally::add(Outcome o) {
    switch (o) {
        case Outcome::AcceptedPreimage: ++ax_; [[fallthrough]];
        case Outcome::RejectedPreimage: ++tx_; break;
        case Outcome::AcceptedMeasurement: ++am_; [[fallthrough]];
        case Outcome::RejectedMeasurement: ++tm_; break;
        case Outcome::DiscardedInvalidY: ++disc_; break;
    }
}

void ScoreTally::merge(const ScoreTally& o) {
    tx_ += o.tx_;
    ax_ += o.ax_;
    tm_ += o.tm_;
    am_ += o.am_;
    disc_ += o.disc_;
}

ScoreReport ScoreTally::report() const {
    if (tx_ == 0 || tm_ == 0) throw InsufficientData("need at least one trial of each challenge branch");
    ScoreReport r;
    r.trials_x = tx_;
    r.accepts_x = ax_;
    r.trials_m = tm_;
    r.accepts_m = am_;
    r.discarded = disc_;
    r.p_x = tcf::Rational(BigNat(ax_), BigNat(tx_));
    r.p_m = tcf::Rational(BigNat(am_), BigNat(tm_));
    r.score = r.p_x + 4 * r.p_m - 4;
    r.ci_halfwidth = hoeffding_halfwidth(tx_) + 4 * hoeffding_halfwidth(tm_);
    return r;
}

ScoreReport score(const std::vector<Transcript>& transcripts) {
    ScoreTally tally;
    for (const auto& t : transcripts) tally.add(t.outcome);
    return tally.report();
}

namespace {
std::string rational_text(const tcf::Rational& q) {
    return to_decimal(BigNat(numerator(q) < 0 ? BigNat(-numerator(q)) : BigNat(numerator(q))))
        .insert(0, numerator(q) < 0 ? "-" : "") + "/" + to_decimal(BigNat(denominator(q)));
}
}  // namespace

json ScoreReport::to_json() const {
    return {{"trials_x", trials_x},
            {"accepts_x", accepts_x},
            {"trials_m", trials_m},
            {"accepts_m", accepts_m},
            {"discarded", discarded},
            {"p_x", static_cast<double>(p_x)},
            {"p_m", static_cast<double>(p_m)},
            {"score", static_cast<double>(score)},
            {"score_exact", rational_text(score)},
            {"ci_halfwidth", ci_halfwidth}};
}

}  // namespace qadv::protocol
