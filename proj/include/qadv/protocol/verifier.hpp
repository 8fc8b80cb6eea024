#pragma once

#include "qadv/circuits/branch_sim.hpp"
#include "qadv/protocol/messages.hpp"
#include "qadv/rng.hpp"
#include "qadv/tcf/ddh.hpp"

#include <map>
#include <memory>
#include <vector>

namespace qadv::protocol {

enum class QubitState { Zero, One, Plus, Minus };
const char* state_name(QubitState s);

/// Probability of outcome 0 when measuring `s` in the basis
/// {cos(t/2)|0> + sin(t/2)|1>, -sin(t/2)|0> + cos(t/2)|1>}.
double prob_zero(QubitState s, double theta);

/// The state (-1)^(d.x0)|r.x0> + (-1)^(d.x1)|r.x1>, up to global phase.
QubitState compute_qubit_state(const BitString& x0, const BitString& x1, const BitString& r, const BitString& d);
/// Plus <-> Minus; computational states are unchanged.
QubitState flip_sign(QubitState s);
/// The more likely outcome for `s` measured at `m`.
bool expected_bit(QubitState s, Basis m);

struct ImageCheck {
    enum Kind { Claw, SinglePreimage, Invalid } kind = Invalid;
    std::vector<BitString> preimages;  // 2, 1 or 0 entries
};
ImageCheck verifier_check_image(const tcf::TcfKey& key, const tcf::Image& y);

/// Preimage with probability `ratio`, which must lie in (0, 1].
Challenge choose_challenge(Rng& rng, double ratio = 0.5);
/// x has the domain length, lies in the domain, and maps to y.
bool check_preimage(const tcf::TcfKey& key, const BitString& x, const tcf::Image& y);

/// What the verifier talks to. An honest prover answers either the preimage
/// or rounds 2 and 3 after each round 1; reset() rewinds to the state right
/// after round 1.
class ProverInterface {
public:
    virtual ~ProverInterface() = default;
    virtual void setup(const KeyMsg& key) = 0;
    virtual ImageMsg round1() = 0;
    virtual BitString answer_preimage() = 0;
    virtual BitString round2(const BitString& r) = 0;
    virtual bool round3(Basis m) = 0;
    virtual void reset() = 0;
};

enum class Outcome { AcceptedPreimage, RejectedPreimage, AcceptedMeasurement, RejectedMeasurement, DiscardedInvalidY };
const char* outcome_name(Outcome o);
Outcome outcome_from_name(const std::string& name);

struct Transcript {
    std::uint64_t iter = 0;
    std::vector<RoundMessage> msgs;
    Outcome outcome = Outcome::DiscardedInvalidY;
};
/// {"iter", "msgs": [{"tag", "payload"}...], "outcome"}
nlohmann::json transcript_to_json(const Transcript& t);
Transcript transcript_from_json(const nlohmann::json& j);

struct VerifierConfig {
    double challenge_ratio = 0.5;
    /// Silently drop iterations whose y has no preimage.
    bool postselect = true;
};

/// Verifier side of a session: the secret key plus cached circuit models
/// used to undo the Montgomery constant and the phase of discarded garbage.
class Verifier {
public:
    explicit Verifier(tcf::TcfKey key, VerifierConfig config = {});

    const tcf::TcfKey& key() const { return key_; }
    const VerifierConfig& config() const { return config_; }
    KeyMsg key_message() const { return {key_.public_part()}; }

    /// The image the prover measured, in the function's own range: circuit
    /// outputs are multiplied by R = R'^-1.
    tcf::Image normalize_image(const ImageMsg& msg) const;
    /// Sign the prover's discards put between the two branches of this claw.
    int garbage_sign(const ImageMsg& msg, const BitString& x0, const BitString& x1) const;

private:
    const circuits::BranchSimulator& simulator(const CircuitRef& ref) const;

    tcf::TcfKey key_;
    VerifierConfig config_;
    mutable std::map<std::pair<std::string, unsigned>, std::unique_ptr<circuits::BranchSimulator>> sims_;
};

/// One full iteration against `prover`, which must already be set up.
Transcript run_iteration(const Verifier& verifier, ProverInterface& prover, Rng& rng, std::uint64_t iter = 0);

struct ScoreReport {
    std::uint64_t trials_x = 0, accepts_x = 0, trials_m = 0, accepts_m = 0, discarded = 0;
    tcf::Rational p_x = 0, p_m = 0, score = 0;
    double ci_halfwidth = 0;

    double score_value() const { return static_cast<double>(score); }
    nlohmann::json to_json() const;
};

/// Order-independent tally of outcomes.
class ScoreTally {
public:
    void add(Outcome o);
    void merge(const ScoreTally& other);
    /// Throws InsufficientData without at least one trial per branch.
    ScoreReport report() const;

private:
    std::uint64_t tx_ = 0, ax_ = 0, tm_ = 0, am_ = 0, disc_ = 0;
};

ScoreReport score(const std::vector<Transcript>& transcripts);

/// Two-sided 95% Hoeffding half-width for a mean over n trials.
double hoeffding_halfwidth(std::uint64_t n);

}  // namespace qadv::protocol
