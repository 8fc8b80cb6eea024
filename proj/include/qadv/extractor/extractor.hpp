#pragma once

#include "qadv/errors.hpp"
#include "qadv/protocol/verifier.hpp"
#include "qadv/tcf/rabin.hpp"

#include <functional>
#include <map>
#include <optional>

namespace qadv::extractor {

struct GlParams {
    unsigned t = 8;        // 2^t - 1 votes per bit, 2^t candidates
    double mu = 0.2;       // oracle advantage over 1/2
    std::size_t max_candidates = std::size_t{1} << 16;

    /// Votes per bit of ceil(8 ln(4n) / mu^2), rounded up to 2^t - 1.
    static GlParams for_accuracy(std::size_t n, double mu);
    std::size_t votes_per_bit() const { return (std::size_t{1} << t) - 1; }
    void validate() const;
};

/// Guess for r.x, or nothing when the source gave no usable answer.
using ParityOracle = std::function<std::optional<bool>(const BitString& r)>;

/// Fixed y, known x0, and a prover that can be rewound after round 1.
/// Answers for a given r are cached for the oracle's lifetime.
class RewindableOracle {
public:
    RewindableOracle(protocol::ProverInterface& prover, BitString x0);

    /// Rewinds, asks round 2 with r and round 3 at +pi/4; rewinds again and
    /// asks at -pi/4. The two bits name the qubit state, which says whether
    /// r.x1 equals r.x0.
    std::optional<bool> parity_guess(const BitString& r);
    std::size_t queries() const { return queries_; }
    ParityOracle as_oracle() {
        return [this](const BitString& r) { return parity_guess(r); };
    }

private:
    protocol::ProverInterface& prover_;
    BitString x0_;
    std::map<std::vector<std::uint64_t>, std::optional<bool>> cache_;
    std::size_t queries_ = 0;
};

/// Which state the pair (bit at +pi/4, bit at -pi/4) identifies.
protocol::QubitState infer_state(bool bit_plus, bool bit_minus);

/// Goldreich-Levin with t pairwise-independent probes: every assignment of
/// guesses to the probes yields one candidate, each bit decided by majority.
std::vector<BitString> gl_list_decode(const ParityOracle& oracle, std::size_t n, const GlParams& params, Rng& rng);

struct ExtractionReport {
    BitString x0;
    std::optional<BitString> x1;
    std::optional<tcf::Claw> claw;                   // Rabin, in unlifted values
    std::optional<std::pair<BigNat, BigNat>> factors;
    std::size_t queries_used = 0;
    std::size_t candidates = 0;

    nlohmann::json to_json() const;
};

/// Runs the soundness reduction against a prover holding only the public key.
/// Throws ExtractionFailed when no candidate completes a claw.
ExtractionReport extract_and_factor(protocol::ProverInterface& prover, const tcf::TcfKey& public_key,
                                    const GlParams& params, Rng& rng);

/// max(0, 1 - 2 eps - 2 mu).
double lemma1_bound(double epsilon, double mu);

/// One synthetic plant: `ys` hidden strings, each behind an oracle that lies
/// with its own planted rate.
struct Lemma1Trial {
    double epsilon = 0;        // mean measured error over y
    double good_fraction = 0;  // fraction of y with measured error < 1/2 - mu
    double bound = 0;
};
Lemma1Trial lemma1_trial(Rng& rng, double mu, std::size_t ys = 200, std::size_t queries_per_y = 400,
                         std::size_t n = 24);

}  // namespace qadv::extractor
