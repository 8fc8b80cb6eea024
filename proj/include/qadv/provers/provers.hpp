#pragma once

#include "qadv/circuits/branch_sim.hpp"
#include "qadv/protocol/verifier.hpp"

#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace qadv::provers {

using protocol::Basis;
using protocol::ImageMsg;
using protocol::KeyMsg;

/// Superposition of two basis strings with a relative sign on x1, or a single
/// surviving branch once collapsed.
struct TwoBranchState {
    BitString x0, x1;
    int rel_phase = 1;
    tcf::Image y;
    bool collapsed = false;  // only x0 remains
};

/// Born-rule sample of the Hadamard-basis measurement after round 2.
BitString ideal_round2(const TwoBranchState& st, const BitString& r, Rng& rng);
/// The prover's single-qubit state after round 2.
protocol::QubitState prover_qubit(const TwoBranchState& st, const BitString& r, const BitString& d);
/// Measures that qubit at angle +-theta (sign from m).
bool ideal_round3(const TwoBranchState& st, const BitString& r, const BitString& d, Basis m, double theta, Rng& rng);

/// Every preimage of y. Stands in for the physics that hands the prover the
/// second branch; it is never used to answer the verifier directly.
using PartnerOracle = std::function<std::vector<BitString>(const tcf::Image&)>;
PartnerOracle trapdoor_partner(tcf::TcfKey secret_key);
/// Recovers the trapdoor from a public Rabin key by factoring N. Practical
/// only for moduli up to roughly 80 bits.
tcf::TcfKey recover_trapdoor(const tcf::TcfKey& public_key);

struct AngleModel {
    double f_par = 1.0;   // correct-state rate for computational states
    double f_perp = 1.0;  // correct-state rate for diagonal states
    double theta = 0.7853981633974483;
};
double pm_of_theta(const AngleModel& model);
/// atan((2 f_perp - 1) / (2 f_par - 1)); DegenerateModel when f_par = 1/2.
double optimal_theta(double f_par, double f_perp);

/// Shared machinery for provers that hold a two-branch state: rounds 2 and 3
/// are Born-rule samples whose randomness is a function of the round-1 state
/// and r, so reset() followed by the same r replays the same answers.
class BranchProver : public protocol::ProverInterface {
public:
    BitString answer_preimage() override;
    BitString round2(const BitString& r) override;
    bool round3(Basis m) override;
    void reset() override;

    const TwoBranchState& state() const { return state_; }
    double theta() const { return theta_; }
    void set_theta(double theta) { theta_ = theta; }

protected:
    explicit BranchProver(std::uint64_t seed, double theta);
    /// Called by round1 implementations once the state is fixed.
    void settle(TwoBranchState st);

    Rng rng_;
    TwoBranchState state_;
    double theta_;

private:
    std::uint64_t post_seed_ = 0;
    std::optional<Rng> round_rng_;
    BitString r_, d_;
    bool has_round1_ = false;
};

/// Exact quantum prover. With `phase_flip` > 0 the relative sign is wrong with
/// that probability (bit strings stay correct).
class IdealProver : public BranchProver {
public:
    IdealProver(std::uint64_t seed, std::optional<tcf::TcfKey> secret = std::nullopt, double theta = 0.7853981633974483,
                double phase_flip = 0.0);
    void setup(const KeyMsg& key) override;
    ImageMsg round1() override;

private:
    std::optional<tcf::TcfKey> secret_;
    std::optional<tcf::TcfKey> key_;
    PartnerOracle partner_;
    double phase_flip_;
};

/// The bound-saturating classical strategy: knows one preimage and answers
/// round 3 as if the qubit were |r.x0>.
class CheaterProver : public protocol::ProverInterface {
public:
    explicit CheaterProver(std::uint64_t seed);
    void setup(const KeyMsg& key) override;
    ImageMsg round1() override;
    BitString answer_preimage() override;
    BitString round2(const BitString& r) override;
    bool round3(Basis m) override;
    void reset() override {}

private:
    Rng rng_;
    std::optional<tcf::TcfKey> key_;
    BitString x0_, r_;
    tcf::Image y_;
};

struct NoiseModel {
    double circuit_fidelity = 1.0;  // F
    std::size_t gate_count = 0;     // N_g of the unlifted circuit
    double per_gate_fidelity() const;
};

struct NoisyOptions {
    double fidelity = 1.0;
    std::string builder = "karatsuba";
    unsigned lift = 0;
    unsigned cutoff = 16;
    /// Fixed measurement angle; calibrated from a pilot run when empty.
    std::optional<double> theta;
    /// Re-run the circuit until y is a multiple of k^2.
    bool prover_discard = true;
    std::size_t pilot = 1024;
    std::uint64_t max_attempts = 100'000'000;
};

/// Circuit-level prover: both branches go through the gate list with one
/// shared Pauli-error realization.
class NoisyCircuitProver : public BranchProver {
public:
    NoisyCircuitProver(std::uint64_t seed, NoisyOptions options, std::optional<tcf::TcfKey> secret = std::nullopt);
    void setup(const KeyMsg& key) override;
    ImageMsg round1() override;

    const NoiseModel& noise() const { return noise_; }
    std::uint64_t attempts() const { return attempts_; }
    std::uint64_t rejected() const { return rejected_; }
    double discard_rate() const { return attempts_ ? double(rejected_) / double(attempts_) : 0.0; }
    std::uint64_t divergent() const { return divergent_; }
    /// Estimated (f_par, f_perp) from the pilot run, if one was made.
    const std::optional<AngleModel>& calibration() const { return calibration_; }
    std::size_t circuit_gates() const { return sim_ ? sim_->counted_gates() : 0; }

private:
    struct Trajectory {
        TwoBranchState st;  // y holds the raw circuit output
        std::shared_ptr<const circuits::BranchBatch> batch;
        std::size_t lane = 0;
        BitString h() const { return batch->h_of(lane); }
    };
    Trajectory next_trajectory();
    AngleModel calibrate(std::size_t samples);

    NoisyOptions opt_;
    std::optional<tcf::TcfKey> secret_;
    std::optional<tcf::TcfKey> key_;
    PartnerOracle partner_;
    std::unique_ptr<circuits::BranchSimulator> sim_;
    NoiseModel noise_;
    std::deque<Trajectory> buffer_;
    BitString h_;
    std::uint64_t attempts_ = 0, rejected_ = 0, divergent_ = 0;
    std::optional<AngleModel> calibration_;
};

/// "ideal" | "cheater" | "phase:delta=<d>[,theta=<t>|opt]" |
/// "noisy:F=<f>,circuit=<name>,m=<int>[,theta=<t>|auto][,discard=prover|none][,cutoff=<c>]"
/// `secret`, when given, feeds the partner oracle of simulated quantum provers;
/// otherwise they factor the public modulus.
std::unique_ptr<protocol::ProverInterface> make_prover(const std::string& spec, std::uint64_t seed,
                                                       std::optional<tcf::TcfKey> secret = std::nullopt);
/// Lift exponent a prover spec asks for (0 unless "noisy:...,m=<int>").
unsigned spec_lift(const std::string& spec);

}  // namespace qadv::provers
