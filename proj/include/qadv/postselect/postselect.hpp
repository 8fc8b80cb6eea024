#pragma once

#include "qadv/circuits/squaring.hpp"
#include "qadv/tcf/key.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace qadv::postselect {

/// x^2 mod N recast as (kx)^2 mod k^2 N with k = 3^m.
struct LiftedKey {
    BigNat N;
    unsigned m = 0;
    BigNat k = 1;
    BigNat N_lifted;
    circuits::CircuitSpec circuit;
    tcf::TcfKey key;  // with trapdoor when the base pair had one
};
LiftedKey lift_key(const tcf::RabinKeyPair& keys, unsigned m, const std::string& builder = "karatsuba");

bool is_valid_y(const BigNat& y, const BigNat& k);
/// 1 - 1/k^2: the share of uniformly corrupted outputs the k^2 test rejects.
double rejection_power(const BigNat& k);

struct SweepConfig {
    std::vector<unsigned> m_values{0, 1, 2, 3};
    std::vector<double> fidelity_grid;
    std::size_t trials_per_point = 1000;
    std::uint64_t seed = 1;
    std::string builder = "karatsuba";
    unsigned cutoff = 16;
    bool prover_discard = true;
    bool verifier_postselect = true;
    std::optional<double> theta;  // calibrated per point when empty
    std::size_t pilot = 256;

    void validate() const;
};

struct SweepRow {
    unsigned m = 0;
    double F = 1;
    double p_x = 0, p_m = 0, score = 0, ci = 0;
    double discard_rate = 0;
    double runtime_overhead = 1;
    double theta = 0;
};

/// Log-spaced grid from 0.001 to 1 dense enough to resolve every threshold.
std::vector<double> default_fidelity_grid();

/// One (m, F) point: `trials` scored iterations of the noisy circuit prover
/// against a verifier holding the lifted key.
SweepRow run_point(const SweepConfig& config, const tcf::RabinKeyPair& base, unsigned m, double F);
std::vector<SweepRow> run_sweep(const SweepConfig& config, const tcf::RabinKeyPair& base);

/// F where the score crosses zero. Scores are first replaced by their
/// nondecreasing least-squares fit in F; the crossing is then interpolated
/// linearly between the largest F with fitted score <= 0 and the next grid
/// point. Rows must share one m.
double threshold_of(std::vector<SweepRow> rows);

/// Prover-side discard rate when every run is saturated with errors.
double corrupted_discard_rate(const tcf::RabinKeyPair& base, unsigned m, std::size_t attempts, std::uint64_t seed,
                              const std::string& builder = "karatsuba");

std::string rows_to_csv(const std::vector<SweepRow>& rows);
nlohmann::json rows_to_json(const std::vector<SweepRow>& rows);

}  // namespace qadv::postselect
