#include "qadv/postselect/postselect.hpp"

#include "qadv/errors.hpp"
#include "qadv/provers/provers.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>

namespace qadv::postselect {

LiftedKey lift_key(const tcf::RabinKeyPair& keys, unsigned m, const std::string& builder) {
    LiftedKey out;
    out.N = keys.N;
    out.m = m;
    for (unsigned i = 0; i < m; ++i) out.k *= 3;
    out.N_lifted = out.k * out.k * keys.N;
    out.circuit = {builder, keys.N, m, 16};
    const bool secret = keys.p != 0 && keys.q != 0;
    out.key = tcf::TcfKey::rabin(keys, secret, m);
    return out;
}

bool is_valid_y(const BigNat& y, const BigNat& k) {
    if (k < 1) throw PreconditionError("k must be positive");
    return y % (k * k) == 0;
}

double rejection_power(const BigNat& k) {
    if (k < 1) throw PreconditionError("k must be positive");
    return 1.0 - 1.0 / static_cast<double>(k * k);
}

void SweepConfig::validate() const {
    if (m_values.empty() || fidelity_grid.empty()) throw PreconditionError("sweep needs m values and a fidelity grid");
    if (trials_per_point < 100) throw PreconditionError("sweep needs at least 100 trials per point");
    for (double F : fidelity_grid)
        if (!(F > 0 && F <= 1)) throw PreconditionError("fidelities must lie in (0, 1]");
}

std::vector<double> default_fidelity_grid() {
    return {0.001, 0.002, 0.003, 0.005, 0.0075, 0.01, 0.015, 0.02, 0.03, 0.05, 0.075, 0.1,
            0.15,  0.2,   0.3,   0.4,   0.45,   0.5,  0.55,  0.6,  0.7,  0.8,  0.9,   1.0};
}

SweepRow run_point(const SweepConfig& cfg, const tcf::RabinKeyPair& base, unsigned m, double F) {
    const LiftedKey lk = lift_key(base, m, cfg.builder);
    if (!lk.key.has_trapdoor()) throw PreconditionError("sweeps need the base trapdoor");
    const std::uint64_t stream = mix_seed(mix_seed(cfg.seed, m), std::bit_cast<std::uint64_t>(F));

    provers::NoisyOptions opt;
    opt.fidelity = F;
    opt.builder = cfg.builder;
    opt.lift = m;
    opt.cutoff = cfg.cutoff;
    opt.theta = cfg.theta;
    opt.prover_discard = cfg.prover_discard;
    opt.pilot = cfg.pilot;
    provers::NoisyCircuitProver prover(mix_seed(stream, 1), opt, lk.key);
    protocol::Verifier verifier(lk.key, {0.5, cfg.verifier_postselect});
    prover.setup(verifier.key_message());

    Rng rng(mix_seed(stream, 2));
    protocol::ScoreTally tally;
    std::uint64_t scored = 0, iter = 0;
    const std::uint64_t cap = 50 * cfg.trials_per_point;
    while (scored < cfg.trials_per_point && iter < cap) {
        const auto t = protocol::run_iteration(verifier, prover, rng, iter++);
        tally.add(t.outcome);
        if (t.outcome != protocol::Outcome::DiscardedInvalidY) ++scored;
    }
    const auto rep = tally.report();

    SweepRow row;
    row.m = m;
    row.F = F;
    row.p_x = static_cast<double>(rep.p_x);
    row.p_m = static_cast<double>(rep.p_m);
    row.score = static_cast<double>(rep.score);
    row.ci = rep.ci_halfwidth;
    row.discard_rate = prover.discard_rate();
    row.theta = prover.theta();
    const double base_gates = static_cast<double>(prover.noise().gate_count);
    const double lifted_gates = static_cast<double>(prover.circuit_gates());
    row.runtime_overhead = (lifted_gates / base_gates) / (1.0 - row.discard_rate);
    return row;
}

std::vector<SweepRow> run_sweep(const SweepConfig& cfg, const tcf::RabinKeyPair& base) {
    cfg.validate();
    std::vector<SweepRow> rows;
    for (unsigned m : cfg.m_values)
        for (double F : cfg.fidelity_grid) rows.push_back(run_point(cfg, base, m, F));
    return rows;
}

double threshold_of(std::vector<SweepRow> rows) {
    if (rows.empty()) throw NoCrossing("no rows");
    for (const auto& r : rows)
        if (r.m != rows.front().m) throw PreconditionError("threshold_of takes rows of a single m");
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.F < b.F; });

    // Pool adjacent violators: the nondecreasing fit to score(F). Near the
    // crossing the curve is flat enough that raw sampling noise alone would
    // move "the last non-positive point" by several grid steps.
    struct Block { double sum; std::size_t n; };
    std::vector<Block> blocks;
    for (const auto& r : rows) {
        blocks.push_back({r.score, 1});
        while (blocks.size() > 1) {
            const Block& hi = blocks.back();
            const Block& lo = blocks[blocks.size() - 2];
            if (lo.sum / double(lo.n) <= hi.sum / double(hi.n)) break;
            const Block merged{lo.sum + hi.sum, lo.n + hi.n};
            blocks.pop_back();
            blocks.back() = merged;
        }
    }
    std::vector<double> fit;
    for (const auto& b : blocks) fit.insert(fit.end(), b.n, b.sum / double(b.n));

    std::size_t below = rows.size();
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (fit[i] <= 0) below = i;
    if (below == rows.size()) throw NoCrossing("score is positive across the whole grid");
    if (below + 1 == rows.size()) throw NoCrossing("score never turns positive");
    const double fa = fit[below], fb = fit[below + 1];
    const double Fa = rows[below].F, Fb = rows[below + 1].F;
    return Fa + (Fb - Fa) * (0.0 - fa) / (fb - fa);
}

double corrupted_discard_rate(const tcf::RabinKeyPair& base, unsigned m, std::size_t attempts, std::uint64_t seed,
                              const std::string& builder) {
    const LiftedKey lk = lift_key(base, m, builder);
    provers::NoisyOptions opt;
    opt.fidelity = 1e-9;
    opt.builder = builder;
    opt.lift = m;
    opt.theta = 0.0;
    opt.max_attempts = attempts;
    provers::NoisyCircuitProver prover(seed, opt, lk.key);
    prover.setup({lk.key.public_part()});
    try {
        for (;;) prover.round1();
    } catch (const BudgetExceeded&) {
    }
    return prover.discard_rate();
}

std::string rows_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "m,F,p_x,p_m,score,discard_rate,overhead\n";
    char buf[256];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%u,%.6g,%.6f,%.6f,%.6f,%.6f,%.6f\n", r.m, r.F, r.p_x, r.p_m, r.score,
                      r.discard_rate, r.runtime_overhead);
        out += buf;
    }
    return out;
}

nlohmann::json rows_to_json(const std::vector<SweepRow>& rows) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& r : rows)
        a.push_back({{"m", r.m},
                     {"F", r.F},
                     {"p_x", r.p_x},
                     {"p_m", r.p_m},
                     {"score", r.score},
                     {"ci", r.ci},
                     {"discard_rate", r.discard_rate},
                     {"overhead", r.runtime_overhead},
                     {"theta", r.theta}});
    return a;
}

}  // namespace qadv::postselect
