#include "qadv/provers/provers.hpp"

#include "qadv/circuits/squaring.hpp"
#include "qadv/errors.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

namespace qadv::provers {

using protocol::QubitState;

namespace {

constexpr double kPi4 = std::numbers::pi / 4;

std::size_t lowest_set(const BitString& s) {
    for (std::size_t i = 0; i < s.size(); ++i)
        if (s.get(i)) return i;
    return s.size();
}

std::uint64_t hash_bits(std::uint64_t seed, const BitString& s) {
    std::uint64_t h = mix_seed(seed, s.size());
    for (auto w : s.words()) h = mix_seed(h, w);
    return h;
}

}  // namespace

BitString ideal_round2(const TwoBranchState& st, const BitString& r, Rng& rng) {
    BitString d = BitString::random(st.x0.size(), rng);
    if (st.collapsed) return d;
    if (r.dot(st.x0) != r.dot(st.x1)) return d;
    const BitString diff = st.x0 ^ st.x1;
    const std::size_t i = lowest_set(diff);
    if (i == diff.size()) return d;
    const bool want = st.rel_phase < 0;
    if (d.dot(diff) != want) d.flip(i);
    return d;
}

QubitState prover_qubit(const TwoBranchState& st, const BitString& r, const BitString& d) {
    if (st.collapsed || st.x0 == st.x1) return r.dot(st.x0) ? QubitState::One : QubitState::Zero;
    QubitState s = protocol::compute_qubit_state(st.x0, st.x1, r, d);
    return st.rel_phase < 0 ? protocol::flip_sign(s) : s;
}

bool ideal_round3(const TwoBranchState& st, const BitString& r, const BitString& d, Basis m, double theta, Rng& rng) {
    const double angle = m == Basis::PlusPi4 ? theta : -theta;
    return rng.uniform() >= protocol::prob_zero(prover_qubit(st, r, d), angle);
}

PartnerOracle trapdoor_partner(tcf::TcfKey secret_key) {
    if (!secret_key.has_trapdoor()) throw PreconditionError("trapdoor partner oracle needs the secret key");
    return [key = std::move(secret_key)](const tcf::Image& y) { return key.invert(y); };
}

tcf::TcfKey recover_trapdoor(const tcf::TcfKey& pub) {
    if (pub.has_trapdoor()) return pub;
    if (pub.family() != tcf::Family::Rabin)
        throw PreconditionError("a simulated prover for DDH keys needs the trapdoor supplied in-process");
    const BigNat N = pub.rabin_keys().N;
    auto [p, q] = tcf::factor_semiprime(N);
    tcf::RabinKeyPair keys{N, std::min(p, q), std::max(p, q)};
    if (!tcf::rabin_keys_valid(keys)) throw PreconditionError("modulus is not a Blum semiprime");
    return tcf::TcfKey::rabin(keys, true, pub.lift());
}

double pm_of_theta(const AngleModel& a) {
    const double c = std::cos(a.theta / 2), s = std::sin(a.theta / 2);
    const double cd = std::cos(a.theta / 2 - kPi4), sd = std::sin(a.theta / 2 - kPi4);
    return 0.5 * (c * c * a.f_par + cd * cd * a.f_perp + s * s * (1 - a.f_par) + sd * sd * (1 - a.f_perp));
}

double optimal_theta(double f_par, double f_perp) {
    if (std::abs(2 * f_par - 1) < 1e-12) throw DegenerateModel("optimal angle undefined at f_par = 1/2");
    if (f_par < 0.5) throw DegenerateModel("optimal angle is only defined for f_par > 1/2");
    return std::atan((2 * f_perp - 1) / (2 * f_par - 1));
}

BranchProver::BranchProver(std::uint64_t seed, double theta) : rng_(seed), theta_(theta) {}

void BranchProver::settle(TwoBranchState st) {
    state_ = std::move(st);
    post_seed_ = rng_.next_u64();
    has_round1_ = true;
    reset();
}

BitString BranchProver::answer_preimage() {
    if (!has_round1_) throw ProtocolViolation("preimage requested before round 1");
    Rng pick(mix_seed(post_seed_, 0x9e37));
    if (state_.collapsed || !pick.coin()) return state_.x0;
    return state_.x1;
}

BitString BranchProver::round2(const BitString& r) {
    if (!has_round1_) throw ProtocolViolation("round 2 before round 1");
    if (r.size() != state_.x0.size()) throw ProtocolViolation("r has the wrong length");
    r_ = r;
    round_rng_.emplace(hash_bits(post_seed_, r));
    d_ = ideal_round2(state_, r, *round_rng_);
    return d_;
}

bool BranchProver::round3(Basis m) {
    if (!round_rng_) throw ProtocolViolation("round 3 before round 2");
    return ideal_round3(state_, r_, d_, m, theta_, *round_rng_);
}

void BranchProver::reset() { round_rng_.reset(); }

IdealProver::IdealProver(std::uint64_t seed, std::optional<tcf::TcfKey> secret, double theta, double phase_flip)
    : BranchProver(seed, theta), secret_(std::move(secret)), phase_flip_(phase_flip) {
    if (phase_flip < 0 || phase_flip > 1) throw PreconditionError("phase flip probability must lie in [0, 1]");
}

void IdealProver::setup(const KeyMsg& msg) {
    key_ = msg.key.public_part();
    tcf::TcfKey full = secret_ ? secret_->with_lift(msg.key.lift()) : recover_trapdoor(msg.key);
    if (full.public_part().to_json(false) != key_->to_json(false))
        throw PreconditionError("supplied trapdoor does not match the announced key");
    partner_ = trapdoor_partner(std::move(full));
}

ImageMsg IdealProver::round1() {
    if (!key_) throw ProtocolViolation("round 1 before the key");
    for (;;) {
        BitString x = key_->sample_domain(rng_);
        tcf::Image y = key_->eval(x);
        auto pre = partner_(y);
        if (pre.size() < 2) continue;
        TwoBranchState st;
        st.x0 = x;
        st.x1 = pre[0] == x ? pre[1] : pre[0];
        st.y = y;
        if (phase_flip_ > 0 && rng_.bernoulli(phase_flip_)) st.rel_phase = -1;
        settle(std::move(st));
        return {y, std::nullopt, std::nullopt};
    }
}

CheaterProver::CheaterProver(std::uint64_t seed) : rng_(seed) {}

void CheaterProver::setup(const KeyMsg& msg) { key_ = msg.key.public_part(); }

ImageMsg CheaterProver::round1() {
    if (!key_) throw ProtocolViolation("round 1 before the key");
    x0_ = key_->sample_domain(rng_);
    y_ = key_->eval(x0_);
    return {y_, std::nullopt, std::nullopt};
}

BitString CheaterProver::answer_preimage() { return x0_; }

BitString CheaterProver::round2(const BitString& r) {
    r_ = r;
    return BitString::random(x0_.size(), rng_);
}

bool CheaterProver::round3(Basis m) {
    return protocol::expected_bit(r_.dot(x0_) ? QubitState::One : QubitState::Zero, m);
}

double NoiseModel::per_gate_fidelity() const {
    if (!(circuit_fidelity > 0 && circuit_fidelity <= 1)) throw PreconditionError("circuit fidelity must lie in (0, 1]");
    if (gate_count == 0) return 1.0;
    return std::pow(circuit_fidelity, 1.0 / static_cast<double>(gate_count));
}

NoisyCircuitProver::NoisyCircuitProver(std::uint64_t seed, NoisyOptions options, std::optional<tcf::TcfKey> secret)
    : BranchProver(seed, options.theta.value_or(kPi4)), opt_(std::move(options)), secret_(std::move(secret)) {
    if (!(opt_.fidelity > 0 && opt_.fidelity <= 1)) throw PreconditionError("F must lie in (0, 1]");
}

void NoisyCircuitProver::setup(const KeyMsg& msg) {
    if (msg.key.family() != tcf::Family::Rabin) throw PreconditionError("circuit provers need a Rabin key");
    if (msg.key.lift() != opt_.lift)
        throw PreconditionError("key lift " + std::to_string(msg.key.lift()) + " differs from the prover's m=" +
                                std::to_string(opt_.lift));
    key_ = msg.key.public_part();
    tcf::TcfKey full = secret_ ? secret_->with_lift(opt_.lift) : recover_trapdoor(msg.key);
    if (full.public_part().to_json(false) != key_->to_json(false))
        throw PreconditionError("supplied trapdoor does not match the announced key");
    partner_ = trapdoor_partner(full);
    const BigNat N = key_->rabin_keys().N;
    sim_ = std::make_unique<circuits::BranchSimulator>(
        circuits::build_circuit({opt_.builder, N, opt_.lift, opt_.cutoff}));
    noise_.circuit_fidelity = opt_.fidelity;
    noise_.gate_count = circuits::circuit_resources({opt_.builder, N, 0, opt_.cutoff}).total_gates;
    buffer_.clear();
    attempts_ = rejected_ = divergent_ = 0;
    calibration_.reset();
    if (opt_.theta) {
        theta_ = *opt_.theta;
    } else {
        AngleModel a = calibrate(opt_.pilot);
        calibration_ = a;
        theta_ = a.f_par > 0.5 + 1e-9 ? optimal_theta(a.f_par, a.f_perp) : kPi4;
    }
}

NoisyCircuitProver::Trajectory NoisyCircuitProver::next_trajectory() {
    if (buffer_.empty()) {
        std::vector<BitString> in0, in1;
        const BigNat& k = key_->k();
        while (in0.size() < 64) {
            BitString x = key_->sample_domain(rng_);
            auto pre = partner_(key_->eval(x));
            if (pre.size() < 2) continue;
            const BitString& other = pre[0] == x ? pre[1] : pre[0];
            in0.emplace_back(x.to_bignat() / k, sim_->input_width());
            in1.emplace_back(other.to_bignat() / k, sim_->input_width());
        }
        const double gate_error = 1.0 - noise_.per_gate_fidelity();
        auto batch = std::make_shared<const circuits::BranchBatch>(sim_->run(in0, in1, gate_error, rng_));
        const circuits::BranchBatch& b = *batch;
        for (std::size_t l = 0; l < b.lanes; ++l) {
            Trajectory t;
            TwoBranchState& st = t.st;
            st.x0 = b.x0[l];
            st.x1 = b.x1[l];
            st.rel_phase = (b.phase >> l) & 1u ? -1 : 1;
            const BigNat y0 = b.y0[l].to_bignat(), y1 = b.y1[l].to_bignat();
            if (y0 != y1) {
                ++divergent_;
                const bool pick = rng_.coin();
                if (pick) st.x0 = st.x1;
                st.y = {pick ? y1 : y0};
                st.collapsed = true;
            } else {
                st.y = {y0};
                st.collapsed = st.x0 == st.x1;
            }
            t.batch = batch;
            t.lane = l;
            buffer_.push_back(std::move(t));
        }
    }
    Trajectory t = std::move(buffer_.front());
    buffer_.pop_front();
    return t;
}

ImageMsg NoisyCircuitProver::round1() {
    if (!sim_) throw ProtocolViolation("round 1 before the key");
    const BigNat k2 = key_->k() * key_->k();
    for (;;) {
        if (attempts_ >= opt_.max_attempts) throw BudgetExceeded("prover exceeded its attempt budget");
        Trajectory t = next_trajectory();
        ++attempts_;
        if (opt_.prover_discard && t.st.y[0] % k2 != 0) {
            ++rejected_;
            continue;
        }
        h_ = t.h();
        ImageMsg msg{t.st.y, protocol::CircuitRef{opt_.builder, opt_.cutoff}, h_};
        settle(std::move(t.st));
        return msg;
    }
}

AngleModel NoisyCircuitProver::calibrate(std::size_t samples) {
    // Pilot runs compare the prover's actual qubit with the verifier's
    // expectation. Probabilities are averaged exactly rather than sampled.
    const tcf::TcfKey full = secret_ ? secret_->with_lift(opt_.lift) : recover_trapdoor(*key_);
    const protocol::Verifier v(full);
    const BigNat k2 = key_->k() * key_->k();
    const protocol::CircuitRef ref{opt_.builder, opt_.cutoff};
    Rng saved = rng_;
    rng_ = Rng(mix_seed(rng_.next_u64(), 0xca11b));
    double par = 0, perp = 0;
    std::size_t n_par = 0, n_perp = 0, accepted = 0;
    const std::uint64_t budget = 400 * samples;
    for (std::uint64_t tries = 0; accepted < samples && tries < budget; ++tries) {
        Trajectory t = next_trajectory();
        if (t.st.y[0] % k2 != 0) continue;
        const ImageMsg msg{t.st.y, ref, t.h()};
        const auto check = protocol::verifier_check_image(full, v.normalize_image(msg));
        if (check.kind != protocol::ImageCheck::Claw) continue;
        ++accepted;
        std::optional<int> sign;
        for (int rep = 0; rep < 4; ++rep) {
            const BitString r = BitString::random(key_->domain_bits(), rng_);
            const BitString d = ideal_round2(t.st, r, rng_);
            QubitState want = protocol::compute_qubit_state(check.preimages[0], check.preimages[1], r, d);
            if (want == QubitState::Plus || want == QubitState::Minus) {
                if (!sign) sign = v.garbage_sign(msg, check.preimages[0], check.preimages[1]);
                if (*sign < 0) want = protocol::flip_sign(want);
            }
            const QubitState have = prover_qubit(t.st, r, d);
            if (want == QubitState::Zero || want == QubitState::One) {
                const double p0 = protocol::prob_zero(have, 0.0);
                par += want == QubitState::Zero ? p0 : 1 - p0;
                ++n_par;
            } else {
                const double p0 = protocol::prob_zero(have, std::numbers::pi / 2);
                perp += want == QubitState::Plus ? p0 : 1 - p0;
                ++n_perp;
            }
        }
    }
    buffer_.clear();
    divergent_ = 0;
    rng_ = saved;
    AngleModel a;
    a.f_par = n_par ? par / double(n_par) : 0.5;
    a.f_perp = n_perp ? perp / double(n_perp) : 0.5;
    return a;
}

namespace {

std::map<std::string, std::string> parse_options(const std::string& body, const std::string& spec) {
    std::map<std::string, std::string> out;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw PreconditionError("bad prover option '" + item + "' in " + spec);
        out[item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

double to_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw PreconditionError("bad number for " + what + ": '" + s + "'");
    return v;
}

unsigned to_unsigned(const std::string& s, const std::string& what) {
    const double v = to_double(s, what);
    if (v < 0 || v != std::floor(v) || v > 1e6) throw PreconditionError("bad integer for " + what + ": '" + s + "'");
    return static_cast<unsigned>(v);
}

void reject_unknown(const std::map<std::string, std::string>& opts, std::initializer_list<const char*> allowed) {
    for (const auto& [k, _] : opts) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || k == a;
        if (!ok) throw PreconditionError("unknown prover option '" + k + "'");
    }
}

}  // namespace

unsigned spec_lift(const std::string& spec) {
    if (spec.rfind("noisy:", 0) != 0) return 0;
    auto opts = parse_options(spec.substr(6), spec);
    return opts.count("m") ? to_unsigned(opts["m"], "m") : 0;
}

std::unique_ptr<protocol::ProverInterface> make_prover(const std::string& spec, std::uint64_t seed,
                                                       std::optional<tcf::TcfKey> secret) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    const auto opts = colon == std::string::npos ? std::map<std::string, std::string>{}
                                                 : parse_options(spec.substr(colon + 1), spec);
    if (kind == "ideal") {
        reject_unknown(opts, {"theta"});
        const double theta = opts.count("theta") ? to_double(opts.at("theta"), "theta") : kPi4;
        return std::make_unique<IdealProver>(seed, std::move(secret), theta);
    }
    if (kind == "cheater") {
        reject_unknown(opts, {});
        return std::make_unique<CheaterProver>(seed);
    }
    if (kind == "phase") {
        reject_unknown(opts, {"delta", "theta"});
        if (!opts.count("delta")) throw PreconditionError("phase prover needs delta=<d>");
        const double delta = to_double(opts.at("delta"), "delta");
        if (delta < 0 || delta > 0.5) throw PreconditionError("delta must lie in [0, 1/2]");
        double theta = kPi4;
        if (opts.count("theta")) {
            theta = opts.at("theta") == "opt" ? optimal_theta(1.0, 0.5 + delta) : to_double(opts.at("theta"), "theta");
        }
        return std::make_unique<IdealProver>(seed, std::move(secret), theta, 0.5 - delta);
    }
    if (kind == "noisy") {
        reject_unknown(opts, {"F", "circuit", "m", "theta", "discard", "cutoff", "pilot"});
        NoisyOptions o;
        if (!opts.count("F")) throw PreconditionError("noisy prover needs F=<fidelity>");
        o.fidelity = to_double(opts.at("F"), "F");
        if (!(o.fidelity > 0 && o.fidelity <= 1)) throw PreconditionError("F must lie in (0, 1]");
        if (opts.count("circuit")) o.builder = opts.at("circuit");
        if (o.builder != "schoolbook" && o.builder != "karatsuba")
            throw PreconditionError("circuit must be schoolbook or karatsuba");
        if (opts.count("m")) o.lift = to_unsigned(opts.at("m"), "m");
        if (opts.count("cutoff")) o.cutoff = to_unsigned(opts.at("cutoff"), "cutoff");
        if (opts.count("pilot")) o.pilot = to_unsigned(opts.at("pilot"), "pilot");
        if (opts.count("theta") && opts.at("theta") != "auto") o.theta = to_double(opts.at("theta"), "theta");
        if (opts.count("discard")) {
            if (opts.at("discard") == "prover") o.prover_discard = true;
            else if (opts.at("discard") == "none") o.prover_discard = false;
            else throw PreconditionError("discard must be prover or none");
        }
        return std::make_unique<NoisyCircuitProver>(seed, o, std::move(secret));
    }
    throw PreconditionError("unknown prover '" + spec + "'");
}

}  // namespace qadv::provers
