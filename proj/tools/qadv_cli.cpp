#include "qadv/circuits/phase.hpp"
#include "qadv/circuits/squaring.hpp"
#include "qadv/errors.hpp"
#include "qadv/extractor/extractor.hpp"
#include "qadv/postselect/postselect.hpp"
#include "qadv/provers/provers.hpp"
#include "qadv/wire/keyfile.hpp"
#include "qadv/wire/session.hpp"

#include "CLI11.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace qadv;

namespace {

enum Exit { kOk = 0, kFailure = 1, kUsage = 2, kTransport = 3, kProtocol = 4 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text << std::flush;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write " + path);
    out << text;
}

tcf::TcfKey load_key(const std::string& path, bool need_secret) {
    try {
        return wire::read_key_file(path, need_secret);
    } catch (const Error& e) {
        throw UsageError(std::string("bad key file: ") + e.what());
    }
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw UsageError("not a number: '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw UsageError("empty list");
    return out;
}

struct SessionFlags {
    std::string key, report, transcript, prover = "ideal";
    std::uint64_t trials = 1000, seed = 1;
    unsigned bits = 32;
    int lift = -1;
    double ratio = 0.5;
    bool no_postselect = false;
    int timeout = 30;

    wire::VerifyOptions options() const {
        wire::VerifyOptions o;
        o.trials = trials;
        o.seed = seed;
        o.verifier.challenge_ratio = ratio;
        o.verifier.postselect = !no_postselect;
        o.keep_transcripts = !transcript.empty();
        return o;
    }
};

void add_session_flags(CLI::App* cmd, SessionFlags& f) {
    cmd->add_option("--trials", f.trials, "protocol iterations")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "verifier seed");
    cmd->add_option("--report", f.report, "score report path (default stdout)");
    cmd->add_option("--transcript", f.transcript, "JSON-lines transcript path");
    cmd->add_option("--lift", f.lift, "lift exponent m of the key (default: what the prover spec asks for)");
    cmd->add_option("--ratio", f.ratio, "probability of the preimage challenge")->check(CLI::Range(0.0, 1.0));
    cmd->add_flag("--no-postselect", f.no_postselect, "score iterations whose image is invalid instead of dropping them");
}

void emit_session(const SessionFlags& f, const wire::SessionResult& res, bool stdout_is_wire) {
    if (!f.transcript.empty()) {
        std::string lines;
        for (const auto& t : res.transcripts) lines += protocol::transcript_to_json(t).dump() + "\n";
        write_output(f.transcript, lines);
    }
    const std::string report = res.report.to_json().dump(2) + "\n";
    if (f.report.empty() && stdout_is_wire) std::cerr << report;
    else write_output(f.report, report);
}

tcf::TcfKey verifier_key(const SessionFlags& f, const std::string& prover_spec) {
    tcf::TcfKey key = load_key(f.key, true);
    const unsigned lift = f.lift >= 0 ? unsigned(f.lift) : provers::spec_lift(prover_spec);
    if (lift > 0) {
        if (key.family() != tcf::Family::Rabin) throw UsageError("only Rabin keys can be lifted");
        key = key.with_lift(lift);
    }
    return key;
}

int cmd_keygen(const std::string& family, unsigned bits, unsigned k, std::uint64_t seed, const std::string& out) {
    tcf::TcfKey key = family == "rabin" ? tcf::TcfKey::rabin(tcf::rabin_gen({bits, seed}), true)
                                        : tcf::TcfKey::ddh(tcf::ddh_gen(k, bits, seed));
    write_output(out, wire::key_file_json(key).dump(2) + "\n");
    return kOk;
}

int cmd_verify(const SessionFlags& f, const std::string& spawn, int listen) {
    const tcf::TcfKey key = verifier_key(f, "");
    const int timeout_ms = f.timeout * 1000;
    wire::SessionResult res;
    if (!spawn.empty()) {
        wire::SpawnedChannel ch(spawn, timeout_ms);
        res = wire::serve_verifier(ch, key, f.options());
        const int status = ch.wait();
        if (status != 0) throw TransportError("prover exited with status " + std::to_string(status));
        emit_session(f, res, false);
    } else if (listen >= 0) {
        auto ch = wire::tcp_accept(static_cast<std::uint16_t>(listen), timeout_ms,
                                   [](std::uint16_t port) { std::cerr << "listening on port " << port << std::endl; });
        res = wire::serve_verifier(*ch, key, f.options());
        emit_session(f, res, false);
    } else {
        auto ch = wire::stdio_channel(timeout_ms);
        res = wire::serve_verifier(*ch, key, f.options());
        emit_session(f, res, true);
    }
    return kOk;
}

int cmd_prove(const std::string& spec, std::uint64_t seed, const std::string& connect, int timeout) {
    // Only public material ever reaches this process: the key arrives in the
    // session's key message, which refuses trapdoor fields.
    auto prover = provers::make_prover(spec, seed);
    std::unique_ptr<wire::FdChannel> ch;
    if (connect.empty()) {
        ch = wire::stdio_channel(timeout * 1000);
    } else {
        const auto colon = connect.rfind(':');
        if (colon == std::string::npos) throw UsageError("--connect expects host:port");
        int port = 0;
        try {
            port = std::stoi(connect.substr(colon + 1));
        } catch (const std::exception&) {
            throw UsageError("bad port in --connect");
        }
        ch = wire::tcp_connect(connect.substr(0, colon), static_cast<std::uint16_t>(port), timeout * 1000);
    }
    wire::run_prover(*ch, *prover);
    return kOk;
}

int cmd_run(SessionFlags f, std::uint64_t prover_seed) {
    tcf::TcfKey key;
    if (f.key.empty()) {
        key = tcf::TcfKey::rabin(tcf::rabin_gen({f.bits, f.seed}), true);
        const unsigned lift = f.lift >= 0 ? unsigned(f.lift) : provers::spec_lift(f.prover);
        key = key.with_lift(lift);
    } else {
        key = verifier_key(f, f.prover);
    }
    // Simulated quantum provers get the trapdoor as their partner oracle.
    auto prover = provers::make_prover(f.prover, prover_seed, key);
    const auto res = wire::run_local(*prover, key, f.options());
    emit_session(f, res, false);
    return kOk;
}

int cmd_sweep(unsigned bits, const std::string& ms, const std::string& grid, std::uint64_t trials, std::uint64_t seed,
              const std::string& builder, const std::string& discard, bool json, const std::string& out) {
    postselect::SweepConfig cfg;
    cfg.m_values.clear();
    for (double m : parse_list(ms)) {
        if (m < 0 || m != static_cast<unsigned>(m)) throw UsageError("m values must be non-negative integers");
        cfg.m_values.push_back(static_cast<unsigned>(m));
    }
    cfg.fidelity_grid = grid.empty() ? postselect::default_fidelity_grid() : parse_list(grid);
    cfg.trials_per_point = trials;
    cfg.seed = seed;
    cfg.builder = builder;
    cfg.prover_discard = discard == "prover";
    try {
        cfg.validate();
    } catch (const PreconditionError& e) {
        throw UsageError(e.what());
    }
    const auto keys = tcf::rabin_gen({bits, seed});
    const auto rows = postselect::run_sweep(cfg, keys);
    write_output(out, json ? postselect::rows_to_json(rows).dump(2) + "\n" : postselect::rows_to_csv(rows));
    return kOk;
}

int cmd_resources(const std::string& builder, unsigned n, unsigned cutoff, unsigned lift, bool json) {
    circuits::ResourceReport r;
    if (builder == "phase1" || builder == "phase2") {
        r = circuits::phase_circuit_resources(builder == "phase1" ? 1 : 2, n);
    } else {
        r = circuits::circuit_resources({builder, circuits::resource_modulus(n), lift, cutoff});
    }
    if (json) {
        nlohmann::json j = {{"builder", builder},         {"n", n},
                            {"qubits", r.qubits},         {"total_gates", r.total_gates},
                            {"toffoli_count", r.toffoli_count}, {"depth", r.depth},
                            {"decomposed_gates", r.decomposed_gates}};
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "builder,n,qubits,total_gates,toffoli_count,depth,decomposed_gates\n"
                  << builder << ',' << n << ',' << r.qubits << ',' << r.total_gates << ',' << r.toffoli_count << ','
                  << r.depth << ',' << r.decomposed_gates << "\n";
    }
    return kOk;
}

int cmd_extract(const std::string& key_path, unsigned bits, const std::string& spec, std::uint64_t seed, double mu,
                const std::string& out) {
    const tcf::TcfKey key =
        key_path.empty() ? tcf::TcfKey::rabin(tcf::rabin_gen({bits, seed}), true) : load_key(key_path, false);
    // With a secret key the simulated prover uses it as its partner oracle;
    // the extraction itself sees the public part only.
    auto prover = provers::make_prover(spec, mix_seed(seed, 1),
                                       key.has_trapdoor() ? std::optional<tcf::TcfKey>(key) : std::nullopt);
    Rng rng(mix_seed(seed, 2));
    const auto params = extractor::GlParams::for_accuracy(key.domain_bits(), mu);
    try {
        const auto rep = extractor::extract_and_factor(*prover, key.public_part(), params, rng);
        write_output(out, rep.to_json().dump(2) + "\n");
        return kOk;
    } catch (const ExtractionFailed& e) {
        nlohmann::json j = {{"error", e.what()}, {"queries_used", e.queries_used}};
        write_output(out, j.dump(2) + "\n");
        return kFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::signal(SIGPIPE, SIG_IGN);
    CLI::App app{"Proof-of-quantumness verifier, provers and experiments"};
    app.require_subcommand(1);

    std::string family = "rabin", out;
    unsigned bits = 64, k = 2;
    std::uint64_t seed = 1;
    auto* keygen = app.add_subcommand("keygen", "generate a key file");
    keygen->add_option("--family", family)->check(CLI::IsMember({"rabin", "ddh"}));
    keygen->add_option("--bits", bits, "modulus bits (rabin) or group bits (ddh)")->check(CLI::Range(6u, 4096u));
    keygen->add_option("--k", k, "ddh dimension")->check(CLI::Range(1u, 16u));
    keygen->add_option("--seed", seed);
    keygen->add_option("--out", out, "output path (default stdout)");

    SessionFlags vf;
    std::string spawn;
    int listen = -1;
    auto* verify = app.add_subcommand("verify", "serve the verifier over stdio, a spawned prover, or TCP");
    verify->add_option("--key", vf.key, "key file with secret part")->required();
    add_session_flags(verify, vf);
    verify->add_option("--timeout", vf.timeout, "seconds per message")->check(CLI::PositiveNumber);
    auto* spawn_opt = verify->add_option("--spawn", spawn, "shell command that runs the prover");
    verify->add_option("--listen", listen, "TCP port (0 picks one)")->excludes(spawn_opt)->check(CLI::Range(0, 65535));

    std::string prover_spec = "ideal", connect;
    std::uint64_t prover_seed = 1;
    int prove_timeout = 30;
    auto* prove = app.add_subcommand("prove", "answer a verifier over stdio or TCP");
    prove->add_option("--prover", prover_spec, "prover spec");
    prove->add_option("--seed", prover_seed);
    prove->add_option("--connect", connect, "host:port");
    prove->add_option("--timeout", prove_timeout, "seconds per message")->check(CLI::PositiveNumber);

    SessionFlags rf;
    std::uint64_t run_prover_seed = 0;
    auto* run = app.add_subcommand("run", "verifier and prover in one process");
    run->add_option("--key", rf.key, "key file with secret part (default: fresh Rabin key from --seed)");
    run->add_option("--bits", rf.bits, "modulus bits for a fresh key")->check(CLI::Range(6u, 4096u));
    run->add_option("--prover", rf.prover, "prover spec");
    run->add_option("--prover-seed", run_prover_seed, "prover seed (default derived from --seed)");
    add_session_flags(run, rf);

    unsigned sweep_bits = 64;
    std::string ms = "0,1,2,3", grid, builder = "karatsuba", discard = "prover", sweep_out;
    std::uint64_t sweep_trials = 1000, sweep_seed = 1;
    bool json = false;
    auto* sweep = app.add_subcommand("sweep", "score against circuit fidelity for lifted keys");
    sweep->add_option("--bits", sweep_bits)->check(CLI::Range(8u, 256u));
    sweep->add_option("--m", ms, "comma-separated lift exponents");
    sweep->add_option("--F", grid, "comma-separated fidelities (default log-spaced 0.001..1)");
    sweep->add_option("--trials", sweep_trials, "scored iterations per point");
    sweep->add_option("--seed", sweep_seed);
    sweep->add_option("--builder", builder)->check(CLI::IsMember({"schoolbook", "karatsuba"}));
    sweep->add_option("--discard", discard, "who drops invalid images")->check(CLI::IsMember({"prover", "verifier"}));
    sweep->add_flag("--json", json);
    sweep->add_option("--out", sweep_out);

    std::string res_builder = "karatsuba";
    unsigned res_n = 128, res_cutoff = 16, res_lift = 0;
    bool res_json = false;
    auto* resources = app.add_subcommand("resources", "qubit and gate counts of a round-1 circuit");
    resources->add_option("--builder", res_builder)
        ->check(CLI::IsMember({"schoolbook", "karatsuba", "phase1", "phase2"}));
    resources->add_option("--n", res_n, "modulus bits")->check(CLI::Range(4u, 8192u));
    resources->add_option("--cutoff", res_cutoff)->check(CLI::Range(8u, 4096u));
    resources->add_option("--lift", res_lift)->check(CLI::Range(0u, 16u));
    resources->add_flag("--json", res_json);

    std::string ex_key, ex_spec = "ideal", ex_out;
    unsigned ex_bits = 28;
    std::uint64_t ex_seed = 1;
    double mu = 0.2;
    auto* extract = app.add_subcommand("extract", "run the claw extractor against a rewindable prover");
    extract->add_option("--key", ex_key, "key file (default: fresh Rabin key from --seed)");
    extract->add_option("--bits", ex_bits)->check(CLI::Range(8u, 64u));
    extract->add_option("--prover", ex_spec);
    extract->add_option("--seed", ex_seed);
    extract->add_option("--mu", mu, "assumed oracle advantage")->check(CLI::Range(0.01, 0.5));
    extract->add_option("--out", ex_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kOk : kUsage;
    }

    try {
        if (*keygen) return cmd_keygen(family, bits, k, seed, out);
        if (*verify) return cmd_verify(vf, spawn, listen);
        if (*prove) return cmd_prove(prover_spec, prover_seed, connect, prove_timeout);
        if (*run) return cmd_run(rf, run_prover_seed ? run_prover_seed : mix_seed(rf.seed, 0x9e0));
        if (*sweep) return cmd_sweep(sweep_bits, ms, grid, sweep_trials, sweep_seed, builder, discard, json, sweep_out);
        if (*resources) return cmd_resources(res_builder, res_n, res_cutoff, res_lift, res_json);
        if (*extract) return cmd_extract(ex_key, ex_bits, ex_spec, ex_seed, mu, ex_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kTransport;
    } catch (const ProtocolViolation& e) {
        std::cerr << "protocol violation: " << e.what() << "\n";
        return kProtocol;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}
