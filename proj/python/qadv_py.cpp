#include "qadv/circuits/phase.hpp"
#include "qadv/circuits/squaring.hpp"
#include "qadv/errors.hpp"
#include "qadv/extractor/extractor.hpp"
#include "qadv/postselect/postselect.hpp"
#include "qadv/provers/provers.hpp"
#include "qadv/wire/frame.hpp"
#include "qadv/wire/keyfile.hpp"
#include "qadv/wire/session.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace qadv;

namespace {

// Big integers cross the boundary as Python ints via their decimal text.
py::int_ to_py(const BigNat& v) { return py::int_(py::str(to_decimal(v))); }
BigNat from_py(const py::int_& v) {
    const auto s = py::str(static_cast<const py::handle&>(v)).cast<std::string>();
    if (!s.empty() && s[0] == '-') throw py::value_error("expected a non-negative integer");
    return from_decimal(s);
}

// JSON values go through Python's json module rather than a hand-rolled caster.
py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }
nlohmann::json from_py_json(const py::object& o) {
    return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

tcf::TcfKey key_from(const py::object& o) { return wire::key_from_file_json(from_py_json(o), false); }

py::dict resource_dict(const circuits::ResourceReport& r) {
    py::dict d;
    d["qubits"] = r.qubits;
    d["total_gates"] = r.total_gates;
    d["toffoli_count"] = r.toffoli_count;
    d["depth"] = r.depth;
    d["decomposed_gates"] = r.decomposed_gates;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qadv, m) {
    m.doc() = "Bindings for the qadv proof-of-quantumness toolkit";

    py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NoCrossing>(m, "NoCrossing", PyExc_ValueError);
    py::register_exception<ProtocolViolation>(m, "ProtocolViolation", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<ExtractionFailed>(m, "ExtractionFailed", PyExc_RuntimeError);
    py::register_exception<InsufficientData>(m, "InsufficientData", PyExc_RuntimeError);

    m.def(
        "keygen",
        [](const std::string& family, unsigned bits, std::uint64_t seed, unsigned k) {
            const tcf::TcfKey key = family == "rabin" ? tcf::TcfKey::rabin(tcf::rabin_gen({bits, seed}), true)
                                                      : tcf::TcfKey::ddh(tcf::ddh_gen(k, bits, seed));
            return to_py(wire::key_file_json(key));
        },
        py::arg("family") = "rabin", py::arg("bits") = 32, py::arg("seed") = 1, py::arg("k") = 2,
        "Key file contents as a dict with 'public' and 'secret' entries.");

    m.def(
        "rabin_eval", [](const py::int_& N, const py::int_& x) { return to_py(tcf::rabin_eval(from_py(N), from_py(x))); },
        py::arg("N"), py::arg("x"));
    m.def(
        "rabin_invert",
        [](const py::int_& p, const py::int_& q, const py::int_& y) {
            const BigNat P = from_py(p), Q = from_py(q);
            std::vector<py::int_> out;
            for (const auto& x : tcf::rabin_invert({P * Q, P, Q}, from_py(y))) out.push_back(to_py(x));
            return out;
        },
        py::arg("p"), py::arg("q"), py::arg("y"));
    m.def(
        "factor_from_claw",
        [](const py::int_& N, const py::int_& x0, const py::int_& x1) {
            const auto [p, q] = tcf::factor_from_claw(from_py(N), {from_py(x0), from_py(x1), {}});
            return py::make_tuple(to_py(p), to_py(q));
        },
        py::arg("N"), py::arg("x0"), py::arg("x1"));

    m.def(
        "run_protocol",
        [](const py::object& key_file, const std::string& prover, std::uint64_t trials, std::uint64_t seed,
           int lift, bool postselect) {
            tcf::TcfKey key = key_from(key_file);
            if (!key.has_trapdoor()) throw PreconditionError("the verifier needs the secret key");
            const unsigned l = lift >= 0 ? unsigned(lift) : provers::spec_lift(prover);
            if (l > 0) key = key.with_lift(l);
            auto p = provers::make_prover(prover, mix_seed(seed, 0x9e0), key);
            wire::VerifyOptions o;
            o.trials = trials;
            o.seed = seed;
            o.verifier.postselect = postselect;
            wire::SessionResult res;
            {
                py::gil_scoped_release release;
                res = wire::run_local(*p, key, o);
            }
            return to_py(res.report.to_json());
        },
        py::arg("key"), py::arg("prover") = "ideal", py::arg("trials") = 1000, py::arg("seed") = 1,
        py::arg("lift") = -1, py::arg("postselect") = true, "Verifier and prover in process; returns the score report.");

    m.def(
        "extract",
        [](const py::object& key_file, const std::string& prover, std::uint64_t seed, double mu) {
            const tcf::TcfKey key = key_from(key_file);
            auto p = provers::make_prover(prover, mix_seed(seed, 1),
                                          key.has_trapdoor() ? std::optional<tcf::TcfKey>(key) : std::nullopt);
            Rng rng(mix_seed(seed, 2));
            const auto params = extractor::GlParams::for_accuracy(key.domain_bits(), mu);
            return to_py(extractor::extract_and_factor(*p, key.public_part(), params, rng).to_json());
        },
        py::arg("key"), py::arg("prover") = "ideal", py::arg("seed") = 1, py::arg("mu") = 0.2);

    m.def(
        "lemma1_bound", &extractor::lemma1_bound, py::arg("epsilon"), py::arg("mu"));

    m.def(
        "resources",
        [](const std::string& builder, unsigned n, unsigned cutoff, unsigned lift) {
            if (builder == "phase1" || builder == "phase2")
                return resource_dict(circuits::phase_circuit_resources(builder == "phase1" ? 1 : 2, n));
            return resource_dict(circuits::circuit_resources({builder, circuits::resource_modulus(n), lift, cutoff}));
        },
        py::arg("builder") = "karatsuba", py::arg("n") = 128, py::arg("cutoff") = 16, py::arg("lift") = 0);

    m.def(
        "pm_of_theta",
        [](double f_par, double f_perp, double theta) { return provers::pm_of_theta({f_par, f_perp, theta}); },
        py::arg("f_par"), py::arg("f_perp"), py::arg("theta"));
    m.def("optimal_theta", &provers::optimal_theta, py::arg("f_par"), py::arg("f_perp"));

    m.def(
        "lift_key",
        [](const py::int_& N, unsigned mm) {
            const auto lk = postselect::lift_key({from_py(N), 0, 0}, mm);
            py::dict d;
            d["N"] = to_py(lk.N);
            d["m"] = lk.m;
            d["k"] = to_py(lk.k);
            d["N_lifted"] = to_py(lk.N_lifted);
            return d;
        },
        py::arg("N"), py::arg("m"));
    m.def(
        "is_valid_y", [](const py::int_& y, const py::int_& k) { return postselect::is_valid_y(from_py(y), from_py(k)); },
        py::arg("y"), py::arg("k"));
    m.def(
        "rejection_power", [](const py::int_& k) { return postselect::rejection_power(from_py(k)); }, py::arg("k"));

    m.def(
        "sweep",
        [](unsigned bits, std::vector<unsigned> m_values, std::vector<double> grid, std::size_t trials,
           std::uint64_t seed) {
            postselect::SweepConfig cfg;
            cfg.m_values = std::move(m_values);
            cfg.fidelity_grid = std::move(grid);
            cfg.trials_per_point = trials;
            cfg.seed = seed;
            cfg.validate();
            const auto keys = tcf::rabin_gen({bits, seed});
            std::vector<postselect::SweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = postselect::run_sweep(cfg, keys);
            }
            return to_py(postselect::rows_to_json(rows));
        },
        py::arg("bits"), py::arg("m_values"), py::arg("fidelity_grid"), py::arg("trials") = 1000, py::arg("seed") = 1,
        "Rows as dicts with m, F, p_x, p_m, score, ci, discard_rate, overhead, theta.");
    m.def(
        "threshold_of",
        [](const py::list& rows) {
            std::vector<postselect::SweepRow> rs;
            for (const auto& r : rows) {
                postselect::SweepRow row;
                row.m = r["m"].cast<unsigned>();
                row.F = r["F"].cast<double>();
                row.score = r["score"].cast<double>();
                rs.push_back(row);
            }
            return postselect::threshold_of(rs);
        },
        py::arg("rows"));

    m.def(
        "encode_frame",
        [](const std::string& session, std::uint64_t seq, const std::string& tag, const py::object& payload) {
            wire::WireFrame f;
            f.session = session;
            f.seq = seq;
            f.tag = tag;
            f.payload = from_py_json(payload);
            return wire::encode_frame(f);
        },
        py::arg("session"), py::arg("seq"), py::arg("tag"), py::arg("payload"));
    m.def(
        "decode_frame",
        [](const std::string& line) {
            const auto f = wire::decode_frame(line);
            py::dict d;
            d["v"] = f.version;
            d["session"] = f.session;
            d["seq"] = f.seq;
            d["tag"] = f.tag;
            d["payload"] = to_py(f.payload);
            return d;
        },
        py::arg("line"));
}
