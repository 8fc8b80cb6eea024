#include "qadv/circuits/circuit.hpp"

#include "qadv/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <sstream>

namespace qadv::circuits {

const char* gate_name(GateKind kind) {
    switch (kind) {
        case GateKind::X: return "X";
        case GateKind::CNOT: return "CNOT";
        case GateKind::Toffoli: return "TOFFOLI";
        case GateKind::MCX: return "MCX";
        case GateKind::H: return "H";
        case GateKind::CPhase: return "CPHASE";
        case GateKind::Alloc: return "ALLOC";
        case GateKind::Discard: return "DISCARD";
        case GateKind::Measure: return "MEASURE";
    }
    return "?";
}

void ResourceCounter::emit(Gate gate) {
    if (!gate.is_unitary()) return;
    ++r_.total_gates;
    switch (gate.kind) {
        case GateKind::Toffoli:
            ++r_.toffoli_count;
            r_.decomposed_gates += 15;
            break;
        case GateKind::MCX: {
            // c controls: one Toffoli for c = 2, a V-chain of 2c - 3 beyond that.
            const auto c = gate.qubits.size() - 1;
            if (c < 2) r_.decomposed_gates += 1;
            else r_.decomposed_gates += 15 * (2 * c - 3);
            break;
        }
        default: ++r_.decomposed_gates;
    }
    std::uint64_t layer = 0;
    for (Qubit q : gate.qubits) {
        if (q >= ready_.size()) ready_.resize(q + 1, 0);
        layer = std::max(layer, ready_[q]);
    }
    for (Qubit q : gate.qubits) ready_[q] = layer + 1;
    r_.depth = std::max(r_.depth, layer + 1);
}

ResourceReport ResourceCounter::report(std::uint64_t qubits) const {
    ResourceReport out = r_;
    out.qubits = qubits;
    return out;
}

const Register& Circuit::reg(const std::string& name) const {
    for (const auto& r : registers)
        if (r.name == name) return r;
    throw MalformedCircuit("circuit has no register '" + name + "'");
}

Register& Circuit::reg(const std::string& name) {
    for (auto& r : registers)
        if (r.name == name) return r;
    throw MalformedCircuit("circuit has no register '" + name + "'");
}

const Register& Circuit::input_register() const {
    for (const auto& r : registers)
        if (r.name == "x_in") return r;
    return reg("x");
}

std::size_t Circuit::discard_count() const {
    std::size_t c = 0;
    for (const auto& g : gates)
        if (g.kind == GateKind::Discard) c += g.qubits.size();
    return c;
}

ResourceReport count_resources(const Circuit& circuit) {
    ResourceCounter counter;
    for (const auto& g : circuit.gates) counter.emit(g);
    return counter.report(circuit.gates.empty() ? 0 : circuit.n_qubits);
}

EvalResult evaluate_classical(const Circuit& circuit, const BitString& x) {
    const auto& xr = circuit.input_register().qubits;
    const auto& xf = circuit.reg("x").qubits;
    const auto& yr = circuit.reg("y").qubits;
    if (x.size() > xr.size()) throw MalformedCircuit("input longer than the x register");
    std::vector<std::uint8_t> bits(circuit.n_qubits, 0);
    auto check = [&](Qubit q) {
        if (q >= circuit.n_qubits) throw MalformedCircuit("qubit index " + std::to_string(q) + " out of range");
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
        check(xr[i]);
        bits[xr[i]] = x.get(i);
    }
    std::vector<bool> garbage;
    for (const auto& g : circuit.gates) {
        for (Qubit q : g.qubits) check(q);
        switch (g.kind) {
            case GateKind::X: bits[g.target()] ^= 1; break;
            case GateKind::CNOT: bits[g.qubits[1]] ^= bits[g.qubits[0]]; break;
            case GateKind::Toffoli: bits[g.qubits[2]] ^= bits[g.qubits[0]] & bits[g.qubits[1]]; break;
            case GateKind::MCX: {
                std::uint8_t all = 1;
                for (std::size_t i = 0; i + 1 < g.qubits.size(); ++i) all &= bits[g.qubits[i]];
                bits[g.target()] ^= all;
                break;
            }
            case GateKind::CPhase:
            case GateKind::Measure: break;
            case GateKind::H: throw MalformedCircuit("H gate has no classical semantics");
            case GateKind::Alloc:
                for (Qubit q : g.qubits) bits[q] = 0;
                break;
            case GateKind::Discard:
                for (Qubit q : g.qubits) garbage.push_back(bits[q]);
                break;
        }
    }
    EvalResult out;
    out.output = 0;
    for (std::size_t i = yr.size(); i-- > 0;) out.output = (out.output << 1) | bits[yr[i]];
    out.x_after = BitString(xf.size());
    for (std::size_t i = 0; i < xf.size(); ++i) out.x_after.set(i, bits[xf[i]]);
    out.garbage = BitString(garbage.size());
    for (std::size_t i = 0; i < garbage.size(); ++i) out.garbage.set(i, garbage[i]);
    return out;
}

EvalResult evaluate_classical(const Circuit& circuit, const BigNat& x) {
    return evaluate_classical(circuit, BitString(x, circuit.input_register().qubits.size()));
}

int discard_phase(const GarbageRecord& record) {
    if (record.h.size() != record.g0.size() || record.g0.size() != record.g1.size())
        throw PreconditionError("garbage record lengths differ");
    return record.h.dot(record.g0 ^ record.g1) ? -1 : 1;
}

namespace {

std::string join(const std::vector<Qubit>& qs, std::size_t from, std::size_t to, char sep) {
    std::string s;
    for (std::size_t i = from; i < to; ++i) {
        if (i > from) s += sep;
        s += std::to_string(qs[i]);
    }
    return s;
}

std::vector<Qubit> parse_list(const std::string& s, char sep, std::size_t line) {
    std::vector<Qubit> out;
    if (s.empty()) return out;
    std::size_t pos = 0;
    while (pos <= s.size()) {
        std::size_t end = s.find(sep, pos);
        if (end == std::string::npos) end = s.size();
        Qubit q = 0;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + end, q);
        if (ec != std::errc() || p != s.data() + end)
            throw ParseError("bad qubit index on line " + std::to_string(line), pos);
        out.push_back(q);
        pos = end + 1;
    }
    return out;
}

}  // namespace

std::string to_text(const Circuit& c) {
    std::ostringstream os;
    os << "# n=" << c.n << " N=" << to_decimal(c.N) << " builder=" << c.builder
       << " Rprime=" << to_decimal(c.r_prime) << " lift=" << c.lift << " qubits=" << c.n_qubits << '\n';
    for (const auto& r : c.registers) os << "# register " << r.name << ' ' << join(r.qubits, 0, r.qubits.size(), ',') << '\n';
    char buf[64];
    for (const auto& g : c.gates) {
        if (g.kind == GateKind::CPhase) {
            std::snprintf(buf, sizeof buf, "%.17g", g.angle);
            os << "CPHASE " << buf << " ctrl=" << join(g.qubits, 0, g.qubits.size() - 1, ',')
               << " tgt=" << g.target() << '\n';
            continue;
        }
        os << gate_name(g.kind);
        for (Qubit q : g.qubits) os << ' ' << q;
        os << '\n';
    }
    return os.str();
}

Circuit from_text(const std::string& text) {
    Circuit c;
    std::istringstream is(text);
    std::string line;
    std::size_t offset = 0, lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t here = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        std::istringstream ls(line);
        if (line[0] == '#') {
            std::string hash, word;
            ls >> hash >> word;
            if (word == "register") {
                Register r;
                std::string list;
                ls >> r.name >> list;
                r.qubits = parse_list(list, ',', lineno);
                c.registers.push_back(std::move(r));
                continue;
            }
            for (std::string kv = word; !kv.empty(); kv.clear(), ls >> kv) {
                const auto eq = kv.find('=');
                if (eq == std::string::npos) continue;
                const std::string key = kv.substr(0, eq), val = kv.substr(eq + 1);
                try {
                    if (key == "n") c.n = static_cast<unsigned>(std::stoul(val));
                    else if (key == "N") c.N = from_decimal(val);
                    else if (key == "builder") c.builder = val;
                    else if (key == "Rprime") c.r_prime = from_decimal(val);
                    else if (key == "lift") c.lift = static_cast<unsigned>(std::stoul(val));
                    else if (key == "qubits") c.n_qubits = static_cast<std::uint32_t>(std::stoul(val));
                } catch (const std::exception&) {
                    throw ParseError("bad header value for '" + key + "'", here);
                }
            }
            continue;
        }
        std::string op;
        ls >> op;
        Gate g{GateKind::X, {}, 0.0};
        if (op == "CPHASE") {
            std::string angle, ctrl, tgt;
            ls >> angle >> ctrl >> tgt;
            if (ctrl.rfind("ctrl=", 0) != 0 || tgt.rfind("tgt=", 0) != 0)
                throw ParseError("malformed CPHASE line " + std::to_string(lineno), here);
            try {
                g.angle = std::stod(angle);
            } catch (const std::exception&) {
                throw ParseError("bad angle on line " + std::to_string(lineno), here);
            }
            g.kind = GateKind::CPhase;
            g.qubits = parse_list(ctrl.substr(5), ',', lineno);
            auto t = parse_list(tgt.substr(4), ',', lineno);
            if (t.size() != 1) throw ParseError("CPHASE needs one target", here);
            g.qubits.push_back(t[0]);
        } else {
            static const std::pair<const char*, GateKind> kinds[] = {
                {"X", GateKind::X},         {"CNOT", GateKind::CNOT},   {"TOFFOLI", GateKind::Toffoli},
                {"MCX", GateKind::MCX},     {"H", GateKind::H},         {"ALLOC", GateKind::Alloc},
                {"DISCARD", GateKind::Discard}, {"MEASURE", GateKind::Measure}};
            bool known = false;
            for (const auto& [name, kind] : kinds)
                if (op == name) {
                    g.kind = kind;
                    known = true;
                }
            if (!known) throw ParseError("unknown gate '" + op + "'", here);
            std::string tok;
            while (ls >> tok) {
                auto q = parse_list(tok, ',', lineno);
                g.qubits.insert(g.qubits.end(), q.begin(), q.end());
            }
            const std::size_t arity = g.kind == GateKind::CNOT ? 2 : g.kind == GateKind::Toffoli ? 3
                                      : (g.kind == GateKind::X || g.kind == GateKind::H) ? 1 : 0;
            if ((arity && g.qubits.size() != arity) || g.qubits.empty())
                throw ParseError("wrong operand count for " + op, here);
        }
        for (Qubit q : g.qubits)
            if (q >= c.n_qubits) throw MalformedCircuit("qubit " + std::to_string(q) + " exceeds header qubit count");
        c.gates.push_back(std::move(g));
    }
    return c;
}

}  // namespace qadv::circuits
