#include "qadv/protocol/messages.hpp"

#include "qadv/errors.hpp"

#include <numbers>

namespace qadv::protocol {

using nlohmann::json;

double angle_of(Basis m) { return m == Basis::PlusPi4 ? std::numbers::pi / 4 : -std::numbers::pi / 4; }

json bits_to_json(const BitString& b) { return {{"bits", b.size()}, {"value", to_decimal(b.to_bignat())}}; }

BitString bits_from_json(const json& j) {
    if (!j.is_object() || j.size() != 2 || !j.contains("bits") || !j.contains("value") ||
        !j["bits"].is_number_unsigned() || !j["value"].is_string())
        throw ProtocolViolation("bit string must be {\"bits\": n, \"value\": \"decimal\"}");
    try {
        return BitString(from_decimal(j["value"].get<std::string>()), j["bits"].get<std::size_t>());
    } catch (const DomainError& e) {
        throw ProtocolViolation(std::string("bit string: ") + e.what());
    }
}

namespace {

json image_to_json(const tcf::Image& y) {
    json a = json::array();
    for (const auto& v : y) a.push_back(to_decimal(v));
    return a;
}

tcf::Image image_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ProtocolViolation("image must be a nonempty array of decimal strings");
    tcf::Image y;
    for (const auto& e : j) {
        if (!e.is_string()) throw ProtocolViolation("image entries must be decimal strings");
        try {
            y.push_back(from_decimal(e.get<std::string>()));
        } catch (const Error& err) {
            throw ProtocolViolation(std::string("image: ") + err.what());
        }
    }
    return y;
}

const json& field(const json& p, const char* name) {
    if (!p.is_object() || !p.contains(name)) throw ProtocolViolation(std::string("payload lacks '") + name + "'");
    return p[name];
}

struct Encode {
    json operator()(const KeyMsg& m) const {
        return {{"key", m.key.public_part().to_json(false)}, {"lift", m.key.lift()}};
    }
    json operator()(const ImageMsg& m) const {
        json j{{"y", image_to_json(m.y)}};
        if (m.circuit) j["circuit"] = {{"builder", m.circuit->builder}, {"cutoff", m.circuit->cutoff}};
        if (m.h) j["h"] = bits_to_json(*m.h);
        return j;
    }
    json operator()(const ChallengeMsg& m) const {
        return {{"challenge", m.challenge == Challenge::Preimage ? "preimage" : "continue"}};
    }
    json operator()(const PreimageMsg& m) const { return {{"x", bits_to_json(m.x)}}; }
    json operator()(const VectorMsg& m) const { return {{"r", bits_to_json(m.r)}}; }
    json operator()(const EquationMsg& m) const { return {{"d", bits_to_json(m.d)}}; }
    json operator()(const BasisMsg& m) const { return {{"m", m.m == Basis::PlusPi4 ? "+pi/4" : "-pi/4"}}; }
    json operator()(const ResultMsg& m) const { return {{"bit", m.bit ? 1 : 0}}; }
};

struct Tag {
    const char* operator()(const KeyMsg&) const { return "key"; }
    const char* operator()(const ImageMsg&) const { return "image"; }
    const char* operator()(const ChallengeMsg&) const { return "challenge"; }
    const char* operator()(const PreimageMsg&) const { return "preimage"; }
    const char* operator()(const VectorMsg&) const { return "vector"; }
    const char* operator()(const EquationMsg&) const { return "equation"; }
    const char* operator()(const BasisMsg&) const { return "basis"; }
    const char* operator()(const ResultMsg&) const { return "result"; }
};

}  // namespace

std::string tag_of(const RoundMessage& msg) { return std::visit(Tag{}, msg); }
json payload_of(const RoundMessage& msg) { return std::visit(Encode{}, msg); }

RoundMessage message_from(const std::string& tag, const json& p) {
    if (tag == "key") {
        const json& lift = field(p, "lift");
        if (!lift.is_number_unsigned()) throw ProtocolViolation("key: lift must be a nonnegative integer");
        tcf::TcfKey key = [&] {
            try {
                return tcf::TcfKey::from_json(field(p, "key"));
            } catch (const ProtocolViolation&) {
                throw;
            } catch (const Error& e) {
                throw ProtocolViolation(std::string("key: ") + e.what());
            }
        }();
        if (key.has_trapdoor()) throw ProtocolViolation("key message must not carry trapdoor data");
        return KeyMsg{key.with_lift(lift.get<unsigned>())};
    }
    if (tag == "image") {
        ImageMsg m{image_from_json(field(p, "y")), std::nullopt, std::nullopt};
        if (p.contains("circuit")) {
            const json& c = p["circuit"];
            if (!c.is_object() || !c.contains("builder") || !c["builder"].is_string() || !c.contains("cutoff") ||
                !c["cutoff"].is_number_unsigned())
                throw ProtocolViolation("image: malformed circuit reference");
            m.circuit = CircuitRef{c["builder"].get<std::string>(), c["cutoff"].get<unsigned>()};
        }
        if (p.contains("h")) m.h = bits_from_json(p["h"]);
        return m;
    }
    if (tag == "challenge") {
        const json& c = field(p, "challenge");
        if (c == "preimage") return ChallengeMsg{Challenge::Preimage};
        if (c == "continue") return ChallengeMsg{Challenge::Continue};
        throw ProtocolViolation("challenge must be 'preimage' or 'continue'");
    }
    if (tag == "preimage") return PreimageMsg{bits_from_json(field(p, "x"))};
    if (tag == "vector") return VectorMsg{bits_from_json(field(p, "r"))};
    if (tag == "equation") return EquationMsg{bits_from_json(field(p, "d"))};
    if (tag == "basis") {
        const json& m = field(p, "m");
        if (m == "+pi/4") return BasisMsg{Basis::PlusPi4};
        if (m == "-pi/4") return BasisMsg{Basis::MinusPi4};
        throw ProtocolViolation("basis must be '+pi/4' or '-pi/4'");
    }
    if (tag == "result") {
        const json& b = field(p, "bit");
        if (b != 0 && b != 1) throw ProtocolViolation("result bit must be 0 or 1");
        return ResultMsg{b == 1};
    }
    throw ProtocolViolation("unknown message tag '" + tag + "'");
}

bool same_message(const RoundMessage& a, const RoundMessage& b) {
    return tag_of(a) == tag_of(b) && payload_of(a) == payload_of(b);
}

}  // namespace qadv::protocol
