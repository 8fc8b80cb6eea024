#pragma once

#include "qadv/bitstring.hpp"
#include "qadv/tcf/key.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <variant>

namespace qadv::protocol {

enum class Challenge { Preimage, Continue };

/// Round-3 measurement basis: the angle is +pi/4 or -pi/4.
enum class Basis { PlusPi4, MinusPi4 };
double angle_of(Basis m);

/// Circuit the prover used for round 1. Its output is y R' mod N, and its
/// discards were measured with outcomes h.
struct CircuitRef {
    std::string builder;
    unsigned cutoff = 16;
    friend bool operator==(const CircuitRef&, const CircuitRef&) = default;
};

struct KeyMsg {
    tcf::TcfKey key;  // public part, lift included
};
struct ImageMsg {
    tcf::Image y;
    std::optional<CircuitRef> circuit;
    std::optional<BitString> h;
};
struct ChallengeMsg {
    Challenge challenge;
};
struct PreimageMsg {
    BitString x;
};
struct VectorMsg {
    BitString r;
};
struct EquationMsg {
    BitString d;
};
struct BasisMsg {
    Basis m;
};
struct ResultMsg {
    bool bit;
};

using RoundMessage =
    std::variant<KeyMsg, ImageMsg, ChallengeMsg, PreimageMsg, VectorMsg, EquationMsg, BasisMsg, ResultMsg>;

std::string tag_of(const RoundMessage& msg);
nlohmann::json payload_of(const RoundMessage& msg);
/// Throws ProtocolViolation on an unknown tag or a malformed payload.
RoundMessage message_from(const std::string& tag, const nlohmann::json& payload);

/// {"bits": length, "value": decimal}
nlohmann::json bits_to_json(const BitString& b);
BitString bits_from_json(const nlohmann::json& j);

bool same_message(const RoundMessage& a, const RoundMessage& b);

}  // namespace qadv::protocol
