#pragma once

#include "qadv/protocol/messages.hpp"

#include "json.hpp"

#include <cstdint>
#include <string>

namespace qadv::wire {

inline constexpr int kWireVersion = 1;

/// One line on the wire: {"v":1,"session":...,"seq":...,"msg":{"tag":...,"payload":...}}.
/// Besides the round messages, the tags "start", "round1", "reset", "ready",
/// "end" and "error" carry session control.
struct WireFrame {
    int version = kWireVersion;
    std::string session;
    std::uint64_t seq = 0;
    std::string tag;
    nlohmann::json payload;

    static WireFrame of(std::string session, std::uint64_t seq, const protocol::RoundMessage& msg);
    bool is_round_message() const;
    /// Throws ProtocolViolation for control tags or malformed payloads.
    protocol::RoundMessage message() const;

    friend bool operator==(const WireFrame&, const WireFrame&) = default;
};

/// Newline-terminated JSON.
std::string encode_frame(const WireFrame& frame);
/// Accepts the line with or without its newline. ParseError carries the byte
/// offset of the first problem.
WireFrame decode_frame(const std::string& line);

}  // namespace qadv::wire
