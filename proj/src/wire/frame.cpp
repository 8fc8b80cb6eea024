#include "qadv/wire/frame.hpp"

#include "qadv/errors.hpp"

#include <array>

namespace qadv::wire {

namespace {
constexpr std::array kRoundTags{"key", "image", "challenge", "preimage", "vector", "equation", "basis", "result"};
}

WireFrame WireFrame::of(std::string session, std::uint64_t seq, const protocol::RoundMessage& msg) {
    WireFrame f;
    f.session = std::move(session);
    f.seq = seq;
    f.tag = protocol::tag_of(msg);
    f.payload = protocol::payload_of(msg);
    return f;
}

bool WireFrame::is_round_message() const {
    for (const char* t : kRoundTags)
        if (tag == t) return true;
    return false;
}

protocol::RoundMessage WireFrame::message() const {
    if (!is_round_message()) throw ProtocolViolation("expected a round message, got '" + tag + "'");
    return protocol::message_from(tag, payload);
}

std::string encode_frame(const WireFrame& frame) {
    nlohmann::json j = {{"v", frame.version},
                        {"session", frame.session},
                        {"seq", frame.seq},
                        {"msg", {{"tag", frame.tag}, {"payload", frame.payload}}}};
    return j.dump() + "\n";
}

WireFrame decode_frame(const std::string& line) {
    std::string body = line;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    if (body.find('\n') != std::string::npos) throw ParseError("more than one line", body.find('\n'));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed frame: ") + e.what(), e.byte);
    }
    auto field_offset = [&](const char* key) {
        const auto pos = body.find(std::string("\"") + key + "\"");
        return pos == std::string::npos ? body.size() : pos;
    };
    if (!j.is_object()) throw ParseError("frame is not an object", 0);
    for (const char* key : {"v", "session", "seq", "msg"})
        if (!j.contains(key)) throw ParseError(std::string("missing field ") + key, body.size());
    WireFrame f;
    if (!j["v"].is_number_integer() || j["v"].get<int>() != kWireVersion)
        throw ParseError("unsupported version " + j["v"].dump(), field_offset("v"));
    if (!j["session"].is_string()) throw ParseError("session must be a string", field_offset("session"));
    if (!j["seq"].is_number_unsigned()) throw ParseError("seq must be a non-negative integer", field_offset("seq"));
    const auto& msg = j["msg"];
    if (!msg.is_object() || !msg.contains("tag") || !msg["tag"].is_string())
        throw ParseError("msg needs a string tag", field_offset("msg"));
    f.session = j["session"].get<std::string>();
    f.seq = j["seq"].get<std::uint64_t>();
    f.tag = msg["tag"].get<std::string>();
    f.payload = msg.contains("payload") ? msg["payload"] : nlohmann::json();
    return f;
}

}  // namespace qadv::wire
