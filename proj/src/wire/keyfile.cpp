#include "qadv/wire/keyfile.hpp"

#include "qadv/errors.hpp"

#include <fstream>
#include <sstream>

namespace qadv::wire {

nlohmann::json key_file_json(const tcf::TcfKey& key) {
    nlohmann::json j = {{"family", key.family() == tcf::Family::Rabin ? "rabin" : "ddh"},
                        {"public", key.to_json(false)}};
    if (key.has_trapdoor()) j["secret"] = key.to_json(true);
    return j;
}

tcf::TcfKey key_from_file_json(const nlohmann::json& j, bool need_secret) {
    if (!j.is_object() || !j.contains("public")) throw PreconditionError("not a key file: no \"public\" entry");
    try {
        if (j.contains("secret")) {
            tcf::TcfKey key = tcf::TcfKey::from_json(j["secret"]);
            if (!(key.public_part().to_json(false) == j["public"]))
                throw PreconditionError("key file: public and secret parts disagree");
            return key;
        }
        if (need_secret) throw PreconditionError("key file has no secret part");
        return tcf::TcfKey::from_json(j["public"]);
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError(std::string("key file: ") + e.what());
    } catch (const DomainError& e) {
        throw PreconditionError(e.what());
    }
}

tcf::TcfKey read_key_file(const std::string& path, bool need_secret) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open key file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError("key file " + path + " is not JSON", e.byte);
    }
    return key_from_file_json(j, need_secret);
}

}  // namespace qadv::wire
