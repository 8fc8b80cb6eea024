#pragma once

#include "qadv/tcf/key.hpp"

#include <string>

namespace qadv::wire {

/// {"family": ..., "public": {...}, "secret": {...}}; "secret" is absent in a
/// public key file.
nlohmann::json key_file_json(const tcf::TcfKey& key);
/// Throws ParseError on unreadable JSON and PreconditionError when the file
/// does not describe a key, or lacks the secret part and `need_secret` is set.
tcf::TcfKey read_key_file(const std::string& path, bool need_secret);
tcf::TcfKey key_from_file_json(const nlohmann::json& j, bool need_secret);

}  // namespace qadv::wire
