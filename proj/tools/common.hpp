// Shared helpers for the command-line tools.
#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dnascreen/bytes.hpp"
#include "dnascreen/certs.hpp"
#include "dnascreen/errors.hpp"

namespace tools {

using dnascreen::json;

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw dnascreen::Error(dnascreen::Err::ParseError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw dnascreen::Error(dnascreen::Err::ParseError, "cannot write " + path);
    out << data;
}

inline json read_json(const std::string& path) { return json::parse(read_file(path)); }

inline dnascreen::SigningKey key_from_json(const json& j) {
    dnascreen::SigningKey k;
    k.public_key = dnascreen::from_base64(j.at("public_key").get<std::string>());
    k.secret_key = dnascreen::from_base64(j.at("secret_key").get<std::string>());
    return k;
}

inline json key_to_json(const dnascreen::SigningKey& k) {
    return json{{"public_key", dnascreen::to_base64(k.public_key)},
                {"secret_key", dnascreen::to_base64(k.secret_key)}};
}

// "1=localhost:9001,2=localhost:9002" -> {"ks1": "localhost:9001", ...}
inline std::map<std::string, std::string> parse_keyserver_addrs(const std::string& spec) {
    std::map<std::string, std::string> out;
    std::istringstream in(spec);
    std::string item;
    while (std::getline(in, item, ',')) {
        auto eq = item.find('=');
        if (eq == std::string::npos)
            throw dnascreen::Error(dnascreen::Err::BadConfig,
                                   "expected INDEX=HOST:PORT, got " + item);
        out["ks" + item.substr(0, eq)] = item.substr(eq + 1);
    }
    return out;
}

}  // namespace tools
