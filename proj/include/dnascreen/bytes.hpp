#pragma once

#include <cstdint>
#include <sodium.h>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dnascreen {

using Bytes = std::vector<std::uint8_t>;

inline void init_crypto() {
    static const int rc = sodium_init();
    if (rc < 0) throw std::runtime_error("sodium_init failed");
}

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
    return std::string(b.begin(), b.end());
}

inline std::string to_hex(const Bytes& b) {
    std::string out(b.size() * 2 + 1, '\0');
    sodium_bin2hex(out.data(), out.size(), b.data(), b.size());
    out.resize(b.size() * 2);
    return out;
}

inline Bytes from_hex(std::string_view hex) {
    Bytes out(hex.size() / 2 + 1);
    size_t len = 0;
    if (sodium_hex2bin(out.data(), out.size(), hex.data(), hex.size(),
                       nullptr, &len, nullptr) != 0)
        throw std::runtime_error("invalid hex");
    out.resize(len);
    return out;
}

inline std::string to_base64(const Bytes& b) {
    const size_t cap = sodium_base64_ENCODED_LEN(b.size(), sodium_base64_VARIANT_ORIGINAL);
    std::string out(cap, '\0');
    sodium_bin2base64(out.data(), cap, b.data(), b.size(), sodium_base64_VARIANT_ORIGINAL);
    out.resize(std::char_traits<char>::length(out.c_str()));
    return out;
}

inline Bytes from_base64(std::string_view s) {
    Bytes out(s.size());
    size_t len = 0;
    if (sodium_base642bin(out.data(), out.size(), s.data(), s.size(), nullptr,
                          &len, nullptr, sodium_base64_VARIANT_ORIGINAL) != 0)
        throw std::runtime_error("invalid base64");
    out.resize(len);
    return out;
}

inline Bytes sha256(const Bytes& data) {
    init_crypto();
    Bytes out(crypto_hash_sha256_BYTES);
    crypto_hash_sha256(out.data(), data.data(), data.size());
    return out;
}

}  // namespace dnascreen
