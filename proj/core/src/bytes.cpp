#include "ledgerlab/bytes.hpp"

#include <sodium.h>

namespace ledgerlab {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
}
}  // namespace

std::string to_hex(const uint8_t* data, size_t len) {
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(kHexDigits[data[i] >> 4]);
        out.push_back(kHexDigits[data[i] & 0x0f]);
    }
    return out;
}

std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }
std::string to_hex(const Digest& d) { return to_hex(d.data(), d.size()); }

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]);
        int lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<uint8_t>((hi << 4) | lo));
    }
    return out;
}

std::optional<Digest> digest_from_hex(std::string_view hex) {
    if (hex.size() != 64) return std::nullopt;
    auto b = from_hex(hex);
    if (!b) return std::nullopt;
    Digest d;
    std::copy(b->begin(), b->end(), d.begin());
    return d;
}

Digest sha256(const uint8_t* data, size_t len) {
    Digest d;
    crypto_hash_sha256(d.data(), data, len);
    return d;
}

Digest sha256(const Bytes& b) { return sha256(b.data(), b.size()); }

Digest sha256(std::string_view s) {
    return sha256(reinterpret_cast<const uint8_t*>(s.data()), s.size());
}

std::string sha256_hex(std::string_view s) { return to_hex(sha256(s)); }

Bytes str_to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

}  // namespace ledgerlab
