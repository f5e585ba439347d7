#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ledgerlab {

using Bytes = std::vector<uint8_t>;
using Digest = std::array<uint8_t, 32>;

inline constexpr Digest kZeroDigest{};

std::string to_hex(const uint8_t* data, size_t len);
std::string to_hex(const Bytes& b);
std::string to_hex(const Digest& d);

// Strict lowercase-hex decode; nullopt on odd length or bad chars.
std::optional<Bytes> from_hex(std::string_view hex);
std::optional<Digest> digest_from_hex(std::string_view hex);

Digest sha256(const uint8_t* data, size_t len);
Digest sha256(const Bytes& b);
Digest sha256(std::string_view s);
std::string sha256_hex(std::string_view s);

Bytes str_to_bytes(std::string_view s);

}  // namespace ledgerlab
