#pragma once

#include <string>

#include <json.hpp>

#include "ledgerlab/bytes.hpp"

namespace ledgerlab {

// nlohmann::json keeps object keys in std::map order, which gives us the
// canonical form for free: lexicographically sorted keys, and dump() emits no
// insignificant whitespace. All byte fields are lowercase hex, written at the
// call sites.
using Json = nlohmann::json;

inline std::string canonical_dump(const Json& j) { return j.dump(); }

inline Bytes canonical_bytes(const Json& j) {
    const std::string s = j.dump();
    return Bytes(s.begin(), s.end());
}

inline Digest canonical_digest(const Json& j) { return sha256(j.dump()); }

}  // namespace ledgerlab
