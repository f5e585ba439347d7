#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ledgerlab/bytes.hpp"
#include "ledgerlab/canonical.hpp"

namespace ledgerlab {

// Signature scheme: Ed25519 over the SHA-256 digest of the message. The
// scheme id is written into every ledger file header so verifiers are
// self-describing.
inline constexpr const char* kSchemeId = "ed25519-sha256";

enum class Role { collaborator, peer, orderer, admin };

std::string role_name(Role r);
std::optional<Role> role_from_name(std::string_view s);

struct KeyPair {
    Bytes public_key;   // 32 bytes
    Bytes private_key;  // 64 bytes, never serialized into the ledger
};

// Deterministic when built from a fixed 32-byte seed.
KeyPair keypair_from_seed(const Digest& seed);
KeyPair keypair_random();

Bytes sign(const Bytes& private_key, const Bytes& message);
// Total: malformed keys or signatures yield false, never throw.
bool verify_signature(const Bytes& public_key, const Bytes& message, const Bytes& signature);

struct Certificate {
    std::string subject_name;
    std::string organization;
    Role role = Role::collaborator;
    Bytes public_key;
    std::string issuer;            // CA name
    Bytes issuer_signature;        // over canonical encoding of the fields above

    Json to_json() const;
    static std::optional<Certificate> from_json(const Json& j);
    // The byte string the CA signs.
    Bytes signing_payload() const;
};

struct CaRecord {
    std::string name;          // "ca-<org>"
    std::string organization;
    Bytes public_key;
};

struct MembershipDirectory {
    std::map<std::string, Bytes> ca_roots;             // organization -> CA public key
    std::map<std::string, Certificate> certificates;   // subject_name -> certificate

    // Verifies the certificate against its organization's root before storing.
    bool add_certificate(const Certificate& cert);
    const Certificate* find(const std::string& subject_name) const;
};

std::pair<CaRecord, KeyPair> create_ca(const std::string& org_name, const Digest& seed);

// Throws std::invalid_argument on empty subject_name.
Certificate issue_certificate(const Bytes& ca_private_key, const std::string& ca_name,
                              const std::string& subject_name, const std::string& organization,
                              Role role, const Bytes& public_key);

bool verify_certificate(const Certificate& cert, const std::map<std::string, Bytes>& ca_roots);

// Certificate bundle file: one canonical-JSON certificate per line, preceded by
// one canonical-JSON CA root line per organization:
//   {"ca_public_key":hex,"organization":name}
std::string serialize_directory(const MembershipDirectory& dir);
std::optional<MembershipDirectory> parse_directory(const std::string& text);

}  // namespace ledgerlab
