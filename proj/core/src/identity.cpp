#include "ledgerlab/identity.hpp"

#include <sodium.h>

#include <sstream>
#include <stdexcept>

namespace ledgerlab {

namespace {
struct SodiumInit {
    SodiumInit() {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    }
};
const SodiumInit sodium_once;
}  // namespace

std::string role_name(Role r) {
    switch (r) {
        case Role::collaborator: return "collaborator";
        case Role::peer: return "peer";
        case Role::orderer: return "orderer";
        case Role::admin: return "admin";
    }
    return "collaborator";
}

std::optional<Role> role_from_name(std::string_view s) {
    if (s == "collaborator") return Role::collaborator;
    if (s == "peer") return Role::peer;
    if (s == "orderer") return Role::orderer;
    if (s == "admin") return Role::admin;
    return std::nullopt;
}

KeyPair keypair_from_seed(const Digest& seed) {
    KeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.private_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.private_key.data(), seed.data());
    return kp;
}

KeyPair keypair_random() {
    KeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.private_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_keypair(kp.public_key.data(), kp.private_key.data());
    return kp;
}

Bytes sign(const Bytes& private_key, const Bytes& message) {
    if (private_key.size() != crypto_sign_SECRETKEYBYTES)
        throw std::invalid_argument("bad private key length");
    Digest digest = sha256(message);
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, digest.data(), digest.size(), private_key.data());
    return sig;
}

bool verify_signature(const Bytes& public_key, const Bytes& message, const Bytes& signature) {
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES) return false;
    if (signature.size() != crypto_sign_BYTES) return false;
    Digest digest = sha256(message);
    return crypto_sign_verify_detached(signature.data(), digest.data(), digest.size(),
                                       public_key.data()) == 0;
}

Bytes Certificate::signing_payload() const {
    Json j{{"issuer", issuer},
           {"organization", organization},
           {"public_key", to_hex(public_key)},
           {"role", role_name(role)},
           {"subject_name", subject_name}};
    return canonical_bytes(j);
}

Json Certificate::to_json() const {
    return Json{{"issuer", issuer},
                {"issuer_signature", to_hex(issuer_signature)},
                {"organization", organization},
                {"public_key", to_hex(public_key)},
                {"role", role_name(role)},
                {"subject_name", subject_name}};
}

std::optional<Certificate> Certificate::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    Certificate c;
    try {
        c.subject_name = j.at("subject_name").get<std::string>();
        c.organization = j.at("organization").get<std::string>();
        auto role = role_from_name(j.at("role").get<std::string>());
        if (!role) return std::nullopt;
        c.role = *role;
        auto pk = from_hex(j.at("public_key").get<std::string>());
        auto sig = from_hex(j.at("issuer_signature").get<std::string>());
        if (!pk || !sig) return std::nullopt;
        c.public_key = std::move(*pk);
        c.issuer_signature = std::move(*sig);
        c.issuer = j.at("issuer").get<std::string>();
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return c;
}

std::pair<CaRecord, KeyPair> create_ca(const std::string& org_name, const Digest& seed) {
    if (org_name.empty()) throw std::invalid_argument("org_name must be non-empty");
    KeyPair kp = keypair_from_seed(seed);
    CaRecord ca{"ca-" + org_name, org_name, kp.public_key};
    return {ca, kp};
}

Certificate issue_certificate(const Bytes& ca_private_key, const std::string& ca_name,
                              const std::string& subject_name, const std::string& organization,
                              Role role, const Bytes& public_key) {
    if (subject_name.empty()) throw std::invalid_argument("subject_name must be non-empty");
    Certificate c;
    c.subject_name = subject_name;
    c.organization = organization;
    c.role = role;
    c.public_key = public_key;
    c.issuer = ca_name;
    c.issuer_signature = sign(ca_private_key, c.signing_payload());
    return c;
}

bool verify_certificate(const Certificate& cert, const std::map<std::string, Bytes>& ca_roots) {
    auto it = ca_roots.find(cert.organization);
    if (it == ca_roots.end()) return false;
    return verify_signature(it->second, cert.signing_payload(), cert.issuer_signature);
}

bool MembershipDirectory::add_certificate(const Certificate& cert) {
    if (!verify_certificate(cert, ca_roots)) return false;
    certificates[cert.subject_name] = cert;
    return true;
}

const Certificate* MembershipDirectory::find(const std::string& subject_name) const {
    auto it = certificates.find(subject_name);
    return it == certificates.end() ? nullptr : &it->second;
}

std::string serialize_directory(const MembershipDirectory& dir) {
    std::ostringstream out;
    for (const auto& [org, key] : dir.ca_roots) {
        Json j{{"ca_public_key", to_hex(key)}, {"organization", org}};
        out << canonical_dump(j) << "\n";
    }
    for (const auto& [name, cert] : dir.certificates) {
        out << canonical_dump(cert.to_json()) << "\n";
    }
    return out.str();
}

std::optional<MembershipDirectory> parse_directory(const std::string& text) {
    MembershipDirectory dir;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) return std::nullopt;
        if (j.contains("ca_public_key")) {
            auto key = from_hex(j.value("ca_public_key", ""));
            if (!key || !j.contains("organization")) return std::nullopt;
            dir.ca_roots[j["organization"].get<std::string>()] = std::move(*key);
        } else {
            auto cert = Certificate::from_json(j);
            if (!cert || !dir.add_certificate(*cert)) return std::nullopt;
        }
    }
    return dir;
}

}  // namespace ledgerlab
