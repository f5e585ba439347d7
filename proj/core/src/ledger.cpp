#include "ledgerlab/ledger.hpp"

#include <fstream>
#include <sstream>

namespace ledgerlab {

Json TransactionHeader::to_json() const {
    return Json{{"channel", channel},
                {"creator", creator},
                {"nonce", to_hex(nonce)},
                {"timestamp", timestamp_ms},
                {"tx_id", tx_id}};
}

std::optional<TransactionHeader> TransactionHeader::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    TransactionHeader h;
    try {
        h.channel = j.at("channel").get<std::string>();
        h.creator = j.at("creator").get<std::string>();
        auto nonce = from_hex(j.at("nonce").get<std::string>());
        if (!nonce) return std::nullopt;
        h.nonce = std::move(*nonce);
        h.timestamp_ms = j.at("timestamp").get<int64_t>();
        h.tx_id = j.at("tx_id").get<std::string>();
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return h;
}

std::string compute_tx_id(const std::string& creator, const Bytes& nonce) {
    Json j{{"creator", creator}, {"nonce", to_hex(nonce)}};
    return to_hex(canonical_digest(j));
}

Json Endorsement::to_json() const {
    return Json{{"endorser", endorser}, {"signature", to_hex(signature)}};
}

std::optional<Endorsement> Endorsement::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    Endorsement e;
    try {
        e.endorser = j.at("endorser").get<std::string>();
        auto sig = from_hex(j.at("signature").get<std::string>());
        if (!sig) return std::nullopt;
        e.signature = std::move(*sig);
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return e;
}

Json TransactionEnvelope::to_json() const {
    Json ends = Json::array();
    for (const auto& e : endorsements) ends.push_back(e.to_json());
    return Json{{"creator_signature", to_hex(creator_signature)},
                {"endorsements", std::move(ends)},
                {"header", header.to_json()},
                {"payload", to_hex(payload)}};
}

std::optional<TransactionEnvelope> TransactionEnvelope::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    TransactionEnvelope env;
    try {
        auto h = TransactionHeader::from_json(j.at("header"));
        if (!h) return std::nullopt;
        env.header = std::move(*h);
        auto payload = from_hex(j.at("payload").get<std::string>());
        auto sig = from_hex(j.at("creator_signature").get<std::string>());
        if (!payload || !sig) return std::nullopt;
        env.payload = std::move(*payload);
        env.creator_signature = std::move(*sig);
        for (const auto& ej : j.at("endorsements")) {
            auto e = Endorsement::from_json(ej);
            if (!e) return std::nullopt;
            env.endorsements.push_back(std::move(*e));
        }
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return env;
}

Bytes envelope_signing_payload(const TransactionHeader& header, const Bytes& payload) {
    Json j{{"header", header.to_json()}, {"payload", to_hex(payload)}};
    return canonical_bytes(j);
}

Bytes TransactionEnvelope::signing_payload() const {
    return envelope_signing_payload(header, payload);
}

Json BlockHeader::to_json() const {
    return Json{{"data_hash", to_hex(data_hash)},
                {"number", number},
                {"previous_hash", to_hex(previous_hash)}};
}

std::optional<BlockHeader> BlockHeader::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    BlockHeader h;
    try {
        h.number = j.at("number").get<uint64_t>();
        auto prev = digest_from_hex(j.at("previous_hash").get<std::string>());
        auto data = digest_from_hex(j.at("data_hash").get<std::string>());
        if (!prev || !data) return std::nullopt;
        h.previous_hash = *prev;
        h.data_hash = *data;
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return h;
}

Json BlockMetadata::to_json() const {
    Json flags = Json::array();
    for (bool f : validity_flags) flags.push_back(f);
    return Json{{"orderer", orderer},
                {"orderer_signature", to_hex(orderer_signature)},
                {"validity_flags", std::move(flags)}};
}

std::optional<BlockMetadata> BlockMetadata::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    BlockMetadata m;
    try {
        m.orderer = j.at("orderer").get<std::string>();
        auto sig = from_hex(j.at("orderer_signature").get<std::string>());
        if (!sig) return std::nullopt;
        m.orderer_signature = std::move(*sig);
        for (const auto& f : j.at("validity_flags")) m.validity_flags.push_back(f.get<bool>());
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return m;
}

Json Block::to_json() const {
    Json envs = Json::array();
    for (const auto& e : envelopes) envs.push_back(e.to_json());
    return Json{{"envelopes", std::move(envs)},
                {"header", header.to_json()},
                {"metadata", metadata.to_json()}};
}

std::optional<Block> Block::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    Block b;
    try {
        auto h = BlockHeader::from_json(j.at("header"));
        auto m = BlockMetadata::from_json(j.at("metadata"));
        if (!h || !m) return std::nullopt;
        b.header = std::move(*h);
        b.metadata = std::move(*m);
        for (const auto& ej : j.at("envelopes")) {
            auto e = TransactionEnvelope::from_json(ej);
            if (!e) return std::nullopt;
            b.envelopes.push_back(std::move(*e));
        }
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return b;
}

Digest compute_data_hash(const std::vector<TransactionEnvelope>& envelopes) {
    Json envs = Json::array();
    for (const auto& e : envelopes) envs.push_back(e.to_json());
    return canonical_digest(envs);
}

Digest header_digest(const BlockHeader& header) {
    return canonical_digest(header.to_json());
}

Block build_block(uint64_t number, const Digest& previous_hash,
                  std::vector<TransactionEnvelope> envelopes, const OrdererIdentity& orderer) {
    if (orderer.certificate.role != Role::orderer)
        throw std::invalid_argument("block builder identity must have orderer role");
    Block b;
    b.header.number = number;
    b.header.previous_hash = previous_hash;
    b.header.data_hash = compute_data_hash(envelopes);
    b.envelopes = std::move(envelopes);
    b.metadata.orderer = orderer.certificate.subject_name;
    b.metadata.orderer_signature =
        sign(orderer.private_key, canonical_bytes(b.header.to_json()));
    b.metadata.validity_flags.assign(b.envelopes.size(), true);
    return b;
}

Digest BlockStore::head_digest() const {
    return blocks.empty() ? kZeroDigest : header_digest(blocks.back().header);
}

void BlockStore::append_block(Block block) {
    const uint64_t expected = blocks.size();
    if (block.header.number != expected)
        throw ChainLinkError(block.header.number,
                            "expected number " + std::to_string(expected));
    if (block.header.previous_hash != head_digest())
        throw ChainLinkError(block.header.number, "previous_hash does not match chain head");
    blocks.push_back(std::move(block));
}

std::string serialize_store(const BlockStore& store) {
    std::ostringstream out;
    Json header{{"channel", store.channel},
                {"format_version", kLedgerFormatVersion},
                {"scheme_id", store.scheme_id}};
    out << canonical_dump(header) << "\n";
    for (const auto& b : store.blocks) out << canonical_dump(b.to_json()) << "\n";
    return out.str();
}

std::optional<BlockStore> parse_store(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) return std::nullopt;
    Json header = Json::parse(line, nullptr, false);
    if (header.is_discarded() || !header.is_object()) return std::nullopt;
    BlockStore store;
    try {
        if (header.at("format_version").get<int>() != kLedgerFormatVersion) return std::nullopt;
        store.scheme_id = header.at("scheme_id").get<std::string>();
        store.channel = header.at("channel").get<std::string>();
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Json j = Json::parse(line, nullptr, false);
        if (j.is_discarded()) return std::nullopt;
        auto b = Block::from_json(j);
        if (!b) return std::nullopt;
        // No linkage check here: tampered files must still load for the verifier.
        store.blocks.push_back(std::move(*b));
    }
    return store;
}

void write_store_file(const BlockStore& store, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << serialize_store(store);
}

std::optional<BlockStore> read_store_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_store(ss.str());
}

}  // namespace ledgerlab
