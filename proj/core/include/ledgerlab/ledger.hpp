#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ledgerlab/bytes.hpp"
#include "ledgerlab/canonical.hpp"
#include "ledgerlab/identity.hpp"

namespace ledgerlab {

inline constexpr int kLedgerFormatVersion = 1;

struct TransactionHeader {
    std::string tx_id;     // lowercase hex sha256 of canonical (creator, nonce)
    std::string creator;   // subject_name of a Certificate
    std::string channel;
    int64_t timestamp_ms = 0;  // simulation clock, milliseconds
    Bytes nonce;               // 16 bytes

    Json to_json() const;
    static std::optional<TransactionHeader> from_json(const Json& j);
    bool operator==(const TransactionHeader&) const = default;
};

std::string compute_tx_id(const std::string& creator, const Bytes& nonce);

struct Endorsement {
    std::string endorser;  // subject_name
    Bytes signature;       // over canonical (header, payload)

    Json to_json() const;
    static std::optional<Endorsement> from_json(const Json& j);
    bool operator==(const Endorsement&) const = default;
};

struct TransactionEnvelope {
    TransactionHeader header;
    Bytes payload;  // canonical encoding of a ContractInvocation
    Bytes creator_signature;
    std::vector<Endorsement> endorsements;

    Json to_json() const;
    static std::optional<TransactionEnvelope> from_json(const Json& j);
    bool operator==(const TransactionEnvelope&) const = default;

    // The byte string the creator and every endorser sign.
    Bytes signing_payload() const;
};

Bytes envelope_signing_payload(const TransactionHeader& header, const Bytes& payload);

struct BlockHeader {
    uint64_t number = 0;
    Digest previous_hash = kZeroDigest;  // all-zero for block 0
    Digest data_hash = kZeroDigest;

    Json to_json() const;
    static std::optional<BlockHeader> from_json(const Json& j);
    bool operator==(const BlockHeader&) const = default;
};

struct BlockMetadata {
    std::string orderer;      // subject_name of the signing orderer
    Bytes orderer_signature;  // over canonical encoding of the header
    std::vector<bool> validity_flags;  // one per envelope, set at peer validation

    Json to_json() const;
    static std::optional<BlockMetadata> from_json(const Json& j);
    bool operator==(const BlockMetadata&) const = default;
};

struct Block {
    BlockHeader header;
    std::vector<TransactionEnvelope> envelopes;
    BlockMetadata metadata;

    Json to_json() const;
    static std::optional<Block> from_json(const Json& j);
    bool operator==(const Block&) const = default;
};

Digest compute_data_hash(const std::vector<TransactionEnvelope>& envelopes);
Digest header_digest(const BlockHeader& header);

struct OrdererIdentity {
    Certificate certificate;
    Bytes private_key;
};

// Throws std::invalid_argument when the identity is not orderer-role.
Block build_block(uint64_t number, const Digest& previous_hash,
                  std::vector<TransactionEnvelope> envelopes, const OrdererIdentity& orderer);

class ChainLinkError : public std::runtime_error {
  public:
    ChainLinkError(uint64_t block_number, const std::string& what)
        : std::runtime_error("block " + std::to_string(block_number) + ": " + what),
          block_number_(block_number) {}
    uint64_t block_number() const { return block_number_; }

  private:
    uint64_t block_number_;
};

// Append-only block sequence plus the self-describing file header fields.
struct BlockStore {
    std::string scheme_id = kSchemeId;
    std::string channel;
    std::vector<Block> blocks;

    size_t size() const { return blocks.size(); }
    bool empty() const { return blocks.empty(); }
    const Block& read_block(size_t i) const { return blocks.at(i); }
    Digest head_digest() const;  // all-zero when empty

    // Enforces dense numbering and previous-hash linkage; throws ChainLinkError.
    void append_block(Block block);
};

// Ledger file format (bit-exact): line 1 is the canonical-JSON file header
// {channel, format_version, scheme_id}; each following line is one
// canonical-JSON block.
std::string serialize_store(const BlockStore& store);
std::optional<BlockStore> parse_store(const std::string& text);

void write_store_file(const BlockStore& store, const std::string& path);
std::optional<BlockStore> read_store_file(const std::string& path);

}  // namespace ledgerlab
