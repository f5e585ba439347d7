#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerlab/contract.hpp"
#include "ledgerlab/identity.hpp"
#include "ledgerlab/ledger.hpp"

namespace ledgerlab {

enum class ViolationKind {
    DataHashMismatch,
    ChainLinkBroken,
    OrdererSignatureInvalid,
    CreatorSignatureInvalid,
    EndorsementSignatureInvalid,
    EmptyBlockData,
    ConfigInvalid,
};

std::string violation_kind_name(ViolationKind k);
bool is_signature_kind(ViolationKind k);

struct Violation {
    uint64_t block_number = 0;
    ViolationKind kind = ViolationKind::DataHashMismatch;
    std::optional<std::string> tx_id;   // present for the signature kinds
    std::optional<std::string> signer;
    std::string detail;
    int tx_index = -1;  // -1 for block-level findings; used for deterministic ordering

    Json to_json() const;
};

enum class Verdict { intact, tampered };

struct IntegrityReport {
    uint64_t blocks_checked = 0;
    uint64_t transactions_checked = 0;
    uint64_t signatures_checked = 0;
    uint64_t signatures_failed = 0;
    std::vector<Violation> violations;
    Verdict verdict = Verdict::intact;

    Json to_json() const;
};

enum class VerifyMode { basic, strict };

// In basic mode, signature checks are nested
// inside the content-hash mismatch branch, and only the creator's signature is
// examined. Violations are collected rather than thrown so aggregate counts
// can be reported. sig_checked, when given, accumulates the number of
// signature verifications performed.
std::vector<Violation> verify_block_integrity(const Digest& content_hash,
                                              const Digest& stored_data_hash, const Block& block,
                                              uint64_t index, const MembershipDirectory& directory,
                                              uint64_t* sig_checked = nullptr);

// Full-chain verification. Everything is recomputed; no stored digest is ever
// trusted. `strict` additionally verifies every creator and endorsement
// signature of every transaction unconditionally.
IntegrityReport verify_chain(const BlockStore& store, const MembershipDirectory& directory,
                             VerifyMode mode);

// ---- Tamper injection ----------------------------------------------------

class TargetNotFound : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct TamperTarget {
    uint64_t block_number = 0;
    int tx_index = -1;        // -1 addresses block-level fields (e.g. header.previous_hash)
    std::string field_path;   // dot path; "payload" and "args" segments decode hex layers

    Json to_json() const;
    static std::optional<TamperTarget> from_json(const Json& j);
};

struct TamperMutation {
    uint64_t block_number = 0;
    int tx_index = -1;
    std::string field_path;
    std::string old_value;
    std::string new_value;

    Json to_json() const;
};

struct TamperManifest {
    std::vector<TamperMutation> mutations;

    Json to_json() const;
};

// Edits the canonical-JSON ledger file in place at the addressed fields;
// throws TargetNotFound when a target does not exist.
TamperManifest tamper_file(const std::string& path, const std::vector<TamperTarget>& targets);

// Selects k record transactions (create_record invocations) uniformly at
// random, at most one per block, and picks a payload field to mutate for each.
std::vector<TamperTarget> random_record_targets(const BlockStore& store, size_t k, uint64_t seed);

}  // namespace ledgerlab
