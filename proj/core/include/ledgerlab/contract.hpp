#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerlab/bytes.hpp"
#include "ledgerlab/canonical.hpp"
#include "ledgerlab/identity.hpp"
#include "ledgerlab/ledger.hpp"

namespace ledgerlab {

inline constexpr const char* kContractName = "ScientificDataCollection";
inline constexpr const char* kLifecycleName = "lifecycle";

// Processing levels: L* measured data, S* simulated data.
bool is_valid_level(const std::string& level);
bool is_simulation_level(const std::string& level);

struct DataPointer {
    std::string content_hash;  // 64 lowercase hex chars, SHA-256 of the off-chain file
    std::string location;
    uint64_t size_bytes = 0;

    Json to_json() const;
    static std::optional<DataPointer> from_json(const Json& j);
    bool operator==(const DataPointer&) const = default;
};

struct ScientificRecord {
    std::string id;           // <level>_<site>_<YYYYMMDD>_<8 hex>
    std::string record_type;  // L0..L3 | S0..S3
    std::map<std::string, std::string> metadata;
    std::optional<DataPointer> raw_data;
    std::optional<DataPointer> input_data;
    std::optional<std::map<std::string, std::string>> input_metadata;
    std::optional<DataPointer> output_data;
    std::optional<std::map<std::string, std::string>> output_metadata;
    std::string site_name;
    std::string collaborator_name;
    std::string orcid;  // NNNN-NNNN-NNNN-NNN[0-9X]
    std::string access_url;

    Json to_json() const;
    static std::optional<ScientificRecord> from_json(const Json& j);
    bool operator==(const ScientificRecord&) const = default;
};

// Empty when the record passes every schema invariant, otherwise the name of
// the first failing one.
std::optional<std::string> validate_record(const ScientificRecord& record);

enum class ContractFunction { create_record, update_record, read_record, record_exists, lifecycle_op };

std::string function_name(ContractFunction f);
std::optional<ContractFunction> function_from_name(std::string_view s);

struct ContractInvocation {
    std::string contract_name;  // ScientificDataCollection | lifecycle
    ContractFunction function = ContractFunction::create_record;
    Bytes args;  // canonical encoding of the function arguments

    Json to_json() const;
    static std::optional<ContractInvocation> from_json(const Json& j);
    Bytes encode() const { return canonical_bytes(to_json()); }
    static std::optional<ContractInvocation> decode(const Bytes& payload);
    bool operator==(const ContractInvocation&) const = default;
};

ContractInvocation make_create_invocation(const ScientificRecord& record);
ContractInvocation make_update_invocation(const std::string& id, const Json& changed_fields);
ContractInvocation make_lifecycle_invocation(const Json& args);

struct EndorsementPolicy {
    int required = 4;
};

// Carried by the genesis configuration envelope.
struct ChannelConfig {
    EndorsementPolicy policy;
    std::string cert_bundle_digest;  // hex sha256 of the certificate bundle file

    ContractInvocation to_invocation() const;
    static std::optional<ChannelConfig> from_invocation(const ContractInvocation& inv);
};

class ContractError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class PermissionDenied : public ContractError {
  public:
    using ContractError::ContractError;
};
class DuplicateId : public ContractError {
  public:
    using ContractError::ContractError;
};
class SchemaViolation : public ContractError {
  public:
    using ContractError::ContractError;
};
class NotFound : public ContractError {
  public:
    using ContractError::ContractError;
};
class ImmutableField : public ContractError {
  public:
    using ContractError::ContractError;
};

struct WorldState {
    std::map<std::string, ScientificRecord> entries;

    Digest digest() const;  // sha256 of the canonical encoding of all entries
    bool operator==(const WorldState&) const = default;
};

void create_record(WorldState& state, const Certificate& invoker, const ScientificRecord& record);
void update_record(WorldState& state, const Certificate& invoker, const std::string& id,
                   const Json& changed_fields);
const ScientificRecord& read_record(const WorldState& state, const std::string& id);
bool record_exists(const WorldState& state, const std::string& id);

struct ApplyResult {
    bool valid = false;
    std::string reason;  // empty when valid
};

// Commit-time validation: creator signature, endorsement policy, then the
// contract transition. Invalid envelopes are flagged, never thrown, and leave
// the state untouched.
ApplyResult apply_envelope(WorldState& state, const TransactionEnvelope& envelope,
                           const MembershipDirectory& directory, const EndorsementPolicy& policy);

// Runs the contract preconditions against a copy of the state without
// committing; used by endorsing peers.
ApplyResult simulate_invocation(const WorldState& state, const Certificate& invoker,
                                const ContractInvocation& invocation);

DataPointer hash_data_file(const std::string& path, const std::string& location = "");

}  // namespace ledgerlab
