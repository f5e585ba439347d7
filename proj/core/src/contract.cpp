#include "ledgerlab/contract.hpp"

#include <cctype>
#include <fstream>

namespace ledgerlab {

namespace {

Json map_to_json(const std::map<std::string, std::string>& m) {
    Json j = Json::object();
    for (const auto& [k, v] : m) j[k] = v;
    return j;
}

std::optional<std::map<std::string, std::string>> map_from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    std::map<std::string, std::string> m;
    for (const auto& [k, v] : j.items()) {
        if (!v.is_string()) return std::nullopt;
        m[k] = v.get<std::string>();
    }
    return m;
}

bool is_lower_hex(const std::string& s) {
    for (char c : s)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

bool orcid_matches(const std::string& s) {
    // NNNN-NNNN-NNNN-NNN[0-9X]
    if (s.size() != 19) return false;
    for (size_t i = 0; i < 19; ++i) {
        if (i == 4 || i == 9 || i == 14) {
            if (s[i] != '-') return false;
        } else if (i == 18) {
            if (!std::isdigit(static_cast<unsigned char>(s[i])) && s[i] != 'X') return false;
        } else if (!std::isdigit(static_cast<unsigned char>(s[i]))) {
            return false;
        }
    }
    return true;
}

bool may_write(Role role) { return role == Role::collaborator || role == Role::admin; }

}  // namespace

bool is_valid_level(const std::string& level) {
    return level.size() == 2 && (level[0] == 'L' || level[0] == 'S') && level[1] >= '0' &&
           level[1] <= '3';
}

bool is_simulation_level(const std::string& level) {
    return is_valid_level(level) && level[0] == 'S';
}

Json DataPointer::to_json() const {
    return Json{{"content_hash", content_hash}, {"location", location}, {"size_bytes", size_bytes}};
}

std::optional<DataPointer> DataPointer::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    DataPointer p;
    try {
        p.content_hash = j.at("content_hash").get<std::string>();
        p.location = j.at("location").get<std::string>();
        p.size_bytes = j.at("size_bytes").get<uint64_t>();
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return p;
}

Json ScientificRecord::to_json() const {
    Json j{{"access_url", access_url},
           {"collaborator_name", collaborator_name},
           {"id", id},
           {"metadata", map_to_json(metadata)},
           {"orcid", orcid},
           {"record_type", record_type},
           {"site_name", site_name}};
    j["raw_data"] = raw_data ? raw_data->to_json() : Json(nullptr);
    j["input_data"] = input_data ? input_data->to_json() : Json(nullptr);
    j["input_metadata"] = input_metadata ? map_to_json(*input_metadata) : Json(nullptr);
    j["output_data"] = output_data ? output_data->to_json() : Json(nullptr);
    j["output_metadata"] = output_metadata ? map_to_json(*output_metadata) : Json(nullptr);
    return j;
}

std::optional<ScientificRecord> ScientificRecord::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    ScientificRecord r;
    try {
        r.id = j.at("id").get<std::string>();
        r.record_type = j.at("record_type").get<std::string>();
        auto meta = map_from_json(j.at("metadata"));
        if (!meta) return std::nullopt;
        r.metadata = std::move(*meta);
        r.site_name = j.at("site_name").get<std::string>();
        r.collaborator_name = j.at("collaborator_name").get<std::string>();
        r.orcid = j.at("orcid").get<std::string>();
        r.access_url = j.at("access_url").get<std::string>();
        auto opt_ptr = [&](const char* key) -> std::optional<std::optional<DataPointer>> {
            const Json& v = j.at(key);
            if (v.is_null()) return std::optional<DataPointer>{};
            auto p = DataPointer::from_json(v);
            if (!p) return std::nullopt;
            return std::optional<DataPointer>{std::move(*p)};
        };
        auto raw = opt_ptr("raw_data");
        auto in = opt_ptr("input_data");
        auto out = opt_ptr("output_data");
        if (!raw || !in || !out) return std::nullopt;
        r.raw_data = std::move(*raw);
        r.input_data = std::move(*in);
        r.output_data = std::move(*out);
        auto opt_map = [&](const char* key) -> std::optional<std::optional<std::map<std::string, std::string>>> {
            const Json& v = j.at(key);
            if (v.is_null()) return std::optional<std::map<std::string, std::string>>{};
            auto m = map_from_json(v);
            if (!m) return std::nullopt;
            return std::optional<std::map<std::string, std::string>>{std::move(*m)};
        };
        auto im = opt_map("input_metadata");
        auto om = opt_map("output_metadata");
        if (!im || !om) return std::nullopt;
        r.input_metadata = std::move(*im);
        r.output_metadata = std::move(*om);
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return r;
}

namespace {
std::optional<std::string> validate_pointer(const DataPointer& p, const std::string& field) {
    if (p.content_hash.size() != 64 || !is_lower_hex(p.content_hash))
        return field + ".content_hash must be 64 lowercase hex chars";
    return std::nullopt;
}
}  // namespace

std::optional<std::string> validate_record(const ScientificRecord& r) {
    if (r.id.empty()) return "id must be non-empty";
    if (!is_valid_level(r.record_type))
        return "record_type must be one of L0..L3, S0..S3";
    if (!orcid_matches(r.orcid)) return "orcid must match NNNN-NNNN-NNNN-NNN[0-9X]";
    if (is_simulation_level(r.record_type)) {
        if (!r.input_data) return "simulation records must carry input_data";
        if (!r.output_data) return "simulation records must carry output_data";
        if (auto e = validate_pointer(*r.input_data, "input_data")) return e;
        if (auto e = validate_pointer(*r.output_data, "output_data")) return e;
    } else {
        if (!r.raw_data) return "measurement records must carry raw_data";
    }
    if (r.raw_data)
        if (auto e = validate_pointer(*r.raw_data, "raw_data")) return e;
    return std::nullopt;
}

std::string function_name(ContractFunction f) {
    switch (f) {
        case ContractFunction::create_record: return "create_record";
        case ContractFunction::update_record: return "update_record";
        case ContractFunction::read_record: return "read_record";
        case ContractFunction::record_exists: return "record_exists";
        case ContractFunction::lifecycle_op: return "lifecycle_op";
    }
    return "create_record";
}

std::optional<ContractFunction> function_from_name(std::string_view s) {
    if (s == "create_record") return ContractFunction::create_record;
    if (s == "update_record") return ContractFunction::update_record;
    if (s == "read_record") return ContractFunction::read_record;
    if (s == "record_exists") return ContractFunction::record_exists;
    if (s == "lifecycle_op") return ContractFunction::lifecycle_op;
    return std::nullopt;
}

Json ContractInvocation::to_json() const {
    return Json{{"args", to_hex(args)},
                {"contract_name", contract_name},
                {"function", function_name(function)}};
}

std::optional<ContractInvocation> ContractInvocation::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    ContractInvocation inv;
    try {
        inv.contract_name = j.at("contract_name").get<std::string>();
        auto f = function_from_name(j.at("function").get<std::string>());
        if (!f) return std::nullopt;
        inv.function = *f;
        auto args = from_hex(j.at("args").get<std::string>());
        if (!args) return std::nullopt;
        inv.args = std::move(*args);
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return inv;
}

std::optional<ContractInvocation> ContractInvocation::decode(const Bytes& payload) {
    Json j = Json::parse(payload.begin(), payload.end(), nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return from_json(j);
}

ContractInvocation make_create_invocation(const ScientificRecord& record) {
    ContractInvocation inv;
    inv.contract_name = kContractName;
    inv.function = ContractFunction::create_record;
    inv.args = canonical_bytes(Json{{"record", record.to_json()}});
    return inv;
}

ContractInvocation make_update_invocation(const std::string& id, const Json& changed_fields) {
    ContractInvocation inv;
    inv.contract_name = kContractName;
    inv.function = ContractFunction::update_record;
    inv.args = canonical_bytes(Json{{"changes", changed_fields}, {"id", id}});
    return inv;
}

ContractInvocation make_lifecycle_invocation(const Json& args) {
    ContractInvocation inv;
    inv.contract_name = kLifecycleName;
    inv.function = ContractFunction::lifecycle_op;
    inv.args = canonical_bytes(args);
    return inv;
}

ContractInvocation ChannelConfig::to_invocation() const {
    return make_lifecycle_invocation(Json{{"cert_bundle_digest", cert_bundle_digest},
                                          {"op", "configure"},
                                          {"policy_required", policy.required}});
}

std::optional<ChannelConfig> ChannelConfig::from_invocation(const ContractInvocation& inv) {
    if (inv.contract_name != kLifecycleName || inv.function != ContractFunction::lifecycle_op)
        return std::nullopt;
    Json j = Json::parse(inv.args.begin(), inv.args.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) return std::nullopt;
    if (j.value("op", "") != "configure") return std::nullopt;
    ChannelConfig cfg;
    try {
        cfg.policy.required = j.at("policy_required").get<int>();
        cfg.cert_bundle_digest = j.at("cert_bundle_digest").get<std::string>();
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return cfg;
}

Digest WorldState::digest() const {
    Json j = Json::object();
    for (const auto& [id, rec] : entries) j[id] = rec.to_json();
    return canonical_digest(j);
}

void create_record(WorldState& state, const Certificate& invoker, const ScientificRecord& record) {
    if (!may_write(invoker.role))
        throw PermissionDenied("role " + role_name(invoker.role) + " may not create records");
    if (auto e = validate_record(record)) throw SchemaViolation(*e);
    if (state.entries.count(record.id)) throw DuplicateId("record id already exists: " + record.id);
    state.entries[record.id] = record;
}

void update_record(WorldState& state, const Certificate& invoker, const std::string& id,
                   const Json& changed_fields) {
    if (!may_write(invoker.role))
        throw PermissionDenied("role " + role_name(invoker.role) + " may not update records");
    auto it = state.entries.find(id);
    if (it == state.entries.end()) throw NotFound("no record with id " + id);
    if (!changed_fields.is_object()) throw SchemaViolation("changed_fields must be an object");

    Json merged = it->second.to_json();
    for (const auto& [k, v] : changed_fields.items()) {
        if (k == "id" || k == "record_type") throw ImmutableField(k + " is immutable");
        if (!merged.contains(k)) throw SchemaViolation("unknown field " + k);
        merged[k] = v;
    }
    auto updated = ScientificRecord::from_json(merged);
    if (!updated) throw SchemaViolation("changed fields do not decode against the record schema");
    if (auto e = validate_record(*updated)) throw SchemaViolation(*e);
    it->second = std::move(*updated);
}

const ScientificRecord& read_record(const WorldState& state, const std::string& id) {
    auto it = state.entries.find(id);
    if (it == state.entries.end()) throw NotFound("no record with id " + id);
    return it->second;
}

bool record_exists(const WorldState& state, const std::string& id) {
    return state.entries.count(id) > 0;
}

namespace {

// Shared by endorsement simulation and commit. Writes throw before mutating,
// so a caught ContractError leaves the state untouched.
ApplyResult run_invocation(WorldState& state, const Certificate& invoker,
                           const ContractInvocation& inv) {
    try {
        switch (inv.function) {
            case ContractFunction::create_record: {
                Json j = Json::parse(inv.args.begin(), inv.args.end(), nullptr, false);
                if (j.is_discarded() || !j.is_object() || !j.contains("record"))
                    return {false, "malformed create_record args"};
                auto rec = ScientificRecord::from_json(j["record"]);
                if (!rec) return {false, "record does not decode against the schema"};
                create_record(state, invoker, *rec);
                return {true, ""};
            }
            case ContractFunction::update_record: {
                Json j = Json::parse(inv.args.begin(), inv.args.end(), nullptr, false);
                if (j.is_discarded() || !j.is_object())
                    return {false, "malformed update_record args"};
                update_record(state, invoker, j.value("id", ""), j.value("changes", Json::object()));
                return {true, ""};
            }
            case ContractFunction::read_record: {
                Json j = Json::parse(inv.args.begin(), inv.args.end(), nullptr, false);
                read_record(state, j.is_object() ? j.value("id", "") : "");
                return {true, ""};
            }
            case ContractFunction::record_exists:
                return {true, ""};
            case ContractFunction::lifecycle_op:
                // Validated for signatures and policy only; no record-state change.
                return {true, ""};
        }
    } catch (const ContractError& e) {
        return {false, e.what()};
    }
    return {false, "unknown function"};
}

}  // namespace

ApplyResult simulate_invocation(const WorldState& state, const Certificate& invoker,
                                const ContractInvocation& invocation) {
    WorldState copy = state;
    return run_invocation(copy, invoker, invocation);
}

ApplyResult apply_envelope(WorldState& state, const TransactionEnvelope& envelope,
                           const MembershipDirectory& directory, const EndorsementPolicy& policy) {
    const auto& hdr = envelope.header;
    if (hdr.tx_id != compute_tx_id(hdr.creator, hdr.nonce))
        return {false, "tx_id does not match creator and nonce"};

    const Certificate* creator = directory.find(hdr.creator);
    if (!creator) return {false, "unknown creator: " + hdr.creator};
    const Bytes signed_bytes = envelope.signing_payload();
    if (!verify_signature(creator->public_key, signed_bytes, envelope.creator_signature))
        return {false, "creator signature invalid"};

    int valid_endorsements = 0;
    for (const auto& e : envelope.endorsements) {
        const Certificate* endorser = directory.find(e.endorser);
        if (!endorser || endorser->role != Role::peer) continue;
        if (verify_signature(endorser->public_key, signed_bytes, e.signature))
            ++valid_endorsements;
    }
    if (valid_endorsements < policy.required)
        return {false, "endorsements below policy: " + std::to_string(valid_endorsements) + " < " +
                           std::to_string(policy.required)};

    auto inv = ContractInvocation::decode(envelope.payload);
    if (!inv) return {false, "payload does not decode as a contract invocation"};
    return run_invocation(state, *creator, *inv);
}

DataPointer hash_data_file(const std::string& path, const std::string& location) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string data = ss.str();
    DataPointer p;
    p.content_hash = sha256_hex(data);
    p.location = location.empty() ? path : location;
    p.size_bytes = data.size();
    return p;
}

}  // namespace ledgerlab
