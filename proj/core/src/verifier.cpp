#include "ledgerlab/verifier.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "ledgerlab/rng.hpp"

namespace ledgerlab {

std::string violation_kind_name(ViolationKind k) {
    switch (k) {
        case ViolationKind::DataHashMismatch: return "DataHashMismatch";
        case ViolationKind::ChainLinkBroken: return "ChainLinkBroken";
        case ViolationKind::OrdererSignatureInvalid: return "OrdererSignatureInvalid";
        case ViolationKind::CreatorSignatureInvalid: return "CreatorSignatureInvalid";
        case ViolationKind::EndorsementSignatureInvalid: return "EndorsementSignatureInvalid";
        case ViolationKind::EmptyBlockData: return "EmptyBlockData";
        case ViolationKind::ConfigInvalid: return "ConfigInvalid";
    }
    return "DataHashMismatch";
}

bool is_signature_kind(ViolationKind k) {
    return k == ViolationKind::OrdererSignatureInvalid ||
           k == ViolationKind::CreatorSignatureInvalid ||
           k == ViolationKind::EndorsementSignatureInvalid;
}

Json Violation::to_json() const {
    Json j{{"block_number", block_number},
           {"detail", detail},
           {"kind", violation_kind_name(kind)}};
    if (tx_id) j["tx_id"] = *tx_id;
    if (signer) j["signer"] = *signer;
    return j;
}

Json IntegrityReport::to_json() const {
    Json v = Json::array();
    for (const auto& viol : violations) v.push_back(viol.to_json());
    return Json{{"blocks_checked", blocks_checked},
                {"signatures_checked", signatures_checked},
                {"signatures_failed", signatures_failed},
                {"transactions_checked", transactions_checked},
                {"verdict", verdict == Verdict::intact ? "intact" : "tampered"},
                {"violations", std::move(v)}};
}

namespace {

void check_creator(const TransactionEnvelope& env, uint64_t block_number, int tx_index,
                   const MembershipDirectory& directory, std::vector<Violation>& out,
                   uint64_t* checked, uint64_t& failed_count) {
    if (checked) ++*checked;
    const Certificate* cert = directory.find(env.header.creator);
    const bool ok = cert && verify_signature(cert->public_key, env.signing_payload(),
                                             env.creator_signature);
    if (!ok) {
        ++failed_count;
        out.push_back({block_number, ViolationKind::CreatorSignatureInvalid, env.header.tx_id,
                       env.header.creator,
                       cert ? "creator signature does not verify"
                            : "creator not present in membership directory",
                       tx_index});
    }
}

void check_endorsements(const TransactionEnvelope& env, uint64_t block_number, int tx_index,
                        const MembershipDirectory& directory, std::vector<Violation>& out,
                        uint64_t* checked, uint64_t& failed_count) {
    const Bytes signed_bytes = env.signing_payload();
    for (const auto& e : env.endorsements) {
        if (checked) ++*checked;
        const Certificate* cert = directory.find(e.endorser);
        const bool ok = cert && cert->role == Role::peer &&
                        verify_signature(cert->public_key, signed_bytes, e.signature);
        if (!ok) {
            ++failed_count;
            out.push_back({block_number, ViolationKind::EndorsementSignatureInvalid,
                           env.header.tx_id, e.endorser,
                           cert ? "endorsement signature does not verify"
                                : "endorser not present in membership directory",
                           tx_index});
        }
    }
}

void sort_violations(std::vector<Violation>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Violation& a, const Violation& b) {
        if (a.block_number != b.block_number) return a.block_number < b.block_number;
        if (a.tx_index != b.tx_index) return a.tx_index < b.tx_index;
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        return a.signer.value_or("") < b.signer.value_or("");
    });
}

}  // namespace

std::vector<Violation> verify_block_integrity(const Digest& content_hash,
                                              const Digest& stored_data_hash, const Block& block,
                                              uint64_t index, const MembershipDirectory& directory,
                                              uint64_t* sig_checked) {
    std::vector<Violation> out;
    uint64_t failed = 0;
    if (content_hash == stored_data_hash) return out;

    out.push_back({index, ViolationKind::DataHashMismatch, std::nullopt, std::nullopt,
                   "recomputed data hash does not match block header", -1});
    for (size_t i = 0; i < block.envelopes.size(); ++i) {
        const auto& env = block.envelopes[i];
        if (env.payload.empty()) {
            out.push_back({index, ViolationKind::EmptyBlockData, std::nullopt, std::nullopt,
                           "no transaction data in block", static_cast<int>(i)});
            continue;
        }
        check_creator(env, index, static_cast<int>(i), directory, out, sig_checked, failed);
    }
    sort_violations(out);
    return out;
}

IntegrityReport verify_chain(const BlockStore& store, const MembershipDirectory& directory,
                             VerifyMode mode) {
    IntegrityReport report;
    auto& out = report.violations;

    if (store.empty()) {
        out.push_back({0, ViolationKind::ConfigInvalid, std::nullopt, std::nullopt,
                       "ledger holds no blocks", -1});
        report.verdict = Verdict::tampered;
        return report;
    }

    // Genesis must carry a parseable channel configuration.
    {
        const Block& genesis = store.blocks.front();
        bool config_ok = false;
        for (const auto& env : genesis.envelopes) {
            auto inv = ContractInvocation::decode(env.payload);
            if (inv && ChannelConfig::from_invocation(*inv)) config_ok = true;
        }
        if (!config_ok)
            out.push_back({0, ViolationKind::ConfigInvalid, std::nullopt, std::nullopt,
                           "genesis block carries no valid channel configuration", -1});
    }

    Digest expected_prev = kZeroDigest;
    for (size_t i = 0; i < store.blocks.size(); ++i) {
        const Block& block = store.blocks[i];
        ++report.blocks_checked;
        report.transactions_checked += block.envelopes.size();

        if (block.header.number != i)
            out.push_back({i, ViolationKind::ChainLinkBroken, std::nullopt, std::nullopt,
                           "block number is not dense at position " + std::to_string(i), -1});
        if (block.header.previous_hash != expected_prev)
            out.push_back({block.header.number, ViolationKind::ChainLinkBroken, std::nullopt,
                           std::nullopt, "previous_hash does not match preceding header", -1});
        expected_prev = header_digest(block.header);

        ++report.signatures_checked;
        const Certificate* orderer = directory.find(block.metadata.orderer);
        const bool orderer_ok =
            orderer && orderer->role == Role::orderer &&
            verify_signature(orderer->public_key, canonical_bytes(block.header.to_json()),
                             block.metadata.orderer_signature);
        if (!orderer_ok) {
            ++report.signatures_failed;
            out.push_back({block.header.number, ViolationKind::OrdererSignatureInvalid,
                           std::nullopt, block.metadata.orderer,
                           "block metadata signature does not verify under an orderer identity",
                           -1});
        }

        const Digest content = compute_data_hash(block.envelopes);
        if (mode == VerifyMode::basic) {
            auto v = verify_block_integrity(content, block.header.data_hash, block,
                                            block.header.number, directory,
                                            &report.signatures_checked);
            for (auto& viol : v) {
                if (is_signature_kind(viol.kind)) ++report.signatures_failed;
                out.push_back(std::move(viol));
            }
        } else {
            if (content != block.header.data_hash)
                out.push_back({block.header.number, ViolationKind::DataHashMismatch, std::nullopt,
                               std::nullopt, "recomputed data hash does not match block header",
                               -1});
            for (size_t t = 0; t < block.envelopes.size(); ++t) {
                const auto& env = block.envelopes[t];
                if (env.payload.empty()) {
                    out.push_back({block.header.number, ViolationKind::EmptyBlockData,
                                   std::nullopt, std::nullopt, "no transaction data in block",
                                   static_cast<int>(t)});
                    continue;
                }
                check_creator(env, block.header.number, static_cast<int>(t), directory, out,
                              &report.signatures_checked, report.signatures_failed);
                check_endorsements(env, block.header.number, static_cast<int>(t), directory, out,
                                   &report.signatures_checked, report.signatures_failed);
            }
        }
    }

    sort_violations(out);
    report.verdict = out.empty() ? Verdict::intact : Verdict::tampered;
    return report;
}

Json TamperTarget::to_json() const {
    return Json{{"block_number", block_number}, {"field_path", field_path}, {"tx_index", tx_index}};
}

std::optional<TamperTarget> TamperTarget::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    TamperTarget t;
    try {
        t.block_number = j.at("block_number").get<uint64_t>();
        t.tx_index = j.at("tx_index").get<int>();
        t.field_path = j.at("field_path").get<std::string>();
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return t;
}

Json TamperMutation::to_json() const {
    return Json{{"block_number", block_number},
                {"field_path", field_path},
                {"new_value", new_value},
                {"old_value", old_value},
                {"tx_index", tx_index}};
}

Json TamperManifest::to_json() const {
    Json arr = Json::array();
    for (const auto& m : mutations) arr.push_back(m.to_json());
    return arr;
}

namespace {

Json mutated_value(const Json& v) {
    if (v.is_string()) {
        std::string s = v.get<std::string>();
        if (s.empty()) return "x";
        char c = s[0];
        if (c >= '0' && c <= '9') s[0] = c == '9' ? '0' : c + 1;
        else if (c >= 'a' && c <= 'z') s[0] = c == 'z' ? 'a' : c + 1;
        else if (c >= 'A' && c <= 'Z') s[0] = c == 'Z' ? 'A' : c + 1;
        else s[0] = '#';
        return s;
    }
    if (v.is_number_integer()) return v.get<int64_t>() + 1;
    if (v.is_boolean()) return !v.get<bool>();
    return "tampered";
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::istringstream in(path);
    std::string part;
    while (std::getline(in, part, '.')) parts.push_back(part);
    return parts;
}

// Walks the path, decoding hex-wrapped JSON layers at "payload" and "args",
// applies the mutation at the leaf and re-encodes on the way back.
std::pair<std::string, std::string> mutate_path(Json& j, const std::vector<std::string>& parts,
                                                size_t at) {
    if (at >= parts.size()) throw TargetNotFound("empty field path");
    const std::string& key = parts[at];
    if (!j.is_object() || !j.contains(key))
        throw TargetNotFound("no field named " + key);
    Json& v = j[key];

    if (at + 1 == parts.size()) {
        std::string old_value = v.dump();
        v = mutated_value(v);
        return {old_value, v.dump()};
    }
    if ((key == "payload" || key == "args") && v.is_string()) {
        auto bytes = from_hex(v.get<std::string>());
        if (!bytes) throw TargetNotFound(key + " is not hex");
        Json inner = Json::parse(bytes->begin(), bytes->end(), nullptr, false);
        if (inner.is_discarded()) throw TargetNotFound(key + " does not decode as JSON");
        auto result = mutate_path(inner, parts, at + 1);
        v = to_hex(canonical_bytes(inner));
        return result;
    }
    return mutate_path(v, parts, at + 1);
}

}  // namespace

TamperManifest tamper_file(const std::string& path, const std::vector<TamperTarget>& targets) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw TargetNotFound("cannot read " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    in.close();

    TamperManifest manifest;
    for (const auto& target : targets) {
        const size_t line_index = 1 + target.block_number;  // line 0 is the file header
        if (line_index >= lines.size())
            throw TargetNotFound("no block " + std::to_string(target.block_number));
        Json block = Json::parse(lines[line_index], nullptr, false);
        if (block.is_discarded()) throw TargetNotFound("block line does not parse");

        auto parts = split_path(target.field_path);
        std::pair<std::string, std::string> change;
        if (target.tx_index >= 0) {
            Json& envs = block["envelopes"];
            if (!envs.is_array() || target.tx_index >= static_cast<int>(envs.size()))
                throw TargetNotFound("no transaction " + std::to_string(target.tx_index) +
                                     " in block " + std::to_string(target.block_number));
            change = mutate_path(envs[target.tx_index], parts, 0);
        } else {
            change = mutate_path(block, parts, 0);
        }
        lines[line_index] = canonical_dump(block);
        manifest.mutations.push_back({target.block_number, target.tx_index, target.field_path,
                                      change.first, change.second});
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw TargetNotFound("cannot write " + path);
    for (const auto& l : lines) out << l << "\n";
    return manifest;
}

std::vector<TamperTarget> random_record_targets(const BlockStore& store, size_t k, uint64_t seed) {
    struct Candidate {
        uint64_t block;
        int tx;
        bool has_raw;
    };
    std::vector<Candidate> candidates;
    for (const auto& block : store.blocks) {
        for (size_t t = 0; t < block.envelopes.size(); ++t) {
            auto inv = ContractInvocation::decode(block.envelopes[t].payload);
            if (!inv || inv->contract_name != kContractName ||
                inv->function != ContractFunction::create_record)
                continue;
            Json args = Json::parse(inv->args.begin(), inv->args.end(), nullptr, false);
            bool has_raw = !args.is_discarded() && args.contains("record") &&
                           !args["record"].value("raw_data", Json(nullptr)).is_null();
            candidates.push_back({block.header.number, static_cast<int>(t), has_raw});
        }
    }
    if (candidates.size() < k)
        throw TargetNotFound("ledger holds fewer record transactions than requested");

    Rng rng(seed);
    // Seeded Fisher-Yates, then keep the first k from distinct blocks.
    for (size_t i = candidates.size() - 1; i > 0; --i)
        std::swap(candidates[i], candidates[rng.below(i + 1)]);

    std::vector<TamperTarget> targets;
    std::set<uint64_t> used_blocks;
    for (const auto& c : candidates) {
        if (targets.size() == k) break;
        if (used_blocks.count(c.block)) continue;
        used_blocks.insert(c.block);
        static const char* kPointerField = "payload.args.record.raw_data.content_hash";
        static const char* kOutputField = "payload.args.record.output_data.content_hash";
        static const char* kNameField = "payload.args.record.collaborator_name";
        std::string field;
        switch (rng.below(2)) {
            case 0: field = c.has_raw ? kPointerField : kOutputField; break;
            default: field = kNameField; break;
        }
        targets.push_back({c.block, c.tx, field});
    }
    if (targets.size() < k)
        throw TargetNotFound("not enough distinct blocks with record transactions");
    return targets;
}

}  // namespace ledgerlab
