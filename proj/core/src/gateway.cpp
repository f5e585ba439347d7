#include "ledgerlab/gateway.hpp"

#include <fstream>
#include <sstream>

namespace ledgerlab {

IngestResult ingest_records_text(const std::string& text) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw ParseError("input is not a JSON array");
    IngestResult result;
    for (size_t i = 0; i < j.size(); ++i) {
        auto record = ScientificRecord::from_json(j[i]);
        if (!record) {
            result.issues.push_back({i, "not a record object"});
            continue;
        }
        if (auto failure = validate_record(*record)) {
            result.issues.push_back({i, *failure});
            continue;
        }
        result.records.push_back(std::move(*record));
    }
    return result;
}

IngestResult ingest_records(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ingest_records_text(ss.str());
}

Json StatsSummary::to_json() const {
    return Json{{"block_count", block_count},
                {"contract_invocation_count", contract_invocation_count},
                {"transaction_count", transaction_count},
                {"transactions_per_minute", transactions_per_minute}};
}

StatsSummary stats(const BlockStore& store) {
    if (store.empty()) throw EmptyLedger("ledger has no blocks");
    StatsSummary s;
    s.block_count = store.size();
    int64_t first_ts = 0;
    int64_t last_ts = 0;
    bool seen = false;
    for (size_t i = 1; i < store.blocks.size(); ++i) {
        for (const auto& env : store.blocks[i].envelopes) {
            ++s.transaction_count;
            auto inv = ContractInvocation::decode(env.payload);
            if (inv && inv->contract_name == kContractName) ++s.contract_invocation_count;
            if (!seen) {
                first_ts = last_ts = env.header.timestamp_ms;
                seen = true;
            } else {
                first_ts = std::min(first_ts, env.header.timestamp_ms);
                last_ts = std::max(last_ts, env.header.timestamp_ms);
            }
        }
    }
    const int64_t span_ms = last_ts - first_ts;
    if (span_ms > 0)
        s.transactions_per_minute = static_cast<double>(s.transaction_count) * 60000.0 /
                                    static_cast<double>(span_ms);
    return s;
}

bool check_offchain(const ScientificRecord& record, const std::string& path) {
    if (!record.raw_data) throw std::invalid_argument("record has no raw data pointer");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return sha256_hex(ss.str()) == record.raw_data->content_hash;
}

}  // namespace ledgerlab
