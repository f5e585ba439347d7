#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ledgerlab/contract.hpp"
#include "ledgerlab/ledger.hpp"

namespace ledgerlab {

class ParseError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class EmptyLedger : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct IngestIssue {
    size_t index = 0;     // position in the input array
    std::string reason;   // failing schema invariant
};

struct IngestResult {
    std::vector<ScientificRecord> records;  // the valid ones, input order kept
    std::vector<IngestIssue> issues;        // one entry per failing record

    bool ok() const { return issues.empty(); }
};

// Parses a JSON array of records and validates every element; all failures
// are reported, not just the first. Throws ParseError when the text is not a
// JSON array of objects.
IngestResult ingest_records_text(const std::string& text);

// File variant; throws IoError when the file cannot be read.
IngestResult ingest_records(const std::string& path);

struct StatsSummary {
    uint64_t block_count = 0;               // every block in the file
    uint64_t transaction_count = 0;         // envelopes beyond the genesis block
    uint64_t contract_invocation_count = 0; // ScientificDataCollection payloads
    double transactions_per_minute = 0.0;   // over the envelope timestamp span

    Json to_json() const;
};

// Full scan of the chain. The genesis configuration envelope is channel
// plumbing, not workload, and is excluded from the transaction counts.
// Throws EmptyLedger on a store without blocks.
StatsSummary stats(const BlockStore& store);

// True iff the SHA-256 of the file at `path` equals the record's raw data
// content hash. Throws IoError when the file cannot be read and
// std::invalid_argument when the record carries no raw data pointer.
bool check_offchain(const ScientificRecord& record, const std::string& path);

}  // namespace ledgerlab
