#pragma once

#include <map>
#include <string>
#include <vector>

#include "ledgerlab/contract.hpp"
#include "ledgerlab/peernet.hpp"
#include "ledgerlab/verifier.hpp"

namespace ledgerlab {

// The pinned parameters for the reference corpus. Regeneration from these is
// byte-identical.
inline constexpr uint64_t kFixtureSeed = 42;
inline constexpr uint64_t kTamperSeed = 7;
inline constexpr size_t kTamperCount = 13;
inline constexpr size_t kRecordCount = 430;
inline constexpr size_t kLifecycleCount = 4;

// Deterministic synthetic records, split evenly across the two sites.
// Level distribution cycles through L0..L3 and S0..S3; every record passes
// schema validation.
std::vector<ScientificRecord> generate_records(uint64_t seed, size_t count = kRecordCount);

// Lifecycle envelopes at the start, then one record every 7.5 simulated
// seconds, which puts the whole run at roughly eight transactions per minute.
Workload reference_workload(const std::vector<ScientificRecord>& records);

FaultSchedule leader_crash_schedule();
FaultSchedule peer_corrupt_schedule();
FaultSchedule partition_schedule();

struct FixtureSet {
    std::string records_path;
    std::string workload_path;
    std::string config_path;
    std::string golden_ledger_path;
    std::string membership_path;
    std::string tamper_targets_path;
    std::map<std::string, std::string> fault_schedule_paths;  // name -> path
    std::string checksums_path;
};

// Writes the whole corpus under `dir` (created if missing): record file,
// reference workload, scenario config, fault schedules, the golden ledger
// produced by running the reference scenario, the membership file it used,
// the seeded tamper target list, and a checksum file pinning every digest.
FixtureSet write_fixtures(const std::string& dir, uint64_t seed = kFixtureSeed);

}  // namespace ledgerlab
