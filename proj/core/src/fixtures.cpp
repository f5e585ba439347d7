#include "ledgerlab/fixtures.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "ledgerlab/rng.hpp"

namespace ledgerlab {

namespace {

const char* kLevels[8] = {"L0", "L1", "L2", "L3", "S0", "S1", "S2", "S3"};

struct SiteProfile {
    const char* site;
    const char* detector;
    const char* collaborators[3];
};

const SiteProfile kSites[2] = {
    {"bucaramanga", "wcd-bga-01", {"Ana Rodriguez", "Carlos Mejia", "Diana Ortiz"}},
    {"riobamba", "wcd-rio-01", {"Esteban Quiroz", "Fernanda Lema", "Gabriel Paredes"}},
};

std::string make_orcid(Rng& rng) {
    std::string s;
    for (int group = 0; group < 4; ++group) {
        if (group) s += '-';
        for (int i = 0; i < 4; ++i) {
            if (group == 3 && i == 3 && rng.below(11) == 10) s += 'X';
            else s += static_cast<char>('0' + rng.below(10));
        }
    }
    return s;
}

std::string make_date(size_t i) {
    const int month = 1 + static_cast<int>((i / 28) % 12);
    const int day = 1 + static_cast<int>(i % 28);
    char buf[16];
    std::snprintf(buf, sizeof buf, "2024%02d%02d", month, day);
    return buf;
}

DataPointer make_pointer(Rng& rng, const std::string& id, const std::string& name) {
    DataPointer p;
    p.content_hash = to_hex(rng.bytes(32));
    p.location = "onedata://lago/" + id + "/" + name;
    p.size_bytes = rng.range(1'000'000, 500'000'000);
    return p;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::vector<ScientificRecord> generate_records(uint64_t seed, size_t count) {
    Rng rng = Rng(seed).fork("records");

    // One ORCID per collaborator, fixed across the whole corpus.
    std::map<std::string, std::string> orcids;
    for (const auto& site : kSites)
        for (const char* name : site.collaborators) orcids[name] = make_orcid(rng);

    std::vector<ScientificRecord> records;
    std::set<std::string> used_suffixes;
    for (size_t i = 0; i < count; ++i) {
        const SiteProfile& site = kSites[i % 2];
        const std::string level = kLevels[(i / 2) % 8];

        std::string suffix = to_hex(rng.bytes(4));
        while (used_suffixes.count(suffix)) suffix = to_hex(rng.bytes(4));
        used_suffixes.insert(suffix);

        ScientificRecord r;
        r.record_type = level;
        r.site_name = site.site;
        r.id = level + "_" + site.site + "_" + make_date(i) + "_" + suffix;
        r.collaborator_name = site.collaborators[rng.below(3)];
        r.orcid = orcids.at(r.collaborator_name);
        r.access_url = "https://data.lago.example/records/" + r.id;
        r.metadata = {{"detector", site.detector},
                      {"duration_s", std::to_string(rng.range(600, 86400))},
                      {"trigger_rate_hz", std::to_string(rng.range(20, 120))}};
        if (is_simulation_level(level)) {
            r.input_data = make_pointer(rng, r.id, "input.inp");
            r.output_data = make_pointer(rng, r.id, "output.sho");
            r.input_metadata = std::map<std::string, std::string>{
                {"code", "corsika"}, {"primaries", std::to_string(rng.range(1000, 100000))}};
            r.output_metadata = std::map<std::string, std::string>{{"format", "shower-table"}};
        } else {
            r.raw_data = make_pointer(rng, r.id, "raw.h5");
        }
        records.push_back(std::move(r));
    }
    return records;
}

Workload reference_workload(const std::vector<ScientificRecord>& records) {
    Workload w;
    const char* kOps[kLifecycleCount] = {"install", "approve", "commit", "init"};
    for (size_t i = 0; i < kLifecycleCount; ++i) {
        WorkloadItem item;
        item.time = static_cast<SimTime>(i);
        item.kind = "lifecycle";
        item.lifecycle_args = Json{{"name", kContractName}, {"op", kOps[i]}, {"sequence", 1}};
        w.items.push_back(std::move(item));
    }
    for (size_t i = 0; i < records.size(); ++i) {
        WorkloadItem item;
        item.time = 10000 + static_cast<SimTime>(i) * 7500;
        item.kind = "record";
        item.record = records[i];
        w.items.push_back(std::move(item));
    }
    return w;
}

FaultSchedule leader_crash_schedule() {
    FaultSchedule s;
    s.events.push_back({15000, "orderer-leader", FaultAction::crash});
    return s;
}

FaultSchedule peer_corrupt_schedule() {
    FaultSchedule s;
    s.events.push_back({20000, "OrgUIS-peer-0", FaultAction::corrupt_ledger});
    return s;
}

FaultSchedule partition_schedule() {
    FaultSchedule s;
    s.events.push_back({15000, "orderer-1", FaultAction::partition_on});
    s.events.push_back({45000, "orderer-1", FaultAction::partition_off});
    return s;
}

FixtureSet write_fixtures(const std::string& dir, uint64_t seed) {
    std::filesystem::create_directories(dir);
    auto path = [&](const std::string& name) { return dir + "/" + name; };

    FixtureSet set;
    const auto records = generate_records(seed);
    Json records_json = Json::array();
    for (const auto& r : records) records_json.push_back(r.to_json());
    set.records_path = path("records.json");
    write_text(set.records_path, canonical_dump(records_json) + "\n");

    const Workload workload = reference_workload(records);
    set.workload_path = path("workload.json");
    write_text(set.workload_path, canonical_dump(workload.to_json()) + "\n");

    ScenarioConfig config;
    config.seed = seed;
    set.config_path = path("scenario-config.json");
    write_text(set.config_path, canonical_dump(config.to_json()) + "\n");

    const std::map<std::string, FaultSchedule> schedules = {
        {"faults-leader-crash.json", leader_crash_schedule()},
        {"faults-peer-corrupt.json", peer_corrupt_schedule()},
        {"faults-partition.json", partition_schedule()},
    };
    for (const auto& [name, schedule] : schedules) {
        set.fault_schedule_paths[name] = path(name);
        write_text(set.fault_schedule_paths[name], canonical_dump(schedule.to_json()) + "\n");
    }

    Scenario scenario(config, workload, FaultSchedule{});
    scenario.run();
    const BlockStore& golden = scenario.authoritative_store();
    set.golden_ledger_path = path("golden.ledger");
    write_store_file(golden, set.golden_ledger_path);
    set.membership_path = path("membership.txt");
    write_text(set.membership_path, scenario.setup().cert_bundle);

    const auto targets = random_record_targets(golden, kTamperCount, kTamperSeed);
    Json targets_json = Json::array();
    for (const auto& t : targets) targets_json.push_back(t.to_json());
    set.tamper_targets_path = path("tamper-targets.json");
    write_text(set.tamper_targets_path, canonical_dump(targets_json) + "\n");

    Json checksums = Json::object();
    std::vector<std::string> files = {set.records_path,       set.workload_path,
                                      set.config_path,        set.golden_ledger_path,
                                      set.membership_path,    set.tamper_targets_path};
    for (const auto& [name, p] : set.fault_schedule_paths) files.push_back(p);
    for (const auto& p : files) {
        const std::string name = std::filesystem::path(p).filename().string();
        checksums[name] = sha256_hex(read_text(p));
    }
    set.checksums_path = path("checksums.json");
    write_text(set.checksums_path, canonical_dump(checksums) + "\n");
    return set;
}

}  // namespace ledgerlab
