#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "ledgerlab/fixtures.hpp"
#include "ledgerlab/gateway.hpp"
#include "ledgerlab/peernet.hpp"
#include "ledgerlab/verifier.hpp"

namespace {

using namespace ledgerlab;

constexpr int kExitOk = 0;
constexpr int kExitTampered = 1;
constexpr int kExitUsage = 2;

class CommandFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CommandFailure("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw CommandFailure("cannot write " + path);
    out << text;
}

void emit(const Json& j, const std::string& out_path) {
    const std::string text = canonical_dump(j) + "\n";
    if (out_path.empty()) std::cout << text;
    else write_file(out_path, text);
}

BlockStore load_store(const std::string& path) {
    auto store = parse_store(read_file(path));
    if (!store) throw CommandFailure("ledger file does not parse: " + path);
    return std::move(*store);
}

MembershipDirectory load_directory(const std::string& path) {
    auto dir = parse_directory(read_file(path));
    if (!dir) throw CommandFailure("membership file does not parse: " + path);
    return std::move(*dir);
}

ScenarioConfig load_config(const std::string& path) {
    if (path.empty()) return ScenarioConfig{};
    auto config = ScenarioConfig::from_json(Json::parse(read_file(path), nullptr, false));
    if (!config) throw CommandFailure("config file does not parse: " + path);
    return *config;
}

// LEDGERLAB_SEED overrides whatever the config file carries.
void apply_seed_override(ScenarioConfig& config) {
    if (const char* env = std::getenv("LEDGERLAB_SEED")) config.seed = std::strtoull(env, nullptr, 10);
}

Workload load_workload(const std::string& path) {
    auto w = Workload::from_json(Json::parse(read_file(path), nullptr, false));
    if (!w) throw CommandFailure("workload file does not parse: " + path);
    return *w;
}

FaultSchedule load_faults(const std::string& path) {
    if (path.empty()) return FaultSchedule{};
    auto f = FaultSchedule::from_json(Json::parse(read_file(path), nullptr, false));
    if (!f) throw CommandFailure("fault schedule does not parse: " + path);
    return *f;
}

// Policy comes from the genesis configuration envelope.
EndorsementPolicy policy_of(const BlockStore& store) {
    if (!store.empty()) {
        for (const auto& env : store.blocks.front().envelopes) {
            auto inv = ContractInvocation::decode(env.payload);
            if (!inv) continue;
            if (auto cfg = ChannelConfig::from_invocation(*inv)) return cfg->policy;
        }
    }
    throw CommandFailure("ledger carries no channel configuration");
}

int cmd_init(const std::string& dir, const std::string& config_path) {
    ScenarioConfig config = load_config(config_path);
    apply_seed_override(config);
    std::filesystem::create_directories(dir);
    NetworkSetup net = make_network(config, config.seed);
    write_file(dir + "/membership.txt", net.cert_bundle);
    BlockStore store;
    store.channel = config.channel;
    store.append_block(net.genesis);
    write_store_file(store, dir + "/genesis.ledger");
    write_file(dir + "/scenario-config.json", canonical_dump(config.to_json()) + "\n");
    emit(Json{{"genesis_digest", to_hex(store.head_digest())},
              {"identities", net.keys.size()},
              {"membership", dir + "/membership.txt"}},
         "");
    return kExitOk;
}

int cmd_run_scenario(const std::string& config_path, const std::string& workload_path,
                     const std::string& faults_path, const std::string& ledger_out,
                     const std::string& report_out) {
    ScenarioConfig config = load_config(config_path);
    apply_seed_override(config);
    Scenario scenario(config, load_workload(workload_path), load_faults(faults_path));
    ScenarioReport report = scenario.run();
    if (!ledger_out.empty()) write_store_file(scenario.authoritative_store(), ledger_out);
    emit(report.to_json(), report_out);
    return kExitOk;
}

int cmd_submit(const std::string& config_path, const std::string& ledger_path,
               const std::string& records_path, const std::string& ledger_out) {
    ScenarioConfig config = load_config(config_path);
    apply_seed_override(config);
    IngestResult ingest = ingest_records(records_path);
    if (!ingest.ok()) {
        for (const auto& issue : ingest.issues)
            std::cerr << "record " << issue.index << ": " << issue.reason << "\n";
        return kExitUsage;
    }
    BlockStore store = load_store(ledger_path);

    Workload workload;
    for (size_t i = 0; i < ingest.records.size(); ++i) {
        WorkloadItem item;
        item.time = static_cast<SimTime>(i) * config.ordering.batch_timeout_ms;
        item.kind = "record";
        item.record = ingest.records[i];
        workload.items.push_back(std::move(item));
    }
    Scenario scenario(config, workload, FaultSchedule{});
    scenario.preload_store(store);
    ScenarioReport report = scenario.run();

    const BlockStore& chain = scenario.authoritative_store();
    Json receipts = Json::array();
    for (const auto& tx : report.committed_tx_ids) {
        for (const auto& block : chain.blocks)
            for (const auto& env : block.envelopes)
                if (env.header.tx_id == tx)
                    receipts.push_back(Json{{"block_number", block.header.number}, {"tx_id", tx}});
    }
    write_store_file(chain, ledger_out.empty() ? ledger_path : ledger_out);
    emit(Json{{"receipts", std::move(receipts)},
              {"rejected", report.rejected_envelopes},
              {"submitted", report.submitted_tx_ids.size()}},
         "");
    return kExitOk;
}

int cmd_ingest(const std::string& records_path) {
    IngestResult result = ingest_records(records_path);
    Json issues = Json::array();
    for (const auto& issue : result.issues)
        issues.push_back(Json{{"index", issue.index}, {"reason", issue.reason}});
    emit(Json{{"issues", std::move(issues)}, {"valid_records", result.records.size()}}, "");
    return result.ok() ? kExitOk : kExitTampered;
}

int cmd_query(const std::string& ledger_path, const std::string& membership_path,
              const std::string& id) {
    BlockStore store = load_store(ledger_path);
    MembershipDirectory directory = load_directory(membership_path);
    WorldState state = replay_store(store, directory, policy_of(store));
    if (!record_exists(state, id)) {
        std::cerr << "no record with id " << id << "\n";
        return kExitTampered;
    }
    emit(read_record(state, id).to_json(), "");
    return kExitOk;
}

int cmd_verify(const std::string& ledger_path, const std::string& membership_path,
               const std::string& mode_name, const std::string& report_out) {
    if (mode_name != "basic" && mode_name != "strict")
        throw CommandFailure("mode must be basic or strict");
    BlockStore store = load_store(ledger_path);
    MembershipDirectory directory = load_directory(membership_path);
    IntegrityReport report = verify_chain(
        store, directory, mode_name == "basic" ? VerifyMode::basic : VerifyMode::strict);
    emit(report.to_json(), report_out);
    return report.verdict == Verdict::intact ? kExitOk : kExitTampered;
}

int cmd_tamper(const std::string& ledger_path, const std::string& targets_path, int random_k,
               uint64_t seed, const std::string& manifest_out) {
    std::vector<TamperTarget> targets;
    if (!targets_path.empty()) {
        Json j = Json::parse(read_file(targets_path), nullptr, false);
        if (!j.is_array()) throw CommandFailure("targets file is not a JSON array");
        for (const auto& t : j) {
            auto target = TamperTarget::from_json(t);
            if (!target) throw CommandFailure("bad target entry");
            targets.push_back(*target);
        }
    } else if (random_k > 0) {
        targets = random_record_targets(load_store(ledger_path), static_cast<size_t>(random_k),
                                        seed);
    } else {
        throw CommandFailure("either --targets or --random-k is required");
    }
    TamperManifest manifest = tamper_file(ledger_path, targets);
    emit(manifest.to_json(), manifest_out);
    return kExitOk;
}

int cmd_stats(const std::string& ledger_path) {
    emit(stats(load_store(ledger_path)).to_json(), "");
    return kExitOk;
}

int cmd_check_offchain(const std::string& ledger_path, const std::string& membership_path,
                       const std::string& id, const std::string& file_path) {
    BlockStore store = load_store(ledger_path);
    MembershipDirectory directory = load_directory(membership_path);
    WorldState state = replay_store(store, directory, policy_of(store));
    if (!record_exists(state, id)) {
        std::cerr << "no record with id " << id << "\n";
        return kExitTampered;
    }
    const bool match = check_offchain(read_record(state, id), file_path);
    emit(Json{{"id", id}, {"match", match}}, "");
    return match ? kExitOk : kExitTampered;
}

int cmd_fixtures(const std::string& dir, uint64_t seed) {
    FixtureSet set = write_fixtures(dir, seed);
    emit(Json{{"checksums", set.checksums_path},
              {"golden_ledger", set.golden_ledger_path},
              {"records", set.records_path}},
         "");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Permissioned ledger for scientific data integrity"};
    app.require_subcommand(1);

    std::string dir = ".", config_path, workload_path, faults_path;
    std::string ledger_path, ledger_out, report_out, membership_path, records_path;
    std::string mode_name = "strict", record_id, file_path, targets_path, manifest_out;
    int random_k = 0;
    uint64_t seed = kFixtureSeed;

    auto* init = app.add_subcommand("init", "Generate CAs, identities and genesis");
    init->add_option("--dir", dir)->required();
    init->add_option("--config", config_path);

    auto* run = app.add_subcommand("run-scenario", "Run a deterministic network simulation");
    run->add_option("--config", config_path);
    run->add_option("--workload", workload_path)->required();
    run->add_option("--faults", faults_path);
    run->add_option("--ledger-out", ledger_out);
    run->add_option("--report-out", report_out);

    auto* submit = app.add_subcommand("submit", "Submit records to an existing chain");
    submit->add_option("--config", config_path);
    submit->add_option("--ledger", ledger_path)->required();
    submit->add_option("--records", records_path)->required();
    submit->add_option("--ledger-out", ledger_out);

    auto* ingest = app.add_subcommand("ingest", "Validate a record file");
    ingest->add_option("--records", records_path)->required();

    auto* query = app.add_subcommand("query", "Look up a committed record by id");
    query->add_option("--ledger", ledger_path)->required();
    query->add_option("--membership", membership_path)->required();
    query->add_option("id", record_id)->required();

    auto* verify = app.add_subcommand("verify", "Verify chain integrity");
    verify->add_option("--ledger", ledger_path)->required();
    verify->add_option("--membership", membership_path)->required();
    verify->add_option("--mode", mode_name);
    verify->add_option("--report-out", report_out);

    auto* tamper = app.add_subcommand("tamper", "Mutate ledger fields in place");
    tamper->add_option("--ledger", ledger_path)->required();
    tamper->add_option("--targets", targets_path);
    tamper->add_option("--random-k", random_k);
    tamper->add_option("--seed", seed);
    tamper->add_option("--manifest-out", manifest_out);

    auto* stats_cmd = app.add_subcommand("stats", "Full-scan chain statistics");
    stats_cmd->add_option("--ledger", ledger_path)->required();

    auto* check = app.add_subcommand("check-offchain", "Compare a local file against a record hash");
    check->add_option("--ledger", ledger_path)->required();
    check->add_option("--membership", membership_path)->required();
    check->add_option("--id", record_id)->required();
    check->add_option("--file", file_path)->required();

    auto* fixtures_cmd = app.add_subcommand("fixtures", "Regenerate the reference corpus");
    fixtures_cmd->add_option("--dir", dir)->required();
    fixtures_cmd->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (init->parsed()) return cmd_init(dir, config_path);
        if (run->parsed())
            return cmd_run_scenario(config_path, workload_path, faults_path, ledger_out,
                                    report_out);
        if (submit->parsed()) return cmd_submit(config_path, ledger_path, records_path, ledger_out);
        if (ingest->parsed()) return cmd_ingest(records_path);
        if (query->parsed()) return cmd_query(ledger_path, membership_path, record_id);
        if (verify->parsed()) return cmd_verify(ledger_path, membership_path, mode_name, report_out);
        if (tamper->parsed())
            return cmd_tamper(ledger_path, targets_path, random_k, seed, manifest_out);
        if (stats_cmd->parsed()) return cmd_stats(ledger_path);
        if (check->parsed())
            return cmd_check_offchain(ledger_path, membership_path, record_id, file_path);
        if (fixtures_cmd->parsed()) return cmd_fixtures(dir, seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
