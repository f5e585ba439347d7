// Acceptance checks for the whole pipeline. Each criterion prints exactly one
// PASS/FAIL line; the process exits non-zero if any criterion fails.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "ledgerlab/fixtures.hpp"
#include "ledgerlab/gateway.hpp"
#include "ledgerlab/peernet.hpp"
#include "ledgerlab/verifier.hpp"

using namespace ledgerlab;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int criterion, bool ok, const std::string& what) {
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << criterion << ": " << what << "\n";
    if (!ok) ++failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Workload small_workload(uint64_t seed, size_t n) {
    Workload w;
    auto recs = generate_records(seed, n);
    for (size_t i = 0; i < recs.size(); ++i) {
        WorkloadItem item;
        item.time = 1000 + static_cast<SimTime>(i) * 500;
        item.kind = "record";
        item.record = recs[i];
        w.items.push_back(std::move(item));
    }
    return w;
}

std::map<ViolationKind, int> by_kind(const IntegrityReport& r) {
    std::map<ViolationKind, int> m;
    for (const auto& v : r.violations) ++m[v.kind];
    return m;
}

int signature_kind_count(const IntegrityReport& r) {
    int n = 0;
    for (const auto& v : r.violations)
        if (is_signature_kind(v.kind)) ++n;
    return n;
}

struct Corpus {
    FixtureSet set;
    BlockStore golden;
    MembershipDirectory directory;
    std::vector<TamperTarget> targets;
};

Corpus make_corpus(const std::string& dir) {
    Corpus c;
    c.set = write_fixtures(dir, kFixtureSeed);
    c.golden = *read_store_file(c.set.golden_ledger_path);
    c.directory = *parse_directory(read_text(c.set.membership_path));
    Json targets = Json::parse(read_text(c.set.tamper_targets_path));
    for (const auto& t : targets) c.targets.push_back(*TamperTarget::from_json(t));
    return c;
}

// ---- 1: reference workload ------------------------------------------------

void criterion_1() {
    const auto t0 = std::chrono::steady_clock::now();
    ScenarioConfig config;
    config.seed = kFixtureSeed;
    Workload workload = reference_workload(generate_records(kFixtureSeed));
    Scenario scenario(config, workload, FaultSchedule{});
    ScenarioReport run = scenario.run();
    StatsSummary s = stats(scenario.authoritative_store());
    const double elapsed = seconds_since(t0);

    std::ostringstream what;
    what << "reference workload: " << run.transactions_total << " transactions committed, "
         << s.contract_invocation_count << " contract invocations, "
         << s.transactions_per_minute << " tx/min on the simulated clock, " << elapsed << " s";
    report(1,
           run.transactions_total == 434 && s.transaction_count == 434 &&
               s.contract_invocation_count == 430 && run.contract_invocations == 430 &&
               s.transactions_per_minute >= 7.0 && s.transactions_per_minute <= 9.0 &&
               elapsed < 10.0,
           what.str());
}

// ---- 2: tamper experiment -------------------------------------------------

void criterion_2(const Corpus& corpus, const std::string& dir) {
    const auto t0 = std::chrono::steady_clock::now();

    // Brute-force oracle first: tamper a single record transaction and count
    // what one corruption costs. The 13-target expectation is scaled from
    // this measurement, never assumed.
    const std::string oracle_path = dir + "/oracle.ledger";
    fs::copy_file(corpus.set.golden_ledger_path, oracle_path,
                  fs::copy_options::overwrite_existing);
    auto one = random_record_targets(corpus.golden, 1, kTamperSeed + 1);
    tamper_file(oracle_path, one);
    IntegrityReport oracle =
        verify_chain(*read_store_file(oracle_path), corpus.directory, VerifyMode::strict);
    const int per_envelope = signature_kind_count(oracle);
    const int expected_signatures = static_cast<int>(kTamperCount) * per_envelope;

    const std::string tampered_path = dir + "/tampered.ledger";
    fs::copy_file(corpus.set.golden_ledger_path, tampered_path,
                  fs::copy_options::overwrite_existing);
    tamper_file(tampered_path, corpus.targets);
    IntegrityReport r =
        verify_chain(*read_store_file(tampered_path), corpus.directory, VerifyMode::strict);
    const double elapsed = seconds_since(t0);

    const int signatures = signature_kind_count(r);
    const int mismatches = by_kind(r)[ViolationKind::DataHashMismatch];
    std::ostringstream what;
    what << "tamper experiment: oracle cost " << per_envelope << " signatures per transaction, "
         << "k=13 gives " << signatures << " failed signatures and " << mismatches
         << " data hash mismatches, " << elapsed << " s";
    report(2,
           oracle.verdict == Verdict::tampered && per_envelope == 5 &&
               by_kind(oracle)[ViolationKind::DataHashMismatch] == 1 &&
               r.verdict == Verdict::tampered && expected_signatures == 65 &&
               signatures == 65 && mismatches == 13 && elapsed < 5.0,
           what.str());
}

// ---- 3: header-anomaly detection ------------------------------------------

void criterion_3(const Corpus& corpus, const std::string& dir) {
    const std::string path = dir + "/headers.ledger";
    fs::copy_file(corpus.set.golden_ledger_path, path, fs::copy_options::overwrite_existing);
    tamper_file(path, corpus.targets);
    BlockStore tampered = *read_store_file(path);

    // Every tampered target edited payload bytes only; headers are bit-exact.
    bool headers_untouched = true;
    for (size_t i = 0; i < tampered.blocks.size(); ++i)
        if (!(tampered.blocks[i].header == corpus.golden.blocks[i].header))
            headers_untouched = false;

    IntegrityReport r = verify_chain(tampered, corpus.directory, VerifyMode::strict);
    std::set<uint64_t> expected;
    for (const auto& t : corpus.targets) expected.insert(t.block_number);
    std::set<uint64_t> mismatched;
    bool only_tampered_blocks = true;
    for (const auto& v : r.violations) {
        if (v.kind == ViolationKind::DataHashMismatch) mismatched.insert(v.block_number);
        if (!expected.count(v.block_number)) only_tampered_blocks = false;
    }

    std::ostringstream what;
    what << "header anomaly: headers untouched, " << mismatched.size() << " of "
         << expected.size() << " mutated blocks detected, no violations outside them";
    report(3,
           headers_untouched && r.verdict == Verdict::tampered && mismatched == expected &&
               only_tampered_blocks,
           what.str());
}

// ---- 4: soundness over fault-free chains ----------------------------------

void criterion_4() {
    int intact_both = 0;
    for (uint64_t seed = 1; seed <= 50; ++seed) {
        ScenarioConfig config;
        config.seed = seed;
        Scenario scenario(config, small_workload(seed, 8), FaultSchedule{});
        scenario.run();
        IntegrityReport basic =
            verify_chain(scenario.authoritative_store(), scenario.setup().directory,
                         VerifyMode::basic);
        IntegrityReport strict =
            verify_chain(scenario.authoritative_store(), scenario.setup().directory,
                         VerifyMode::strict);
        if (basic.verdict == Verdict::intact && basic.violations.empty() &&
            strict.verdict == Verdict::intact && strict.violations.empty())
            ++intact_both;
    }
    std::ostringstream what;
    what << "soundness: " << intact_both << "/50 seeded fault-free chains intact in both modes";
    report(4, intact_both == 50, what.str());
}

// ---- 5: bit-flip sensitivity ----------------------------------------------

void criterion_5() {
    ScenarioConfig config;
    config.seed = 77;
    Scenario scenario(config, small_workload(77, 10), FaultSchedule{});
    scenario.run();
    const BlockStore& base = scenario.authoritative_store();
    const MembershipDirectory& directory = scenario.setup().directory;

    Rng rng(kFixtureSeed);
    int detected = 0;
    const int trials = 220;
    for (int trial = 0; trial < trials; ++trial) {
        BlockStore mutated = base;
        Block& block = mutated.blocks[1 + rng.below(mutated.size() - 1)];
        TransactionEnvelope& env = block.envelopes[rng.below(block.envelopes.size())];
        Bytes* region = nullptr;
        switch (rng.below(4)) {
            case 0: region = &env.payload; break;
            case 1: region = &env.creator_signature; break;
            case 2: region = &env.header.nonce; break;
            default: region = &env.endorsements[rng.below(env.endorsements.size())].signature;
        }
        (*region)[rng.below(region->size())] ^= static_cast<uint8_t>(1u << rng.below(8));
        IntegrityReport r = verify_chain(mutated, directory, VerifyMode::strict);
        if (r.verdict == Verdict::tampered && !r.violations.empty()) ++detected;
    }
    std::ostringstream what;
    what << "bit flips: " << detected << "/" << trials
         << " single-bit envelope mutations raised at least one strict violation";
    report(5, detected == trials, what.str());
}

// ---- 6: crash fault tolerance ---------------------------------------------

void criterion_6() {
    int exact_once = 0;
    bool election_safe = true;
    for (uint64_t seed = 1; seed <= 100; ++seed) {
        ScenarioConfig config;
        config.seed = seed;
        FaultSchedule faults;
        faults.events.push_back(
            {static_cast<SimTime>(1500 + (seed % 5) * 700), "orderer-leader", FaultAction::crash});
        Scenario scenario(config, small_workload(seed, 6), faults);
        ScenarioReport r = scenario.run();

        std::set<std::string> submitted(r.submitted_tx_ids.begin(), r.submitted_tx_ids.end());
        std::set<std::string> committed(r.committed_tx_ids.begin(), r.committed_tx_ids.end());
        const bool once = committed == submitted && submitted.size() == 6 &&
                          r.committed_tx_ids.size() == committed.size();
        if (once) ++exact_once;

        std::map<uint64_t, std::string> leader_of_term;
        for (const auto& l : r.leaders) {
            auto [it, inserted] = leader_of_term.try_emplace(l.term, l.node);
            if (it->second != l.node) election_safe = false;
        }
    }

    // Two of three orderers down: no quorum, no commits, no divergence.
    ScenarioConfig config;
    config.seed = 3;
    config.horizon_extra_ms = 15000;
    FaultSchedule faults;
    faults.events.push_back({100, "orderer-0", FaultAction::crash});
    faults.events.push_back({100, "orderer-1", FaultAction::crash});
    Scenario stalled(config, small_workload(3, 4), faults);
    ScenarioReport r = stalled.run();
    std::set<std::string> heads;
    for (const auto& [id, p] : r.peers) heads.insert(p.head_digest);
    const bool no_quorum_ok =
        r.blocks_committed == 0 && r.committed_tx_ids.empty() && heads.size() == 1;

    std::ostringstream what;
    what << "crash tolerance: " << exact_once
         << "/100 leader-crash runs committed every envelope exactly once; election safety "
         << (election_safe ? "held" : "violated") << "; no-quorum run committed nothing";
    report(6, exact_once == 100 && election_safe && no_quorum_ok, what.str());
}

// ---- 7: desync mitigation -------------------------------------------------

void criterion_7() {
    ScenarioConfig config;
    config.seed = 9;
    const SimTime corrupt_at = 2600;
    FaultSchedule faults;
    faults.events.push_back({corrupt_at, "OrgESPOCH-peer-1", FaultAction::corrupt_ledger});
    Scenario scenario(config, small_workload(9, 10), faults);
    ScenarioReport r = scenario.run();

    bool halted = true;
    for (const auto& p : r.proposals)
        if (p.peer == "OrgESPOCH-peer-1" && p.time >= corrupt_at) halted = false;

    Peer* corrupted = scenario.find_peer("OrgESPOCH-peer-1");
    const BlockStore& source = scenario.authoritative_store();
    corrupted->resync(source, scenario.setup().directory, scenario.policy());
    const bool resynced = serialize_store(corrupted->store) == serialize_store(source) &&
                          corrupted->head_digest() == source.head_digest() &&
                          corrupted->local_audit();

    std::ostringstream what;
    what << "desync mitigation: corrupted peer got zero proposals after corruption ("
         << (halted ? "yes" : "no") << "), resync restored byte-identical chain ("
         << (resynced ? "yes" : "no") << ")";
    report(7, halted && r.peers.at("OrgESPOCH-peer-1").status == "diverged" && resynced,
           what.str());
}

// ---- 8: endorsement policy threshold --------------------------------------

void criterion_8() {
    ScenarioConfig config;
    config.seed = 10;
    NetworkSetup net = make_network(config, config.seed);
    const EndorsementPolicy policy = net.channel_config.policy;  // required = 4

    ScientificRecord record = generate_records(10, 1)[0];
    TransactionEnvelope env;
    env.header.creator = "collab-OrgUIS";
    env.header.channel = config.channel;
    env.header.timestamp_ms = 1;
    env.header.nonce = Bytes(16, 0x5a);
    env.header.tx_id = compute_tx_id(env.header.creator, env.header.nonce);
    env.payload = make_create_invocation(record).encode();
    env.creator_signature =
        sign(net.keys.at("collab-OrgUIS").private_key, env.signing_payload());

    const char* endorsers[4] = {"OrgUIS-peer-0", "OrgUIS-peer-1", "OrgESPOCH-peer-0",
                                "OrgESPOCH-peer-1"};
    for (const char* e : endorsers)
        env.endorsements.push_back({e, sign(net.keys.at(e).private_key, env.signing_payload())});

    WorldState full_state;
    ApplyResult with_4 = apply_envelope(full_state, env, net.directory, policy);

    TransactionEnvelope short_env = env;
    short_env.endorsements.pop_back();  // 3 < required 4
    WorldState short_state;
    ApplyResult with_3 = apply_envelope(short_state, short_env, net.directory, policy);

    std::ostringstream what;
    what << "endorsement policy: 4 endorsements -> flag " << (with_4.valid ? "true" : "false")
         << ", 3 endorsements -> flag " << (with_3.valid ? "true" : "false")
         << " with untouched state";
    report(8,
           with_4.valid && record_exists(full_state, record.id) && !with_3.valid &&
               short_state.entries.empty() && !with_3.reason.empty(),
           what.str());
}

// ---- 9: determinism --------------------------------------------------------

void criterion_9() {
    ScenarioConfig config;
    config.seed = 4242;
    FaultSchedule faults = leader_crash_schedule();
    Workload workload = small_workload(4242, 20);

    Scenario a(config, workload, faults);
    ScenarioReport ra = a.run();
    Scenario b(config, workload, faults);
    ScenarioReport rb = b.run();

    const bool ledgers_equal =
        serialize_store(a.authoritative_store()) == serialize_store(b.authoritative_store());
    const bool reports_equal = canonical_dump(ra.to_json()) == canonical_dump(rb.to_json());
    const bool verify_equal =
        canonical_dump(verify_chain(a.authoritative_store(), a.setup().directory,
                                    VerifyMode::strict)
                           .to_json()) ==
        canonical_dump(verify_chain(b.authoritative_store(), b.setup().directory,
                                    VerifyMode::strict)
                           .to_json());

    std::ostringstream what;
    what << "determinism: identical seeds give byte-identical ledger files ("
         << (ledgers_equal ? "yes" : "no") << "), scenario reports ("
         << (reports_equal ? "yes" : "no") << ") and verification reports ("
         << (verify_equal ? "yes" : "no") << ")";
    report(9, ledgers_equal && reports_equal && verify_equal, what.str());
}

}  // namespace

int main() {
    const std::string dir = (fs::temp_directory_path() / "acceptance_corpus").string();
    fs::remove_all(dir);

    criterion_1();
    Corpus corpus = make_corpus(dir);
    criterion_2(corpus, dir);
    criterion_3(corpus, dir);
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();

    fs::remove_all(dir);
    return failures == 0 ? 0 : 1;
}
