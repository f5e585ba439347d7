#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "ledgerlab/fixtures.hpp"
#include "ledgerlab/peernet.hpp"

using namespace ledgerlab;

namespace {

Workload small_workload(uint64_t seed, size_t records = 8) {
    Workload w;
    auto recs = generate_records(seed, records);
    for (size_t i = 0; i < recs.size(); ++i) {
        WorkloadItem item;
        item.time = 1000 + static_cast<SimTime>(i) * 500;
        item.kind = "record";
        item.record = recs[i];
        w.items.push_back(std::move(item));
    }
    return w;
}

}  // namespace

TEST_CASE("network setup is a pure function of config and seed") {
    ScenarioConfig config;
    NetworkSetup a = make_network(config, 3);
    NetworkSetup b = make_network(config, 3);
    NetworkSetup c = make_network(config, 4);
    CHECK(a.cert_bundle == b.cert_bundle);
    CHECK(a.genesis == b.genesis);
    CHECK(a.cert_bundle != c.cert_bundle);

    // Two orgs x (3 peers + collaborator + admin) + 3 orderers.
    CHECK(a.keys.size() == 13);
    CHECK(a.directory.ca_roots.size() == 3);  // two orgs plus the orderer org
    CHECK(a.directory.find("OrgUIS-peer-0")->role == Role::peer);
    CHECK(a.directory.find("orderer-2")->role == Role::orderer);
    CHECK(a.directory.find("collab-OrgESPOCH")->role == Role::collaborator);

    // Genesis block 0 carries the channel configuration.
    CHECK(a.genesis.header.number == 0);
    CHECK(a.genesis.header.previous_hash == kZeroDigest);
    REQUIRE(a.genesis.envelopes.size() == 1);
    auto inv = ContractInvocation::decode(a.genesis.envelopes[0].payload);
    REQUIRE(inv.has_value());
    auto cfg = ChannelConfig::from_invocation(*inv);
    REQUIRE(cfg.has_value());
    CHECK(cfg->policy.required == 4);
    CHECK(cfg->cert_bundle_digest == sha256_hex(a.cert_bundle));
}

TEST_CASE("config, workload and fault schedules round-trip through JSON") {
    ScenarioConfig config;
    config.seed = 17;
    config.policy_required = 3;
    auto back = ScenarioConfig::from_json(config.to_json());
    REQUIRE(back.has_value());
    CHECK(canonical_dump(back->to_json()) == canonical_dump(config.to_json()));
    CHECK_FALSE(ScenarioConfig::from_json(Json::array()).has_value());

    Workload w = small_workload(2, 3);
    auto wb = Workload::from_json(w.to_json());
    REQUIRE(wb.has_value());
    CHECK(canonical_dump(wb->to_json()) == canonical_dump(w.to_json()));

    FaultSchedule f = partition_schedule();
    auto fb = FaultSchedule::from_json(f.to_json());
    REQUIRE(fb.has_value());
    CHECK(canonical_dump(fb->to_json()) == canonical_dump(f.to_json()));
    // Times must be non-decreasing.
    Json bad = f.to_json();
    std::swap(bad["events"][0], bad["events"][1]);
    CHECK_FALSE(FaultSchedule::from_json(bad).has_value());
}

TEST_CASE("config validity checks") {
    ScenarioConfig c;
    CHECK(c.valid());
    c.fanout_per_org = 1;  // 2 orgs x 1 < required 4
    CHECK_FALSE(c.valid());
    c = ScenarioConfig{};
    c.ordering.heartbeat_interval_ms = 500;  // heartbeat must beat election timeout
    CHECK_FALSE(c.valid());
    CHECK_THROWS_AS(Scenario(c, Workload{}, FaultSchedule{}), ConfigError);
}

TEST_CASE("a fault-free run commits everything to every peer identically") {
    ScenarioConfig config;
    config.seed = 11;
    Scenario scenario(config, small_workload(11), FaultSchedule{});
    ScenarioReport report = scenario.run();

    CHECK(report.transactions_total == 8);
    CHECK(report.contract_invocations == 8);
    CHECK(report.rejected_envelopes == 0);
    CHECK(report.submitted_tx_ids.size() == 8);
    CHECK(report.committed_tx_ids.size() == 8);

    std::set<std::string> heads;
    std::set<std::string> states;
    for (const auto& [id, p] : report.peers) {
        CHECK(p.status == "healthy");
        heads.insert(p.head_digest);
        states.insert(p.state_digest);
    }
    CHECK(heads.size() == 1);
    CHECK(states.size() == 1);

    // The committed chain verifies strictly.
    IntegrityReport vr = verify_chain(scenario.authoritative_store(),
                                      scenario.setup().directory, VerifyMode::strict);
    CHECK(vr.verdict == Verdict::intact);

    // Endorsement fan-out: every proposal reached at most 4 peers.
    std::map<std::string, int> per_tx;
    for (const auto& p : report.proposals) ++per_tx[p.tx_id];
    for (const auto& [tx, n] : per_tx) CHECK(n == 4);
}

TEST_CASE("identical seeds give byte-identical ledgers and reports") {
    ScenarioConfig config;
    config.seed = 21;
    Scenario a(config, small_workload(21), FaultSchedule{});
    Scenario b(config, small_workload(21), FaultSchedule{});
    ScenarioReport ra = a.run();
    ScenarioReport rb = b.run();
    CHECK(canonical_dump(ra.to_json()) == canonical_dump(rb.to_json()));
    CHECK(serialize_store(a.authoritative_store()) == serialize_store(b.authoritative_store()));

    config.seed = 22;
    Scenario c(config, small_workload(21), FaultSchedule{});
    c.run();
    CHECK(serialize_store(a.authoritative_store()) != serialize_store(c.authoritative_store()));
}

TEST_CASE("a corrupted peer receives no further proposals and can resync") {
    ScenarioConfig config;
    config.seed = 31;
    FaultSchedule faults;
    const SimTime corrupt_at = 2500;
    faults.events.push_back({corrupt_at, "OrgUIS-peer-0", FaultAction::corrupt_ledger});
    Scenario scenario(config, small_workload(31), faults);
    ScenarioReport report = scenario.run();

    for (const auto& p : report.proposals)
        if (p.peer == "OrgUIS-peer-0") CHECK(p.time < corrupt_at);
    CHECK(report.peers.at("OrgUIS-peer-0").status == "diverged");
    CHECK(report.rejected_envelopes == 0);  // enough healthy peers remain

    // Resync from a healthy peer restores byte-identical state.
    Peer* corrupted = scenario.find_peer("OrgUIS-peer-0");
    REQUIRE(corrupted);
    const BlockStore& source = scenario.authoritative_store();
    corrupted->resync(source, scenario.setup().directory, scenario.policy());
    CHECK(corrupted->status == PeerStatus::healthy);
    CHECK(serialize_store(corrupted->store) == serialize_store(source));
    CHECK(corrupted->state.digest() ==
          replay_store(source, scenario.setup().directory, scenario.policy()).digest());
    CHECK(corrupted->local_audit());
}

TEST_CASE("resync refuses a tampered source") {
    ScenarioConfig config;
    config.seed = 32;
    Scenario scenario(config, small_workload(32, 4), FaultSchedule{});
    scenario.run();
    BlockStore bad = scenario.authoritative_store();
    bad.blocks[1].envelopes[0].payload[0] ^= 1;
    Peer* peer = scenario.find_peer("OrgUIS-peer-1");
    REQUIRE(peer);
    CHECK_THROWS_AS(peer->resync(bad, scenario.setup().directory, scenario.policy()),
                    SourceInvalid);
}

TEST_CASE("too few healthy peers means rejection, not partial endorsement") {
    ScenarioConfig config;
    config.seed = 33;
    FaultSchedule faults;
    // Take down all of OrgUIS before submissions: 3 healthy peers < policy 4.
    faults.events.push_back({100, "OrgUIS-peer-0", FaultAction::crash});
    faults.events.push_back({100, "OrgUIS-peer-1", FaultAction::crash});
    faults.events.push_back({100, "OrgUIS-peer-2", FaultAction::crash});
    Scenario scenario(config, small_workload(33, 4), faults);
    ScenarioReport report = scenario.run();
    CHECK(report.rejected_envelopes == 4);
    CHECK(report.committed_tx_ids.empty());
    CHECK(report.blocks_committed == 0);
}

TEST_CASE("leader crash mid-run: every submission still commits exactly once") {
    ScenarioConfig config;
    config.seed = 34;
    FaultSchedule faults;
    faults.events.push_back({2600, "orderer-leader", FaultAction::crash});
    Scenario scenario(config, small_workload(34), faults);
    ScenarioReport report = scenario.run();

    CHECK(report.fault_timeline.size() == 1);
    CHECK(report.fault_timeline[0].target.rfind("orderer-", 0) == 0);
    CHECK(report.fault_timeline[0].target != "orderer-leader");  // resolved at fire time

    std::set<std::string> submitted(report.submitted_tx_ids.begin(),
                                    report.submitted_tx_ids.end());
    std::set<std::string> committed(report.committed_tx_ids.begin(),
                                    report.committed_tx_ids.end());
    CHECK(committed == submitted);
    CHECK(report.committed_tx_ids.size() == committed.size());  // no duplicates

    // A new leader appears with a higher term.
    REQUIRE(report.leaders.size() >= 2);
    CHECK(report.leaders.back().term > report.leaders.front().term);
    CHECK(report.leaders.back().node != report.fault_timeline[0].target);
}

TEST_CASE("a partitioned orderer rejoins without divergence") {
    ScenarioConfig config;
    config.seed = 35;
    Scenario scenario(config, small_workload(35), partition_schedule());
    ScenarioReport report = scenario.run();
    std::set<std::string> submitted(report.submitted_tx_ids.begin(),
                                    report.submitted_tx_ids.end());
    std::set<std::string> committed(report.committed_tx_ids.begin(),
                                    report.committed_tx_ids.end());
    CHECK(committed == submitted);
    std::set<std::string> heads;
    for (const auto& [id, p] : report.peers) heads.insert(p.head_digest);
    CHECK(heads.size() == 1);
}

TEST_CASE("preload continues an existing chain") {
    ScenarioConfig config;
    config.seed = 36;
    Scenario first(config, small_workload(36, 4), FaultSchedule{});
    first.run();
    BlockStore chain = first.authoritative_store();
    const size_t base = chain.size();

    Workload more;
    auto recs = generate_records(99, 3);
    for (size_t i = 0; i < recs.size(); ++i) {
        WorkloadItem item;
        item.time = 1000 + static_cast<SimTime>(i) * 500;
        item.kind = "record";
        item.record = recs[i];
        more.items.push_back(std::move(item));
    }
    Scenario second(config, more, FaultSchedule{});
    second.preload_store(chain);
    ScenarioReport report = second.run();
    CHECK(report.committed_tx_ids.size() == 3);

    const BlockStore& extended = second.authoritative_store();
    CHECK(extended.size() > base);
    // The preloaded prefix is untouched.
    for (size_t i = 0; i < base; ++i) CHECK(extended.blocks[i] == chain.blocks[i]);
    CHECK(verify_chain(extended, second.setup().directory, VerifyMode::strict).verdict ==
          Verdict::intact);
}

TEST_CASE("endorsement is refused for proposals that fail simulation") {
    ScenarioConfig config;
    config.seed = 37;
    auto recs = generate_records(37, 1);
    Workload w;
    WorkloadItem good;
    good.time = 1000;
    good.kind = "record";
    good.record = recs[0];
    w.items.push_back(good);
    WorkloadItem dup = good;  // same record id again: create must refuse
    dup.time = 4000;
    w.items.push_back(dup);
    Scenario scenario(config, w, FaultSchedule{});
    ScenarioReport report = scenario.run();
    CHECK(report.committed_tx_ids.size() == 1);
    CHECK(report.rejected_envelopes == 1);
}
