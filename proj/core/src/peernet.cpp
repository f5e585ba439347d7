#include "ledgerlab/peernet.hpp"

#include <algorithm>

namespace ledgerlab {

// ---- Peer -----------------------------------------------------------------

bool Peer::local_audit() const {
    Digest expected_prev = kZeroDigest;
    for (size_t i = 0; i < store.blocks.size(); ++i) {
        const Block& b = store.blocks[i];
        if (b.header.number != i) return false;
        if (b.header.previous_hash != expected_prev) return false;
        if (compute_data_hash(b.envelopes) != b.header.data_hash) return false;
        expected_prev = header_digest(b.header);
    }
    return true;
}

bool Peer::audit_incremental() {
    if (store.empty()) return true;
    const size_t start = audited_upto > 0 ? std::min(audited_upto - 1, store.size() - 1)
                                          : 0;  // re-check the previous tail
    Digest expected_prev = start == 0 ? kZeroDigest
                                      : header_digest(store.blocks[start - 1].header);
    for (size_t i = start; i < store.blocks.size(); ++i) {
        const Block& b = store.blocks[i];
        if (b.header.number != i) return false;
        if (b.header.previous_hash != expected_prev) return false;
        if (compute_data_hash(b.envelopes) != b.header.data_hash) return false;
        expected_prev = header_digest(b.header);
    }
    audited_upto = store.size();
    return true;
}

EndorseOutcome Peer::endorse_proposal(const Proposal& proposal,
                                      const MembershipDirectory& directory) {
    if (status != PeerStatus::healthy) return {std::nullopt, "PeerUnavailable"};
    const Certificate* creator = directory.find(proposal.header.creator);
    if (!creator)
        return {std::nullopt, "EndorsementRefused: unknown creator " + proposal.header.creator};
    const Bytes signed_bytes = envelope_signing_payload(proposal.header, proposal.payload);
    if (!verify_signature(creator->public_key, signed_bytes, proposal.creator_signature))
        return {std::nullopt, "EndorsementRefused: creator signature invalid"};
    auto inv = ContractInvocation::decode(proposal.payload);
    if (!inv) return {std::nullopt, "EndorsementRefused: malformed invocation"};
    ApplyResult sim = simulate_invocation(state, *creator, *inv);
    if (!sim.valid) return {std::nullopt, "EndorsementRefused: " + sim.reason};
    return {Endorsement{certificate.subject_name, sign(private_key, signed_bytes)}, ""};
}

bool Peer::validate_and_commit(const Block& block, const MembershipDirectory& directory,
                               const EndorsementPolicy& policy) {
    if (status != PeerStatus::healthy) return false;
    // Cheap tail self-check: a corrupted head must not be built upon.
    if (!store.empty()) {
        const Block& last = store.blocks.back();
        if (compute_data_hash(last.envelopes) != last.header.data_hash) {
            status = PeerStatus::diverged;
            return false;
        }
    }
    const uint64_t next = store.size();
    if (block.header.number < next) return true;   // already committed
    if (block.header.number > next) return false;  // gap, wait for redelivery
    if (block.header.previous_hash != store.head_digest()) {
        status = PeerStatus::diverged;
        return false;
    }
    Block committed = block;
    committed.metadata.validity_flags.clear();
    for (const auto& env : committed.envelopes) {
        ApplyResult r = apply_envelope(state, env, directory, policy);
        committed.metadata.validity_flags.push_back(r.valid);
    }
    store.append_block(std::move(committed));
    return true;
}

bool Peer::detect_divergence(const Digest& authoritative_digest) const {
    return head_digest() != authoritative_digest || !local_audit();
}

WorldState replay_store(const BlockStore& store, const MembershipDirectory& directory,
                        const EndorsementPolicy& policy) {
    WorldState ws;
    for (size_t i = 1; i < store.blocks.size(); ++i)
        for (const auto& env : store.blocks[i].envelopes) apply_envelope(ws, env, directory, policy);
    return ws;
}

void Peer::resync(const BlockStore& source, const MembershipDirectory& directory,
                  const EndorsementPolicy& policy) {
    IntegrityReport report = verify_chain(source, directory, VerifyMode::strict);
    if (report.verdict != Verdict::intact)
        throw SourceInvalid("resync source fails verification with " +
                            std::to_string(report.violations.size()) + " violations");
    store = source;
    state = replay_store(store, directory, policy);
    status = PeerStatus::healthy;
}

// ---- Configuration --------------------------------------------------------

Json ScenarioConfig::to_json() const {
    Json orgs_json = Json::array();
    for (const auto& o : orgs) orgs_json.push_back(Json{{"name", o.name}, {"site", o.site}});
    return Json{{"batch_timeout_ms", ordering.batch_timeout_ms},
                {"channel", channel},
                {"commit_timeout_ms", commit_timeout_ms},
                {"election_timeout_max_ms", ordering.election_timeout_max_ms},
                {"election_timeout_min_ms", ordering.election_timeout_min_ms},
                {"fanout_per_org", fanout_per_org},
                {"heartbeat_interval_ms", ordering.heartbeat_interval_ms},
                {"horizon_extra_ms", horizon_extra_ms},
                {"jitter_max_ms", jitter_max_ms},
                {"jitter_min_ms", jitter_min_ms},
                {"max_envelopes_per_block", ordering.max_envelopes_per_block},
                {"orderer_count", orderer_count},
                {"orgs", std::move(orgs_json)},
                {"peers_per_org", peers_per_org},
                {"policy_required", policy_required},
                {"seed", seed},
                {"tick_interval_ms", tick_interval_ms}};
}

std::optional<ScenarioConfig> ScenarioConfig::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    ScenarioConfig c;
    try {
        c.channel = j.value("channel", c.channel);
        if (j.contains("orgs")) {
            c.orgs.clear();
            for (const auto& o : j.at("orgs"))
                c.orgs.push_back({o.at("name").get<std::string>(), o.at("site").get<std::string>()});
        }
        c.peers_per_org = j.value("peers_per_org", c.peers_per_org);
        c.orderer_count = j.value("orderer_count", c.orderer_count);
        c.ordering.batch_timeout_ms = j.value("batch_timeout_ms", c.ordering.batch_timeout_ms);
        c.ordering.max_envelopes_per_block =
            j.value("max_envelopes_per_block", c.ordering.max_envelopes_per_block);
        c.ordering.election_timeout_min_ms =
            j.value("election_timeout_min_ms", c.ordering.election_timeout_min_ms);
        c.ordering.election_timeout_max_ms =
            j.value("election_timeout_max_ms", c.ordering.election_timeout_max_ms);
        c.ordering.heartbeat_interval_ms =
            j.value("heartbeat_interval_ms", c.ordering.heartbeat_interval_ms);
        c.policy_required = j.value("policy_required", c.policy_required);
        c.fanout_per_org = j.value("fanout_per_org", c.fanout_per_org);
        c.jitter_min_ms = j.value("jitter_min_ms", c.jitter_min_ms);
        c.jitter_max_ms = j.value("jitter_max_ms", c.jitter_max_ms);
        c.tick_interval_ms = j.value("tick_interval_ms", c.tick_interval_ms);
        c.commit_timeout_ms = j.value("commit_timeout_ms", c.commit_timeout_ms);
        c.horizon_extra_ms = j.value("horizon_extra_ms", c.horizon_extra_ms);
        c.seed = j.value("seed", c.seed);
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return c;
}

bool ScenarioConfig::valid() const {
    if (!ordering.valid()) return false;
    if (orgs.empty() || peers_per_org < 1 || orderer_count < 1) return false;
    if (fanout_per_org * static_cast<int>(orgs.size()) < policy_required) return false;
    if (jitter_min_ms < 0 || jitter_max_ms < jitter_min_ms) return false;
    return true;
}

NetworkSetup make_network(const ScenarioConfig& config, uint64_t seed) {
    NetworkSetup net;
    auto entity_seed = [&](const std::string& name) {
        return sha256("ledgerlab:" + std::to_string(seed) + ":" + name);
    };

    struct Ca {
        CaRecord record;
        KeyPair keys;
    };
    std::map<std::string, Ca> cas;
    std::vector<std::string> ca_orgs;
    for (const auto& org : config.orgs) ca_orgs.push_back(org.name);
    ca_orgs.push_back(kOrdererOrg);
    for (const auto& org : ca_orgs) {
        auto [record, keys] = create_ca(org, entity_seed("ca:" + org));
        net.directory.ca_roots[org] = record.public_key;
        cas[org] = {record, keys};
    }

    auto issue = [&](const std::string& name, const std::string& org, Role role) {
        KeyPair kp = keypair_from_seed(entity_seed("id:" + name));
        const Ca& ca = cas.at(org);
        Certificate cert = issue_certificate(ca.keys.private_key, ca.record.name, name, org, role,
                                             kp.public_key);
        net.directory.add_certificate(cert);
        net.keys[name] = std::move(kp);
    };

    for (const auto& org : config.orgs) {
        for (int i = 0; i < config.peers_per_org; ++i)
            issue(org.name + "-peer-" + std::to_string(i), org.name, Role::peer);
        issue("collab-" + org.name, org.name, Role::collaborator);
        issue("admin-" + org.name, org.name, Role::admin);
    }
    for (int i = 0; i < config.orderer_count; ++i)
        issue("orderer-" + std::to_string(i), kOrdererOrg, Role::orderer);

    net.cert_bundle = serialize_directory(net.directory);
    net.channel_config.policy.required = config.policy_required;
    net.channel_config.cert_bundle_digest = sha256_hex(net.cert_bundle);

    // Genesis: one configuration envelope, admin-signed, orderer-built.
    const std::string admin = "admin-" + config.orgs.front().name;
    TransactionEnvelope env;
    Digest nonce_seed = entity_seed("genesis-nonce");
    env.header.creator = admin;
    env.header.channel = config.channel;
    env.header.timestamp_ms = 0;
    env.header.nonce.assign(nonce_seed.begin(), nonce_seed.begin() + 16);
    env.header.tx_id = compute_tx_id(admin, env.header.nonce);
    env.payload = net.channel_config.to_invocation().encode();
    env.creator_signature = sign(net.keys.at(admin).private_key, env.signing_payload());

    const std::string orderer0 = "orderer-0";
    OrdererIdentity orderer{*net.directory.find(orderer0), net.keys.at(orderer0).private_key};
    net.genesis = build_block(0, kZeroDigest, {std::move(env)}, orderer);
    return net;
}

// ---- Faults and workload --------------------------------------------------

std::string fault_action_name(FaultAction a) {
    switch (a) {
        case FaultAction::crash: return "crash";
        case FaultAction::restart: return "restart";
        case FaultAction::partition_on: return "partition_on";
        case FaultAction::partition_off: return "partition_off";
        case FaultAction::corrupt_ledger: return "corrupt_ledger";
    }
    return "crash";
}

std::optional<FaultAction> fault_action_from_name(std::string_view s) {
    if (s == "crash") return FaultAction::crash;
    if (s == "restart") return FaultAction::restart;
    if (s == "partition_on") return FaultAction::partition_on;
    if (s == "partition_off") return FaultAction::partition_off;
    if (s == "corrupt_ledger") return FaultAction::corrupt_ledger;
    return std::nullopt;
}

Json FaultSchedule::to_json() const {
    Json events_json = Json::array();
    for (const auto& e : events)
        events_json.push_back(Json{{"action", fault_action_name(e.action)},
                                   {"target", e.target},
                                   {"time_ms", e.time}});
    return Json{{"events", std::move(events_json)}};
}

std::optional<FaultSchedule> FaultSchedule::from_json(const Json& j) {
    if (!j.is_object() || !j.contains("events")) return std::nullopt;
    FaultSchedule s;
    SimTime last = 0;
    for (const auto& e : j.at("events")) {
        auto action = fault_action_from_name(e.value("action", ""));
        if (!action || !e.contains("target") || !e.contains("time_ms")) return std::nullopt;
        FaultEvent ev{e.at("time_ms").get<SimTime>(), e.at("target").get<std::string>(), *action};
        if (ev.time < last) return std::nullopt;  // times non-decreasing
        last = ev.time;
        s.events.push_back(std::move(ev));
    }
    return s;
}

Json WorkloadItem::to_json() const {
    Json j{{"kind", kind}, {"time_ms", time}};
    if (kind == "record") j["record"] = record.to_json();
    else j["lifecycle_args"] = lifecycle_args;
    return j;
}

std::optional<WorkloadItem> WorkloadItem::from_json(const Json& j) {
    if (!j.is_object()) return std::nullopt;
    WorkloadItem item;
    try {
        item.time = j.at("time_ms").get<SimTime>();
        item.kind = j.at("kind").get<std::string>();
        if (item.kind == "record") {
            auto r = ScientificRecord::from_json(j.at("record"));
            if (!r) return std::nullopt;
            item.record = std::move(*r);
        } else if (item.kind == "lifecycle") {
            item.lifecycle_args = j.value("lifecycle_args", Json::object());
        } else {
            return std::nullopt;
        }
    } catch (const Json::exception&) {
        return std::nullopt;
    }
    return item;
}

Json Workload::to_json() const {
    Json arr = Json::array();
    for (const auto& i : items) arr.push_back(i.to_json());
    return Json{{"items", std::move(arr)}};
}

std::optional<Workload> Workload::from_json(const Json& j) {
    if (!j.is_object() || !j.contains("items")) return std::nullopt;
    Workload w;
    for (const auto& item_json : j.at("items")) {
        auto item = WorkloadItem::from_json(item_json);
        if (!item) return std::nullopt;
        w.items.push_back(std::move(*item));
    }
    return w;
}

// ---- Report ---------------------------------------------------------------

Json ScenarioReport::to_json() const {
    Json peers_json = Json::object();
    for (const auto& [id, p] : peers)
        peers_json[id] = Json{{"blocks", p.blocks},
                              {"head_digest", p.head_digest},
                              {"state_digest", p.state_digest},
                              {"status", p.status}};
    Json proposals_json = Json::array();
    for (const auto& p : proposals)
        proposals_json.push_back(Json{{"peer", p.peer}, {"time_ms", p.time}, {"tx_id", p.tx_id}});
    Json faults_json = Json::array();
    for (const auto& f : fault_timeline)
        faults_json.push_back(Json{{"action", f.action}, {"target", f.target}, {"time_ms", f.time}});
    Json leaders_json = Json::array();
    for (const auto& l : leaders)
        leaders_json.push_back(Json{{"node", l.node}, {"term", l.term}, {"time_ms", l.time}});
    return Json{{"blocks_committed", blocks_committed},
                {"committed_tx_ids", committed_tx_ids},
                {"contract_invocations", contract_invocations},
                {"fault_timeline", std::move(faults_json)},
                {"leaders", std::move(leaders_json)},
                {"peers", std::move(peers_json)},
                {"proposals", std::move(proposals_json)},
                {"rejected_envelopes", rejected_envelopes},
                {"submitted_tx_ids", submitted_tx_ids},
                {"transactions_total", transactions_total}};
}

// ---- Scenario -------------------------------------------------------------

Scenario::Scenario(ScenarioConfig config, Workload workload, FaultSchedule faults)
    : config_(std::move(config)),
      workload_(std::move(workload)),
      faults_(std::move(faults)),
      setup_(make_network(config_, config_.seed)),
      rng_(Rng(config_.seed).fork("scenario")) {
    if (!config_.valid()) throw ConfigError("invalid scenario configuration");

    anchor_number_ = setup_.genesis.header.number;
    for (int i = 0; i < config_.orderer_count; ++i) {
        const std::string id = "orderer-" + std::to_string(i);
        std::vector<std::string> others;
        for (int k = 0; k < config_.orderer_count; ++k)
            if (k != i) others.push_back("orderer-" + std::to_string(k));
        OrdererIdentity identity{*setup_.directory.find(id), setup_.keys.at(id).private_key};
        orderers_.emplace_back(id, std::move(others), config_.ordering, std::move(identity),
                               setup_.genesis.header.number, header_digest(setup_.genesis.header),
                               rng_.fork("raft:" + id));
    }

    for (const auto& org : config_.orgs) {
        for (int i = 0; i < config_.peers_per_org; ++i) {
            const std::string id = org.name + "-peer-" + std::to_string(i);
            Peer p;
            p.peer_id = id;
            p.organization = org.name;
            p.certificate = *setup_.directory.find(id);
            p.private_key = setup_.keys.at(id).private_key;
            p.store.channel = config_.channel;
            p.store.append_block(setup_.genesis);
            peers_.push_back(std::move(p));
        }
    }
}

void Scenario::preload_store(const BlockStore& store) {
    if (ran_) throw ConfigError("preload_store must precede run()");
    for (auto& p : peers_) {
        p.store = store;
        p.state = replay_store(store, setup_.directory, policy());
    }
    anchor_number_ = store.blocks.back().header.number;
    const uint64_t anchor_number = anchor_number_;
    const Digest anchor_digest = store.head_digest();
    std::vector<RaftNode> rebuilt;
    for (int i = 0; i < config_.orderer_count; ++i) {
        const std::string id = "orderer-" + std::to_string(i);
        std::vector<std::string> others;
        for (int k = 0; k < config_.orderer_count; ++k)
            if (k != i) others.push_back("orderer-" + std::to_string(k));
        OrdererIdentity identity{*setup_.directory.find(id), setup_.keys.at(id).private_key};
        rebuilt.emplace_back(id, std::move(others), config_.ordering, std::move(identity),
                             anchor_number, anchor_digest, rng_.fork("raft2:" + id));
    }
    orderers_ = std::move(rebuilt);
}

void Scenario::schedule(SimTime time, EventBody body) {
    queue_.push(Event{time, seq_++, std::move(body)});
}

SimTime Scenario::jitter(SimTime now) {
    return now + rng_.range(config_.jitter_min_ms, config_.jitter_max_ms);
}

bool Scenario::node_online(const std::string& id) const { return !crashed_.count(id); }
bool Scenario::node_partitioned(const std::string& id) const { return partitioned_.count(id) > 0; }

RaftNode* Scenario::current_leader() {
    RaftNode* best = nullptr;
    for (auto& node : orderers_) {
        if (!node_online(node.id()) || node_partitioned(node.id())) continue;
        if (node.role() != RaftRole::leader) continue;
        if (!best || node.current_term() > best->current_term()) best = &node;
    }
    return best;
}

void Scenario::dispatch(SimTime now, std::vector<RaftMessage> msgs) {
    for (auto& msg : msgs) {
        if (node_partitioned(msg.from)) continue;
        schedule(jitter(now), RaftDeliver{std::move(msg)});
    }
}

void Scenario::record_leader_changes(SimTime now) {
    for (const auto& node : orderers_) {
        if (node.role() != RaftRole::leader) continue;
        auto it = last_seen_term_.find(node.id());
        if (it != last_seen_term_.end() && it->second == node.current_term()) continue;
        last_seen_term_[node.id()] = node.current_term();
        report_.leaders.push_back({now, node.current_term(), node.id()});
    }
}

void Scenario::deliver_committed(SimTime now) {
    RaftNode* leader = current_leader();
    if (!leader) return;
    for (auto& p : peers_) {
        if (p.status == PeerStatus::offline || node_partitioned(p.peer_id)) continue;
        if (delivery_in_flight_[p.peer_id]) continue;
        const uint64_t head = p.store.empty() ? 0 : p.store.blocks.back().header.number;
        const uint64_t have = head > anchor_number_ ? head - anchor_number_ : 0;
        if (leader->commit_index() > have) {
            auto blocks = leader->committed_blocks(have, leader->commit_index());
            delivery_in_flight_[p.peer_id] = true;
            schedule(jitter(now), BlockDeliver{p.peer_id, std::move(blocks)});
        }
    }
}

void Scenario::handle_tick(SimTime now) {
    for (auto& node : orderers_) {
        if (!node_online(node.id())) continue;
        dispatch(now, node.tick(now));
    }
    record_leader_changes(now);
    deliver_committed(now);
    if (now + config_.tick_interval_ms <= horizon_)
        schedule(now + config_.tick_interval_ms, Tick{});
}

void Scenario::poll_divergence(SimTime now) {
    (void)now;
    // Majority head digest across reachable peers is authoritative.
    std::map<std::string, int> counts;
    std::vector<std::pair<std::string, const Peer*>> heads;
    for (const auto& p : peers_) {
        if (p.status == PeerStatus::offline) continue;
        std::string h = to_hex(p.head_digest());
        counts[h]++;
        heads.emplace_back(h, &p);
    }
    if (counts.empty()) return;
    std::string majority;
    int best = -1;
    for (const auto& [h, n] : counts) {
        if (n > best) {
            best = n;
            majority = h;
        }
    }
    for (auto& p : peers_) {
        if (p.status != PeerStatus::healthy) continue;
        if (to_hex(p.head_digest()) != majority) p.status = PeerStatus::diverged;
    }
}

bool Scenario::try_submit_to_leader(const TransactionEnvelope& env, SimTime now) {
    RaftNode* leader = current_leader();
    if (!leader) return false;
    return leader->submit(env, now);
}

void Scenario::handle_submit(SimTime now, size_t index) {
    const TransactionEnvelope& env = prepared_[index];
    poll_divergence(now);

    std::vector<Endorsement> endorsements;
    const Proposal proposal{env.header, env.payload, env.creator_signature};
    for (const auto& org : config_.orgs) {
        std::vector<Peer*> candidates;
        for (auto& p : peers_)
            if (p.organization == org.name && p.status == PeerStatus::healthy)
                candidates.push_back(&p);
        for (size_t i = candidates.size(); i > 1; --i)
            std::swap(candidates[i - 1], candidates[rng_.below(i)]);
        int taken = 0;
        for (Peer* p : candidates) {
            if (taken == config_.fanout_per_org) break;
            // Local integrity audit before the proposal goes out: corrupt
            // peers must not see any further proposals.
            if (!p->audit_incremental()) {
                p->status = PeerStatus::diverged;
                continue;
            }
            report_.proposals.push_back({now, p->peer_id, env.header.tx_id});
            EndorseOutcome out = p->endorse_proposal(proposal, setup_.directory);
            if (out.endorsement) {
                endorsements.push_back(*out.endorsement);
                ++taken;
            }
        }
    }

    if (static_cast<int>(endorsements.size()) < policy().required) {
        item_rejected_[index] = true;
        ++report_.rejected_envelopes;
        return;
    }

    TransactionEnvelope& full = prepared_[index];
    full.endorsements = std::move(endorsements);
    report_.submitted_tx_ids.push_back(full.header.tx_id);
    try_submit_to_leader(full, now);
    schedule(now + config_.commit_timeout_ms, CommitCheck{index});
}

void Scenario::handle_commit_check(SimTime now, size_t index) {
    const std::string& tx = prepared_[index].header.tx_id;
    if (item_rejected_[index] || committed_set_.count(tx)) return;
    if (now >= horizon_) return;
    try_submit_to_leader(prepared_[index], now);
    schedule(now + config_.commit_timeout_ms, CommitCheck{index});
}

void Scenario::handle_block_deliver(SimTime now, const BlockDeliver& d) {
    delivery_in_flight_[d.peer_id] = false;
    Peer* p = find_peer(d.peer_id);
    if (!p || p->status != PeerStatus::healthy || node_partitioned(d.peer_id)) return;
    for (const Block& b : d.blocks) {
        const bool fresh = b.header.number >= p->store.size();
        if (!p->validate_and_commit(b, setup_.directory, policy())) break;
        if (fresh && !committed_set_.count("block:" + std::to_string(b.header.number))) {
            committed_set_.insert("block:" + std::to_string(b.header.number));
            for (size_t t = 0; t < b.envelopes.size(); ++t) {
                const auto& env = b.envelopes[t];
                committed_set_.insert(env.header.tx_id);
                report_.committed_tx_ids.push_back(env.header.tx_id);
            }
            const auto& flags = p->store.blocks.back().metadata.validity_flags;
            for (bool f : flags)
                if (!f) ++report_.rejected_envelopes;
        }
    }
    (void)now;
}

void Scenario::handle_fault(SimTime now, size_t index) {
    FaultEvent ev = faults_.events[index];
    if (ev.target == "orderer-leader") {
        RaftNode* leader = current_leader();
        ev.target = leader ? leader->id() : "orderer-0";
    }
    report_.fault_timeline.push_back({now, ev.target, fault_action_name(ev.action)});

    Peer* peer = find_peer(ev.target);
    switch (ev.action) {
        case FaultAction::crash:
            crashed_.insert(ev.target);
            if (peer) peer->status = PeerStatus::offline;
            delivery_in_flight_[ev.target] = false;
            break;
        case FaultAction::restart:
            crashed_.erase(ev.target);
            if (peer) {
                peer->status = PeerStatus::healthy;  // audits re-flag lingering corruption
            } else {
                for (auto& node : orderers_)
                    if (node.id() == ev.target) node.restart(now);
            }
            break;
        case FaultAction::partition_on:
            partitioned_.insert(ev.target);
            break;
        case FaultAction::partition_off:
            partitioned_.erase(ev.target);
            break;
        case FaultAction::corrupt_ledger:
            if (peer && !peer->store.empty()) {
                Block& victim = peer->store.blocks.back();
                if (!victim.envelopes.empty() && !victim.envelopes[0].payload.empty())
                    victim.envelopes[0].payload[0] ^= 0xff;
                else
                    victim.header.data_hash[0] ^= 0xff;
                corrupted_.insert(ev.target);
            }
            break;
    }
}

void Scenario::handle_submit_prepare() {
    prepared_.resize(workload_.items.size());
    item_rejected_.assign(workload_.items.size(), false);
    Rng nonce_rng = rng_.fork("nonce");
    std::map<std::string, std::string> site_to_org;
    for (const auto& org : config_.orgs) site_to_org[org.site] = org.name;
    for (size_t i = 0; i < workload_.items.size(); ++i) {
        const WorkloadItem& item = workload_.items[i];
        std::string creator;
        Bytes payload;
        if (item.kind == "record") {
            auto it = site_to_org.find(item.record.site_name);
            const std::string org = it != site_to_org.end() ? it->second : config_.orgs[0].name;
            creator = "collab-" + org;
            payload = make_create_invocation(item.record).encode();
        } else {
            creator = "admin-" + config_.orgs[0].name;
            payload = make_lifecycle_invocation(item.lifecycle_args).encode();
        }
        TransactionEnvelope env;
        env.header.creator = creator;
        env.header.channel = config_.channel;
        env.header.timestamp_ms = item.time;
        env.header.nonce = nonce_rng.bytes(16);
        env.header.tx_id = compute_tx_id(creator, env.header.nonce);
        env.payload = std::move(payload);
        env.creator_signature = sign(setup_.keys.at(creator).private_key, env.signing_payload());
        prepared_[i] = std::move(env);
    }
}

const Peer* Scenario::find_peer(const std::string& id) const {
    for (const auto& p : peers_)
        if (p.peer_id == id) return &p;
    return nullptr;
}

Peer* Scenario::find_peer(const std::string& id) {
    for (auto& p : peers_)
        if (p.peer_id == id) return &p;
    return nullptr;
}

const BlockStore& Scenario::authoritative_store() const {
    for (const auto& p : peers_)
        if (p.status == PeerStatus::healthy) return p.store;
    return peers_.front().store;
}

ScenarioReport Scenario::run() {
    if (ran_) throw ConfigError("scenario already ran");
    ran_ = true;

    handle_submit_prepare();

    SimTime last = 0;
    for (const auto& item : workload_.items) last = std::max(last, item.time);
    for (const auto& ev : faults_.events) last = std::max(last, ev.time);
    horizon_ = last + config_.horizon_extra_ms;

    // Faults are scheduled first so a fault and a submission at the same
    // timestamp resolve with the fault already applied.
    for (size_t i = 0; i < faults_.events.size(); ++i)
        schedule(faults_.events[i].time, FireFault{i});
    for (size_t i = 0; i < workload_.items.size(); ++i)
        schedule(workload_.items[i].time, SubmitItem{i});
    schedule(0, Tick{});

    while (!queue_.empty()) {
        Event ev = queue_.top();
        queue_.pop();
        if (ev.time > horizon_) break;
        const SimTime now = ev.time;
        std::visit(
            [&](auto&& body) {
                using T = std::decay_t<decltype(body)>;
                if constexpr (std::is_same_v<T, RaftDeliver>) {
                    const RaftMessage& msg = body.msg;
                    if (!node_online(msg.to) || node_partitioned(msg.to)) return;
                    for (auto& node : orderers_)
                        if (node.id() == msg.to) dispatch(now, node.step(msg, now));
                    record_leader_changes(now);
                    deliver_committed(now);
                } else if constexpr (std::is_same_v<T, SubmitItem>) {
                    handle_submit(now, body.index);
                } else if constexpr (std::is_same_v<T, CommitCheck>) {
                    handle_commit_check(now, body.index);
                } else if constexpr (std::is_same_v<T, FireFault>) {
                    handle_fault(now, body.index);
                } else if constexpr (std::is_same_v<T, BlockDeliver>) {
                    handle_block_deliver(now, body);
                } else {
                    handle_tick(now);
                }
            },
            ev.body);
    }

    // Final accounting against the first healthy peer's chain; only blocks
    // committed during this run (beyond the starting anchor) are counted.
    const BlockStore& ref = authoritative_store();
    for (size_t i = 0; i < ref.blocks.size(); ++i) {
        const Block& b = ref.blocks[i];
        if (b.header.number <= anchor_number_) continue;
        ++report_.blocks_committed;
        report_.transactions_total += b.envelopes.size();
        for (const auto& env : b.envelopes) {
            auto inv = ContractInvocation::decode(env.payload);
            if (inv && inv->contract_name == kContractName) ++report_.contract_invocations;
        }
    }
    for (const auto& p : peers_) {
        ScenarioReport::PeerSummary s;
        s.head_digest = to_hex(p.head_digest());
        s.state_digest = to_hex(p.state.digest());
        s.blocks = p.store.size();
        s.status = p.status == PeerStatus::healthy ? "healthy"
                   : p.status == PeerStatus::diverged ? "diverged"
                                                      : "offline";
        report_.peers[p.peer_id] = std::move(s);
    }
    return report_;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const FaultSchedule& faults,
                            const Workload& workload, uint64_t seed) {
    ScenarioConfig c = config;
    c.seed = seed;
    Scenario scenario(c, workload, faults);
    return scenario.run();
}

}  // namespace ledgerlab
