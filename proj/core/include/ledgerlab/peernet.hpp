#pragma once

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ledgerlab/contract.hpp"
#include "ledgerlab/identity.hpp"
#include "ledgerlab/ledger.hpp"
#include "ledgerlab/raft.hpp"
#include "ledgerlab/verifier.hpp"

namespace ledgerlab {

// ---- Peers ----------------------------------------------------------------

enum class PeerStatus { healthy, diverged, offline };

struct Proposal {
    TransactionHeader header;
    Bytes payload;
    Bytes creator_signature;
};

struct EndorseOutcome {
    std::optional<Endorsement> endorsement;
    std::string error;  // "PeerUnavailable" / "EndorsementRefused: <reason>" when empty endorsement
};

class SourceInvalid : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Peer {
    std::string peer_id;
    std::string organization;
    Certificate certificate;
    Bytes private_key;
    BlockStore store;
    WorldState state;
    PeerStatus status = PeerStatus::healthy;
    size_t audited_upto = 0;  // blocks whose data hash a previous audit confirmed

    Digest head_digest() const { return store.head_digest(); }

    // Recompute every block's data hash and the chain linkage; false on any
    // mismatch. This is what "local integrity audit" means for divergence
    // detection.
    bool local_audit() const;

    // Amortized audit used before every proposal round: checks linkage and
    // data hash of every block not yet audited, and always re-checks the tail
    // block. A peer that fails a commit-time tail check stops appending, so
    // storage corruption surfaces at the tail by the next round.
    bool audit_incremental();

    EndorseOutcome endorse_proposal(const Proposal& proposal, const MembershipDirectory& directory);

    // Appends the block after computing per-envelope validity flags. On a
    // chain-linkage failure or a failing tail self-check the peer transitions
    // to diverged and commits nothing. Returns true when committed.
    bool validate_and_commit(const Block& block, const MembershipDirectory& directory,
                             const EndorsementPolicy& policy);

    bool detect_divergence(const Digest& authoritative_digest) const;

    // Replaces the store with the source chain (verified strict first) and
    // rebuilds the world state by replay. Throws SourceInvalid.
    void resync(const BlockStore& source, const MembershipDirectory& directory,
                const EndorsementPolicy& policy);
};

// Rebuild a world state by replaying every block after genesis.
WorldState replay_store(const BlockStore& store, const MembershipDirectory& directory,
                        const EndorsementPolicy& policy);

// ---- Network setup --------------------------------------------------------

struct OrgSpec {
    std::string name;
    std::string site;
};

struct ScenarioConfig {
    std::string channel = "lago-channel";
    std::vector<OrgSpec> orgs = {{"OrgUIS", "bucaramanga"}, {"OrgESPOCH", "riobamba"}};
    int peers_per_org = 3;
    int orderer_count = 3;
    OrderingConfig ordering;
    int policy_required = 4;
    int fanout_per_org = 2;
    SimTime jitter_min_ms = 5;
    SimTime jitter_max_ms = 20;
    SimTime tick_interval_ms = 50;
    SimTime commit_timeout_ms = 8000;
    SimTime horizon_extra_ms = 30000;
    uint64_t seed = 1;

    Json to_json() const;
    static std::optional<ScenarioConfig> from_json(const Json& j);
    bool valid() const;
};

struct NetworkSetup {
    MembershipDirectory directory;
    std::map<std::string, KeyPair> keys;  // subject_name -> key pair
    std::string cert_bundle;              // serialized directory
    ChannelConfig channel_config;
    Block genesis;
};

inline constexpr const char* kOrdererOrg = "OrgOrderer";

// Deterministic: every key pair is derived from the seed and the subject name.
NetworkSetup make_network(const ScenarioConfig& config, uint64_t seed);

// ---- Faults and workload --------------------------------------------------

enum class FaultAction { crash, restart, partition_on, partition_off, corrupt_ledger };

std::string fault_action_name(FaultAction a);
std::optional<FaultAction> fault_action_from_name(std::string_view s);

struct FaultEvent {
    SimTime time = 0;
    std::string target;  // node id, or "orderer-leader" resolved at fire time
    FaultAction action = FaultAction::crash;
};

struct FaultSchedule {
    std::vector<FaultEvent> events;  // times non-decreasing

    Json to_json() const;
    static std::optional<FaultSchedule> from_json(const Json& j);
};

struct WorkloadItem {
    SimTime time = 0;
    std::string kind;  // "record" | "lifecycle"
    ScientificRecord record;  // for kind == record
    Json lifecycle_args;      // for kind == lifecycle

    Json to_json() const;
    static std::optional<WorkloadItem> from_json(const Json& j);
};

struct Workload {
    std::vector<WorkloadItem> items;

    Json to_json() const;
    static std::optional<Workload> from_json(const Json& j);
};

// ---- Scenario -------------------------------------------------------------

struct ScenarioReport {
    uint64_t blocks_committed = 0;       // beyond genesis
    uint64_t transactions_total = 0;     // envelopes over committed blocks
    uint64_t contract_invocations = 0;   // ScientificDataCollection envelopes
    uint64_t rejected_envelopes = 0;

    struct PeerSummary {
        std::string head_digest;
        std::string state_digest;
        std::string status;
        uint64_t blocks = 0;
    };
    std::map<std::string, PeerSummary> peers;

    struct ProposalDelivery {
        SimTime time;
        std::string peer;
        std::string tx_id;
    };
    std::vector<ProposalDelivery> proposals;

    struct FaultLogEntry {
        SimTime time;
        std::string target;
        std::string action;
    };
    std::vector<FaultLogEntry> fault_timeline;

    struct LeaderChange {
        SimTime time;
        uint64_t term;
        std::string node;
    };
    std::vector<LeaderChange> leaders;

    std::vector<std::string> submitted_tx_ids;
    std::vector<std::string> committed_tx_ids;  // in commit order

    Json to_json() const;
};

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Deterministic discrete-event simulation of the whole pipeline:
// gateway -> endorsement -> RAFT ordering -> peer commit.
class Scenario {
  public:
    Scenario(ScenarioConfig config, Workload workload, FaultSchedule faults);

    // Start from an existing chain instead of a fresh genesis (used by the
    // CLI submit command). The store must end in a verifiable chain.
    void preload_store(const BlockStore& store);

    ScenarioReport run();

    const NetworkSetup& setup() const { return setup_; }
    const std::vector<Peer>& peers() const { return peers_; }
    std::vector<Peer>& peers() { return peers_; }
    const Peer* find_peer(const std::string& id) const;
    Peer* find_peer(const std::string& id);
    const EndorsementPolicy& policy() const { return setup_.channel_config.policy; }

    // The committed chain as held by the first healthy peer.
    const BlockStore& authoritative_store() const;

  private:
    struct RaftDeliver {
        RaftMessage msg;
    };
    struct SubmitItem {
        size_t index;
    };
    struct CommitCheck {
        size_t index;
    };
    struct FireFault {
        size_t index;
    };
    struct BlockDeliver {
        std::string peer_id;
        std::vector<Block> blocks;
    };
    struct Tick {};
    using EventBody = std::variant<RaftDeliver, SubmitItem, CommitCheck, FireFault, BlockDeliver, Tick>;

    struct Event {
        SimTime time;
        uint64_t seq;
        EventBody body;
    };
    struct EventOrder {
        bool operator()(const Event& a, const Event& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    void schedule(SimTime time, EventBody body);
    void dispatch(SimTime now, std::vector<RaftMessage> msgs);
    void handle_tick(SimTime now);
    void handle_submit(SimTime now, size_t index);
    void handle_commit_check(SimTime now, size_t index);
    void handle_fault(SimTime now, size_t index);
    void handle_block_deliver(SimTime now, const BlockDeliver& d);
    void handle_submit_prepare();
    bool node_online(const std::string& id) const;
    bool node_partitioned(const std::string& id) const;
    RaftNode* current_leader();
    bool try_submit_to_leader(const TransactionEnvelope& env, SimTime now);
    void poll_divergence(SimTime now);
    void record_leader_changes(SimTime now);
    void deliver_committed(SimTime now);
    SimTime jitter(SimTime now);

    ScenarioConfig config_;
    Workload workload_;
    FaultSchedule faults_;
    NetworkSetup setup_;
    Rng rng_;

    std::vector<RaftNode> orderers_;
    uint64_t anchor_number_ = 0;  // block number the orderers' first log entry chains onto
    std::set<std::string> crashed_;
    std::set<std::string> partitioned_;
    std::vector<Peer> peers_;

    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
    uint64_t seq_ = 0;
    SimTime horizon_ = 0;

    // Gateway state
    std::vector<TransactionEnvelope> prepared_;           // one per workload item
    std::vector<bool> item_rejected_;
    std::set<std::string> committed_set_;
    std::map<std::string, uint64_t> last_seen_term_;      // leader-change tracking
    std::map<std::string, bool> delivery_in_flight_;
    std::set<std::string> corrupted_;                     // peers hit by corrupt_ledger

    ScenarioReport report_;
    bool ran_ = false;
};

// Convenience wrapper: build, run, and return the report.
ScenarioReport run_scenario(const ScenarioConfig& config, const FaultSchedule& faults,
                            const Workload& workload, uint64_t seed);

}  // namespace ledgerlab
