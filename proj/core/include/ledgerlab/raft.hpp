#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ledgerlab/ledger.hpp"
#include "ledgerlab/rng.hpp"

namespace ledgerlab {

using SimTime = int64_t;  // simulation clock, milliseconds

struct OrderingConfig {
    SimTime batch_timeout_ms = 2000;  // block cutting interval
    size_t max_envelopes_per_block = 10;
    SimTime election_timeout_min_ms = 150;
    SimTime election_timeout_max_ms = 300;
    SimTime heartbeat_interval_ms = 50;

    bool valid() const {
        return heartbeat_interval_ms < election_timeout_min_ms &&
               election_timeout_min_ms < election_timeout_max_ms &&
               max_envelopes_per_block > 0;
    }
};

enum class RaftRole { follower, candidate, leader };

// One log entry carries a whole cut block.
struct RaftLogEntry {
    uint64_t term = 0;
    Block block;
};

struct RequestVote {
    std::string candidate;
    uint64_t last_log_index = 0;  // 1-based; 0 = empty log
    uint64_t last_log_term = 0;
};

struct VoteReply {
    bool granted = false;
};

struct AppendEntriesMsg {
    std::string leader;
    uint64_t prev_index = 0;  // 1-based
    uint64_t prev_term = 0;
    std::vector<RaftLogEntry> entries;
    uint64_t leader_commit = 0;  // 1-based count of committed entries
};

struct AppendReply {
    bool success = false;
    uint64_t match_index = 0;
};

struct RaftMessage {
    uint64_t term = 0;
    std::string from;
    std::string to;
    std::variant<RequestVote, VoteReply, AppendEntriesMsg, AppendReply> body;
};

// One RAFT orderer node. Pure transition style: tick() and step() take the
// simulation time and return outbound messages; all randomness comes from the
// seeded per-node stream.
class RaftNode {
  public:
    RaftNode(std::string node_id, std::vector<std::string> peers, OrderingConfig config,
             OrdererIdentity identity, uint64_t chain_anchor_number, Digest chain_anchor_digest,
             Rng rng);

    const std::string& id() const { return id_; }
    RaftRole role() const { return role_; }
    uint64_t current_term() const { return current_term_; }
    uint64_t commit_index() const { return commit_index_; }
    const std::vector<RaftLogEntry>& log() const { return log_; }
    const std::optional<std::string>& known_leader() const { return known_leader_; }
    size_t pending_count() const { return pending_.size(); }

    std::vector<RaftMessage> tick(SimTime now);
    std::vector<RaftMessage> step(const RaftMessage& msg, SimTime now);

    // Leader only; deduplicates by tx_id against the log and the pending
    // queue. Returns false when this node is not the leader.
    bool submit(const TransactionEnvelope& envelope, SimTime now);

    // Crash/restart semantics: term, vote and log survive; volatile state is
    // rebuilt on restart.
    void restart(SimTime now);

    // Blocks with 1-based log index in (from, to] — the newly committed ones.
    std::vector<Block> committed_blocks(uint64_t from, uint64_t to) const;

  private:
    void become_follower(uint64_t term, SimTime now);
    void become_candidate(SimTime now, std::vector<RaftMessage>& out);
    void become_leader(SimTime now, std::vector<RaftMessage>& out);
    void reset_election_deadline(SimTime now);
    void send_append_entries(SimTime now, std::vector<RaftMessage>& out);
    void advance_commit();
    void cut_block(SimTime now);
    uint64_t last_log_term() const { return log_.empty() ? 0 : log_.back().term; }

    std::string id_;
    std::vector<std::string> peers_;  // other orderers
    OrderingConfig config_;
    OrdererIdentity identity_;
    Rng rng_;

    // Persistent
    uint64_t current_term_ = 0;
    std::optional<std::string> voted_for_;
    std::vector<RaftLogEntry> log_;

    // Volatile
    RaftRole role_ = RaftRole::follower;
    uint64_t commit_index_ = 0;  // 1-based count
    std::optional<std::string> known_leader_;
    SimTime election_deadline_ = 0;
    SimTime next_heartbeat_ = 0;
    std::set<std::string> votes_;
    std::map<std::string, uint64_t> next_index_;
    std::map<std::string, uint64_t> match_index_;

    // Leader block cutting
    std::deque<TransactionEnvelope> pending_;
    std::optional<SimTime> batch_deadline_;
    std::set<std::string> seen_tx_ids_;

    // The block the next cut chains onto when the log is empty.
    uint64_t anchor_number_;
    Digest anchor_digest_;
};

}  // namespace ledgerlab
