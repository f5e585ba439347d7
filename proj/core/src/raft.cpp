#include "ledgerlab/raft.hpp"

#include <algorithm>

namespace ledgerlab {

RaftNode::RaftNode(std::string node_id, std::vector<std::string> peers, OrderingConfig config,
                   OrdererIdentity identity, uint64_t chain_anchor_number,
                   Digest chain_anchor_digest, Rng rng)
    : id_(std::move(node_id)),
      peers_(std::move(peers)),
      config_(config),
      identity_(std::move(identity)),
      rng_(rng),
      anchor_number_(chain_anchor_number),
      anchor_digest_(chain_anchor_digest) {
    reset_election_deadline(0);
}

void RaftNode::reset_election_deadline(SimTime now) {
    election_deadline_ =
        now + rng_.range(config_.election_timeout_min_ms, config_.election_timeout_max_ms);
}

void RaftNode::become_follower(uint64_t term, SimTime now) {
    if (term > current_term_) {
        current_term_ = term;
        voted_for_.reset();
    }
    role_ = RaftRole::follower;
    votes_.clear();
    pending_.clear();
    batch_deadline_.reset();
    reset_election_deadline(now);
}

void RaftNode::become_candidate(SimTime now, std::vector<RaftMessage>& out) {
    role_ = RaftRole::candidate;
    ++current_term_;
    voted_for_ = id_;
    votes_ = {id_};
    known_leader_.reset();
    reset_election_deadline(now);
    if (votes_.size() * 2 > peers_.size() + 1) {
        become_leader(now, out);
        return;
    }
    for (const auto& p : peers_) {
        out.push_back({current_term_, id_, p,
                       RequestVote{id_, static_cast<uint64_t>(log_.size()), last_log_term()}});
    }
}

void RaftNode::become_leader(SimTime now, std::vector<RaftMessage>& out) {
    role_ = RaftRole::leader;
    known_leader_ = id_;
    next_index_.clear();
    match_index_.clear();
    for (const auto& p : peers_) {
        next_index_[p] = log_.size() + 1;
        match_index_[p] = 0;
    }
    pending_.clear();
    batch_deadline_.reset();
    seen_tx_ids_.clear();
    for (const auto& entry : log_)
        for (const auto& env : entry.block.envelopes) seen_tx_ids_.insert(env.header.tx_id);
    // An inherited uncommitted suffix only commits once an entry of the new
    // term does; append an empty block so the suffix is not stranded.
    if (commit_index_ < log_.size()) cut_block(now);
    next_heartbeat_ = now;
    send_append_entries(now, out);
}

std::vector<RaftMessage> RaftNode::tick(SimTime now) {
    std::vector<RaftMessage> out;
    if (role_ == RaftRole::leader) {
        if (batch_deadline_ && now >= *batch_deadline_ && !pending_.empty()) cut_block(now);
        if (now >= next_heartbeat_) {
            next_heartbeat_ = now + config_.heartbeat_interval_ms;
            send_append_entries(now, out);
        }
    } else if (now >= election_deadline_) {
        become_candidate(now, out);
    }
    return out;
}

void RaftNode::send_append_entries(SimTime now, std::vector<RaftMessage>& out) {
    for (const auto& p : peers_) {
        const uint64_t next = next_index_[p];
        AppendEntriesMsg ae;
        ae.leader = id_;
        ae.prev_index = next - 1;
        ae.prev_term = ae.prev_index == 0 ? 0 : log_[ae.prev_index - 1].term;
        for (size_t i = next - 1; i < log_.size(); ++i) ae.entries.push_back(log_[i]);
        ae.leader_commit = commit_index_;
        out.push_back({current_term_, id_, p, std::move(ae)});
    }
    (void)now;
}

void RaftNode::advance_commit() {
    const size_t cluster = peers_.size() + 1;
    for (uint64_t n = log_.size(); n > commit_index_; --n) {
        if (log_[n - 1].term != current_term_) break;  // only current-term entries directly
        size_t count = 1;  // self
        for (const auto& [_, m] : match_index_)
            if (m >= n) ++count;
        if (count * 2 > cluster) {
            commit_index_ = n;
            break;
        }
    }
}

void RaftNode::cut_block(SimTime now) {
    std::vector<TransactionEnvelope> batch;
    while (!pending_.empty() && batch.size() < config_.max_envelopes_per_block) {
        batch.push_back(std::move(pending_.front()));
        pending_.pop_front();
    }
    const uint64_t number = anchor_number_ + log_.size() + 1;
    const Digest prev =
        log_.empty() ? anchor_digest_ : header_digest(log_.back().block.header);
    Block block = build_block(number, prev, std::move(batch), identity_);
    log_.push_back({current_term_, std::move(block)});
    advance_commit();  // trivially commits in a single-node cluster
    batch_deadline_ = pending_.empty() ? std::nullopt
                                       : std::optional<SimTime>(now + config_.batch_timeout_ms);
}

bool RaftNode::submit(const TransactionEnvelope& envelope, SimTime now) {
    if (role_ != RaftRole::leader) return false;
    if (seen_tx_ids_.count(envelope.header.tx_id)) return true;  // duplicate, already ordered
    seen_tx_ids_.insert(envelope.header.tx_id);
    pending_.push_back(envelope);
    if (!batch_deadline_) batch_deadline_ = now + config_.batch_timeout_ms;
    if (pending_.size() >= config_.max_envelopes_per_block) cut_block(now);
    return true;
}

std::vector<RaftMessage> RaftNode::step(const RaftMessage& msg, SimTime now) {
    std::vector<RaftMessage> out;
    if (msg.term > current_term_) become_follower(msg.term, now);

    if (const auto* rv = std::get_if<RequestVote>(&msg.body)) {
        bool granted = false;
        if (msg.term == current_term_ && (!voted_for_ || *voted_for_ == rv->candidate)) {
            const bool up_to_date =
                rv->last_log_term > last_log_term() ||
                (rv->last_log_term == last_log_term() && rv->last_log_index >= log_.size());
            if (up_to_date) {
                granted = true;
                voted_for_ = rv->candidate;
                reset_election_deadline(now);
            }
        }
        out.push_back({current_term_, id_, msg.from, VoteReply{granted}});
    } else if (const auto* vr = std::get_if<VoteReply>(&msg.body)) {
        if (role_ == RaftRole::candidate && msg.term == current_term_ && vr->granted) {
            votes_.insert(msg.from);
            if (votes_.size() * 2 > peers_.size() + 1) become_leader(now, out);
        }
    } else if (const auto* ae = std::get_if<AppendEntriesMsg>(&msg.body)) {
        if (msg.term < current_term_) {
            out.push_back({current_term_, id_, msg.from, AppendReply{false, 0}});
            return out;
        }
        if (role_ != RaftRole::follower) become_follower(msg.term, now);
        known_leader_ = ae->leader;
        reset_election_deadline(now);

        const bool prev_ok = ae->prev_index == 0 ||
                             (ae->prev_index <= log_.size() &&
                              log_[ae->prev_index - 1].term == ae->prev_term);
        if (!prev_ok) {
            out.push_back({current_term_, id_, msg.from, AppendReply{false, 0}});
            return out;
        }
        // Log matching: drop conflicting suffix, append what is missing.
        for (size_t i = 0; i < ae->entries.size(); ++i) {
            const uint64_t idx = ae->prev_index + 1 + i;  // 1-based
            if (idx <= log_.size()) {
                if (log_[idx - 1].term != ae->entries[i].term) {
                    log_.resize(idx - 1);
                    log_.push_back(ae->entries[i]);
                }
            } else {
                log_.push_back(ae->entries[i]);
            }
        }
        const uint64_t match = ae->prev_index + ae->entries.size();
        if (ae->leader_commit > commit_index_)
            commit_index_ = std::min<uint64_t>(ae->leader_commit, log_.size());
        out.push_back({current_term_, id_, msg.from, AppendReply{true, match}});
    } else if (const auto* ar = std::get_if<AppendReply>(&msg.body)) {
        if (role_ == RaftRole::leader && msg.term == current_term_) {
            if (ar->success) {
                match_index_[msg.from] = std::max(match_index_[msg.from], ar->match_index);
                next_index_[msg.from] = match_index_[msg.from] + 1;
                advance_commit();
            } else if (next_index_[msg.from] > 1) {
                --next_index_[msg.from];
            }
        }
    }
    return out;
}

void RaftNode::restart(SimTime now) {
    role_ = RaftRole::follower;
    known_leader_.reset();
    votes_.clear();
    pending_.clear();
    batch_deadline_.reset();
    next_index_.clear();
    match_index_.clear();
    seen_tx_ids_.clear();
    reset_election_deadline(now);
}

std::vector<Block> RaftNode::committed_blocks(uint64_t from, uint64_t to) const {
    std::vector<Block> out;
    for (uint64_t i = from; i < to && i < log_.size(); ++i) out.push_back(log_[i].block);
    return out;
}

}  // namespace ledgerlab
