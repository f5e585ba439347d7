#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <map>
#include <queue>
#include <set>

#include "ledgerlab/raft.hpp"

using namespace ledgerlab;

namespace {

OrdererIdentity make_identity(const std::string& name) {
    static auto [ca, ca_keys] = create_ca("OrgOrderer", sha256("raft-ca"));
    KeyPair kp = keypair_from_seed(sha256("raft-" + name));
    return {issue_certificate(ca_keys.private_key, ca.name, name, "OrgOrderer", Role::orderer,
                              kp.public_key),
            kp.private_key};
}

TransactionEnvelope make_envelope(Rng& rng) {
    TransactionEnvelope env;
    env.header.creator = "collab";
    env.header.channel = "raft-test";
    env.header.nonce = rng.bytes(16);
    env.header.tx_id = compute_tx_id(env.header.creator, env.header.nonce);
    env.payload = rng.bytes(32);
    env.creator_signature = rng.bytes(64);
    return env;
}

// Deterministic single-queue message pump around a RaftNode cluster.
class Cluster {
  public:
    explicit Cluster(uint64_t seed, size_t n = 3) : rng_(seed) {
        std::vector<std::string> names;
        for (size_t i = 0; i < n; ++i) names.push_back("n" + std::to_string(i));
        for (size_t i = 0; i < n; ++i) {
            std::vector<std::string> others;
            for (size_t k = 0; k < n; ++k)
                if (k != i) others.push_back(names[k]);
            nodes_.emplace_back(names[i], others, OrderingConfig{}, make_identity(names[i]), 0,
                                kZeroDigest, rng_.fork("node:" + names[i]));
        }
    }

    RaftNode& node(size_t i) { return nodes_[i]; }
    size_t size() const { return nodes_.size(); }
    SimTime now() const { return now_; }

    void crash(const std::string& id) { down_.insert(id); }
    void revive(const std::string& id) {
        down_.erase(id);
        find(id).restart(now_);
    }

    RaftNode* leader() {
        RaftNode* best = nullptr;
        for (auto& n : nodes_) {
            if (down_.count(n.id()) || n.role() != RaftRole::leader) continue;
            if (!best || n.current_term() > best->current_term()) best = &n;
        }
        return best;
    }

    // Advance simulated time, ticking every 10 ms and delivering messages with
    // a fixed 5 ms latency. Checks election safety after every transition.
    void run_until(SimTime until) {
        while (now_ < until) {
            now_ += 10;
            for (auto& n : nodes_)
                if (!down_.count(n.id())) send(n.tick(now_));
            while (!queue_.empty() && queue_.top().at <= now_) {
                Pending p = queue_.top();
                queue_.pop();
                if (down_.count(p.msg.to)) continue;
                send(find(p.msg.to).step(p.msg, now_));
            }
            check_election_safety();
        }
    }

    void check_election_safety() {
        for (const auto& n : nodes_) {
            if (n.role() != RaftRole::leader) continue;
            auto [it, inserted] = leader_of_term_.try_emplace(n.current_term(), n.id());
            REQUIRE_MESSAGE(it->second == n.id(),
                            "two leaders in term " << n.current_term());
        }
    }

    // Committed blocks agree across nodes up to the shortest commit index.
    void check_log_matching() {
        uint64_t min_commit = UINT64_MAX;
        for (const auto& n : nodes_) min_commit = std::min(min_commit, n.commit_index());
        for (uint64_t i = 0; i < min_commit; ++i) {
            const Block& ref = nodes_[0].log()[i].block;
            for (const auto& n : nodes_) CHECK(n.log()[i].block == ref);
        }
    }

  private:
    struct Pending {
        SimTime at;
        uint64_t seq;
        RaftMessage msg;
    };
    struct Order {
        bool operator()(const Pending& a, const Pending& b) const {
            if (a.at != b.at) return a.at > b.at;
            return a.seq > b.seq;
        }
    };

    RaftNode& find(const std::string& id) {
        for (auto& n : nodes_)
            if (n.id() == id) return n;
        throw std::runtime_error("no node " + id);
    }

    void send(std::vector<RaftMessage> msgs) {
        for (auto& m : msgs) queue_.push({now_ + 5, seq_++, std::move(m)});
    }

    Rng rng_;
    std::vector<RaftNode> nodes_;
    std::set<std::string> down_;
    std::priority_queue<Pending, std::vector<Pending>, Order> queue_;
    uint64_t seq_ = 0;
    SimTime now_ = 0;
    std::map<uint64_t, std::string> leader_of_term_;
};

std::set<std::string> committed_tx_ids(const RaftNode& n) {
    std::set<std::string> out;
    for (uint64_t i = 0; i < n.commit_index(); ++i)
        for (const auto& env : n.log()[i].block.envelopes) out.insert(env.header.tx_id);
    return out;
}

}  // namespace

TEST_CASE("a three-node cluster elects exactly one leader") {
    for (uint64_t seed = 1; seed <= 30; ++seed) {
        CAPTURE(seed);
        Cluster c(seed);
        c.run_until(2000);
        REQUIRE(c.leader() != nullptr);
        int leaders = 0;
        for (size_t i = 0; i < c.size(); ++i)
            if (c.node(i).role() == RaftRole::leader) ++leaders;
        CHECK(leaders == 1);
    }
}

TEST_CASE("submitted envelopes are batched, replicated and committed everywhere") {
    Cluster c(7);
    c.run_until(1000);
    RaftNode* leader = c.leader();
    REQUIRE(leader);

    Rng rng(70);
    std::set<std::string> submitted;
    for (int i = 0; i < 25; ++i) {
        auto env = make_envelope(rng);
        submitted.insert(env.header.tx_id);
        CHECK(leader->submit(env, c.now()));
    }
    c.run_until(c.now() + 5000);

    for (size_t i = 0; i < c.size(); ++i) {
        CHECK(committed_tx_ids(c.node(i)) == submitted);
        // Batch cap: no block holds more than the configured maximum.
        for (const auto& entry : c.node(i).log())
            CHECK(entry.block.envelopes.size() <= OrderingConfig{}.max_envelopes_per_block);
    }
    c.check_log_matching();

    // Blocks chain onto the anchor with dense numbering.
    const auto& log = leader->log();
    Digest prev = kZeroDigest;
    for (size_t i = 0; i < log.size(); ++i) {
        CHECK(log[i].block.header.number == i + 1);
        CHECK(log[i].block.header.previous_hash == prev);
        prev = header_digest(log[i].block.header);
    }
}

TEST_CASE("duplicate submissions are ordered once") {
    Cluster c(8);
    c.run_until(1000);
    RaftNode* leader = c.leader();
    REQUIRE(leader);
    Rng rng(80);
    auto env = make_envelope(rng);
    CHECK(leader->submit(env, c.now()));
    CHECK(leader->submit(env, c.now()));  // duplicate reports success, no new entry
    c.run_until(c.now() + 5000);
    int copies = 0;
    for (const auto& entry : leader->log())
        for (const auto& e : entry.block.envelopes)
            if (e.header.tx_id == env.header.tx_id) ++copies;
    CHECK(copies == 1);
}

TEST_CASE("followers reject submissions") {
    Cluster c(9);
    c.run_until(1000);
    Rng rng(90);
    auto env = make_envelope(rng);
    int accepted = 0;
    for (size_t i = 0; i < c.size(); ++i)
        if (c.node(i).submit(env, c.now())) ++accepted;
    CHECK(accepted == 1);
}

TEST_CASE("leader crash: a new leader takes over and resubmissions commit exactly once") {
    for (uint64_t seed = 100; seed < 120; ++seed) {
        CAPTURE(seed);
        Cluster c(seed);
        c.run_until(1000);
        RaftNode* first = c.leader();
        REQUIRE(first);

        Rng rng(seed);
        std::vector<TransactionEnvelope> envs;
        std::set<std::string> submitted;
        for (int i = 0; i < 6; ++i) {
            envs.push_back(make_envelope(rng));
            submitted.insert(envs.back().header.tx_id);
            first->submit(envs.back(), c.now());
        }
        c.run_until(c.now() + 3000);
        const std::string crashed = first->id();
        c.crash(crashed);
        c.run_until(c.now() + 2000);
        RaftNode* second = c.leader();
        REQUIRE(second);
        CHECK(second->id() != crashed);

        // The client retries everything; dedup keeps the order single-shot.
        for (const auto& env : envs) second->submit(env, c.now());
        c.run_until(c.now() + 5000);

        for (size_t i = 0; i < c.size(); ++i) {
            if (c.node(i).id() == crashed) continue;
            CHECK(committed_tx_ids(c.node(i)) == submitted);
            // Exactly once: count every occurrence across the whole log.
            std::map<std::string, int> copies;
            for (const auto& entry : c.node(i).log())
                for (const auto& env : entry.block.envelopes) ++copies[env.header.tx_id];
            for (const auto& [tx, n] : copies) CHECK(n == 1);
        }
        c.check_log_matching();
    }
}

TEST_CASE("no majority means no progress") {
    Cluster c(55);
    c.run_until(1000);
    RaftNode* leader = c.leader();
    REQUIRE(leader);
    Rng rng(550);

    // Crash both followers, then submit: nothing can commit.
    for (size_t i = 0; i < c.size(); ++i)
        if (&c.node(i) != leader) c.crash(c.node(i).id());
    const uint64_t committed_before = leader->commit_index();
    leader->submit(make_envelope(rng), c.now());
    c.run_until(c.now() + 4000);
    CHECK(leader->commit_index() == committed_before);
}

TEST_CASE("restart preserves term and log, resets volatile role") {
    Cluster c(33);
    c.run_until(1000);
    RaftNode* leader = c.leader();
    REQUIRE(leader);
    Rng rng(330);
    leader->submit(make_envelope(rng), c.now());
    c.run_until(c.now() + 3000);

    const std::string id = leader->id();
    const uint64_t term = leader->current_term();
    const size_t log_size = leader->log().size();
    c.crash(id);
    c.run_until(c.now() + 1000);
    c.revive(id);

    for (size_t i = 0; i < c.size(); ++i) {
        if (c.node(i).id() != id) continue;
        CHECK(c.node(i).current_term() >= term);
        CHECK(c.node(i).log().size() >= log_size);
    }
    c.run_until(c.now() + 3000);
    c.check_log_matching();
}

TEST_CASE("an isolated stale candidate cannot win with a shorter log") {
    Cluster c(44);
    c.run_until(1000);
    RaftNode* leader = c.leader();
    REQUIRE(leader);
    Rng rng(440);

    // Pick a follower and crash it, then commit new entries without it.
    std::string lagging;
    for (size_t i = 0; i < c.size(); ++i)
        if (&c.node(i) != leader) {
            lagging = c.node(i).id();
            break;
        }
    c.crash(lagging);
    for (int i = 0; i < 5; ++i) leader->submit(make_envelope(rng), c.now());
    c.run_until(c.now() + 5000);
    const auto reference = committed_tx_ids(*leader);

    // The lagging node returns and may force elections, but committed entries
    // survive by the voting rule.
    c.revive(lagging);
    c.run_until(c.now() + 5000);
    RaftNode* after = c.leader();
    REQUIRE(after);
    for (const auto& tx : reference) CHECK(committed_tx_ids(*after).count(tx) == 1);
    c.check_log_matching();
}
