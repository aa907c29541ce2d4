// The five-phase cross-ledger commit protocol.
//
//   VOTE-REQ    initiator -> every other node          (inter-ledger one-to-all)
//   VOTE-PREP   all-to-all inside each ledger          (intra-ledger)
//   READY       every other node -> initiator          (inter-ledger all-to-one)
//   COMMIT-REQ  initiator -> every other node          (inter-ledger one-to-all)
//   COMMIT      all-to-all inside each ledger          (intra-ledger)
//
// An intra-ledger phase costs 2n^2 + 2 messages per ledger: every node sends
// its own statement and a relay of the initiator's signed message to each
// co-ledger node (self included), and the ledger primary writes an opening
// and a closing tally record to itself.
//
// COMMIT-REQ carries the READY votes the initiator collected. Honest nodes
// recompute the decision from them, so a coordinator that flips or splits
// its decision is caught and overruled.

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "xledger/envelope.hpp"
#include "xledger/netsim.hpp"

namespace xledger {

class InitiatorFailed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoPrimaryAvailable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class Unconfirmed : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class XlpnPhase : std::uint8_t { VoteReq, VotePrep, ViewChange, NewView, Ready, CommitReq, Commit, Done };

std::string_view to_string(XlpnPhase p);

using ReadyVotes = std::map<NodeId, Vote>;

/// COMMIT iff all `expected` votes arrived and every one of them is COMMIT.
Vote decide(const ReadyVotes& votes, std::size_t expected);

/// Confirmed status backed by at least f+1 identical replies; throws
/// Unconfirmed otherwise.
Vote client_confirm(const std::vector<Decision>& replies, std::uint32_t f);

struct Xlpn22State {
    NodeId initiator;
    XlpnPhase phase = XlpnPhase::VoteReq;
    ReadyVotes ready_votes;
    std::optional<Vote> decision;
    /// Per-node count of VOTE-PREP attestations, indexed [node][value].
    std::map<NodeId, std::array<std::uint32_t, 2>> local_tally;
};

/// Per-node view of the transaction in flight.
struct XlpnNode {
    std::optional<Vote> proposal;       // VOTE-REQ as received directly
    std::uint8_t proposals_seen = 0;    // bitmask of initiator proposal values (direct or relayed)
    std::optional<Vote> adopted;        // VOTE-PREP local agreement
    std::optional<Vote> direct_decision;  // COMMIT-REQ value as received
    std::optional<Vote> certified;      // decision implied by the attached READY votes
    std::optional<Decision> final;
    bool initiator_suspected = false;
};

class Xlpn22Engine final : public ProtocolEngine {
public:
    Xlpn22Engine(const World& world, EngineOptions options = {});

    Protocol protocol() const override { return Protocol::Xlpn22; }
    void begin(const Transaction& txn) override;
    std::vector<Envelope> emit(Round r) override;
    bool absorb(Round r, std::span<const Envelope> delivered) override;
    bool finished() const override { return state_.phase == XlpnPhase::Done; }
    std::map<NodeId, Decision> decisions() const override;

    /// Phase I. Throws InitiatorFailed when the initiator is down before it sends.
    std::vector<Envelope> phase_vote_req(Round r) const;
    std::vector<Envelope> phase_vote_prep(Round r) const;
    std::vector<Envelope> phase_ready(Round r) const;
    std::vector<Envelope> phase_commit_req(Round r) const;
    std::vector<Envelope> phase_commit(Round r) const;

    /// Next ledger's primary (ascending ledger index, wrapping) that has not
    /// already failed as initiator. Once every primary has failed, the next
    /// rank of each ledger is tried. Throws NoPrimaryAvailable.
    NodeId reelect_initiator();

    const Xlpn22State& state() const { return state_; }
    const XlpnNode& node(NodeId id) const { return nodes_[flat_index(id, world_->n())]; }
    std::uint32_t view(LedgerIndex l) const { return views_[l]; }
    NodeId primary_of(LedgerIndex l) const;
    std::uint32_t reelections() const { return reelections_; }
    std::uint32_t view_changes() const { return view_changes_; }
    /// Ledgers whose VOTE-PREP produced no 2f+1 quorum at some correct node.
    std::uint32_t no_quorum_events() const { return no_quorum_; }

private:
    XlpnNode& node_mut(NodeId id) { return nodes_[flat_index(id, world_->n())]; }
    void intra_phase(Round r, Phase phase, std::vector<Envelope>& out,
                     const std::function<std::optional<Body>(NodeId)>& statement,
                     const std::function<std::optional<Body>(NodeId)>& relay) const;
    bool any_correct_non_initiator(Round r, const std::function<bool(const XlpnNode&)>& pred) const;
    Vote vote_of(NodeId id) const;

    bool absorb_vote_req(Round r, std::span<const Envelope> delivered);
    bool absorb_vote_prep(Round r, std::span<const Envelope> delivered);
    bool absorb_new_view(Round r, std::span<const Envelope> delivered);
    bool absorb_ready(Round r, std::span<const Envelope> delivered);
    bool absorb_commit_req(Round r, std::span<const Envelope> delivered);
    bool absorb_commit(Round r, std::span<const Envelope> delivered);

    const World* world_;
    EngineOptions options_;
    Xlpn22State state_;
    std::vector<XlpnNode> nodes_;
    std::vector<std::uint32_t> views_;
    std::set<NodeId> failed_initiators_;
    std::set<LedgerIndex> pending_view_change_;
    /// Set when the initiator failed after dispersing VOTE-REQ: the re-elected
    /// initiator rolls the transaction back instead of restarting it.
    bool rollback_after_failure_ = false;
    std::uint32_t reelections_ = 0;
    std::uint32_t view_changes_ = 0;
    std::uint32_t no_quorum_ = 0;
};

}  // namespace xledger
