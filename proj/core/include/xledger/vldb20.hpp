// Two-phase commit over ledgers, coordinated by a witness ledger.
//
//   round 1      2PC-VOTE    witness primary -> every ledger primary (request)
//   rounds 2-5   PBFT        each ledger agrees on its vote
//   round 6      2PC-VOTE    ledger primary -> witness primary (certified vote)
//   round 7      2PC-DECIDE  witness primary -> every ledger primary (decision)
//   rounds 8-11  PBFT        each ledger agrees on the decision
//   round 12     2PC-DECIDE  ledger primary -> witness primary (ack)
//
// The witness is one of the k ledgers. Its primary sends to itself like any
// other ledger primary, so each 2PC round costs exactly k messages.

#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "xledger/netsim.hpp"
#include "xledger/pbft.hpp"

namespace xledger {

/// The witness primary went silent in a round where only it can act.
class CoordinatorBlocked : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ledger 0 unless the config names another.
LedgerIndex choose_witness(const ClusterConfig& cfg);

enum class VldbPhase : std::uint8_t { Vote, VotePbft, VoteReport, Decide, DecidePbft, Ack, Done };

std::string_view to_string(VldbPhase p);

struct Vldb20State {
    LedgerIndex witness = 0;
    VldbPhase phase = VldbPhase::Vote;
    /// Certified votes the witness received.
    std::map<LedgerIndex, Vote> ledger_votes;
    std::optional<Vote> decision;
};

class Vldb20Engine final : public ProtocolEngine {
public:
    Vldb20Engine(const World& world, EngineOptions options = {});

    Protocol protocol() const override { return Protocol::Vldb20; }
    void begin(const Transaction& txn) override;
    std::vector<Envelope> emit(Round r) override;
    bool absorb(Round r, std::span<const Envelope> delivered) override;
    bool finished() const override { return state_.phase == VldbPhase::Done; }
    std::map<NodeId, Decision> decisions() const override;

    const Vldb20State& state() const { return state_; }
    NodeId primary_of(LedgerIndex l) const;
    /// Ledgers whose decision PBFT ended without a value to agree on.
    std::vector<LedgerIndex> blocked_ledgers() const;

private:
    std::vector<Envelope> witness_broadcast(Round r, Phase phase, Body body) const;
    void start_pbft(const std::vector<std::optional<PbftProposal>>& proposals, std::optional<Vote> fallback);
    bool pbft_done() const;
    void sync_views();

    const World* world_;
    EngineOptions options_;
    Vldb20State state_;
    std::vector<std::uint32_t> views_;
    std::vector<PbftInstance> pbft_;
    /// What each ledger primary received in the last witness broadcast.
    std::vector<std::optional<Body>> inbox_;
    /// Outcome of the vote PBFT, per ledger.
    std::vector<std::optional<Vote>> ledger_vote_;
};

}  // namespace xledger
