// Textbook PBFT inside one ledger, used as the unit of cost by the baselines.
//
// Counting convention (self-messages included): PRE-PREPARE primary -> n,
// PREPARE and COMMIT n -> n, REPLY n -> requester. One failure-free
// execution therefore costs n + n^2 + n^2 + n messages in 4 rounds.

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "xledger/envelope.hpp"
#include "xledger/netsim.hpp"

namespace xledger {

class ViewChangeRequired : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class UnrecoverableLedger : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class PbftStage : std::uint8_t { PrePrepare, Prepare, Commit, Reply, ViewChange, NewView, Done, Blocked };

std::string_view to_string(PbftStage s);

struct PbftProposal {
    Vote value = Vote::Commit;
    /// Value implied by an attached certificate (e.g. a coordinator's signed
    /// decision). Backups reject a pre-prepare whose value disagrees with it.
    std::optional<Vote> certified;
};

constexpr std::uint32_t primary_rank(std::uint32_t view, std::uint32_t n) { return view % n; }

class PbftInstance {
public:
    /// Who hears about a NEW-VIEW: the ledger itself, or the whole consortium
    /// so every ledger learns the new view number.
    enum class NewViewScope : std::uint8_t { Ledger, Consortium };

    PbftInstance(const World& world, LedgerIndex ledger, std::uint32_t view,
                 NewViewScope scope = NewViewScope::Consortium);

    /// `proposal` is what the current primary holds (nullopt: it never got a
    /// request). `fallback` is what a new primary proposes when no prepared or
    /// certified value surfaces in the view change; nullopt blocks the ledger.
    void start(std::optional<PbftProposal> proposal, std::optional<Vote> fallback);

    /// When false, a required view change throws ViewChangeRequired instead.
    void allow_view_change(bool on) { allow_view_change_ = on; }

    std::vector<Envelope> emit(Round r) const;
    /// Consumes the envelopes sent by this ledger's nodes; others are ignored.
    bool absorb(Round r, std::span<const Envelope> delivered);

    PbftStage stage() const { return stage_; }
    bool done() const { return stage_ == PbftStage::Done || stage_ == PbftStage::Blocked; }
    bool blocked() const { return stage_ == PbftStage::Blocked; }
    std::uint32_t view() const { return view_; }
    NodeId primary() const { return {ledger_, primary_rank(view_, world_->n())}; }
    LedgerIndex ledger() const { return ledger_; }
    std::uint32_t view_changes() const { return view_changes_; }
    Round rounds() const { return rounds_; }

    std::optional<Vote> committed(NodeId id) const;
    std::uint32_t commit_backing(NodeId id) const;
    /// Value committed by the ledger's correct nodes, if they committed.
    std::optional<Vote> outcome() const;
    /// Correct nodes that saw a certified value in a pre-prepare or view change.
    std::optional<Vote> certified_seen() const;

private:
    struct NodeState {
        std::optional<Vote> accepted;
        std::optional<Vote> cert_seen;
        std::optional<Vote> prepared;
        std::optional<Vote> committed;
        std::uint32_t backing = 0;
    };

    bool correct(std::uint32_t rank, Round r) const;
    void enter_view_change(Round r);

    const World* world_;
    LedgerIndex ledger_;
    std::uint32_t view_;
    NewViewScope scope_;
    bool allow_view_change_ = true;
    PbftStage stage_ = PbftStage::Done;
    std::optional<PbftProposal> proposal_;
    std::optional<Vote> fallback_;
    std::optional<PbftProposal> next_view_proposal_;
    std::vector<NodeState> nodes_;
    std::uint32_t view_changes_ = 0;
    Round rounds_ = 0;
};

/// Standalone engine running one PBFT execution on one ledger; the other
/// ledgers stay idle. Decisions are the ledger nodes' committed values.
class PbftEngine final : public ProtocolEngine {
public:
    PbftEngine(const World& world, LedgerIndex ledger, PbftProposal proposal);

    Protocol protocol() const override { return Protocol::Vldb20; }
    void begin(const Transaction& txn) override;
    std::vector<Envelope> emit(Round r) override { return instance_.emit(r); }
    bool absorb(Round r, std::span<const Envelope> delivered) override { return instance_.absorb(r, delivered); }
    bool finished() const override { return instance_.done(); }
    std::map<NodeId, Decision> decisions() const override;

    PbftInstance& instance() { return instance_; }
    const PbftInstance& instance() const { return instance_; }

private:
    const World* world_;
    PbftProposal proposal_;
    PbftInstance instance_;
};

struct PbftOutcome {
    std::optional<Decision> decision;  // as seen by the ledger's correct nodes
    std::map<NodeId, Decision> node_decisions;
    Round rounds = 0;
    std::uint64_t messages = 0;
    std::uint32_t view = 0;
    std::uint32_t view_changes = 0;
};

/// Runs one PBFT execution to completion on a fresh simulator. With
/// allow_view_change=false a faulty primary raises ViewChangeRequired.
PbftOutcome pbft_execute(const ClusterConfig& cfg, LedgerIndex ledger, Vote proposal, bool allow_view_change = true);

}  // namespace xledger
