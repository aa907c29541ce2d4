// Lock-step synchronous network simulator.
//
// Each step() is one synchronous round: the engine emits the round's
// envelopes, the fault plan filters them, and the survivors are handed back
// to the engine at the round boundary (they are visible to handlers from the
// next round on). Node handlers run in ascending NodeId order.

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "xledger/config.hpp"
#include "xledger/envelope.hpp"
#include "xledger/types.hpp"

namespace xledger {

class StalledError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LivenessViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SafetyViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Immutable view of who is faulty, shared by the simulator and engines.
class World {
public:
    explicit World(ClusterConfig cfg);

    const ClusterConfig& config() const { return cfg_; }
    const FaultPlan& plan() const { return cfg_.fault_plan; }
    std::uint32_t k() const { return cfg_.k; }
    std::uint32_t n() const { return cfg_.n; }
    std::uint32_t f() const { return cfg_.f; }
    std::uint32_t quorum() const { return quorum_size(cfg_.f); }

    bool is_byzantine(NodeId id) const { return cfg_.fault_plan.byzantine.contains(id); }
    const ByzantineStrategy* strategy(NodeId id) const;
    /// Crashed at or before round r.
    bool is_crashed(NodeId id, Round r) const;
    /// Honest and not crashed at round r.
    bool is_correct(NodeId id, Round r) const { return !is_byzantine(id) && !is_crashed(id, r); }
    /// Silent at round r: crashed, or Byzantine with the SILENT strategy.
    bool is_silent(NodeId id, Round r) const;

    std::vector<NodeId> all_nodes() const;
    std::vector<NodeId> ledger_nodes(LedgerIndex ledger) const;

private:
    ClusterConfig cfg_;
};

/// A protocol, advanced one synchronous round at a time. One instance runs one
/// transaction at a time; begin() starts the next.
class ProtocolEngine {
public:
    virtual ~ProtocolEngine() = default;

    virtual Protocol protocol() const = 0;
    virtual void begin(const Transaction& txn) = 0;
    /// Envelopes every node would send in round r if it were honest; the fault
    /// filter turns that into what the faulty nodes actually send.
    virtual std::vector<Envelope> emit(Round r) = 0;
    /// Hands over what was delivered. Returns whether any node made progress
    /// (state change, detected timeout) so the simulator can spot stalls.
    virtual bool absorb(Round r, std::span<const Envelope> delivered) = 0;
    virtual bool finished() const = 0;
    /// Final decisions of every node that finalized the current transaction.
    virtual std::map<NodeId, Decision> decisions() const = 0;
};

struct RoundReport {
    Round round = 0;
    std::uint64_t delivered = 0;
    std::uint64_t dropped = 0;
    std::uint64_t equivocations_detected = 0;

    bool operator==(const RoundReport&) const = default;
};

struct RunMetrics {
    Round rounds = 0;
    std::uint64_t messages_total = 0;
    std::map<Phase, std::uint64_t> messages_by_phase;
    /// Per-node decisions of the last transaction processed.
    std::map<NodeId, Decision> decisions;
    std::uint64_t latency_unit = 1;
    std::uint64_t sim_time = 0;
    std::uint64_t txn_count = 0;
    std::uint64_t commits = 0;
    std::uint64_t rollbacks = 0;
    std::uint64_t dropped = 0;
    std::uint64_t equivocations = 0;

    std::uint64_t messages_in(std::initializer_list<Phase> phases) const;
    bool operator==(const RunMetrics&) const = default;
};

struct FilterResult {
    std::vector<Envelope> delivered;
    std::vector<Envelope> dropped;
};

/// Applies the fault plan to one round's outbox. Envelopes from honest,
/// uncrashed senders pass untouched.
FilterResult apply_faults(std::vector<Envelope> outbox, const FaultPlan& plan, Round round);

/// Counts (src, phase, round) groups in which a sender signed two conflicting
/// statements.
std::uint64_t count_equivocations(std::span<const Envelope> delivered);

class Simulator {
public:
    explicit Simulator(ClusterConfig cfg);

    const World& world() const { return world_; }
    Round round() const { return round_; }
    bool complete() const { return complete_; }
    const RunMetrics& metrics() const { return metrics_; }
    const std::vector<RoundReport>& reports() const { return reports_; }

    /// Keeps every delivered envelope for trace dumps.
    void record_trace(bool on) { record_trace_ = on; }
    const std::vector<Envelope>& trace() const { return trace_; }

    /// Runs one synchronous round. When the engine is already finished this is
    /// a no-op that flags the run complete.
    RoundReport step(ProtocolEngine& engine);

    /// Resets the completion flag before the next transaction.
    void begin(ProtocolEngine& engine, const Transaction& txn);

private:
    World world_;
    Round round_ = 0;
    bool complete_ = false;
    bool record_trace_ = false;
    RunMetrics metrics_;
    std::vector<RoundReport> reports_;
    std::vector<Envelope> trace_;
};

/// Inputs to a protocol instance that are not part of the cluster shape.
struct EngineOptions {
    /// Value the initiator (or each PBFT primary) puts forward.
    Vote proposal = Vote::Commit;
    /// Per-ledger willingness to commit; empty means every ledger is willing.
    std::vector<Vote> ledger_inputs;

    Vote ledger_input(LedgerIndex l) const { return l < ledger_inputs.size() ? ledger_inputs[l] : Vote::Commit; }
};

struct RunOptions {
    EngineOptions engine;
    std::uint64_t latency_unit = 1;
    /// Extra rounds allowed per transaction beyond the failure-free count.
    Round liveness_slack = 3;
    bool check_safety = true;
    std::vector<Envelope>* trace_out = nullptr;
    std::vector<RoundReport>* reports_out = nullptr;
};

/// Processes transactions one protocol instance at a time and aggregates
/// metrics. Throws LivenessViolation when a transaction needs more than
/// rounds_formula + slack rounds or nobody finalizes, SafetyViolation when
/// two honest nodes finalize different values.
RunMetrics run_to_completion(Protocol protocol, const ClusterConfig& cfg, std::span<const Transaction> txns,
                             const RunOptions& options = {});

/// Values finalized by honest nodes of one transaction (size > 1 is a safety breach).
std::vector<Vote> honest_outcomes(const World& world, const std::map<NodeId, Decision>& decisions);

}  // namespace xledger
