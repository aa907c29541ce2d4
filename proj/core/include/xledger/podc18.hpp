// Ring traversal with per-hop timelocks.
//
// Ledgers form a ring in ascending index order. Hops 0..k-1 travel forward
// (ledger h locks an offer to ledger h+1), hops k..2k-1 travel backward and
// claim the locked offers. Each hop is one round of two primary-to-primary
// messages followed by one PBFT execution in the receiving ledger, so a
// failure-free run takes 2k * 5 = 10k rounds.
//
// A hop whose PBFT has not finished timelock_rounds after the hop started
// expires. Forward expiry refunds everyone; backward expiry leaves ledgers
// that already claimed at COMMIT and refunds the rest.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "xledger/netsim.hpp"
#include "xledger/pbft.hpp"

namespace xledger {

class TimelockExpired : public std::runtime_error {
public:
    TimelockExpired(std::uint32_t hop, Round round);
    std::uint32_t hop() const { return hop_; }
    Round round() const { return round_; }

private:
    std::uint32_t hop_;
    Round round_;
};

struct Hop {
    LedgerIndex sender = 0;
    LedgerIndex receiver = 0;
    bool forward = true;
};

/// Hop h of a ring over k ledgers, 0 <= h < 2k.
Hop ring_hop(std::uint32_t h, std::uint32_t k);

enum class LedgerStatus : std::uint8_t { Pending, Locked, Claimed, Refunded };

std::string_view to_string(LedgerStatus s);

struct Podc18State {
    std::vector<LedgerIndex> ring;
    std::uint32_t hop = 0;
    Round timelock_rounds = 8;
    std::vector<LedgerStatus> outcome;
    /// Set once a hop timed out.
    std::optional<std::uint32_t> expired_hop;
    bool aborted = false;
    bool done = false;
};

class Podc18Engine final : public ProtocolEngine {
public:
    Podc18Engine(const World& world, EngineOptions options = {});

    Protocol protocol() const override { return Protocol::Podc18; }
    void begin(const Transaction& txn) override;
    std::vector<Envelope> emit(Round r) override;
    bool absorb(Round r, std::span<const Envelope> delivered) override;
    bool finished() const override { return state_.done; }
    std::map<NodeId, Decision> decisions() const override;

    const Podc18State& state() const { return state_; }
    NodeId primary_of(LedgerIndex l) const;
    /// Expiry of the last transaction as an exception object, if any.
    std::optional<TimelockExpired> expiry() const { return expiry_; }

private:
    void finish();
    void expire(Round r);

    const World* world_;
    EngineOptions options_;
    Podc18State state_;
    std::vector<std::uint32_t> views_;
    std::optional<PbftInstance> pbft_;
    bool in_hop_round_ = true;
    Round hop_start_ = 0;
    /// Value the current hop carries.
    Vote carried_ = Vote::Commit;
    std::vector<std::uint32_t> backing_;
    std::optional<TimelockExpired> expiry_;
    Round last_round_ = 0;
};

}  // namespace xledger
