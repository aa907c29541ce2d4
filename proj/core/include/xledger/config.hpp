#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "xledger/types.hpp"

namespace xledger {

enum class StrategyKind : std::uint8_t { Silent, WrongVote, Equivocate, Omit };

std::string_view to_string(StrategyKind kind);

/// How a Byzantine node perturbs its own outgoing envelopes.
struct ByzantineStrategy {
    StrategyKind kind = StrategyKind::Silent;
    std::set<NodeId> targets;  // Omit only: receivers that never hear from this node

    bool operator==(const ByzantineStrategy&) const = default;
};

struct FaultPlan {
    std::map<NodeId, ByzantineStrategy> byzantine;
    /// A crashed node emits nothing from this round onward.
    std::map<NodeId, Round> crash_at;
    /// Crash round of the initial initiator; folded into crash_at by World.
    std::optional<Round> initiator_fails_at;

    bool empty() const { return byzantine.empty() && crash_at.empty() && !initiator_fails_at; }
    bool operator==(const FaultPlan&) const = default;
};

struct ClusterConfig {
    std::uint32_t k = 4;
    std::uint32_t n = 4;
    std::uint32_t f = 1;
    std::uint64_t seed = 0;
    FaultPlan fault_plan;
    LedgerIndex initiator_ledger = 0;  // XLPN-22 initial initiator is this ledger's primary
    LedgerIndex witness_ledger = 0;    // VLDB-20 coordinator
    std::uint32_t timelock_rounds = 8; // PODC-18 per-hop timeout

    std::uint32_t node_count() const { return k * n; }
    bool operator==(const ClusterConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, std::string reason);
    const std::string& field() const { return field_; }
    const std::string& reason() const { return reason_; }

private:
    std::string field_;
    std::string reason_;
};

/// Accepts iff k >= 2, n >= 4, f <= max_faulty(n) and every node named by the
/// fault plan exists. A fault plan may exceed the per-ledger budget; use
/// over_budget_ledgers() to find out.
ClusterConfig validate_config(ClusterConfig cfg);

/// Ledgers whose Byzantine plus crashed node count exceeds f.
std::vector<LedgerIndex> over_budget_ledgers(const ClusterConfig& cfg);

/// Parses a JSON document with keys k, n, f, seed, fault_plan (plus the
/// optional initiator_ledger, witness_ledger, timelock_rounds). Unknown keys
/// are rejected. A missing f defaults to max_faulty(n). The result is validated.
ClusterConfig config_from_json(std::string_view text);
std::string config_to_json(const ClusterConfig& cfg);

}  // namespace xledger
