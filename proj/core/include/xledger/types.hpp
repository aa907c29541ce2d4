// Domain types shared by every protocol engine.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace xledger {

using Round = std::uint64_t;
using LedgerIndex = std::uint32_t;

/// A node is addressed by its ledger and its rank inside that ledger.
/// Rank 0 is the ledger's primary in view 0; ranks 1..n-1 are backups.
struct NodeId {
    LedgerIndex ledger = 0;
    std::uint32_t rank = 0;

    auto operator<=>(const NodeId&) const = default;
};

/// "A0", "B3", ... for the first 26 ledgers, "L27.3" beyond that.
std::string to_string(NodeId id);
std::optional<NodeId> parse_node_id(std::string_view text);

/// Dense index in [0, k*n) used by flat per-node tables.
constexpr std::size_t flat_index(NodeId id, std::uint32_t n) {
    return static_cast<std::size_t>(id.ledger) * n + id.rank;
}
constexpr NodeId from_flat(std::size_t index, std::uint32_t n) {
    return NodeId{static_cast<LedgerIndex>(index / n), static_cast<std::uint32_t>(index % n)};
}

/// COMMIT orders above ROLLBACK so aggregation is deterministic.
enum class Vote : std::uint8_t { Rollback = 0, Commit = 1 };

constexpr Vote flip(Vote v) { return v == Vote::Commit ? Vote::Rollback : Vote::Commit; }
std::string_view to_string(Vote v);

struct Decision {
    Vote value = Vote::Rollback;
    std::uint32_t backing = 0;

    bool operator==(const Decision&) const = default;
};

struct Transaction {
    std::uint64_t id = 0;
    std::vector<LedgerIndex> touched_ledgers;
    std::string payload_tag;

    bool operator==(const Transaction&) const = default;
};

enum class Protocol : std::uint8_t { Xlpn22, Vldb20, Podc18 };

std::string_view to_string(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view text);
inline constexpr Protocol kAllProtocols[] = {Protocol::Xlpn22, Protocol::Vldb20, Protocol::Podc18};

/// Attestations needed for a node-level decision: 2f+1.
constexpr std::uint32_t quorum_size(std::uint32_t f) { return 2 * f + 1; }

/// Matching replies a client needs before it trusts an outcome: f+1.
constexpr std::uint32_t client_quorum_size(std::uint32_t f) { return f + 1; }

/// Largest f with n >= 3f+1.
constexpr std::uint32_t max_faulty(std::uint32_t n) { return n == 0 ? 0 : (n - 1) / 3; }

}  // namespace xledger
