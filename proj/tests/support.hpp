// Shared fixtures for the test binaries.
#pragma once

#include <span>
#include <vector>

#include "xledger/config.hpp"
#include "xledger/netsim.hpp"

namespace xledger::test {

inline ClusterConfig cluster(std::uint32_t k, std::uint32_t n) {
    ClusterConfig cfg;
    cfg.k = k;
    cfg.n = n;
    cfg.f = max_faulty(n);
    return cfg;
}

inline RunMetrics run_one(Protocol p, const ClusterConfig& cfg, const RunOptions& options = {}) {
    const Transaction txn{};
    return run_to_completion(p, cfg, std::span<const Transaction>(&txn, 1), options);
}

inline NodeId node(const char* text) { return *parse_node_id(text); }

inline ByzantineStrategy strategy(StrategyKind kind, std::set<NodeId> targets = {}) { return {kind, std::move(targets)}; }

}  // namespace xledger::test
