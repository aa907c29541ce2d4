#include "xledger/workload.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace xledger {

namespace {

constexpr std::uint64_t kLargestTxnCount = 16000;

// Uniform integer in [0, bound) by rejection. std::uniform_int_distribution
// is implementation-defined, and the output must match across platforms.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

}  // namespace

void validate_workload(const WorkloadSpec& spec) {
    if (spec.k < 2) throw std::invalid_argument("workload needs k >= 2");
    if (const auto* u = std::get_if<UniformLedgers>(&spec.ledgers_per_txn)) {
        if (u->min < 1 || u->min > u->max || u->max > spec.k) {
            throw std::invalid_argument("UNIFORM range must satisfy 1 <= min <= max <= k");
        }
    }
}

std::vector<Transaction> generate(const WorkloadSpec& spec) {
    validate_workload(spec);
    std::vector<Transaction> out;
    out.reserve(spec.txn_count);
    std::mt19937_64 rng(spec.seed);
    std::vector<LedgerIndex> all(spec.k);
    std::iota(all.begin(), all.end(), 0);

    for (std::uint64_t id = 0; id < spec.txn_count; ++id) {
        Transaction t;
        t.id = id;
        t.payload_tag = "txn-" + std::to_string(id);
        if (const auto* u = std::get_if<UniformLedgers>(&spec.ledgers_per_txn)) {
            const std::uint32_t size = u->min + static_cast<std::uint32_t>(bounded(rng, u->max - u->min + 1));
            // Partial Fisher-Yates over the ledger indices.
            std::vector<LedgerIndex> pool = all;
            for (std::uint32_t i = 0; i < size; ++i) {
                const auto j = i + static_cast<std::uint32_t>(bounded(rng, spec.k - i));
                std::swap(pool[i], pool[j]);
            }
            t.touched_ledgers.assign(pool.begin(), pool.begin() + size);
            std::sort(t.touched_ledgers.begin(), t.touched_ledgers.end());
        } else {
            t.touched_ledgers = all;
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<GridCell> ExperimentGrid::cells() const {
    std::vector<GridCell> out;
    for (auto t : txn_counts) {
        for (auto k : k_values) {
            for (auto n : n_values) out.push_back({t, k, n});
        }
    }
    return out;
}

std::uint64_t ExperimentGrid::axis_value(const GridCell& c) const {
    switch (axis) {
        case GridAxis::Txn: return c.txn_count;
        case GridAxis::Node: return c.n;
        case GridAxis::Ledger: return c.k;
    }
    return 0;
}

std::vector<ExperimentGrid> full_grids() {
    return {
        {"txn", GridAxis::Txn, {1000, 2000, 4000, 5000, 8000, 16000}, {32}, {kDefaultLedgers}},
        {"node", GridAxis::Node, {kDefaultTxnCount}, {8, 16, 24, 32}, {kDefaultLedgers}},
        {"ledger", GridAxis::Ledger, {kDefaultTxnCount}, {16}, {2, 4, 6, 8}},
    };
}

std::vector<ExperimentGrid> scaled_grids(std::uint64_t cap) {
    auto grids = full_grids();
    for (auto& g : grids) {
        for (auto& t : g.txn_counts) t = std::max<std::uint64_t>(1, t * cap / kLargestTxnCount);
    }
    return grids;
}

const ExperimentGrid& find_grid(const std::vector<ExperimentGrid>& grids, std::string_view name) {
    for (const auto& g : grids) {
        if (g.name == name) return g;
    }
    throw std::invalid_argument("unknown grid '" + std::string(name) + "' (expected txn, node or ledger)");
}

}  // namespace xledger
