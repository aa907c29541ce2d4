// Synthetic cross-ledger workloads and the experiment grids.

#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "xledger/types.hpp"

namespace xledger {

struct AllLedgers {
    bool operator==(const AllLedgers&) const = default;
};

/// Touched-set size drawn uniformly from [min, max] (clamped to k).
struct UniformLedgers {
    std::uint32_t min = 2;
    std::uint32_t max = 2;
    bool operator==(const UniformLedgers&) const = default;
};

using LedgerPolicy = std::variant<AllLedgers, UniformLedgers>;

struct WorkloadSpec {
    std::uint64_t txn_count = 0;
    std::uint32_t k = 4;
    LedgerPolicy ledgers_per_txn = AllLedgers{};
    std::uint64_t seed = 0;
};

/// Throws std::invalid_argument for k < 2 or a UNIFORM range outside [1, k].
void validate_workload(const WorkloadSpec& spec);

/// Ids 0..txn_count-1 in order; touched ledgers sorted. Pure in `spec`.
std::vector<Transaction> generate(const WorkloadSpec& spec);

struct GridCell {
    std::uint64_t txn_count = 0;
    std::uint32_t k = 0;
    std::uint32_t n = 0;

    bool operator==(const GridCell&) const = default;
    auto operator<=>(const GridCell&) const = default;
};

enum class GridAxis : std::uint8_t { Txn, Node, Ledger };

struct ExperimentGrid {
    std::string name;  // "txn", "node", "ledger"
    GridAxis axis = GridAxis::Txn;
    std::vector<std::uint64_t> txn_counts;
    std::vector<std::uint32_t> n_values;
    std::vector<std::uint32_t> k_values;

    /// Cartesian product in (txn, k, n) order.
    std::vector<GridCell> cells() const;
    /// The varied coordinate of a cell.
    std::uint64_t axis_value(const GridCell& c) const;
};

inline constexpr std::uint64_t kDefaultTxnCount = 5000;
inline constexpr std::uint32_t kDefaultLedgers = 4;

/// TXN, NODE and LEDGER grids at full size.
std::vector<ExperimentGrid> full_grids();

/// Same grids with every transaction count scaled by cap / 16000 (at least 1),
/// so the largest cell runs `cap` transactions.
std::vector<ExperimentGrid> scaled_grids(std::uint64_t cap = 200);

/// Grid by name from `grids`; throws std::invalid_argument.
const ExperimentGrid& find_grid(const std::vector<ExperimentGrid>& grids, std::string_view name);

}  // namespace xledger
