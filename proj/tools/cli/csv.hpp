#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "xledger/types.hpp"

namespace xledger::cli {

struct CsvRow {
    Protocol protocol = Protocol::Xlpn22;
    std::uint32_t k = 0;
    std::uint32_t n = 0;
    std::uint32_t f = 0;
    std::uint64_t txn_count = 0;
    std::uint64_t rounds_total = 0;
    std::uint64_t messages_total = 0;
    std::uint64_t sim_time_units = 0;
    std::uint64_t decision_commit_count = 0;
    std::uint64_t decision_rollback_count = 0;
    std::uint64_t seed = 0;

    bool operator==(const CsvRow&) const = default;
};

inline constexpr std::string_view kCsvHeader =
    "protocol,k,n,f,txn_count,rounds_total,messages_total,sim_time_units,"
    "decision_commit_count,decision_rollback_count,seed";

std::string format_row(const CsvRow& row);
/// Header line plus one line per row, each terminated by '\n'.
std::string format_csv(const std::vector<CsvRow>& rows);
/// Inverse of format_csv; throws std::invalid_argument on a malformed table.
std::vector<CsvRow> parse_csv(std::string_view text);

/// Column value used as a plot axis: "txn_count", "k" or "n".
std::uint64_t column(const CsvRow& row, std::string_view name);

}  // namespace xledger::cli
