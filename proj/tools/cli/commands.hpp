// Subcommands of the xledger tool. Each returns a process exit code and
// writes results to `out`, diagnostics to `err`.

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cli/csv.hpp"
#include "xledger/config.hpp"
#include "xledger/netsim.hpp"
#include "xledger/workload.hpp"

namespace xledger::cli {

enum class Exit : int { Ok = 0, Config = 2, Failure = 3, Io = 4, UnexpectedDelta = 5 };

struct GlobalOptions {
    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::string protocol = "all";
};

/// "all" or one protocol name; throws ConfigError.
std::vector<Protocol> select_protocols(std::string_view name);

/// XLEDGER_SEED wins over --seed, which wins over `fallback`. Throws
/// ConfigError when the variable is not an unsigned integer.
std::uint64_t effective_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback);

/// The config file named by --config, or the defaults, with the seed resolved.
ClusterConfig load_config(const GlobalOptions& global);

/// Runs `txns` and summarizes them as one CSV row.
CsvRow run_cell(Protocol protocol, const ClusterConfig& cfg, const std::vector<Transaction>& txns);

struct RunArgs {
    GlobalOptions global;
    std::uint64_t txns = 1;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> uniform;
};
int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err);

struct BenchArgs {
    GlobalOptions global;
    std::string grid;
    /// Transactions in the largest cell; 0 runs the grids at full size.
    std::uint64_t cap = 200;
};

/// Rows for every (protocol, cell) of `grid`, failure-free, sorted by
/// protocol then cell. Cells run concurrently.
std::vector<CsvRow> bench_rows(const ExperimentGrid& grid, const std::vector<Protocol>& protocols, std::uint64_t seed);
int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err);

/// Metrics of one failure-free transaction at (k, n).
using MetricsSource = std::function<RunMetrics(Protocol, std::uint32_t k, std::uint32_t n)>;
RunMetrics simulate_once(Protocol protocol, std::uint32_t k, std::uint32_t n);

struct VerifyArgs {
    GlobalOptions global;
    std::vector<std::uint32_t> ks{2, 3, 4, 6, 8};
    std::vector<std::uint32_t> ns{4, 8, 16, 32};
    std::string expectations_path;  // empty: the bundled data file
};
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err,
               const MetricsSource& source = simulate_once);

struct TopologyArgs {
    GlobalOptions global;
};
int cmd_topology(const TopologyArgs& args, std::ostream& out, std::ostream& err);

/// Path of the bundled expectations file.
std::string default_expectations_path();

/// Parses argv and dispatches.
int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace xledger::cli
