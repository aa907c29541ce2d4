#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <future>
#include <iostream>
#include <sstream>

#include "cli/svg.hpp"
#include "xledger/complexity.hpp"
#include "xledger/pbft.hpp"
#include "xledger/topology.hpp"
#include "xledger/vldb20.hpp"
#include "xledger/xlpn22.hpp"

#ifndef XLEDGER_DATA_DIR
#define XLEDGER_DATA_DIR "data"
#endif

namespace xledger::cli {

namespace {

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int code(Exit e) { return static_cast<int>(e); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

// Maps the exception taxonomy onto exit codes, with one line on stderr.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return code(Exit::Config);
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return code(Exit::Io);
    } catch (const std::filesystem::filesystem_error& e) {
        err << "io error: " << e.what() << '\n';
        return code(Exit::Io);
    } catch (const SafetyViolation& e) {
        err << "safety violation: " << e.what() << '\n';
        return code(Exit::Failure);
    } catch (const LivenessViolation& e) {
        err << "liveness violation: " << e.what() << '\n';
        return code(Exit::Failure);
    } catch (const StalledError& e) {
        err << "stalled: " << e.what() << '\n';
        return code(Exit::Failure);
    } catch (const CoordinatorBlocked& e) {
        err << "coordinator blocked: " << e.what() << '\n';
        return code(Exit::Failure);
    } catch (const UnrecoverableLedger& e) {
        err << "unrecoverable ledger: " << e.what() << '\n';
        return code(Exit::Failure);
    } catch (const NoPrimaryAvailable& e) {
        err << "no primary available: " << e.what() << '\n';
        return code(Exit::Failure);
    }
}

}  // namespace

std::vector<Protocol> select_protocols(std::string_view name) {
    if (name == "all") return {std::begin(kAllProtocols), std::end(kAllProtocols)};
    if (auto p = parse_protocol(name)) return {*p};
    throw ConfigError("protocol", "expected xlpn22, vldb20, podc18 or all, got '" + std::string(name) + "'");
}

std::uint64_t effective_seed(const std::optional<std::uint64_t>& flag, std::uint64_t fallback) {
    if (const char* env = std::getenv("XLEDGER_SEED"); env != nullptr && *env != '\0') {
        std::uint64_t value = 0;
        const std::string_view text(env);
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec != std::errc{} || ptr != text.data() + text.size()) {
            throw ConfigError("XLEDGER_SEED", "not an unsigned integer: '" + std::string(text) + "'");
        }
        return value;
    }
    return flag.value_or(fallback);
}

ClusterConfig load_config(const GlobalOptions& global) {
    ClusterConfig cfg;
    if (global.config_path) {
        std::string text;
        try {
            text = read_file(*global.config_path);
        } catch (const IoError& e) {
            throw ConfigError("--config", e.what());
        }
        cfg = config_from_json(text);
    } else {
        cfg = validate_config(cfg);
    }
    cfg.seed = effective_seed(global.seed, cfg.seed);
    return cfg;
}

CsvRow run_cell(Protocol protocol, const ClusterConfig& cfg, const std::vector<Transaction>& txns) {
    const auto m = run_to_completion(protocol, cfg, txns);
    CsvRow row;
    row.protocol = protocol;
    row.k = cfg.k;
    row.n = cfg.n;
    row.f = cfg.f;
    row.txn_count = m.txn_count;
    row.rounds_total = m.rounds;
    row.messages_total = m.messages_total;
    row.sim_time_units = m.sim_time;
    row.decision_commit_count = m.commits;
    row.decision_rollback_count = m.rollbacks;
    row.seed = cfg.seed;
    return row;
}

int cmd_run(const RunArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto cfg = load_config(args.global);
        const auto protocols = select_protocols(args.global.protocol);
        WorkloadSpec spec{args.txns, cfg.k, AllLedgers{}, cfg.seed};
        if (args.uniform) spec.ledgers_per_txn = UniformLedgers{args.uniform->first, args.uniform->second};
        std::vector<Transaction> txns;
        try {
            txns = generate(spec);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("workload", e.what());
        }
        for (auto l : over_budget_ledgers(cfg)) {
            err << "warning: fault plan exceeds f=" << cfg.f << " in ledger " << l << '\n';
        }
        std::vector<CsvRow> rows;
        for (auto p : protocols) rows.push_back(run_cell(p, cfg, txns));
        const auto csv = format_csv(rows);
        if (args.global.out_dir) {
            std::filesystem::create_directories(*args.global.out_dir);
            write_file(std::filesystem::path(*args.global.out_dir) / "run.csv", csv);
        } else {
            out << csv;
        }
        return code(Exit::Ok);
    });
}

std::vector<CsvRow> bench_rows(const ExperimentGrid& grid, const std::vector<Protocol>& protocols, std::uint64_t seed) {
    std::vector<std::future<CsvRow>> jobs;
    for (auto p : protocols) {
        for (const auto& cell : grid.cells()) {
            jobs.push_back(std::async(std::launch::async, [p, cell, seed] {
                ClusterConfig cfg;
                cfg.k = cell.k;
                cfg.n = cell.n;
                cfg.f = max_faulty(cell.n);
                cfg.seed = seed;
                const auto txns = generate(WorkloadSpec{cell.txn_count, cell.k, AllLedgers{}, seed});
                return run_cell(p, validate_config(cfg), txns);
            }));
        }
    }
    std::vector<CsvRow> rows;
    rows.reserve(jobs.size());
    for (auto& j : jobs) rows.push_back(j.get());
    std::stable_sort(rows.begin(), rows.end(), [&](const CsvRow& a, const CsvRow& b) {
        const auto ka = std::tuple(static_cast<int>(a.protocol), a.txn_count, a.k, a.n);
        const auto kb = std::tuple(static_cast<int>(b.protocol), b.txn_count, b.k, b.n);
        return ka < kb;
    });
    return rows;
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto protocols = select_protocols(args.global.protocol);
        const auto seed = effective_seed(args.global.seed, 0);
        const auto grids = args.cap == 0 ? full_grids() : scaled_grids(args.cap);
        const ExperimentGrid* grid = nullptr;
        try {
            grid = &find_grid(grids, args.grid);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("grid", e.what());
        }
        const auto csv = format_csv(bench_rows(*grid, protocols, seed));
        const std::string axis = grid->axis == GridAxis::Txn ? "txn_count" : grid->axis == GridAxis::Node ? "n" : "k";
        const auto svg = render_svg(csv, axis, grid->name + " grid");

        const std::filesystem::path dir = args.global.out_dir.value_or("results");
        std::filesystem::create_directories(dir);
        write_file(dir / (grid->name + ".csv"), csv);
        write_file(dir / (grid->name + ".svg"), svg);
        out << (dir / (grid->name + ".csv")).string() << '\n' << (dir / (grid->name + ".svg")).string() << '\n';
        return code(Exit::Ok);
    });
}

RunMetrics simulate_once(Protocol protocol, std::uint32_t k, std::uint32_t n) {
    ClusterConfig cfg;
    cfg.k = k;
    cfg.n = n;
    cfg.f = max_faulty(n);
    const Transaction txn{};
    return run_to_completion(protocol, cfg, std::span<const Transaction>(&txn, 1));
}

std::string default_expectations_path() { return std::string(XLEDGER_DATA_DIR) + "/complexity_expectations.json"; }

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err, const MetricsSource& source) {
    return guarded(err, [&] {
        if (args.ks.empty() || args.ns.empty()) throw ConfigError("range", "k and n ranges must be non-empty");
        const auto protocols = select_protocols(args.global.protocol);
        const auto path = args.expectations_path.empty() ? default_expectations_path() : args.expectations_path;
        std::vector<ExpectedDelta> expectations;
        try {
            expectations = parse_expectations(read_file(path));
        } catch (const std::invalid_argument& e) {
            throw ConfigError("expectations", e.what());
        }

        out << "protocol,k,n,rounds_formula,messages_formula,rounds_counted,messages_counted,verdict\n";
        std::vector<std::string> notes;
        bool unexpected = false;
        for (auto p : protocols) {
            for (auto k : args.ks) {
                for (auto n : args.ns) {
                    const auto row = complexity_row(p, k, n);
                    const auto metrics = source(p, k, n);
                    const auto report = reconcile(metrics, p, k, n);
                    out << to_string(p) << ',' << k << ',' << n << ',' << row.rounds << ',' << row.messages << ','
                        << metrics.rounds << ',' << metrics.messages_total << ',' << to_string(report.verdict) << '\n';
                    for (const auto& c : report.components) {
                        if (c.delta == 0) continue;
                        const auto bad = unexpected_deltas(report, expectations);
                        const bool listed = std::none_of(bad.begin(), bad.end(),
                                                         [&](const ComponentDelta& d) { return d.name == c.name; });
                        std::ostringstream line;
                        line << "  " << to_string(p) << " k=" << k << " n=" << n << ' ' << c.name << ": counted "
                             << c.counted << ", formula " << c.formula << ", delta " << c.delta
                             << (listed ? " (expected)" : " (UNEXPECTED)");
                        notes.push_back(line.str());
                        unexpected = unexpected || !listed;
                    }
                }
            }
        }
        if (!notes.empty()) {
            out << "deltas:\n";
            for (const auto& s : notes) out << s << '\n';
        }
        if (unexpected) {
            err << "unexpected complexity delta\n";
            return code(Exit::UnexpectedDelta);
        }
        return code(Exit::Ok);
    });
}

int cmd_topology(const TopologyArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        ClusterConfig cfg;
        cfg.k = 3;
        cfg.n = 4;
        cfg.f = 1;
        if (args.global.config_path) cfg = load_config(args.global);
        const auto protocols = select_protocols(args.global.protocol);
        out << "protocol,phase,k,n,vertices,edges,dimension,components,exact\n";
        for (auto p : protocols) {
            for (auto phase : protocol_phases(p)) {
                const auto g = phase_graph(p, phase, cfg);
                const auto c = clique_complex(g);
                out << to_string(p) << ',' << to_string(phase) << ',' << cfg.k << ',' << cfg.n << ','
                    << g.vertices.size() << ',' << g.edges.size() << ',' << c.dimension << ',' << components(c) << ','
                    << (c.exact ? "yes" : "no") << '\n';
            }
        }
        return code(Exit::Ok);
    });
}

int run_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Cross-ledger commit protocol simulator", "xledger"};
    app.require_subcommand(1);
    GlobalOptions global;
    app.add_option("--config", global.config_path, "Cluster config (JSON)");
    app.add_option("--seed", global.seed, "Workload seed (XLEDGER_SEED overrides)");
    app.add_option("--out", global.out_dir, "Output directory");
    app.add_option("--protocol", global.protocol, "xlpn22, vldb20, podc18 or all")
        ->check(CLI::IsMember({"xlpn22", "vldb20", "podc18", "all"}));

    RunArgs run;
    auto* run_cmd = app.add_subcommand("run", "Simulate a workload and print one CSV row per protocol");
    run_cmd->add_option("--txns", run.txns, "Number of transactions")->capture_default_str();
    std::vector<std::uint32_t> uniform;
    run_cmd->add_option("--uniform", uniform, "Touched-ledger count range MIN MAX (default: all ledgers)")
        ->expected(2);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Sweep an experiment grid; write <grid>.csv and <grid>.svg");
    bench_cmd->add_option("grid", bench.grid, "txn, node or ledger")->required();
    bench_cmd->add_option("--cap", bench.cap, "Transactions in the largest cell (0: full size)")->capture_default_str();

    VerifyArgs verify;
    auto* verify_cmd = app.add_subcommand("verify-complexity", "Reconcile simulated counts with the closed forms");
    verify_cmd->add_option("--k", verify.ks, "Ledger counts")->capture_default_str();
    verify_cmd->add_option("--n", verify.ns, "Nodes per ledger")->capture_default_str();
    verify_cmd->add_option("--expectations", verify.expectations_path, "Expected-delta file");

    TopologyArgs topology;
    auto* topology_cmd = app.add_subcommand("topology", "Per-phase communication complex summary (CSV)");

    for (auto* sub : {run_cmd, bench_cmd, verify_cmd, topology_cmd}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return code(Exit::Ok);
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n';
        return code(Exit::Config);
    }

    if (*run_cmd) {
        run.global = global;
        if (!uniform.empty()) run.uniform = std::pair(uniform[0], uniform[1]);
        return cmd_run(run, out, err);
    }
    if (*bench_cmd) {
        bench.global = global;
        return cmd_bench(bench, out, err);
    }
    if (*verify_cmd) {
        verify.global = global;
        return cmd_verify(verify, out, err);
    }
    topology.global = global;
    return cmd_topology(topology, out, err);
}

}  // namespace xledger::cli
