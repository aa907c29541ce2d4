#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli/commands.hpp"
#include "cli/svg.hpp"

using namespace xledger;
using namespace xledger::cli;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    TempDir() {
        path = fs::temp_directory_path() / ("xledger-cli-" + std::to_string(std::rand()) + "-" + std::to_string(++counter));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path file(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
    fs::path path;
    static inline int counter = 0;
};

std::size_t lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Invocation {
    int code;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<const char*> args) {
    args.insert(args.begin(), "xledger");
    std::ostringstream out, err;
    const int code = run_main(static_cast<int>(args.size()), args.data(), out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST_CASE("CSV rows round-trip") {
    const std::vector<CsvRow> rows{{Protocol::Xlpn22, 2, 4, 1, 10, 50, 1570, 50, 10, 0, 42},
                                   {Protocol::Podc18, 8, 16, 5, 62, 4960, 541632, 4960, 61, 1, 42}};
    const auto csv = format_csv(rows);
    CHECK(csv.substr(0, csv.find('\n')) == kCsvHeader);
    CHECK(csv.find("xlpn22,2,4,1,10,50,1570,50,10,0,42\n") != std::string::npos);
    CHECK(parse_csv(csv) == rows);
    CHECK(parse_csv(format_csv({})).empty());
    CHECK_THROWS_AS(parse_csv("a,b\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\nxlpn22,1\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv(std::string(kCsvHeader) + "\nfoo,2,4,1,1,1,1,1,1,0,0\n"), std::invalid_argument);
}

TEST_CASE("SVG is drawn from the CSV") {
    const std::vector<CsvRow> rows{{Protocol::Xlpn22, 2, 16, 5, 62, 310, 1, 310, 62, 0, 42},
                                   {Protocol::Xlpn22, 4, 16, 5, 62, 310, 1, 310, 62, 0, 42},
                                   {Protocol::Vldb20, 2, 16, 5, 62, 744, 1, 744, 62, 0, 42},
                                   {Protocol::Vldb20, 4, 16, 5, 62, 744, 1, 744, 62, 0, 42}};
    const auto svg = render_svg(format_csv(rows), "k", "ledger grid");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    std::size_t polylines = 0;
    for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++polylines;
    CHECK(polylines == 2);
    CHECK(svg.find(">xlpn22<") != std::string::npos);
    CHECK(svg.find(">podc18<") == std::string::npos);
    CHECK(render_svg(format_csv(rows), "k", "ledger grid") == svg);
    CHECK_THROWS_AS(render_svg(format_csv(rows), "seed", "x"), std::invalid_argument);
}

TEST_CASE("run: happy path, config errors and safety failures") {
    TempDir tmp;
    auto ok = invoke({"run", "--protocol", "xlpn22", "--txns", "3"});
    CHECK(ok.code == 0);
    CHECK(lines(ok.out) == 2);
    CHECK(ok.out.find("xlpn22,4,4,1,3,15,") != std::string::npos);

    CHECK(invoke({"run"}).code == 0);
    CHECK(lines(invoke({"run"}).out) == 4);

    const auto k1 = tmp.file("k1.json", R"({"k": 1, "n": 4})");
    const auto bad = invoke({"run", "--config", k1.c_str()});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("'k'") != std::string::npos);
    CHECK(invoke({"run", "--config", (tmp.path / "missing.json").c_str()}).code == 2);
    CHECK(invoke({"run", "--protocol", "raft"}).code == 2);
    CHECK(invoke({"run", "--txns", "x"}).code == 2);

    // Two Byzantine nodes in a ledger of four: beyond f = 1.
    const auto over = tmp.file("over.json", R"({"k": 2, "n": 4, "fault_plan": {"byzantine": {
        "B1": "WRONG_VOTE", "B2": "WRONG_VOTE", "B3": "WRONG_VOTE"}}})");
    const auto breach = invoke({"run", "--config", over.c_str(), "--protocol", "xlpn22"});
    CHECK(breach.code == 3);
    CHECK(breach.err.find("warning: fault plan exceeds") != std::string::npos);
    CHECK(breach.err.find("safety violation") != std::string::npos);

    const auto blocked = tmp.file("blocked.json", R"({"k": 2, "n": 4, "fault_plan": {"crash_at": {"A0": 1}}})");
    CHECK(invoke({"run", "--config", blocked.c_str(), "--protocol", "vldb20"}).code == 3);

    const auto out = invoke({"run", "--protocol", "xlpn22", "--out", tmp.path.c_str()});
    CHECK(out.code == 0);
    CHECK(lines(slurp(tmp.path / "run.csv")) == 2);
}

TEST_CASE("seed precedence") {
    CHECK(effective_seed(std::nullopt, 9) == 9);
    CHECK(effective_seed(5, 9) == 5);
    ::setenv("XLEDGER_SEED", "77", 1);
    CHECK(effective_seed(5, 9) == 77);
    auto run = invoke({"run", "--protocol", "xlpn22", "--seed", "3"});
    CHECK(run.out.find(",77\n") != std::string::npos);
    ::setenv("XLEDGER_SEED", "seventy", 1);
    CHECK_THROWS_AS(effective_seed(5, 9), ConfigError);
    CHECK(invoke({"run"}).code == 2);
    ::unsetenv("XLEDGER_SEED");
}

TEST_CASE("bench writes one CSV and one SVG per grid") {
    TempDir tmp;
    auto r = invoke({"bench", "ledger", "--out", tmp.path.c_str(), "--seed", "42", "--cap", "20"});
    REQUIRE(r.code == 0);
    const auto csv = slurp(tmp.path / "ledger.csv");
    CHECK(lines(csv) == 13);
    CHECK(fs::exists(tmp.path / "ledger.svg"));
    CHECK(render_svg(csv, "k", "ledger grid") == slurp(tmp.path / "ledger.svg"));

    r = invoke({"bench", "node", "--out", tmp.path.c_str(), "--cap", "20"});
    CHECK(r.code == 0);
    CHECK(lines(slurp(tmp.path / "node.csv")) == 13);

    r = invoke({"bench", "txn", "--protocol", "xlpn22", "--out", tmp.path.c_str(), "--cap", "20"});
    CHECK(r.code == 0);
    CHECK(lines(slurp(tmp.path / "txn.csv")) == 7);

    CHECK(invoke({"bench", "time", "--out", tmp.path.c_str()}).code == 2);
    const auto blocker = tmp.file("not-a-dir", "x");
    CHECK(invoke({"bench", "ledger", "--out", blocker.c_str(), "--cap", "4"}).code == 4);
}

TEST_CASE("verify-complexity") {
    auto r = invoke({"verify-complexity", "--k", "2", "--n", "4"});
    CHECK(r.code == 0);
    CHECK(lines(r.out.substr(0, r.out.find("deltas:"))) == 4);
    CHECK(r.out.find("podc18 k=2 n=4 total: counted 168, formula 164, delta 4 (expected)") != std::string::npos);

    CHECK(invoke({"verify-complexity"}).code == 0);

    // Off-by-one in the VOTE-REQ fan-out.
    VerifyArgs args;
    args.ks = {2, 3};
    args.ns = {4};
    auto mutant = [](Protocol p, std::uint32_t k, std::uint32_t n) {
        auto m = simulate_once(p, k, n);
        if (p == Protocol::Xlpn22) {
            m.messages_by_phase[Phase::VoteReq] += 1;
            m.messages_total += 1;
        }
        return m;
    };
    std::ostringstream out, err;
    CHECK(cmd_verify(args, out, err, mutant) == 5);
    CHECK(out.str().find("(UNEXPECTED)") != std::string::npos);

    TempDir tmp;
    const auto empty = tmp.file("none.json", R"({"expected_deltas": []})");
    CHECK(invoke({"verify-complexity", "--k", "2", "--n", "4", "--expectations", empty.c_str()}).code == 5);
    const auto broken = tmp.file("broken.json", "{");
    CHECK(invoke({"verify-complexity", "--expectations", broken.c_str()}).code == 2);
}

TEST_CASE("topology report") {
    const auto r = invoke({"topology", "--protocol", "xlpn22"});
    CHECK(r.code == 0);
    CHECK(r.out.find("xlpn22,VOTE-PREP,3,4,12,36,3,3,yes") != std::string::npos);
    CHECK(r.out.find("xlpn22,VOTE-REQ,3,4,12,11,1,1,yes") != std::string::npos);
    CHECK(lines(r.out) == 6);
}
