#include <doctest.h>

#include <algorithm>
#include <set>

#include "xledger/workload.hpp"

using namespace xledger;

TEST_CASE("ALL touches every ledger") {
    const auto txns = generate({5000, 4, AllLedgers{}, 7});
    REQUIRE(txns.size() == 5000);
    for (std::size_t i = 0; i < txns.size(); ++i) {
        CHECK(txns[i].id == i);
        CHECK(txns[i].touched_ledgers == std::vector<LedgerIndex>{0, 1, 2, 3});
    }
    CHECK(generate({0, 2, AllLedgers{}, 0}).empty());
}

TEST_CASE("UNIFORM sizes, determinism and coverage") {
    const WorkloadSpec spec{100, 8, UniformLedgers{2, 8}, 1};
    const auto a = generate(spec);
    REQUIRE(a.size() == 100);
    std::set<std::size_t> sizes;
    for (const auto& t : a) {
        CHECK(t.touched_ledgers.size() >= 2);
        CHECK(t.touched_ledgers.size() <= 8);
        CHECK(std::is_sorted(t.touched_ledgers.begin(), t.touched_ledgers.end()));
        CHECK(std::set<LedgerIndex>(t.touched_ledgers.begin(), t.touched_ledgers.end()).size() == t.touched_ledgers.size());
        CHECK(t.touched_ledgers.back() < 8);
        sizes.insert(t.touched_ledgers.size());
    }
    CHECK(sizes.size() == 7);
    CHECK(generate(spec) == a);
    auto other = spec;
    other.seed = 2;
    CHECK(generate(other) != a);

    // Frozen so a change of generator shows up.
    CHECK(a[0].touched_ledgers == std::vector<LedgerIndex>{2, 5, 6, 7});
}

TEST_CASE("invalid specs") {
    CHECK_THROWS_AS(generate({1, 1, AllLedgers{}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate({1, 4, UniformLedgers{3, 2}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate({1, 4, UniformLedgers{2, 5}, 0}), std::invalid_argument);
    CHECK_THROWS_AS(generate({1, 4, UniformLedgers{0, 2}, 0}), std::invalid_argument);
}

TEST_CASE("full-size grids") {
    const auto grids = full_grids();
    REQUIRE(grids.size() == 3);
    const auto& txn = find_grid(grids, "txn");
    CHECK(txn.cells() == std::vector<GridCell>{{1000, 4, 32}, {2000, 4, 32}, {4000, 4, 32},
                                               {5000, 4, 32}, {8000, 4, 32}, {16000, 4, 32}});
    const auto& nodes = find_grid(grids, "node");
    CHECK(nodes.cells() == std::vector<GridCell>{{5000, 4, 8}, {5000, 4, 16}, {5000, 4, 24}, {5000, 4, 32}});
    CHECK(nodes.cells().back().k * nodes.cells().back().n == 128);
    const auto& ledgers = find_grid(grids, "ledger");
    CHECK(ledgers.cells() == std::vector<GridCell>{{5000, 2, 16}, {5000, 4, 16}, {5000, 6, 16}, {5000, 8, 16}});
    CHECK(ledgers.axis_value(ledgers.cells().front()) == 2);
    CHECK(nodes.axis_value(nodes.cells().front()) == 8);
    CHECK(txn.axis_value(txn.cells().back()) == 16000);
    CHECK_THROWS_AS(find_grid(grids, "time"), std::invalid_argument);
}

TEST_CASE("scaled grids keep the shape") {
    const auto grids = scaled_grids(200);
    CHECK(find_grid(grids, "txn").txn_counts == std::vector<std::uint64_t>{12, 25, 50, 62, 100, 200});
    CHECK(find_grid(grids, "ledger").txn_counts == std::vector<std::uint64_t>{62});
    CHECK(find_grid(grids, "node").n_values == std::vector<std::uint32_t>{8, 16, 24, 32});
    CHECK(find_grid(scaled_grids(1), "txn").txn_counts == std::vector<std::uint64_t>{1, 1, 1, 1, 1, 1});
}
