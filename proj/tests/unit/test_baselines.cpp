#include <doctest.h>

#include "support.hpp"
#include "xledger/podc18.hpp"
#include "xledger/vldb20.hpp"

using namespace xledger;
using xledger::test::node;

TEST_CASE("choose_witness") {
    auto cfg = test::cluster(3, 4);
    CHECK(choose_witness(cfg) == 0);
    cfg.witness_ledger = 2;
    CHECK(choose_witness(cfg) == 2);
    cfg.k = 1;
    CHECK_THROWS_AS(validate_config(cfg), ConfigError);
}

TEST_CASE("VLDB-20 failure-free cost") {
    for (std::uint32_t k : {2u, 3u, 4u, 8u}) {
        for (std::uint32_t n : {4u, 16u}) {
            const auto m = test::run_one(Protocol::Vldb20, test::cluster(k, n));
            CHECK(m.rounds == 12);
            CHECK(m.messages_in({Phase::TwoPcVote, Phase::TwoPcDecide}) == 4 * k);
            CHECK(m.messages_in({Phase::PrePrepare, Phase::Prepare, Phase::PbftCommit, Phase::Reply}) ==
                  2 * k * (2 * n * n + 2 * n));
            CHECK(m.commits == 1);
        }
    }
    // k=3, n=4: 4*3*16 + 4*3*4 + 4*3
    CHECK(test::run_one(Protocol::Vldb20, test::cluster(3, 4)).messages_total == 252);
}

TEST_CASE("VLDB-20: any ROLLBACK vote rolls back") {
    for (LedgerIndex veto = 0; veto < 3; ++veto) {
        RunOptions options;
        options.engine.ledger_inputs.assign(3, Vote::Commit);
        options.engine.ledger_inputs[veto] = Vote::Rollback;
        const auto m = test::run_one(Protocol::Vldb20, test::cluster(3, 4), options);
        CHECK(m.rollbacks == 1);
        for (const auto& [id, d] : m.decisions) CHECK(d.value == Vote::Rollback);
    }
}

TEST_CASE("VLDB-20 blocks on a silent witness") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.crash_at[node("A0")] = 1;
    CHECK_THROWS_AS(test::run_one(Protocol::Vldb20, cfg), CoordinatorBlocked);

    // The witness ledger replaces a primary that dies during PBFT, so only
    // the 2PC rounds themselves are fatal.
    auto late = test::cluster(2, 4);
    late.fault_plan.crash_at[node("A0")] = 2;
    CHECK_NOTHROW(test::run_one(Protocol::Vldb20, late));
    late.fault_plan.crash_at[node("A0")] = 7;
    CHECK_THROWS_AS(test::run_one(Protocol::Vldb20, late), CoordinatorBlocked);
}

TEST_CASE("VLDB-20: a ledger that lost the decision blocks instead of guessing") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.crash_at[node("B0")] = 8;
    const World world(cfg);
    Simulator sim(cfg);
    Vldb20Engine engine(sim.world());
    sim.begin(engine, Transaction{});
    while (!engine.finished()) sim.step(engine);
    CHECK(engine.blocked_ledgers() == std::vector<LedgerIndex>{1});
    const auto outcomes = honest_outcomes(world, engine.decisions());
    CHECK(outcomes == std::vector<Vote>{Vote::Commit});
}

TEST_CASE("ring hops") {
    // k=3: forward 0->1, 1->2, 2->0; backward 0->2, 2->1, 1->0.
    const std::vector<Hop> expected{{0, 1, true}, {1, 2, true}, {2, 0, true},
                                    {0, 2, false}, {2, 1, false}, {1, 0, false}};
    for (std::uint32_t h = 0; h < 6; ++h) {
        const auto hop = ring_hop(h, 3);
        CHECK(hop.sender == expected[h].sender);
        CHECK(hop.receiver == expected[h].receiver);
        CHECK(hop.forward == expected[h].forward);
    }
    // Every ledger receives exactly once per direction.
    for (std::uint32_t k = 2; k <= 8; ++k) {
        std::vector<int> fwd(k, 0), bwd(k, 0);
        for (std::uint32_t h = 0; h < 2 * k; ++h) {
            const auto hop = ring_hop(h, k);
            (hop.forward ? fwd : bwd)[hop.receiver] += 1;
        }
        for (std::uint32_t l = 0; l < k; ++l) {
            CHECK(fwd[l] == 1);
            CHECK(bwd[l] == 1);
        }
    }
}

TEST_CASE("PODC-18 failure-free cost") {
    for (std::uint32_t k : {2u, 3u, 4u, 6u}) {
        for (std::uint32_t n : {4u, 16u}) {
            const auto m = test::run_one(Protocol::Podc18, test::cluster(k, n));
            CHECK(m.rounds == 10 * k);
            CHECK(m.messages_in({Phase::HopFwd, Phase::HopBwd}) == 4 * k);
            CHECK(m.messages_total == 2 * k * (2 * n * n + 2 * n + 2));
            CHECK(m.commits == 1);
        }
    }
    CHECK(test::run_one(Protocol::Podc18, test::cluster(3, 4)).messages_total == 252);
}

TEST_CASE("PODC-18 forward failure refunds everyone") {
    RunOptions options;
    options.engine.ledger_inputs = {Vote::Commit, Vote::Rollback, Vote::Commit};
    const auto m = test::run_one(Protocol::Podc18, test::cluster(3, 4), options);
    CHECK(m.rollbacks == 1);
    CHECK(m.rounds == 5);
    for (const auto& [id, d] : m.decisions) CHECK(d.value == Vote::Rollback);
}

TEST_CASE("PODC-18 backward timeout breaks atomicity") {
    // k=2: hops are rounds 1-5, 6-10, 11-15 and 16-20. B0 dies in the hop
    // round of the last claim, after ledger B has already claimed.
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.crash_at[node("B0")] = 16;
    Simulator sim(cfg);
    Podc18Engine engine(sim.world());
    sim.begin(engine, Transaction{});
    while (!engine.finished()) sim.step(engine);
    REQUIRE(engine.expiry());
    CHECK(engine.expiry()->hop() == 3);
    CHECK(engine.state().outcome == std::vector<LedgerStatus>{LedgerStatus::Refunded, LedgerStatus::Claimed});
    CHECK(honest_outcomes(sim.world(), engine.decisions()).size() == 2);
    CHECK_THROWS_AS(test::run_one(Protocol::Podc18, cfg), SafetyViolation);
}

TEST_CASE("PODC-18 forward timeout refunds everyone") {
    auto cfg = test::cluster(2, 4);
    cfg.timelock_rounds = 5;
    cfg.fault_plan.byzantine[node("B0")] = test::strategy(StrategyKind::Silent);
    Simulator sim(cfg);
    Podc18Engine engine(sim.world());
    sim.begin(engine, Transaction{});
    while (!engine.finished()) sim.step(engine);
    REQUIRE(engine.expiry());
    CHECK(engine.expiry()->hop() == 0);
    CHECK(honest_outcomes(sim.world(), engine.decisions()) == std::vector<Vote>{Vote::Rollback});
}
