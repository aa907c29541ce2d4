#include <doctest.h>

#include "support.hpp"
#include "xledger/complexity.hpp"
#include "xledger/pbft.hpp"

using namespace xledger;
using xledger::test::node;

namespace {

// Oracle: PRE-PREPARE primary -> n, PREPARE and COMMIT n -> n, REPLY n -> 1,
// tallied as sender/receiver pairs phase by phase.
std::uint64_t pbft_pairs(std::uint64_t n) {
    std::uint64_t pairs = 0;
    for (std::uint64_t dst = 0; dst < n; ++dst) pairs += 1;  // pre-prepare
    for (int phase = 0; phase < 2; ++phase) {
        for (std::uint64_t src = 0; src < n; ++src) {
            for (std::uint64_t dst = 0; dst < n; ++dst) pairs += 1;
        }
    }
    for (std::uint64_t src = 0; src < n; ++src) pairs += 1;  // reply
    return pairs;
}

std::vector<ByzantineStrategy> strategies_for(NodeId faulty, std::uint32_t n) {
    std::vector<ByzantineStrategy> out{test::strategy(StrategyKind::Silent), test::strategy(StrategyKind::WrongVote),
                                       test::strategy(StrategyKind::Equivocate)};
    std::vector<NodeId> others;
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i != faulty.rank) others.push_back({faulty.ledger, i});
    }
    for (std::uint32_t mask = 1; mask < (1u << others.size()); ++mask) {
        std::set<NodeId> targets;
        for (std::size_t b = 0; b < others.size(); ++b) {
            if (mask & (1u << b)) targets.insert(others[b]);
        }
        out.push_back(test::strategy(StrategyKind::Omit, targets));
    }
    return out;
}

void check_agreement(const ClusterConfig& cfg, Vote proposal, bool honest_primary) {
    const auto out = pbft_execute(cfg, 0, proposal);
    const World world(cfg);
    std::optional<Vote> agreed;
    std::size_t deciders = 0;
    for (const auto& [id, d] : out.node_decisions) {
        if (!world.is_correct(id, out.rounds)) continue;
        if (agreed) CHECK(*agreed == d.value);
        agreed = d.value;
        ++deciders;
    }
    CHECK(deciders >= world.quorum() - world.f());
    if (honest_primary && out.view_changes == 0) CHECK(agreed == proposal);
}

}  // namespace

TEST_CASE("failure-free execution: 4 rounds, n + 2n^2 + n messages") {
    for (std::uint32_t n : {4u, 7u, 10u, 16u, 32u}) {
        const auto out = pbft_execute(test::cluster(2, n), 1, Vote::Commit);
        CHECK(out.rounds == 4);
        CHECK(out.messages == pbft_pairs(n));
        CHECK(pbft_message_count(n) == pbft_pairs(n));
        CHECK(out.view_changes == 0);
        REQUIRE(out.decision);
        CHECK(out.decision->value == Vote::Commit);
        CHECK(out.decision->backing == n);
        CHECK(out.node_decisions.size() == n);
    }
    CHECK(pbft_execute(test::cluster(2, 4), 0, Vote::Rollback).decision->value == Vote::Rollback);
}

TEST_CASE("silent primary forces a view change") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.byzantine[node("A0")] = test::strategy(StrategyKind::Silent);
    CHECK_THROWS_AS(pbft_execute(cfg, 0, Vote::Commit, false), ViewChangeRequired);

    const auto out = pbft_execute(cfg, 0, Vote::Commit);
    CHECK(out.view == 1);
    CHECK(out.view_changes == 1);
    CHECK(out.rounds == 1 + 2 + 4);
    REQUIRE(out.decision);
    CHECK(out.decision->value == Vote::Commit);
}

TEST_CASE("a prepared value survives the view change") {
    // Everyone prepares COMMIT, then the COMMIT round is lost, so the new
    // primary must re-propose the prepared value rather than the fallback.
    const World world(test::cluster(2, 4));
    PbftInstance inst(world, 0, 0);
    inst.start(PbftProposal{Vote::Commit, std::nullopt}, Vote::Rollback);
    Round r = 0;
    bool dropped = false;
    while (!inst.done() && r < 20) {
        auto d = inst.emit(++r);
        if (inst.stage() == PbftStage::Commit && !dropped) {
            d.clear();
            dropped = true;
        }
        inst.absorb(r, d);
    }
    CHECK(inst.view() == 1);
    CHECK(inst.outcome() == Vote::Commit);
    CHECK(inst.rounds() == 4 + 2 + 4);
}

TEST_CASE("too many failures are unrecoverable") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.crash_at[node("A0")] = 1;
    cfg.fault_plan.crash_at[node("A1")] = 1;
    CHECK_THROWS_AS(pbft_execute(cfg, 0, Vote::Commit), UnrecoverableLedger);
}

TEST_CASE("exhaustive agreement at n = 4, one fault") {
    for (std::uint32_t rank = 0; rank < 4; ++rank) {
        const NodeId faulty{0, rank};
        for (const auto& s : strategies_for(faulty, 4)) {
            for (auto proposal : {Vote::Commit, Vote::Rollback}) {
                auto cfg = test::cluster(2, 4);
                cfg.fault_plan.byzantine[faulty] = s;
                CAPTURE(rank);
                CAPTURE(static_cast<int>(s.kind));
                CAPTURE(s.targets.size());
                check_agreement(cfg, proposal, rank != 0);
            }
        }
        for (Round crash = 1; crash <= 8; ++crash) {
            auto cfg = test::cluster(2, 4);
            cfg.fault_plan.crash_at[faulty] = crash;
            CAPTURE(rank);
            CAPTURE(crash);
            check_agreement(cfg, Vote::Commit, rank != 0);
        }
    }
}

TEST_CASE("certified pre-prepare that contradicts its certificate is refused") {
    const World world(test::cluster(2, 4));
    PbftInstance inst(world, 0, 0);
    inst.start(PbftProposal{Vote::Rollback, Vote::Commit}, std::nullopt);
    Round r = 0;
    std::vector<Envelope> delivered;
    delivered = inst.emit(++r);
    inst.absorb(r, delivered);
    CHECK(inst.stage() == PbftStage::ViewChange);
    while (!inst.done()) {
        delivered = inst.emit(++r);
        inst.absorb(r, delivered);
    }
    // The view change carries the certificate forward, so the value it names wins.
    CHECK(inst.outcome() == Vote::Commit);
    CHECK(inst.certified_seen() == Vote::Commit);
}

TEST_CASE("no proposal and no fallback blocks") {
    const World world(test::cluster(2, 4));
    PbftInstance inst(world, 1, 0);
    inst.start(std::nullopt, std::nullopt);
    Round r = 0;
    while (!inst.done()) {
        auto d = inst.emit(++r);
        inst.absorb(r, d);
    }
    CHECK(inst.blocked());
    CHECK_FALSE(inst.outcome());
    CHECK(inst.view() == 1);
}

TEST_CASE("primary rotates with the view") {
    CHECK(primary_rank(0, 4) == 0);
    CHECK(primary_rank(5, 4) == 1);
    CHECK(primary_rank(31, 32) == 31);
}
