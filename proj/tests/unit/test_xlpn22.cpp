#include <doctest.h>

#include "support.hpp"
#include "xledger/xlpn22.hpp"

using namespace xledger;
using xledger::test::node;

namespace {

struct Outcome {
    RunMetrics metrics;
    std::vector<Vote> honest;
};

Outcome run(const ClusterConfig& cfg, const RunOptions& options = {}) {
    Outcome o;
    o.metrics = test::run_one(Protocol::Xlpn22, cfg, options);
    o.honest = honest_outcomes(World(cfg), o.metrics.decisions);
    return o;
}

// Drives an engine by hand so its state can be inspected afterwards.
struct Driven {
    explicit Driven(ClusterConfig cfg, EngineOptions options = {})
        : sim(std::move(cfg)), engine(sim.world(), std::move(options)) {
        sim.begin(engine, Transaction{});
        while (!engine.finished()) sim.step(engine);
    }
    Simulator sim;
    Xlpn22Engine engine;
};

}  // namespace

TEST_CASE("decide is unanimity over the expected votes") {
    const ReadyVotes all{{node("A1"), Vote::Commit}, {node("B0"), Vote::Commit}, {node("B1"), Vote::Commit}};
    CHECK(decide(all, 3) == Vote::Commit);
    CHECK(decide(all, 4) == Vote::Rollback);
    auto one_no = all;
    one_no[node("B1")] = Vote::Rollback;
    CHECK(decide(one_no, 3) == Vote::Rollback);
    CHECK(decide({}, 0) == Vote::Commit);
}

TEST_CASE("client confirmation needs f+1 matching replies") {
    const Decision c{Vote::Commit, 3}, r{Vote::Rollback, 3};
    CHECK(client_confirm({c, c}, 1) == Vote::Commit);
    CHECK(client_confirm({r, c, r}, 1) == Vote::Rollback);
    CHECK_THROWS_AS(client_confirm({c}, 1), Unconfirmed);
    CHECK_THROWS_AS(client_confirm({c, c, r, r}, 1), Unconfirmed);
    CHECK(client_confirm({c, c, c, r, r}, 2) == Vote::Commit);
}

TEST_CASE("failure-free per-phase counts") {
    for (std::uint32_t k : {2u, 3u, 5u}) {
        for (std::uint32_t n : {4u, 7u, 16u}) {
            const auto m = run(test::cluster(k, n)).metrics;
            const std::uint64_t kn = std::uint64_t{k} * n;
            // Oracle: one-to-all and all-to-one skip the initiator itself; an
            // intra phase is n*n statements + n*n relays + 2 records per ledger.
            std::uint64_t intra = 0;
            for (std::uint32_t l = 0; l < k; ++l) intra += n * n + n * n + 2;
            CHECK(m.messages_by_phase.at(Phase::VoteReq) == kn - 1);
            CHECK(m.messages_by_phase.at(Phase::Ready) == kn - 1);
            CHECK(m.messages_by_phase.at(Phase::CommitReq) == kn - 1);
            CHECK(m.messages_by_phase.at(Phase::VotePrep) == intra);
            CHECK(m.messages_by_phase.at(Phase::Commit) == intra);
            CHECK(m.rounds == 5);
        }
    }
}

TEST_CASE("fault-free runs finalize the proposal everywhere") {
    for (auto v : {Vote::Commit, Vote::Rollback}) {
        RunOptions options;
        options.engine.proposal = v;
        const auto o = run(test::cluster(3, 4), options);
        CHECK(o.metrics.decisions.size() == 12);
        for (const auto& [id, d] : o.metrics.decisions) {
            CHECK(d.value == v);
            CHECK(d.backing == 4);
        }
    }
}

TEST_CASE("one unwilling ledger rolls the transaction back") {
    RunOptions options;
    options.engine.ledger_inputs = {Vote::Commit, Vote::Commit, Vote::Rollback};
    const auto o = run(test::cluster(3, 4), options);
    CHECK(o.honest == std::vector<Vote>{Vote::Rollback});
}

TEST_CASE("COMMIT needs every READY vote") {
    Driven d(test::cluster(2, 4));
    CHECK(d.engine.state().decision == Vote::Commit);
    CHECK(d.engine.state().ready_votes.size() == 7);

    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.byzantine[node("B2")] = test::strategy(StrategyKind::Omit, {node("A0")});
    Driven omitted(cfg);
    CHECK(omitted.engine.state().ready_votes.size() == 6);
    CHECK(omitted.engine.state().decision == Vote::Rollback);
}

TEST_CASE("phase emitters") {
    const World world(test::cluster(2, 4));
    Xlpn22Engine engine(world);
    engine.begin(Transaction{});
    const auto req = engine.phase_vote_req(1);
    CHECK(req.size() == 7);
    for (const auto& e : req) {
        CHECK(e.src == node("A0"));
        CHECK(e.phase == Phase::VoteReq);
        CHECK(e.body.kind == BodyKind::Proposal);
    }

    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.crash_at[node("A0")] = 1;
    const World down(cfg);
    Xlpn22Engine dead(down);
    dead.begin(Transaction{});
    CHECK_THROWS_AS(dead.phase_vote_req(1), InitiatorFailed);
}

TEST_CASE("re-election walks the ledger primaries") {
    const World world(test::cluster(3, 4));
    Xlpn22Engine engine(world);
    CHECK(engine.state().initiator == node("A0"));
    CHECK(engine.reelect_initiator() == node("B0"));
    CHECK(engine.reelect_initiator() == node("C0"));
    CHECK(engine.reelect_initiator() == node("A1"));
    CHECK(engine.reelect_initiator() == node("B1"));
    for (int i = 0; i < 7; ++i) engine.reelect_initiator();
    CHECK(engine.state().initiator == node("C3"));
    CHECK_THROWS_AS(engine.reelect_initiator(), NoPrimaryAvailable);
    CHECK(engine.reelections() == 11);
}

TEST_CASE("initiator silent before VOTE-REQ: re-elect and restart") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.initiator_fails_at = 1;
    Driven d(cfg);
    CHECK(d.sim.round() == 6);
    CHECK(d.engine.state().initiator == node("B0"));
    CHECK(d.engine.reelections() == 1);
    // A0's READY vote is missing for good, so the restarted instance rolls back.
    CHECK(d.engine.state().decision == Vote::Rollback);
    CHECK(honest_outcomes(d.sim.world(), d.engine.decisions()) == std::vector<Vote>{Vote::Rollback});
}

TEST_CASE("initiator silent at COMMIT-REQ: successor rolls back") {
    auto cfg = test::cluster(3, 4);
    cfg.fault_plan.initiator_fails_at = 4;
    Driven d(cfg);
    CHECK(d.sim.round() == 6);
    CHECK(d.engine.state().initiator == node("B0"));
    CHECK(honest_outcomes(d.sim.world(), d.engine.decisions()) == std::vector<Vote>{Vote::Rollback});
}

TEST_CASE("silent non-initiator primary triggers a view change") {
    auto cfg = test::cluster(3, 4);
    cfg.fault_plan.byzantine[node("C0")] = test::strategy(StrategyKind::Silent);
    Driven d(cfg);
    CHECK(d.sim.round() == 7);
    CHECK(d.engine.view(2) == 1);
    CHECK(d.engine.primary_of(2) == node("C1"));
    CHECK(d.engine.view_changes() == 1);
    // The silent primary sends none of its own n VIEW-CHANGE messages.
    CHECK(d.sim.metrics().messages_by_phase.at(Phase::ViewChange) == 4 * 3);
    CHECK(d.sim.metrics().messages_by_phase.at(Phase::NewView) == 11);
    CHECK(honest_outcomes(d.sim.world(), d.engine.decisions()).size() == 1);
}

TEST_CASE("backup failure costs nothing") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.crash_at[node("B3")] = 1;
    Driven d(cfg);
    CHECK(d.sim.round() == 5);
    CHECK(d.engine.view_changes() == 0);
    CHECK(honest_outcomes(d.sim.world(), d.engine.decisions()).size() == 1);
}

TEST_CASE("a lying initiator is overruled by the certificate") {
    for (auto kind : {StrategyKind::WrongVote, StrategyKind::Equivocate}) {
        auto cfg = test::cluster(2, 4);
        cfg.fault_plan.byzantine[node("A0")] = test::strategy(kind);
        const auto o = run(cfg);
        CHECK(o.honest.size() == 1);
        CHECK(o.metrics.rounds == 5);
    }
}

TEST_CASE("quorum loss is counted") {
    auto cfg = test::cluster(2, 4);
    cfg.fault_plan.byzantine[node("B1")] = test::strategy(StrategyKind::Equivocate);
    Driven d(cfg);
    CHECK(honest_outcomes(d.sim.world(), d.engine.decisions()).size() == 1);
    CHECK(d.engine.no_quorum_events() == 0);

    auto split = test::cluster(2, 4);
    split.fault_plan.byzantine[node("A0")] = test::strategy(StrategyKind::Equivocate);
    Driven s(split);
    CHECK(honest_outcomes(s.sim.world(), s.engine.decisions()) == std::vector<Vote>{Vote::Rollback});
}

TEST_CASE("phase names") {
    CHECK(to_string(XlpnPhase::VotePrep) == "VOTE-PREP");
    CHECK(to_string(XlpnPhase::CommitReq) == "COMMIT-REQ");
}
