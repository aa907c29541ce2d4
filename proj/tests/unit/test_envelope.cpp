#include <doctest.h>

#include <vector>

#include "support.hpp"
#include "xledger/envelope.hpp"

using namespace xledger;
using xledger::test::node;

namespace {

Envelope vote(NodeId src, NodeId dst, Vote v, Phase phase = Phase::VotePrep, Round r = 2) {
    return {r, src, dst, phase, Body{BodyKind::Vote, v, std::nullopt, src, 0}};
}

}  // namespace

TEST_CASE("phase names round-trip") {
    for (int i = 0; i <= static_cast<int>(Phase::HopBwd); ++i) {
        const auto p = static_cast<Phase>(i);
        if (p == Phase::PbftCommit) continue;  // prints as COMMIT
        CHECK(parse_phase(to_string(p)) == p);
    }
    CHECK(to_string(Phase::TwoPcVote) == "2PC-VOTE");
    CHECK(to_string(Phase::HopBwd) == "HOP-BWD");
    CHECK(to_string(Phase::PbftCommit) == "COMMIT");
    CHECK_FALSE(parse_phase("VOTE"));
}

TEST_CASE("equivocation needs the same signer, kind, phase and round") {
    const auto a0 = node("A0"), a1 = node("A1"), a2 = node("A2");
    CHECK(detect_equivocation(vote(a0, a1, Vote::Commit), vote(a0, a2, Vote::Rollback)));
    CHECK_FALSE(detect_equivocation(vote(a0, a1, Vote::Commit), vote(a0, a2, Vote::Commit)));
    CHECK_FALSE(detect_equivocation(vote(a0, a1, Vote::Commit), vote(a1, a2, Vote::Rollback)));
    CHECK_FALSE(detect_equivocation(vote(a0, a1, Vote::Commit), vote(a0, a2, Vote::Rollback, Phase::Commit)));
    CHECK_FALSE(detect_equivocation(vote(a0, a1, Vote::Commit), vote(a0, a2, Vote::Rollback, Phase::VotePrep, 3)));

    // An honest node's own vote next to its relay of someone else's statement.
    auto relay = vote(a0, a2, Vote::Rollback);
    relay.body.kind = BodyKind::Relay;
    relay.body.author = node("B0");
    CHECK_FALSE(detect_equivocation(vote(a0, a1, Vote::Commit), relay));
}

TEST_CASE("equivocation detection agrees with a pairwise oracle") {
    // Oracle: a sender equivocates iff it signed both values in one phase
    // and round, over every pair of envelopes.
    const std::vector<NodeId> nodes{node("A0"), node("A1"), node("B0")};
    std::vector<Envelope> pool;
    for (auto src : nodes) {
        for (auto dst : nodes) {
            for (auto v : {Vote::Commit, Vote::Rollback}) {
                for (auto ph : {Phase::VotePrep, Phase::Commit}) pool.push_back(vote(src, dst, v, ph));
            }
        }
    }
    for (const auto& a : pool) {
        for (const auto& b : pool) {
            const bool oracle = a.src == b.src && a.phase == b.phase && a.round == b.round && a.body.value != b.body.value;
            CHECK(detect_equivocation(a, b) == oracle);
        }
    }
}

TEST_CASE("sender_authored excludes relays and records") {
    auto e = vote(node("A0"), node("A1"), Vote::Commit);
    CHECK(sender_authored(e));
    e.body.kind = BodyKind::Relay;
    CHECK_FALSE(sender_authored(e));
    e.body.kind = BodyKind::Record;
    CHECK_FALSE(sender_authored(e));
    e.body.kind = BodyKind::Vote;
    e.body.author = node("B2");
    CHECK_FALSE(sender_authored(e));
}

TEST_CASE("trace lines") {
    auto e = vote(node("A0"), node("B3"), Vote::Commit, Phase::Ready, 3);
    CHECK(format_trace_line(e) == "3\tA0\tB3\tREADY\tVOTE:COMMIT");
    e.body.kind = BodyKind::Relay;
    e.body.author = node("A1");
    e.body.certified = Vote::Rollback;
    CHECK(format_trace_line(e) == "3\tA0\tB3\tREADY\tRELAY:COMMIT@A1/cert=ROLLBACK");
    Envelope vc{9, node("B1"), node("B2"), Phase::ViewChange, Body{BodyKind::ViewChange, Vote::Rollback, std::nullopt, node("B1"), 1}};
    CHECK(format_trace_line(vc) == "9\tB1\tB2\tVIEW-CHANGE\tVIEW-CHANGE:ROLLBACK/v1");
    const std::vector<Envelope> two{e, vc};
    CHECK(format_trace(two) == format_trace_line(e) + "\n" + format_trace_line(vc) + "\n");
}
