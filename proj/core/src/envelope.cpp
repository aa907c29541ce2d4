#include "xledger/envelope.hpp"

#include <array>
#include <utility>

namespace xledger {

namespace {

constexpr std::array<std::pair<Phase, std::string_view>, 15> kPhaseNames{{
    {Phase::VoteReq, "VOTE-REQ"},
    {Phase::VotePrep, "VOTE-PREP"},
    {Phase::Ready, "READY"},
    {Phase::CommitReq, "COMMIT-REQ"},
    {Phase::Commit, "COMMIT"},
    {Phase::PrePrepare, "PRE-PREPARE"},
    {Phase::Prepare, "PREPARE"},
    {Phase::PbftCommit, "COMMIT"},
    {Phase::Reply, "REPLY"},
    {Phase::ViewChange, "VIEW-CHANGE"},
    {Phase::NewView, "NEW-VIEW"},
    {Phase::TwoPcVote, "2PC-VOTE"},
    {Phase::TwoPcDecide, "2PC-DECIDE"},
    {Phase::HopFwd, "HOP-FWD"},
    {Phase::HopBwd, "HOP-BWD"},
}};

}  // namespace

std::string_view to_string(Phase p) {
    for (const auto& [phase, name] : kPhaseNames) {
        if (phase == p) return name;
    }
    return "?";
}

// "COMMIT" resolves to the XLPN-22 phase; PBFT's commit is only produced internally.
std::optional<Phase> parse_phase(std::string_view text) {
    for (const auto& [phase, name] : kPhaseNames) {
        if (name == text) return phase;
    }
    return std::nullopt;
}

std::string_view to_string(BodyKind k) {
    switch (k) {
        case BodyKind::Proposal: return "PROPOSAL";
        case BodyKind::Vote: return "VOTE";
        case BodyKind::Decision: return "DECISION";
        case BodyKind::ViewChange: return "VIEW-CHANGE";
        case BodyKind::NewView: return "NEW-VIEW";
        case BodyKind::Relay: return "RELAY";
        case BodyKind::Record: return "RECORD";
    }
    return "?";
}

bool detect_equivocation(const Envelope& a, const Envelope& b) {
    return a.src == b.src && a.phase == b.phase && a.round == b.round && a.body.kind == b.body.kind &&
           a.body.author == b.body.author && a.body.value != b.body.value;
}

std::string format_trace_line(const Envelope& e) {
    std::string line;
    line.reserve(64);
    line += std::to_string(e.round);
    line += '\t';
    line += to_string(e.src);
    line += '\t';
    line += to_string(e.dst);
    line += '\t';
    line += to_string(e.phase);
    line += '\t';
    line += to_string(e.body.kind);
    line += ':';
    line += to_string(e.body.value);
    if (e.body.author != e.src) {
        line += '@';
        line += to_string(e.body.author);
    }
    if (e.body.certified) {
        line += "/cert=";
        line += to_string(*e.body.certified);
    }
    if (e.body.kind == BodyKind::ViewChange || e.body.kind == BodyKind::NewView) {
        line += "/v";
        line += std::to_string(e.body.view);
    }
    return line;
}

std::string format_trace(std::span<const Envelope> envelopes) {
    std::string out;
    for (const auto& e : envelopes) {
        out += format_trace_line(e);
        out += '\n';
    }
    return out;
}

}  // namespace xledger
