#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "xledger/types.hpp"

namespace xledger {

/// Wire phase tags across all three protocols. PBFT's COMMIT and XLPN-22's
/// COMMIT print the same; they never appear in the same protocol run.
enum class Phase : std::uint8_t {
    VoteReq,
    VotePrep,
    Ready,
    CommitReq,
    Commit,
    PrePrepare,
    Prepare,
    PbftCommit,
    Reply,
    ViewChange,
    NewView,
    TwoPcVote,
    TwoPcDecide,
    HopFwd,
    HopBwd,
};

std::string_view to_string(Phase p);
std::optional<Phase> parse_phase(std::string_view text);

enum class BodyKind : std::uint8_t {
    Proposal,    // a value put forward by its author (request, offer, pre-prepare)
    Vote,        // the sender's own vote or attested status
    Decision,    // a coordinator's outcome; certified by the votes it was derived from
    ViewChange,  // view-change claim; certified carries a prepared certificate
    NewView,
    Relay,       // a verbatim copy of another node's signed statement
    Record,      // bookkeeping self-message, no value semantics
};

std::string_view to_string(BodyKind k);

/// Message payload. `author` is whoever signed `value`; a Relay keeps the
/// original author so forwarding never changes attribution. `certified` is
/// the value implied by an attached certificate (a set of other nodes'
/// signatures). Nobody can alter it without forging those signatures.
struct Body {
    BodyKind kind = BodyKind::Vote;
    Vote value = Vote::Rollback;
    std::optional<Vote> certified;
    NodeId author;
    std::uint32_t view = 0;

    bool operator==(const Body&) const = default;
};

struct Envelope {
    Round round = 0;
    NodeId src;
    NodeId dst;
    Phase phase = Phase::VoteReq;
    Body body;

    bool operator==(const Envelope&) const = default;
};

/// True when the sender put its own signature on two conflicting statements
/// of the same kind in the same phase and round. Attribution is unforgeable,
/// so this can only be produced by the sender itself.
bool detect_equivocation(const Envelope& a, const Envelope& b);

/// A fault filter may flip `value` only on statements the sender authored.
constexpr bool sender_authored(const Envelope& e) {
    return e.body.author == e.src && e.body.kind != BodyKind::Relay && e.body.kind != BodyKind::Record;
}

/// Tab-separated round/src/dst/phase/body, one line per envelope.
std::string format_trace_line(const Envelope& e);
std::string format_trace(std::span<const Envelope> envelopes);

}  // namespace xledger
