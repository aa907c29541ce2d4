#include "xledger/xlpn22.hpp"

#include "xledger/pbft.hpp"

#include <algorithm>

namespace xledger {

namespace {

constexpr std::uint8_t bit(Vote v) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(v)); }
constexpr std::size_t idx(Vote v) { return static_cast<std::size_t>(v); }

}  // namespace

std::string_view to_string(XlpnPhase p) {
    switch (p) {
        case XlpnPhase::VoteReq: return "VOTE-REQ";
        case XlpnPhase::VotePrep: return "VOTE-PREP";
        case XlpnPhase::ViewChange: return "VIEW-CHANGE";
        case XlpnPhase::NewView: return "NEW-VIEW";
        case XlpnPhase::Ready: return "READY";
        case XlpnPhase::CommitReq: return "COMMIT-REQ";
        case XlpnPhase::Commit: return "COMMIT";
        case XlpnPhase::Done: return "DONE";
    }
    return "?";
}

Vote decide(const ReadyVotes& votes, std::size_t expected) {
    if (votes.size() != expected) return Vote::Rollback;
    for (const auto& [id, v] : votes) {
        if (v != Vote::Commit) return Vote::Rollback;
    }
    return Vote::Commit;
}

Vote client_confirm(const std::vector<Decision>& replies, std::uint32_t f) {
    std::array<std::uint32_t, 2> counts{0, 0};
    for (const auto& d : replies) counts[idx(d.value)] += 1;
    const auto need = client_quorum_size(f);
    const auto commits = counts[idx(Vote::Commit)];
    const auto rollbacks = counts[idx(Vote::Rollback)];
    if (commits >= need && commits > rollbacks) return Vote::Commit;
    if (rollbacks >= need && rollbacks > commits) return Vote::Rollback;
    throw Unconfirmed("no status reached " + std::to_string(need) + " matching replies");
}

Xlpn22Engine::Xlpn22Engine(const World& world, EngineOptions options)
    : world_(&world), options_(std::move(options)), views_(world.k(), 0) {
    state_.initiator = primary_of(world.config().initiator_ledger);
    state_.phase = XlpnPhase::Done;
}

NodeId Xlpn22Engine::primary_of(LedgerIndex l) const { return {l, views_[l] % world_->n()}; }

void Xlpn22Engine::begin(const Transaction&) {
    nodes_.assign(world_->config().node_count(), XlpnNode{});
    state_.phase = XlpnPhase::VoteReq;
    state_.ready_votes.clear();
    state_.decision.reset();
    state_.local_tally.clear();
    pending_view_change_.clear();
    rollback_after_failure_ = false;
    node_mut(state_.initiator).proposal = options_.proposal;
}

NodeId Xlpn22Engine::reelect_initiator() {
    const std::uint32_t k = world_->k();
    failed_initiators_.insert(state_.initiator);
    const std::uint32_t n = world_->n();
    // Ledger primaries first, then the next rank in each ledger, and so on.
    for (std::uint32_t offset = 0; offset < n; ++offset) {
        for (std::uint32_t step = 1; step <= k; ++step) {
            const LedgerIndex l = (state_.initiator.ledger + step) % k;
            const NodeId candidate{l, primary_rank(views_[l] + offset, n)};
            if (!failed_initiators_.contains(candidate)) {
                state_.initiator = candidate;
                ++reelections_;
                return candidate;
            }
        }
    }
    throw NoPrimaryAvailable("every node has failed as initiator");
}

Vote Xlpn22Engine::vote_of(NodeId id) const {
    const auto& s = node(id);
    if (!s.proposal) return Vote::Rollback;
    if (*s.proposal == Vote::Commit && options_.ledger_input(id.ledger) == Vote::Commit) return Vote::Commit;
    return Vote::Rollback;
}

bool Xlpn22Engine::any_correct_non_initiator(Round r, const std::function<bool(const XlpnNode&)>& pred) const {
    for (auto id : world_->all_nodes()) {
        if (id == state_.initiator || !world_->is_correct(id, r)) continue;
        if (pred(node(id))) return true;
    }
    return false;
}

void Xlpn22Engine::intra_phase(Round r, Phase phase, std::vector<Envelope>& out,
                               const std::function<std::optional<Body>(NodeId)>& statement,
                               const std::function<std::optional<Body>(NodeId)>& relay) const {
    const std::uint32_t n = world_->n();
    out.reserve(out.size() + static_cast<std::size_t>(world_->k()) * (2 * n * n + 2));
    for (LedgerIndex l = 0; l < world_->k(); ++l) {
        const NodeId primary = primary_of(l);
        out.push_back({r, primary, primary, phase, Body{BodyKind::Record, Vote::Rollback, std::nullopt, primary, 0}});
        for (std::uint32_t i = 0; i < n; ++i) {
            const NodeId src{l, i};
            auto own = statement(src);
            auto copy = relay(src);
            for (std::uint32_t j = 0; j < n; ++j) {
                const NodeId dst{l, j};
                if (own) out.push_back({r, src, dst, phase, *own});
                if (copy) out.push_back({r, src, dst, phase, *copy});
            }
        }
        out.push_back({r, primary, primary, phase, Body{BodyKind::Record, Vote::Commit, std::nullopt, primary, 0}});
    }
}

std::vector<Envelope> Xlpn22Engine::phase_vote_req(Round r) const {
    if (world_->is_crashed(state_.initiator, r)) {
        throw InitiatorFailed("initiator " + to_string(state_.initiator) + " is down at round " + std::to_string(r));
    }
    std::vector<Envelope> out;
    out.reserve(world_->config().node_count());
    const Body body{BodyKind::Proposal, options_.proposal, std::nullopt, state_.initiator, 0};
    for (auto dst : world_->all_nodes()) {
        if (dst != state_.initiator) out.push_back({r, state_.initiator, dst, Phase::VoteReq, body});
    }
    return out;
}

std::vector<Envelope> Xlpn22Engine::phase_vote_prep(Round r) const {
    std::vector<Envelope> out;
    intra_phase(
        r, Phase::VotePrep, out,
        [&](NodeId id) -> std::optional<Body> { return Body{BodyKind::Vote, vote_of(id), std::nullopt, id, 0}; },
        [&](NodeId id) -> std::optional<Body> {
            const auto& s = node(id);
            if (!s.proposal) return std::nullopt;
            return Body{BodyKind::Relay, *s.proposal, std::nullopt, state_.initiator, 0};
        });
    return out;
}

std::vector<Envelope> Xlpn22Engine::phase_ready(Round r) const {
    std::vector<Envelope> out;
    out.reserve(world_->config().node_count());
    for (auto src : world_->all_nodes()) {
        if (src == state_.initiator) continue;
        const Vote v = node(src).adopted.value_or(Vote::Rollback);
        out.push_back({r, src, state_.initiator, Phase::Ready, Body{BodyKind::Vote, v, std::nullopt, src, 0}});
    }
    return out;
}

std::vector<Envelope> Xlpn22Engine::phase_commit_req(Round r) const {
    std::vector<Envelope> out;
    out.reserve(world_->config().node_count());
    const Vote value = state_.decision.value_or(Vote::Rollback);
    const Body body{BodyKind::Decision, value, value, state_.initiator, 0};
    for (auto dst : world_->all_nodes()) {
        if (dst != state_.initiator) out.push_back({r, state_.initiator, dst, Phase::CommitReq, body});
    }
    return out;
}

std::vector<Envelope> Xlpn22Engine::phase_commit(Round r) const {
    std::vector<Envelope> out;
    intra_phase(
        r, Phase::Commit, out,
        [&](NodeId id) -> std::optional<Body> {
            const auto& s = node(id);
            if (!s.certified) return std::nullopt;
            return Body{BodyKind::Vote, *s.certified, std::nullopt, id, 0};
        },
        [&](NodeId id) -> std::optional<Body> {
            const auto& s = node(id);
            if (!s.direct_decision) return std::nullopt;
            return Body{BodyKind::Relay, *s.direct_decision, s.certified, state_.initiator, 0};
        });
    return out;
}

std::vector<Envelope> Xlpn22Engine::emit(Round r) {
    switch (state_.phase) {
        case XlpnPhase::VoteReq:
            // A crashed initiator simply stays silent; absorb() notices.
            if (world_->is_crashed(state_.initiator, r)) return {};
            return phase_vote_req(r);
        case XlpnPhase::VotePrep: return phase_vote_prep(r);
        case XlpnPhase::ViewChange: {
            std::vector<Envelope> out;
            for (auto l : pending_view_change_) {
                for (auto src : world_->ledger_nodes(l)) {
                    const Body body{BodyKind::ViewChange, Vote::Rollback, std::nullopt, src, views_[l] + 1};
                    for (auto dst : world_->ledger_nodes(l)) out.push_back({r, src, dst, Phase::ViewChange, body});
                }
            }
            return out;
        }
        case XlpnPhase::NewView: {
            std::vector<Envelope> out;
            for (auto l : pending_view_change_) {
                const NodeId next{l, (views_[l] + 1) % world_->n()};
                const Body body{BodyKind::NewView, Vote::Rollback, std::nullopt, next, views_[l] + 1};
                for (auto dst : world_->all_nodes()) {
                    if (dst != next) out.push_back({r, next, dst, Phase::NewView, body});
                }
            }
            return out;
        }
        case XlpnPhase::Ready: return phase_ready(r);
        case XlpnPhase::CommitReq: return phase_commit_req(r);
        case XlpnPhase::Commit: return phase_commit(r);
        case XlpnPhase::Done: return {};
    }
    return {};
}

bool Xlpn22Engine::absorb(Round r, std::span<const Envelope> delivered) {
    switch (state_.phase) {
        case XlpnPhase::VoteReq: return absorb_vote_req(r, delivered);
        case XlpnPhase::VotePrep: return absorb_vote_prep(r, delivered);
        case XlpnPhase::ViewChange: {
            for (auto l : pending_view_change_) {
                std::uint32_t alive = 0;
                for (auto id : world_->ledger_nodes(l)) alive += world_->is_correct(id, r) ? 1 : 0;
                if (alive < world_->quorum()) {
                    throw UnrecoverableLedger("ledger " + std::to_string(l) + " has " + std::to_string(alive) +
                                                   " correct nodes left");
                }
            }
            state_.phase = XlpnPhase::NewView;
            return true;
        }
        case XlpnPhase::NewView: return absorb_new_view(r, delivered);
        case XlpnPhase::Ready: return absorb_ready(r, delivered);
        case XlpnPhase::CommitReq: return absorb_commit_req(r, delivered);
        case XlpnPhase::Commit: return absorb_commit(r, delivered);
        case XlpnPhase::Done: return false;
    }
    return false;
}

bool Xlpn22Engine::absorb_vote_req(Round r, std::span<const Envelope> delivered) {
    for (const auto& e : delivered) {
        if (e.phase != Phase::VoteReq || e.src != state_.initiator || e.body.kind != BodyKind::Proposal) continue;
        auto& s = node_mut(e.dst);
        if (!s.proposal) s.proposal = e.body.value;
        s.proposals_seen |= bit(e.body.value);
    }
    const bool reached = any_correct_non_initiator(r, [](const XlpnNode& s) { return s.proposal.has_value(); });
    if (!reached) {
        // Silence in the initiator's own round: this round doubles as the
        // re-election round and the transaction restarts under the successor.
        for (auto& s : nodes_) s = XlpnNode{};
        reelect_initiator();
        node_mut(state_.initiator).proposal = options_.proposal;
        return true;
    }
    state_.phase = XlpnPhase::VotePrep;
    return true;
}

bool Xlpn22Engine::absorb_vote_prep(Round r, std::span<const Envelope> delivered) {
    const std::uint32_t n = world_->n();
    const std::uint32_t q = world_->quorum();
    const std::size_t total = world_->config().node_count();

    std::vector<std::array<std::uint32_t, 2>> counts(total, {0, 0});
    std::vector<std::uint8_t> seen(total * n, 0);  // [dst][src rank] value bitmask
    std::vector<std::uint8_t> heard_primary(total, 0);
    for (const auto& e : delivered) {
        if (e.phase != Phase::VotePrep || e.src.ledger != e.dst.ledger) continue;
        const auto d = flat_index(e.dst, n);
        if (e.src == primary_of(e.src.ledger)) heard_primary[d] = 1;
        if (e.body.kind == BodyKind::Vote && e.body.author == e.src) {
            auto& mask = seen[d * n + e.src.rank];
            if (mask & bit(e.body.value)) continue;
            mask |= bit(e.body.value);
            counts[d][idx(e.body.value)] += 1;
        } else if (e.body.kind == BodyKind::Relay && e.body.author == state_.initiator) {
            nodes_[d].proposals_seen |= bit(e.body.value);
        }
    }

    std::set<LedgerIndex> no_quorum_ledgers;
    for (std::size_t d = 0; d < total; ++d) {
        const NodeId id = from_flat(d, n);
        auto& s = nodes_[d];
        if (s.proposals_seen == (bit(Vote::Commit) | bit(Vote::Rollback))) s.initiator_suspected = true;
        if (world_->is_crashed(id, r)) continue;
        const auto c = counts[d][idx(Vote::Commit)];
        const auto rb = counts[d][idx(Vote::Rollback)];
        state_.local_tally[id] = {rb, c};
        if (c >= q && c > rb) {
            s.adopted = Vote::Commit;
        } else if (rb >= q) {
            s.adopted = Vote::Rollback;
        } else {
            // No 2f+1 quorum: cannot agree to commit.
            s.adopted = Vote::Rollback;
            if (!world_->is_byzantine(id)) no_quorum_ledgers.insert(id.ledger);
        }
    }
    no_quorum_ += static_cast<std::uint32_t>(no_quorum_ledgers.size());

    // A primary that a correct co-ledger node did not hear from is replaced.
    // Failed initiators are handled by re-election, not by a view change.
    for (LedgerIndex l = 0; l < world_->k(); ++l) {
        const NodeId p = primary_of(l);
        if (p == state_.initiator || failed_initiators_.contains(p)) continue;
        for (auto id : world_->ledger_nodes(l)) {
            if (id != p && world_->is_correct(id, r) && !heard_primary[flat_index(id, n)]) {
                pending_view_change_.insert(l);
                break;
            }
        }
    }
    state_.phase = pending_view_change_.empty() ? XlpnPhase::Ready : XlpnPhase::ViewChange;
    return true;
}

bool Xlpn22Engine::absorb_new_view(Round r, std::span<const Envelope> delivered) {
    std::set<LedgerIndex> still_pending;
    for (auto l : pending_view_change_) {
        const NodeId next{l, (views_[l] + 1) % world_->n()};
        bool heard = false;
        for (const auto& e : delivered) {
            if (e.phase == Phase::NewView && e.src == next && world_->is_correct(e.dst, r)) {
                heard = true;
                break;
            }
        }
        ++views_[l];
        ++view_changes_;
        if (!heard) still_pending.insert(l);
    }
    pending_view_change_ = std::move(still_pending);
    state_.phase = pending_view_change_.empty() ? XlpnPhase::Ready : XlpnPhase::ViewChange;
    return true;
}

bool Xlpn22Engine::absorb_ready(Round, std::span<const Envelope> delivered) {
    for (const auto& e : delivered) {
        if (e.phase != Phase::Ready || e.dst != state_.initiator || e.body.kind != BodyKind::Vote) continue;
        if (e.body.author != e.src) continue;
        state_.ready_votes.emplace(e.src, e.body.value);
    }
    const Vote d = decide(state_.ready_votes, world_->config().node_count() - 1);
    state_.decision = d;
    auto& self = node_mut(state_.initiator);
    self.certified = d;
    self.direct_decision = d;
    state_.phase = XlpnPhase::CommitReq;
    return true;
}

bool Xlpn22Engine::absorb_commit_req(Round r, std::span<const Envelope> delivered) {
    for (const auto& e : delivered) {
        if (e.phase != Phase::CommitReq || e.src != state_.initiator || e.body.kind != BodyKind::Decision) continue;
        auto& s = node_mut(e.dst);
        if (!s.direct_decision) s.direct_decision = e.body.value;
        if (e.body.certified) {
            s.certified = e.body.certified;
            if (*e.body.certified != e.body.value) s.initiator_suspected = true;
        }
    }
    const bool reached = any_correct_non_initiator(r, [](const XlpnNode& s) { return s.direct_decision.has_value(); });
    if (!reached) {
        // The old initiator went silent after VOTE-REQ was out; its successor
        // rolls the transaction back.
        reelect_initiator();
        rollback_after_failure_ = true;
        state_.decision = Vote::Rollback;
        auto& self = node_mut(state_.initiator);
        self.certified = Vote::Rollback;
        self.direct_decision = Vote::Rollback;
        return true;
    }
    state_.phase = XlpnPhase::Commit;
    return true;
}

bool Xlpn22Engine::absorb_commit(Round r, std::span<const Envelope> delivered) {
    const std::uint32_t n = world_->n();
    const std::uint32_t q = world_->quorum();
    const std::size_t total = world_->config().node_count();

    std::vector<std::array<std::uint32_t, 2>> counts(total, {0, 0});
    std::vector<std::uint8_t> seen(total * n, 0);
    for (const auto& e : delivered) {
        if (e.phase != Phase::Commit || e.src.ledger != e.dst.ledger) continue;
        const auto d = flat_index(e.dst, n);
        auto& s = nodes_[d];
        if (e.body.kind == BodyKind::Vote && e.body.author == e.src) {
            auto& mask = seen[d * n + e.src.rank];
            if (mask & bit(e.body.value)) continue;
            mask |= bit(e.body.value);
            counts[d][idx(e.body.value)] += 1;
        } else if (e.body.kind == BodyKind::Relay && e.body.author == state_.initiator && e.body.certified) {
            if (!s.certified) s.certified = e.body.certified;
            if (*e.body.certified != e.body.value) s.initiator_suspected = true;
        }
    }

    for (std::size_t d = 0; d < total; ++d) {
        const NodeId id = from_flat(d, n);
        if (world_->is_crashed(id, r)) continue;
        auto& s = nodes_[d];
        const auto c = counts[d][idx(Vote::Commit)];
        const auto rb = counts[d][idx(Vote::Rollback)];
        if (c >= q && c > rb) {
            s.final = Decision{Vote::Commit, c};
        } else if (rb >= q && rb >= c) {
            s.final = Decision{Vote::Rollback, rb};
        } else if (s.certified) {
            // Fewer than 2f+1 attestations reached this node (the initiator or a
            // co-ledger node omitted it), but the relayed certificate settles it.
            s.final = Decision{*s.certified, counts[d][idx(*s.certified)]};
        } else if (s.adopted.value_or(Vote::Rollback) != Vote::Commit) {
            // It never agreed to commit, so no COMMIT certificate can exist.
            s.final = Decision{Vote::Rollback, 0};
        }
    }
    state_.phase = XlpnPhase::Done;
    return true;
}

std::map<NodeId, Decision> Xlpn22Engine::decisions() const {
    std::map<NodeId, Decision> out;
    for (std::size_t d = 0; d < nodes_.size(); ++d) {
        if (nodes_[d].final) out.emplace(from_flat(d, world_->n()), *nodes_[d].final);
    }
    return out;
}

}  // namespace xledger
