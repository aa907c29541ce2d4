#include "xledger/vldb20.hpp"

namespace xledger {

LedgerIndex choose_witness(const ClusterConfig& cfg) { return cfg.witness_ledger; }

std::string_view to_string(VldbPhase p) {
    switch (p) {
        case VldbPhase::Vote: return "VOTE";
        case VldbPhase::VotePbft: return "VOTE_PBFT";
        case VldbPhase::VoteReport: return "VOTE_REPORT";
        case VldbPhase::Decide: return "DECIDE";
        case VldbPhase::DecidePbft: return "DECIDE_PBFT";
        case VldbPhase::Ack: return "ACK";
        case VldbPhase::Done: return "DONE";
    }
    return "?";
}

Vldb20Engine::Vldb20Engine(const World& world, EngineOptions options)
    : world_(&world), options_(std::move(options)), views_(world.k(), 0) {
    state_.witness = choose_witness(world.config());
    state_.phase = VldbPhase::Done;
}

NodeId Vldb20Engine::primary_of(LedgerIndex l) const { return {l, primary_rank(views_[l], world_->n())}; }

void Vldb20Engine::begin(const Transaction&) {
    state_.phase = VldbPhase::Vote;
    state_.ledger_votes.clear();
    state_.decision.reset();
    pbft_.clear();
    inbox_.assign(world_->k(), std::nullopt);
    ledger_vote_.assign(world_->k(), std::nullopt);
}

std::vector<Envelope> Vldb20Engine::witness_broadcast(Round r, Phase phase, Body body) const {
    std::vector<Envelope> out;
    const NodeId w = primary_of(state_.witness);
    body.author = w;
    for (LedgerIndex l = 0; l < world_->k(); ++l) out.push_back({r, w, primary_of(l), phase, body});
    return out;
}

void Vldb20Engine::start_pbft(const std::vector<std::optional<PbftProposal>>& proposals,
                              std::optional<Vote> fallback) {
    pbft_.clear();
    pbft_.reserve(world_->k());
    for (LedgerIndex l = 0; l < world_->k(); ++l) {
        pbft_.emplace_back(*world_, l, views_[l]);
        pbft_.back().start(proposals[l], fallback);
    }
}

bool Vldb20Engine::pbft_done() const {
    for (const auto& p : pbft_) {
        if (!p.done()) return false;
    }
    return true;
}

void Vldb20Engine::sync_views() {
    for (const auto& p : pbft_) views_[p.ledger()] = p.view();
}

std::vector<Envelope> Vldb20Engine::emit(Round r) {
    switch (state_.phase) {
        case VldbPhase::Vote:
            return witness_broadcast(r, Phase::TwoPcVote, Body{BodyKind::Proposal, options_.proposal, std::nullopt, {}, 0});
        case VldbPhase::VotePbft:
        case VldbPhase::DecidePbft: {
            std::vector<Envelope> out;
            for (const auto& p : pbft_) {
                auto part = p.emit(r);
                out.insert(out.end(), part.begin(), part.end());
            }
            return out;
        }
        case VldbPhase::VoteReport: {
            std::vector<Envelope> out;
            const NodeId w = primary_of(state_.witness);
            for (LedgerIndex l = 0; l < world_->k(); ++l) {
                if (!ledger_vote_[l]) continue;
                const NodeId src = primary_of(l);
                out.push_back({r, src, w, Phase::TwoPcVote, Body{BodyKind::Vote, *ledger_vote_[l], ledger_vote_[l], src, 0}});
            }
            return out;
        }
        case VldbPhase::Decide: {
            const Vote d = state_.decision.value_or(Vote::Rollback);
            return witness_broadcast(r, Phase::TwoPcDecide, Body{BodyKind::Decision, d, d, {}, 0});
        }
        case VldbPhase::Ack: {
            std::vector<Envelope> out;
            const NodeId w = primary_of(state_.witness);
            for (LedgerIndex l = 0; l < world_->k(); ++l) {
                const auto v = pbft_[l].outcome();
                if (!v) continue;
                const NodeId src = primary_of(l);
                out.push_back({r, src, w, Phase::TwoPcDecide, Body{BodyKind::Vote, *v, std::nullopt, src, 0}});
            }
            return out;
        }
        case VldbPhase::Done: return {};
    }
    return {};
}

bool Vldb20Engine::absorb(Round r, std::span<const Envelope> delivered) {
    const std::uint32_t k = world_->k();
    // Blocked when nothing left the witness primary for another ledger.
    auto collect_broadcast = [&](Phase phase) {
        inbox_.assign(k, std::nullopt);
        const NodeId w = primary_of(state_.witness);
        bool any = false;
        for (const auto& e : delivered) {
            if (e.phase != phase || e.src != w || e.dst != primary_of(e.dst.ledger)) continue;
            if (!inbox_[e.dst.ledger]) inbox_[e.dst.ledger] = e.body;
            if (e.dst != w) any = true;
        }
        if (!any) {
            throw CoordinatorBlocked("witness primary " + to_string(w) + " silent in " + std::string(to_string(phase)));
        }
    };

    switch (state_.phase) {
        case VldbPhase::Vote: {
            collect_broadcast(Phase::TwoPcVote);
            std::vector<std::optional<PbftProposal>> proposals(k);
            for (LedgerIndex l = 0; l < k; ++l) {
                if (!inbox_[l]) continue;
                const bool yes = inbox_[l]->value == Vote::Commit && options_.ledger_input(l) == Vote::Commit;
                proposals[l] = PbftProposal{yes ? Vote::Commit : Vote::Rollback, std::nullopt};
            }
            start_pbft(proposals, Vote::Rollback);
            state_.phase = VldbPhase::VotePbft;
            return true;
        }
        case VldbPhase::VotePbft: {
            for (auto& p : pbft_) p.absorb(r, delivered);
            if (pbft_done()) {
                sync_views();
                for (LedgerIndex l = 0; l < k; ++l) ledger_vote_[l] = pbft_[l].outcome();
                state_.phase = VldbPhase::VoteReport;
            }
            return true;
        }
        case VldbPhase::VoteReport: {
            const NodeId w = primary_of(state_.witness);
            for (const auto& e : delivered) {
                if (e.phase != Phase::TwoPcVote || e.dst != w || e.body.kind != BodyKind::Vote) continue;
                if (e.src != primary_of(e.src.ledger)) continue;
                // The PBFT commit certificate fixes the vote; a primary cannot restate it.
                state_.ledger_votes.emplace(e.src.ledger, e.body.certified.value_or(e.body.value));
            }
            bool all = state_.ledger_votes.size() == k;
            for (const auto& [l, v] : state_.ledger_votes) all = all && v == Vote::Commit;
            state_.decision = all ? Vote::Commit : Vote::Rollback;
            state_.phase = VldbPhase::Decide;
            return true;
        }
        case VldbPhase::Decide: {
            collect_broadcast(Phase::TwoPcDecide);
            std::vector<std::optional<PbftProposal>> proposals(k);
            for (LedgerIndex l = 0; l < k; ++l) {
                if (!inbox_[l]) continue;
                const Vote v = inbox_[l]->certified.value_or(inbox_[l]->value);
                proposals[l] = PbftProposal{v, v};
            }
            // Nobody may invent a decision, so a ledger that lost it blocks.
            start_pbft(proposals, std::nullopt);
            state_.phase = VldbPhase::DecidePbft;
            return true;
        }
        case VldbPhase::DecidePbft: {
            for (auto& p : pbft_) p.absorb(r, delivered);
            if (pbft_done()) {
                sync_views();
                state_.phase = VldbPhase::Ack;
            }
            return true;
        }
        case VldbPhase::Ack:
            state_.phase = VldbPhase::Done;
            return true;
        case VldbPhase::Done: return false;
    }
    return false;
}

std::map<NodeId, Decision> Vldb20Engine::decisions() const {
    std::map<NodeId, Decision> out;
    if (state_.phase != VldbPhase::Done) return out;
    for (const auto& p : pbft_) {
        for (auto id : world_->ledger_nodes(p.ledger())) {
            if (auto v = p.committed(id)) out[id] = Decision{*v, p.commit_backing(id)};
        }
    }
    return out;
}

std::vector<LedgerIndex> Vldb20Engine::blocked_ledgers() const {
    std::vector<LedgerIndex> out;
    if (state_.phase != VldbPhase::Ack && state_.phase != VldbPhase::Done) return out;
    for (const auto& p : pbft_) {
        if (p.blocked()) out.push_back(p.ledger());
    }
    return out;
}

}  // namespace xledger
