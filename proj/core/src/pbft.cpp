#include "xledger/pbft.hpp"

#include <array>

namespace xledger {

std::string_view to_string(PbftStage s) {
    switch (s) {
        case PbftStage::PrePrepare: return "PRE-PREPARE";
        case PbftStage::Prepare: return "PREPARE";
        case PbftStage::Commit: return "COMMIT";
        case PbftStage::Reply: return "REPLY";
        case PbftStage::ViewChange: return "VIEW-CHANGE";
        case PbftStage::NewView: return "NEW-VIEW";
        case PbftStage::Done: return "DONE";
        case PbftStage::Blocked: return "BLOCKED";
    }
    return "?";
}

PbftInstance::PbftInstance(const World& world, LedgerIndex ledger, std::uint32_t view, NewViewScope scope)
    : world_(&world), ledger_(ledger), view_(view), scope_(scope), nodes_(world.n()) {}

void PbftInstance::start(std::optional<PbftProposal> proposal, std::optional<Vote> fallback) {
    proposal_ = proposal;
    fallback_ = fallback;
    next_view_proposal_.reset();
    nodes_.assign(world_->n(), NodeState{});
    view_changes_ = 0;
    rounds_ = 0;
    stage_ = PbftStage::PrePrepare;
}

bool PbftInstance::correct(std::uint32_t rank, Round r) const { return world_->is_correct({ledger_, rank}, r); }

std::vector<Envelope> PbftInstance::emit(Round r) const {
    std::vector<Envelope> out;
    const std::uint32_t n = world_->n();
    auto to_ledger = [&](NodeId src, Phase phase, Body body) {
        for (std::uint32_t dst = 0; dst < n; ++dst) out.push_back({r, src, {ledger_, dst}, phase, body});
    };

    switch (stage_) {
        case PbftStage::PrePrepare:
            if (proposal_) {
                NodeId p = primary();
                to_ledger(p, Phase::PrePrepare,
                          Body{BodyKind::Proposal, proposal_->value, proposal_->certified, p, view_});
            }
            break;
        case PbftStage::Prepare:
        case PbftStage::Commit:
            out.reserve(static_cast<std::size_t>(n) * n);
            for (std::uint32_t i = 0; i < n; ++i) {
                const auto& s = nodes_[i];
                const auto& value = stage_ == PbftStage::Prepare ? s.accepted : s.prepared;
                if (!value) continue;
                NodeId src{ledger_, i};
                to_ledger(src, stage_ == PbftStage::Prepare ? Phase::Prepare : Phase::PbftCommit,
                          Body{BodyKind::Vote, *value, std::nullopt, src, view_});
            }
            break;
        case PbftStage::Reply:
            for (std::uint32_t i = 0; i < n; ++i) {
                if (!nodes_[i].committed) continue;
                NodeId src{ledger_, i};
                out.push_back({r, src, primary(), Phase::Reply,
                               Body{BodyKind::Vote, *nodes_[i].committed, std::nullopt, src, view_}});
            }
            break;
        case PbftStage::ViewChange:
            for (std::uint32_t i = 0; i < n; ++i) {
                const auto& s = nodes_[i];
                NodeId src{ledger_, i};
                Body body{BodyKind::ViewChange, Vote::Rollback, std::nullopt, src, view_ + 1};
                // A prepared certificate outranks a certificate seen in a pre-prepare.
                if (s.prepared) {
                    body.value = *s.prepared;
                    body.certified = s.prepared;
                } else if (s.cert_seen) {
                    body.value = *s.cert_seen;
                    body.certified = s.cert_seen;
                } else if (s.accepted) {
                    body.value = *s.accepted;
                }
                to_ledger(src, Phase::ViewChange, body);
            }
            break;
        case PbftStage::NewView: {
            NodeId next{ledger_, primary_rank(view_ + 1, n)};
            Body body{BodyKind::NewView, Vote::Rollback, std::nullopt, next, view_ + 1};
            if (next_view_proposal_) {
                body.value = next_view_proposal_->value;
                body.certified = next_view_proposal_->certified;
            }
            if (scope_ == NewViewScope::Consortium) {
                for (auto dst : world_->all_nodes()) {
                    if (dst != next) out.push_back({r, next, dst, Phase::NewView, body});
                }
            } else {
                for (std::uint32_t dst = 0; dst < n; ++dst) {
                    if (dst != next.rank) out.push_back({r, next, {ledger_, dst}, Phase::NewView, body});
                }
            }
            break;
        }
        case PbftStage::Done:
        case PbftStage::Blocked:
            break;
    }
    return out;
}

void PbftInstance::enter_view_change(Round r) {
    if (!allow_view_change_) {
        throw ViewChangeRequired("ledger " + std::to_string(ledger_) + " view " + std::to_string(view_) +
                                 ": primary " + to_string(primary()) + " failed");
    }
    std::uint32_t alive = 0;
    for (std::uint32_t i = 0; i < world_->n(); ++i) alive += correct(i, r) ? 1 : 0;
    if (alive < world_->quorum()) {
        throw UnrecoverableLedger("ledger " + std::to_string(ledger_) + ": only " + std::to_string(alive) +
                                  " correct nodes left");
    }
    stage_ = PbftStage::ViewChange;
}

bool PbftInstance::absorb(Round r, std::span<const Envelope> delivered) {
    if (done()) return false;
    ++rounds_;
    const std::uint32_t n = world_->n();
    const std::uint32_t q = world_->quorum();

    // tallies[dst][value] over distinct senders
    auto tally = [&](Phase phase) {
        std::vector<std::array<std::uint32_t, 2>> counts(n, {0, 0});
        std::vector<std::vector<std::uint8_t>> seen(n, std::vector<std::uint8_t>(n, 0));
        for (const auto& e : delivered) {
            if (e.phase != phase || e.src.ledger != ledger_ || e.dst.ledger != ledger_) continue;
            if (e.body.view != view_) continue;
            auto& mask = seen[e.dst.rank][e.src.rank];
            auto bit = static_cast<std::uint8_t>(1u << static_cast<unsigned>(e.body.value));
            if (mask & bit) continue;
            mask |= bit;
            counts[e.dst.rank][static_cast<std::size_t>(e.body.value)] += 1;
        }
        return counts;
    };

    switch (stage_) {
        case PbftStage::PrePrepare: {
            const NodeId p = primary();
            for (const auto& e : delivered) {
                if (e.phase != Phase::PrePrepare || e.src != p || e.dst.ledger != ledger_) continue;
                auto& s = nodes_[e.dst.rank];
                if (e.body.certified) s.cert_seen = e.body.certified;
                const bool valid = !e.body.certified || *e.body.certified == e.body.value;
                if (valid && !s.accepted) s.accepted = e.body.value;
            }
            bool missing = false;
            for (std::uint32_t i = 0; i < n; ++i) {
                if (correct(i, r) && !nodes_[i].accepted) missing = true;
            }
            if (missing) {
                enter_view_change(r);
            } else {
                stage_ = PbftStage::Prepare;
            }
            return true;
        }
        case PbftStage::Prepare: {
            auto counts = tally(Phase::Prepare);
            for (std::uint32_t i = 0; i < n; ++i) {
                auto& s = nodes_[i];
                if (s.accepted && counts[i][static_cast<std::size_t>(*s.accepted)] >= q) s.prepared = s.accepted;
            }
            stage_ = PbftStage::Commit;
            return true;
        }
        case PbftStage::Commit: {
            auto counts = tally(Phase::PbftCommit);
            for (std::uint32_t i = 0; i < n; ++i) {
                auto& s = nodes_[i];
                if (s.committed) continue;
                for (Vote v : {Vote::Commit, Vote::Rollback}) {
                    auto c = counts[i][static_cast<std::size_t>(v)];
                    if (c >= q) {
                        s.committed = v;
                        s.backing = c;
                        break;
                    }
                }
            }
            stage_ = PbftStage::Reply;
            return true;
        }
        case PbftStage::Reply: {
            bool all = true;
            for (std::uint32_t i = 0; i < n; ++i) {
                if (correct(i, r) && !nodes_[i].committed) all = false;
            }
            if (all) {
                stage_ = PbftStage::Done;
            } else {
                enter_view_change(r);
            }
            return true;
        }
        case PbftStage::ViewChange: {
            const NodeId next{ledger_, primary_rank(view_ + 1, n)};
            std::array<std::uint32_t, 2> certified{0, 0};
            for (const auto& e : delivered) {
                if (e.phase != Phase::ViewChange || e.dst != next || e.src.ledger != ledger_) continue;
                if (e.body.certified) certified[static_cast<std::size_t>(*e.body.certified)] += 1;
                auto& s = nodes_[e.dst.rank];
                if (e.body.certified && !s.cert_seen) s.cert_seen = e.body.certified;
            }
            // Within the fault budget at most one value can carry a certificate.
            if (certified[1] > 0 || certified[0] > 0) {
                Vote v = certified[1] >= certified[0] ? Vote::Commit : Vote::Rollback;
                next_view_proposal_ = PbftProposal{v, v};
            } else if (fallback_) {
                next_view_proposal_ = PbftProposal{*fallback_, std::nullopt};
            } else {
                next_view_proposal_.reset();
            }
            stage_ = PbftStage::NewView;
            return true;
        }
        case PbftStage::NewView: {
            const NodeId next{ledger_, primary_rank(view_ + 1, n)};
            bool heard = false;
            for (const auto& e : delivered) {
                if (e.phase == Phase::NewView && e.src == next && e.dst.ledger == ledger_ && correct(e.dst.rank, r)) {
                    heard = true;
                }
            }
            ++view_;
            ++view_changes_;
            if (!heard) {
                enter_view_change(r);
                return true;
            }
            for (auto& s : nodes_) {
                s.accepted.reset();
                s.prepared.reset();
            }
            if (!next_view_proposal_) {
                stage_ = PbftStage::Blocked;
                return true;
            }
            proposal_ = next_view_proposal_;
            stage_ = PbftStage::PrePrepare;
            return true;
        }
        case PbftStage::Done:
        case PbftStage::Blocked:
            break;
    }
    return false;
}

std::optional<Vote> PbftInstance::committed(NodeId id) const {
    if (id.ledger != ledger_ || id.rank >= nodes_.size()) return std::nullopt;
    return nodes_[id.rank].committed;
}

std::uint32_t PbftInstance::commit_backing(NodeId id) const {
    if (id.ledger != ledger_ || id.rank >= nodes_.size()) return 0;
    return nodes_[id.rank].backing;
}

std::optional<Vote> PbftInstance::outcome() const {
    std::optional<Vote> value;
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        if (world_->is_byzantine({ledger_, i})) continue;
        if (nodes_[i].committed) {
            if (!value) value = nodes_[i].committed;
        }
    }
    return value;
}

std::optional<Vote> PbftInstance::certified_seen() const {
    for (std::uint32_t i = 0; i < nodes_.size(); ++i) {
        if (!world_->is_byzantine({ledger_, i}) && nodes_[i].cert_seen) return nodes_[i].cert_seen;
    }
    return std::nullopt;
}

PbftEngine::PbftEngine(const World& world, LedgerIndex ledger, PbftProposal proposal)
    : world_(&world), proposal_(proposal), instance_(world, ledger, 0) {}

void PbftEngine::begin(const Transaction&) { instance_.start(proposal_, proposal_.value); }

std::map<NodeId, Decision> PbftEngine::decisions() const {
    std::map<NodeId, Decision> out;
    for (auto id : world_->ledger_nodes(instance_.ledger())) {
        if (auto v = instance_.committed(id)) out[id] = Decision{*v, instance_.commit_backing(id)};
    }
    return out;
}

PbftOutcome pbft_execute(const ClusterConfig& cfg, LedgerIndex ledger, Vote proposal, bool allow_view_change) {
    Simulator sim(validate_config(cfg));
    PbftEngine engine(sim.world(), ledger, PbftProposal{proposal, std::nullopt});
    engine.instance().allow_view_change(allow_view_change);
    sim.begin(engine, Transaction{});
    while (!engine.finished()) sim.step(engine);

    PbftOutcome out;
    out.node_decisions = engine.decisions();
    if (auto v = engine.instance().outcome()) {
        std::uint32_t backing = 0;
        for (const auto& [id, d] : out.node_decisions) backing = std::max(backing, d.backing);
        out.decision = Decision{*v, backing};
    }
    out.rounds = sim.metrics().rounds;
    out.messages = sim.metrics().messages_total;
    out.view = engine.instance().view();
    out.view_changes = engine.instance().view_changes();
    return out;
}

}  // namespace xledger
