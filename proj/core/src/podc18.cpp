#include "xledger/podc18.hpp"

#include <string>

namespace xledger {

TimelockExpired::TimelockExpired(std::uint32_t hop, Round round)
    : std::runtime_error("timelock of hop " + std::to_string(hop) + " expired at round " + std::to_string(round)),
      hop_(hop),
      round_(round) {}

Hop ring_hop(std::uint32_t h, std::uint32_t k) {
    if (h < k) return {h, (h + 1) % k, true};
    const std::uint32_t j = h - k;
    const LedgerIndex s = (k - j) % k;
    return {s, (s + k - 1) % k, false};
}

std::string_view to_string(LedgerStatus s) {
    switch (s) {
        case LedgerStatus::Pending: return "PENDING";
        case LedgerStatus::Locked: return "LOCKED";
        case LedgerStatus::Claimed: return "CLAIMED";
        case LedgerStatus::Refunded: return "REFUNDED";
    }
    return "?";
}

Podc18Engine::Podc18Engine(const World& world, EngineOptions options)
    : world_(&world), options_(std::move(options)), views_(world.k(), 0) {
    for (LedgerIndex l = 0; l < world.k(); ++l) state_.ring.push_back(l);
    state_.timelock_rounds = world.config().timelock_rounds;
    state_.done = true;
}

NodeId Podc18Engine::primary_of(LedgerIndex l) const { return {l, primary_rank(views_[l], world_->n())}; }

void Podc18Engine::begin(const Transaction&) {
    state_.hop = 0;
    state_.outcome.assign(world_->k(), LedgerStatus::Pending);
    state_.expired_hop.reset();
    state_.aborted = false;
    state_.done = false;
    pbft_.reset();
    in_hop_round_ = true;
    hop_start_ = 0;
    carried_ = options_.proposal;
    backing_.assign(world_->config().node_count(), 0);
    expiry_.reset();
    last_round_ = 0;
}

std::vector<Envelope> Podc18Engine::emit(Round r) {
    if (state_.done) return {};
    if (!in_hop_round_) return pbft_->emit(r);

    hop_start_ = r;
    const Hop hop = ring_hop(state_.hop, world_->k());
    const NodeId src = primary_of(hop.sender);
    const NodeId dst = primary_of(hop.receiver);
    const Phase phase = hop.forward ? Phase::HopFwd : Phase::HopBwd;
    // Only the initiator's opening offer lacks a ledger certificate behind it.
    Body offer{BodyKind::Proposal, carried_, std::nullopt, src, 0};
    if (state_.hop != 0) offer.certified = carried_;
    return {{r, src, dst, phase, offer}, {r, src, src, phase, offer}};
}

bool Podc18Engine::absorb(Round r, std::span<const Envelope> delivered) {
    if (state_.done) return false;
    last_round_ = r;
    const std::uint32_t k = world_->k();
    const Hop hop = ring_hop(state_.hop, k);

    if (in_hop_round_) {
        const NodeId src = primary_of(hop.sender);
        const NodeId dst = primary_of(hop.receiver);
        std::optional<PbftProposal> proposal;
        for (const auto& e : delivered) {
            if (e.src != src || e.dst != dst || e.body.kind != BodyKind::Proposal) continue;
            const Vote v = e.body.certified.value_or(e.body.value);
            if (hop.forward) {
                const bool lock = v == Vote::Commit && options_.ledger_input(hop.receiver) == Vote::Commit;
                const Vote value = lock ? Vote::Commit : Vote::Rollback;
                proposal = PbftProposal{value, std::nullopt};
            } else {
                proposal = PbftProposal{v, e.body.certified};
            }
            break;
        }
        pbft_.emplace(*world_, hop.receiver, views_[hop.receiver]);
        // Without the offer a forward lock is refused; a claim needs the secret
        // the offer carries, so a backward hop has nothing to fall back on.
        pbft_->start(proposal, hop.forward ? std::optional<Vote>(Vote::Rollback) : std::nullopt);
        in_hop_round_ = false;
        return true;
    }

    pbft_->absorb(r, delivered);
    views_[hop.receiver] = pbft_->view();
    const auto outcome = pbft_->outcome();
    if (!pbft_->done() || pbft_->blocked() || !outcome) {
        if (r + 1 - hop_start_ >= state_.timelock_rounds) expire(r);
        return true;
    }
    if (r + 1 - hop_start_ > state_.timelock_rounds) {
        expire(r);
        return true;
    }

    for (auto id : world_->ledger_nodes(hop.receiver)) backing_[flat_index(id, world_->n())] = pbft_->commit_backing(id);
    if (hop.forward) {
        if (*outcome != Vote::Commit) {
            state_.aborted = true;
            finish();
            return true;
        }
        state_.outcome[hop.receiver] = LedgerStatus::Locked;
        carried_ = Vote::Commit;
    } else {
        state_.outcome[hop.receiver] = *outcome == Vote::Commit ? LedgerStatus::Claimed : LedgerStatus::Refunded;
        carried_ = *outcome;
    }
    ++state_.hop;
    in_hop_round_ = true;
    pbft_.reset();
    if (state_.hop == 2 * k) finish();
    return true;
}

void Podc18Engine::expire(Round r) {
    state_.expired_hop = state_.hop;
    expiry_.emplace(state_.hop, r);
    pbft_.reset();
    finish();
}

void Podc18Engine::finish() {
    for (auto& s : state_.outcome) {
        if (s != LedgerStatus::Claimed) s = LedgerStatus::Refunded;
    }
    state_.done = true;
}

std::map<NodeId, Decision> Podc18Engine::decisions() const {
    std::map<NodeId, Decision> out;
    if (!state_.done) return out;
    for (auto id : world_->all_nodes()) {
        if (world_->is_crashed(id, last_round_)) continue;
        const Vote v = state_.outcome[id.ledger] == LedgerStatus::Claimed ? Vote::Commit : Vote::Rollback;
        out[id] = Decision{v, backing_[flat_index(id, world_->n())]};
    }
    return out;
}

}  // namespace xledger
