#include "xledger/netsim.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "xledger/complexity.hpp"
#include "xledger/engines.hpp"

namespace xledger {

World::World(ClusterConfig cfg) : cfg_(std::move(cfg)) {
    auto& plan = cfg_.fault_plan;
    if (plan.initiator_fails_at) {
        NodeId initiator{cfg_.initiator_ledger, 0};
        auto [it, inserted] = plan.crash_at.emplace(initiator, *plan.initiator_fails_at);
        if (!inserted) it->second = std::min(it->second, *plan.initiator_fails_at);
    }
}

const ByzantineStrategy* World::strategy(NodeId id) const {
    auto it = cfg_.fault_plan.byzantine.find(id);
    return it == cfg_.fault_plan.byzantine.end() ? nullptr : &it->second;
}

bool World::is_crashed(NodeId id, Round r) const {
    auto it = cfg_.fault_plan.crash_at.find(id);
    return it != cfg_.fault_plan.crash_at.end() && it->second <= r;
}

bool World::is_silent(NodeId id, Round r) const {
    if (is_crashed(id, r)) return true;
    const auto* s = strategy(id);
    return s != nullptr && s->kind == StrategyKind::Silent;
}

std::vector<NodeId> World::all_nodes() const {
    std::vector<NodeId> out;
    out.reserve(cfg_.node_count());
    for (LedgerIndex l = 0; l < cfg_.k; ++l) {
        for (std::uint32_t r = 0; r < cfg_.n; ++r) out.push_back({l, r});
    }
    return out;
}

std::vector<NodeId> World::ledger_nodes(LedgerIndex ledger) const {
    std::vector<NodeId> out;
    out.reserve(cfg_.n);
    for (std::uint32_t r = 0; r < cfg_.n; ++r) out.push_back({ledger, r});
    return out;
}

std::uint64_t RunMetrics::messages_in(std::initializer_list<Phase> phases) const {
    std::uint64_t total = 0;
    for (auto p : phases) {
        auto it = messages_by_phase.find(p);
        if (it != messages_by_phase.end()) total += it->second;
    }
    return total;
}

FilterResult apply_faults(std::vector<Envelope> outbox, const FaultPlan& plan, Round round) {
    FilterResult result;
    if (plan.byzantine.empty() && plan.crash_at.empty()) {
        result.delivered = std::move(outbox);
        return result;
    }
    result.delivered.reserve(outbox.size());

    // Equivocation groups: (src, phase, kind) -> indices into `kept`, so each
    // group can be split into receiver halves once the whole outbox is seen.
    std::map<std::tuple<NodeId, Phase, BodyKind>, std::vector<std::size_t>> groups;

    for (auto& e : outbox) {
        auto crash = plan.crash_at.find(e.src);
        if (crash != plan.crash_at.end() && crash->second <= round) {
            result.dropped.push_back(std::move(e));
            continue;
        }
        auto byz = plan.byzantine.find(e.src);
        if (byz == plan.byzantine.end()) {
            result.delivered.push_back(std::move(e));
            continue;
        }
        const auto& strategy = byz->second;
        switch (strategy.kind) {
            case StrategyKind::Silent:
                result.dropped.push_back(std::move(e));
                continue;
            case StrategyKind::Omit:
                if (strategy.targets.contains(e.dst)) {
                    result.dropped.push_back(std::move(e));
                } else {
                    result.delivered.push_back(std::move(e));
                }
                continue;
            case StrategyKind::WrongVote:
                if (sender_authored(e)) e.body.value = flip(e.body.value);
                result.delivered.push_back(std::move(e));
                continue;
            case StrategyKind::Equivocate:
                if (sender_authored(e)) {
                    groups[{e.src, e.phase, e.body.kind}].push_back(result.delivered.size());
                }
                result.delivered.push_back(std::move(e));
                continue;
        }
    }

    // Receivers ordered by NodeId; the first ceil(m/2) keep the honest value,
    // the rest get the opposite one.
    for (auto& [key, indices] : groups) {
        std::stable_sort(indices.begin(), indices.end(), [&](std::size_t a, std::size_t b) {
            return result.delivered[a].dst < result.delivered[b].dst;
        });
        const std::size_t keep = (indices.size() + 1) / 2;
        for (std::size_t i = keep; i < indices.size(); ++i) {
            auto& body = result.delivered[indices[i]].body;
            body.value = flip(body.value);
        }
    }
    return result;
}

std::uint64_t count_equivocations(std::span<const Envelope> delivered) {
    std::map<std::tuple<NodeId, Phase, Round, BodyKind, NodeId>, std::uint8_t> seen;
    for (const auto& e : delivered) {
        if (e.body.kind == BodyKind::Record) continue;
        auto& mask = seen[{e.src, e.phase, e.round, e.body.kind, e.body.author}];
        mask |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(e.body.value));
    }
    return static_cast<std::uint64_t>(std::count_if(seen.begin(), seen.end(), [](const auto& kv) { return kv.second == 3; }));
}

Simulator::Simulator(ClusterConfig cfg) : world_(std::move(cfg)) {}

void Simulator::begin(ProtocolEngine& engine, const Transaction& txn) {
    engine.begin(txn);
    complete_ = false;
}

RoundReport Simulator::step(ProtocolEngine& engine) {
    if (engine.finished()) {
        complete_ = true;
        return RoundReport{round_, 0, 0, 0};
    }
    ++round_;
    auto outbox = engine.emit(round_);
    const bool emitted = !outbox.empty();
    for (auto& e : outbox) e.round = round_;

    auto filtered = apply_faults(std::move(outbox), world_.plan(), round_);
    RoundReport report;
    report.round = round_;
    report.delivered = filtered.delivered.size();
    report.dropped = filtered.dropped.size();
    report.equivocations_detected = count_equivocations(filtered.delivered);

    const bool progressed = engine.absorb(round_, filtered.delivered);

    metrics_.rounds += 1;
    metrics_.messages_total += report.delivered;
    metrics_.dropped += report.dropped;
    metrics_.equivocations += report.equivocations_detected;
    for (const auto& e : filtered.delivered) metrics_.messages_by_phase[e.phase] += 1;
    metrics_.sim_time = metrics_.rounds * metrics_.latency_unit;
    if (record_trace_) {
        trace_.insert(trace_.end(), filtered.delivered.begin(), filtered.delivered.end());
    }
    reports_.push_back(report);

    if (!emitted && !progressed) {
        throw StalledError("round " + std::to_string(round_) + ": no messages and no progress");
    }
    if (engine.finished()) complete_ = true;
    return report;
}

std::vector<Vote> honest_outcomes(const World& world, const std::map<NodeId, Decision>& decisions) {
    std::set<Vote> values;
    for (const auto& [id, d] : decisions) {
        if (!world.is_byzantine(id)) values.insert(d.value);
    }
    return {values.begin(), values.end()};
}

RunMetrics run_to_completion(Protocol protocol, const ClusterConfig& cfg, std::span<const Transaction> txns,
                             const RunOptions& options) {
    Simulator sim(validate_config(cfg));
    sim.record_trace(options.trace_out != nullptr);
    auto engine = make_engine(protocol, sim.world(), options.engine);
    const Round budget = rounds_formula(protocol, cfg.k) + options.liveness_slack;

    RunMetrics totals;
    for (const auto& txn : txns) {
        sim.begin(*engine, txn);
        const Round start = sim.round();
        while (!engine->finished()) {
            sim.step(*engine);
            if (sim.round() - start > budget) {
                throw LivenessViolation("transaction " + std::to_string(txn.id) + " exceeded " +
                                        std::to_string(budget) + " rounds");
            }
        }
        auto decisions = engine->decisions();
        auto outcomes = honest_outcomes(sim.world(), decisions);
        if (options.check_safety && outcomes.size() > 1) {
            throw SafetyViolation("transaction " + std::to_string(txn.id) +
                                  ": honest nodes finalized both COMMIT and ROLLBACK");
        }
        if (outcomes.empty()) {
            throw LivenessViolation("transaction " + std::to_string(txn.id) + ": no honest node finalized");
        }
        // With check_safety off a split outcome is tallied by its majority value.
        std::size_t commit_votes = 0;
        std::size_t total = 0;
        for (const auto& [id, d] : decisions) {
            if (sim.world().is_byzantine(id)) continue;
            ++total;
            if (d.value == Vote::Commit) ++commit_votes;
        }
        if (2 * commit_votes > total) {
            ++totals.commits;
        } else {
            ++totals.rollbacks;
        }
        totals.decisions = std::move(decisions);
    }

    const auto& m = sim.metrics();
    totals.rounds = m.rounds;
    totals.messages_total = m.messages_total;
    totals.messages_by_phase = m.messages_by_phase;
    totals.latency_unit = options.latency_unit;
    totals.sim_time = m.rounds * options.latency_unit;
    totals.txn_count = txns.size();
    totals.dropped = m.dropped;
    totals.equivocations = m.equivocations;
    if (options.trace_out != nullptr) *options.trace_out = sim.trace();
    if (options.reports_out != nullptr) *options.reports_out = sim.reports();
    return totals;
}

}  // namespace xledger
