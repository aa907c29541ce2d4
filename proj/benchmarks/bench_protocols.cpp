// Wall-clock cost of simulating one transaction, and of the topology pass.

#include <benchmark/benchmark.h>

#include <span>

#include "xledger/config.hpp"
#include "xledger/netsim.hpp"
#include "xledger/topology.hpp"

namespace {

using namespace xledger;

ClusterConfig shape(benchmark::State& state) {
    ClusterConfig cfg;
    cfg.k = static_cast<std::uint32_t>(state.range(0));
    cfg.n = static_cast<std::uint32_t>(state.range(1));
    cfg.f = max_faulty(cfg.n);
    return cfg;
}

template <Protocol P>
void BM_Transaction(benchmark::State& state) {
    const auto cfg = shape(state);
    const Transaction txn{};
    std::uint64_t messages = 0;
    for (auto _ : state) {
        auto m = run_to_completion(P, cfg, std::span<const Transaction>(&txn, 1));
        messages = m.messages_total;
        benchmark::DoNotOptimize(m);
    }
    state.counters["messages"] = static_cast<double>(messages);
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * messages));
}

void grid(benchmark::internal::Benchmark* b) {
    for (int k : {2, 4, 8}) {
        for (int n : {4, 16, 32}) b->Args({k, n});
    }
}

BENCHMARK(BM_Transaction<Protocol::Xlpn22>)->Name("xlpn22")->Apply(grid)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Transaction<Protocol::Vldb20>)->Name("vldb20")->Apply(grid)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Transaction<Protocol::Podc18>)->Name("podc18")->Apply(grid)->Unit(benchmark::kMicrosecond);

void BM_CliqueComplex(benchmark::State& state) {
    const auto cfg = shape(state);
    const auto g = phase_graph(Protocol::Xlpn22, Phase::VotePrep, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(clique_complex(g));
}
BENCHMARK(BM_CliqueComplex)->Args({3, 4})->Args({4, 16})->Args({8, 8})->Unit(benchmark::kMicrosecond);

void BM_FaultFilter(benchmark::State& state) {
    auto cfg = shape(state);
    cfg.fault_plan.byzantine[{0, 1}] = {StrategyKind::Equivocate, {}};
    std::vector<Envelope> outbox;
    for (std::uint32_t s = 0; s < cfg.n; ++s) {
        for (std::uint32_t d = 0; d < cfg.n; ++d) {
            outbox.push_back({1, {0, s}, {0, d}, Phase::VotePrep, Body{BodyKind::Vote, Vote::Commit, std::nullopt, {0, s}, 0}});
        }
    }
    for (auto _ : state) benchmark::DoNotOptimize(apply_faults(outbox, cfg.fault_plan, 1));
    state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * outbox.size()));
}
BENCHMARK(BM_FaultFilter)->Args({1, 16})->Args({1, 64});

}  // namespace
BENCHMARK_MAIN();
