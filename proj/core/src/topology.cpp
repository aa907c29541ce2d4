#include "xledger/topology.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <numeric>

#include "xledger/netsim.hpp"
#include "xledger/types.hpp"

namespace xledger {

namespace {

// Calls fn on every size-m subset of s, in lexicographic order.
template <typename Fn>
void for_each_subset(const Simplex& s, std::size_t m, Fn&& fn) {
    if (m == 0 || m > s.size()) return;
    std::vector<std::size_t> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    Simplex sub(m);
    while (true) {
        for (std::size_t i = 0; i < m; ++i) sub[i] = s[idx[i]];
        fn(sub);
        std::size_t i = m;
        while (i > 0 && idx[i - 1] == s.size() - m + i - 1) --i;
        if (i == 0) return;
        ++idx[i - 1];
        for (std::size_t j = i; j < m; ++j) idx[j] = idx[j - 1] + 1;
    }
}

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

private:
    std::vector<std::size_t> parent_;
};

void bron_kerbosch(std::uint64_t r, std::uint64_t p, std::uint64_t x, const std::vector<std::uint64_t>& adj,
                   std::vector<std::uint64_t>& out) {
    if (p == 0 && x == 0) {
        out.push_back(r);
        return;
    }
    // Pivot on the vertex of P | X with the most neighbours in P.
    const std::uint64_t px = p | x;
    int pivot = std::countr_zero(px);
    int best = -1;
    for (std::uint64_t m = px; m != 0; m &= m - 1) {
        const int u = std::countr_zero(m);
        const int c = std::popcount(p & adj[u]);
        if (c > best) {
            best = c;
            pivot = u;
        }
    }
    for (std::uint64_t m = p & ~adj[pivot]; m != 0; m &= m - 1) {
        const int v = std::countr_zero(m);
        const std::uint64_t bit = std::uint64_t{1} << v;
        bron_kerbosch(r | bit, p & adj[v], x & adj[v], adj, out);
        p &= ~bit;
        x |= bit;
    }
}

}  // namespace

CommGraph reversed(const CommGraph& g) {
    CommGraph out;
    out.vertices = g.vertices;
    for (const auto& [a, b] : g.edges) out.edges.emplace(b, a);
    return out;
}

std::vector<Phase> protocol_phases(Protocol protocol) {
    switch (protocol) {
        case Protocol::Xlpn22: return {Phase::VoteReq, Phase::VotePrep, Phase::Ready, Phase::CommitReq, Phase::Commit};
        case Protocol::Vldb20:
            return {Phase::TwoPcVote, Phase::PrePrepare, Phase::Prepare, Phase::PbftCommit, Phase::Reply, Phase::TwoPcDecide};
        case Protocol::Podc18:
            return {Phase::HopFwd, Phase::HopBwd, Phase::PrePrepare, Phase::Prepare, Phase::PbftCommit, Phase::Reply};
    }
    return {};
}

CommGraph phase_graph(Protocol protocol, Phase phase, const ClusterConfig& cfg) {
    const auto phases = protocol_phases(protocol);
    if (std::find(phases.begin(), phases.end(), phase) == phases.end()) {
        throw UnknownPhase(std::string(to_string(phase)) + " is not a phase of " + std::string(to_string(protocol)));
    }
    ClusterConfig clean = cfg;
    clean.fault_plan = FaultPlan{};
    std::vector<Envelope> trace;
    RunOptions options;
    options.trace_out = &trace;
    const Transaction txn{};
    run_to_completion(protocol, clean, std::span<const Transaction>(&txn, 1), options);

    CommGraph g;
    for (LedgerIndex l = 0; l < clean.k; ++l) {
        for (std::uint32_t i = 0; i < clean.n; ++i) g.vertices.insert({l, i});
    }
    for (const auto& e : trace) {
        if (e.phase == phase && e.src != e.dst) g.edges.emplace(e.src, e.dst);
    }
    return g;
}

CommComplex clique_complex(const CommGraph& g) {
    CommComplex c;
    c.vertices.assign(g.vertices.begin(), g.vertices.end());
    const std::size_t nv = c.vertices.size();
    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < nv; ++i) index[c.vertices[i]] = i;

    std::vector<std::set<std::size_t>> adj(nv);
    for (const auto& [a, b] : g.edges) {
        const auto ia = index.at(a);
        const auto ib = index.at(b);
        if (ia == ib) continue;
        adj[ia].insert(ib);
        adj[ib].insert(ia);
    }

    std::set<Simplex> found;
    if (nv <= kExactCliqueLimit) {
        std::vector<std::uint64_t> mask(nv, 0);
        for (std::size_t i = 0; i < nv; ++i) {
            for (auto j : adj[i]) mask[i] |= std::uint64_t{1} << j;
        }
        const std::uint64_t all = nv == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << nv) - 1;
        std::vector<std::uint64_t> cliques;
        if (nv > 0) bron_kerbosch(0, all, 0, mask, cliques);
        for (auto m : cliques) {
            Simplex s;
            for (; m != 0; m &= m - 1) s.push_back(c.vertices[static_cast<std::size_t>(std::countr_zero(m))]);
            found.insert(std::move(s));
        }
    } else {
        // Greedy clique per vertex: every result is a clique, but not every
        // maximal clique is found, so the dimension is only a lower bound.
        c.exact = false;
        for (std::size_t v = 0; v < nv; ++v) {
            std::vector<std::size_t> clique{v};
            for (auto u : adj[v]) {
                const bool joins = std::all_of(clique.begin(), clique.end(),
                                               [&](std::size_t w) { return adj[u].contains(w); });
                if (joins) clique.push_back(u);
            }
            Simplex s;
            for (auto i : clique) s.push_back(c.vertices[i]);
            std::sort(s.begin(), s.end());
            found.insert(std::move(s));
        }
        // Drop cliques contained in another one.
        std::set<Simplex> maximal;
        for (const auto& s : found) {
            const bool covered = std::any_of(found.begin(), found.end(), [&](const Simplex& t) {
                return t.size() > s.size() && std::includes(t.begin(), t.end(), s.begin(), s.end());
            });
            if (!covered) maximal.insert(s);
        }
        found = std::move(maximal);
    }

    c.maximal_simplices.assign(found.begin(), found.end());
    for (const auto& s : c.maximal_simplices) c.dimension = std::max(c.dimension, static_cast<int>(s.size()) - 1);
    return c;
}

bool is_face(const CommComplex& c, std::vector<NodeId> face) {
    if (face.empty()) return false;
    std::sort(face.begin(), face.end());
    face.erase(std::unique(face.begin(), face.end()), face.end());
    return std::any_of(c.maximal_simplices.begin(), c.maximal_simplices.end(), [&](const Simplex& s) {
        return std::includes(s.begin(), s.end(), face.begin(), face.end());
    });
}

std::set<Simplex> faces(const CommComplex& c, int d) {
    std::set<Simplex> out;
    if (d < 0) return out;
    for (const auto& s : c.maximal_simplices) {
        for_each_subset(s, static_cast<std::size_t>(d) + 1, [&](const Simplex& sub) { out.insert(sub); });
    }
    return out;
}

CommComplex skeleton(const CommComplex& c, int d) {
    if (d < 0) throw std::invalid_argument("skeleton dimension must be >= 0");
    CommComplex out;
    out.vertices = c.vertices;
    out.exact = c.exact;
    std::set<Simplex> top;
    for (const auto& s : c.maximal_simplices) {
        if (static_cast<int>(s.size()) <= d + 1) {
            top.insert(s);
        } else {
            for_each_subset(s, static_cast<std::size_t>(d) + 1, [&](const Simplex& sub) { top.insert(sub); });
        }
    }
    out.maximal_simplices.assign(top.begin(), top.end());
    for (const auto& s : out.maximal_simplices) out.dimension = std::max(out.dimension, static_cast<int>(s.size()) - 1);
    return out;
}

std::size_t components(const CommComplex& c) {
    std::map<NodeId, std::size_t> index;
    for (std::size_t i = 0; i < c.vertices.size(); ++i) index[c.vertices[i]] = i;
    DisjointSets sets(c.vertices.size());
    for (const auto& s : c.maximal_simplices) {
        for (std::size_t i = 1; i < s.size(); ++i) sets.unite(index.at(s[0]), index.at(s[i]));
    }
    std::size_t count = 0;
    for (std::size_t i = 0; i < c.vertices.size(); ++i) count += sets.find(i) == i ? 1 : 0;
    return count;
}

}  // namespace xledger
