// Per-phase communication patterns viewed as simplicial complexes.
//
// A phase's directed edge set comes from a simulated failure-free trace with
// self-messages removed. Its complex is the clique complex of the undirected
// support: every maximal clique becomes a maximal simplex.

#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <utility>
#include <vector>

#include "xledger/config.hpp"
#include "xledger/envelope.hpp"

namespace xledger {

class UnknownPhase : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

using Simplex = std::vector<NodeId>;  // sorted, duplicate-free

struct CommGraph {
    std::set<NodeId> vertices;
    /// Oriented 1-simplices (src, dst); never a self-loop.
    std::set<std::pair<NodeId, NodeId>> edges;

    bool operator==(const CommGraph&) const = default;
};

/// Edge set with every orientation reversed.
CommGraph reversed(const CommGraph& g);

struct CommComplex {
    std::vector<NodeId> vertices;
    std::vector<Simplex> maximal_simplices;  // sorted
    int dimension = -1;
    /// False when maximal cliques were not enumerated and `dimension` is a lower bound.
    bool exact = true;

    bool operator==(const CommComplex&) const = default;
};

/// Largest kn for which maximal cliques are enumerated exactly.
inline constexpr std::size_t kExactCliqueLimit = 64;

/// Phases a failure-free run of `protocol` uses.
std::vector<Phase> protocol_phases(Protocol protocol);

/// Throws UnknownPhase when `phase` is not one of protocol_phases(protocol).
CommGraph phase_graph(Protocol protocol, Phase phase, const ClusterConfig& cfg);

CommComplex clique_complex(const CommGraph& g);

/// True when `face` (any order) is a nonempty subset of some maximal simplex.
bool is_face(const CommComplex& c, std::vector<NodeId> face);

/// All faces of dimension exactly d.
std::set<Simplex> faces(const CommComplex& c, int d);

/// Faces of dimension <= d.
CommComplex skeleton(const CommComplex& c, int d);

/// Connected components of the 1-skeleton.
std::size_t components(const CommComplex& c);

}  // namespace xledger
