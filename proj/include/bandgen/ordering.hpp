#pragma once

#include "bandgen/graph.hpp"

#include <cstdint>

namespace bandgen {

enum class TieBreak { DegreeThenIndex, Random };

struct OrderingConfig {
    OrderingFamily family = OrderingFamily::CM;
    std::uint64_t seed = 0;
    TieBreak tie_break = TieBreak::Random;
};

/// George-Liu iteration started from a seeded random node. The graph must be
/// connected; callers split disconnected inputs into components first.
int pseudo_peripheral_node(const Graph& g, std::uint64_t seed);

/// Cuthill-McKee: BFS from a pseudo-peripheral root, unvisited neighbours
/// enqueued by ascending degree. Components are handled in order of their
/// smallest node index.
Ordering cuthill_mckee(const Graph& g, const OrderingConfig& cfg);

/// Random-root BFS with randomly permuted neighbour visits.
Ordering bfs_order(const Graph& g, const OrderingConfig& cfg);
/// BFS from a fixed root (the remaining components use seeded random roots).
Ordering bfs_order_from(const Graph& g, int root, std::uint64_t seed);

/// Random-root preorder DFS with randomly permuted neighbour visits.
Ordering dfs_order(const Graph& g, const OrderingConfig& cfg);

/// Dispatches on cfg.family (BFS, DFS or CM).
Ordering make_ordering(const Graph& g, const OrderingConfig& cfg);

inline constexpr int kExactBandwidthMaxNodes = 10;

/// Minimum bandwidth over all orderings by branch and bound. Throws
/// CapabilityError above kExactBandwidthMaxNodes nodes.
int exact_bandwidth(const Graph& g);
/// Same search, also returning an optimal ordering.
Ordering exact_bandwidth_ordering(const Graph& g);

} // namespace bandgen
