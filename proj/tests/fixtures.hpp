#pragma once

#include "bandgen/graph.hpp"
#include "bandgen/metrics.hpp"
#include "bandgen/rng.hpp"

#include <algorithm>
#include <vector>

namespace bandgen::testing {

inline Graph path_graph(int n)
{
    std::vector<Edge> e;
    for (int i = 0; i + 1 < n; ++i)
        e.emplace_back(i, i + 1);
    return make_graph(n, e);
}

inline Graph cycle_graph(int n)
{
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        e.emplace_back(i, (i + 1) % n);
    return make_graph(n, e);
}

inline Graph complete_graph(int n)
{
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            e.emplace_back(i, j);
    return make_graph(n, e);
}

/// Centre 0 with leaves 1..n-1.
inline Graph star_graph(int n)
{
    std::vector<Edge> e;
    for (int i = 1; i < n; ++i)
        e.emplace_back(0, i);
    return make_graph(n, e);
}

inline Graph erdos_renyi(int n, double p, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Edge> e;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.bernoulli(p))
                e.emplace_back(i, j);
    return make_graph(n, e);
}

/// ER graph with its nodes relabelled by a random permutation.
inline Graph permuted(const Graph& g, std::uint64_t seed)
{
    std::vector<int> perm(static_cast<std::size_t>(g.num_nodes()));
    for (int i = 0; i < g.num_nodes(); ++i)
        perm[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    rng.shuffle(perm);
    return apply_ordering(g, Ordering{perm, OrderingFamily::Identity});
}

/// Bandwidth minimum over every permutation; the independent oracle for n <= 8.
inline int brute_force_bandwidth(const Graph& g)
{
    const int n = g.num_nodes();
    std::vector<int> seq(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        seq[static_cast<std::size_t>(i)] = i;
    int best = n;
    do {
        const auto o = Ordering::from_sequence(seq, OrderingFamily::Identity);
        best = std::min(best, bandwidth_of_ordering(g, o));
    } while (std::next_permutation(seq.begin(), seq.end()));
    return n == 0 ? 0 : best;
}

/// Enumerates every 2-, 3- and 4-subset, keeps the connected induced ones and
/// classifies each member by graphlet edge count and degree.
inline std::vector<OrbitCounts> brute_force_orbits(const Graph& g)
{
    const int n = g.num_nodes();
    std::vector<OrbitCounts> out(static_cast<std::size_t>(n), OrbitCounts{});
    auto add = [&](int v, int orbit) { ++out[static_cast<std::size_t>(v)][static_cast<std::size_t>(orbit)]; };
    auto classify = [&](const std::vector<int>& s) {
        const int k = static_cast<int>(s.size());
        std::vector<int> deg(static_cast<std::size_t>(k), 0);
        int e = 0;
        for (int a = 0; a < k; ++a)
            for (int b = a + 1; b < k; ++b)
                if (g.has_edge(s[static_cast<std::size_t>(a)], s[static_cast<std::size_t>(b)])) {
                    ++deg[static_cast<std::size_t>(a)];
                    ++deg[static_cast<std::size_t>(b)];
                    ++e;
                }
        // Connected iff it is a tree or has a cycle spanning enough nodes; for
        // k <= 4 a subset is disconnected exactly when some node has degree 0
        // or the edges form two disjoint pairs.
        if (std::count(deg.begin(), deg.end(), 0) > 0)
            return;
        if (k == 4 && e == 2)
            return;
        const int maxdeg = *std::max_element(deg.begin(), deg.end());
        for (int a = 0; a < k; ++a) {
            const int v = s[static_cast<std::size_t>(a)];
            const int d = deg[static_cast<std::size_t>(a)];
            if (k == 2) {
                add(v, 0);
            } else if (k == 3) {
                add(v, e == 3 ? 3 : (d == 1 ? 1 : 2));
            } else if (e == 3) {
                if (maxdeg == 3)
                    add(v, d == 3 ? 7 : 6);
                else
                    add(v, d == 1 ? 4 : 5);
            } else if (e == 4) {
                if (maxdeg == 2)
                    add(v, 8);
                else
                    add(v, d == 1 ? 9 : (d == 2 ? 10 : 11));
            } else if (e == 5) {
                add(v, d == 2 ? 12 : 13);
            } else {
                add(v, 14);
            }
        }
    };
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            classify({a, b});
            for (int c = b + 1; c < n; ++c) {
                classify({a, b, c});
                for (int d = c + 1; d < n; ++d)
                    classify({a, b, c, d});
            }
        }
    return out;
}

} // namespace bandgen::testing
