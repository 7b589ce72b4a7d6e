#include "bandgen/ordering.hpp"

#include "bandgen/error.hpp"
#include "bandgen/rng.hpp"

#include <algorithm>
#include <queue>
#include <string>

namespace bandgen {

namespace {

struct LevelInfo {
    int depth = 0;
    std::vector<int> deepest;
};

LevelInfo level_structure(const Graph& g, int root, std::vector<int>& dist)
{
    std::fill(dist.begin(), dist.end(), -1);
    LevelInfo info;
    std::queue<int> q;
    dist[static_cast<std::size_t>(root)] = 0;
    q.push(root);
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        const int d = dist[static_cast<std::size_t>(v)];
        if (d > info.depth) {
            info.depth = d;
            info.deepest.clear();
        }
        if (d == info.depth)
            info.deepest.push_back(v);
        for (int u : g.neighbors(v))
            if (dist[static_cast<std::size_t>(u)] < 0) {
                dist[static_cast<std::size_t>(u)] = d + 1;
                q.push(u);
            }
    }
    return info;
}

int george_liu(const Graph& g, int start)
{
    std::vector<int> dist(static_cast<std::size_t>(g.num_nodes()));
    int root = start;
    LevelInfo levels = level_structure(g, root, dist);
    for (;;) {
        int candidate = levels.deepest.front();
        for (int v : levels.deepest)
            if (g.degree(v) < g.degree(candidate) || (g.degree(v) == g.degree(candidate) && v < candidate))
                candidate = v;
        LevelInfo next = level_structure(g, candidate, dist);
        if (next.depth <= levels.depth)
            return candidate;
        root = candidate;
        levels = std::move(next);
    }
}

/// Nodes of each component, components ordered by minimum index.
std::vector<std::vector<int>> components(const Graph& g)
{
    int count = 0;
    const auto label = component_labels(g, &count);
    std::vector<std::vector<int>> comps(static_cast<std::size_t>(count));
    for (int v = 0; v < g.num_nodes(); ++v)
        comps[static_cast<std::size_t>(label[static_cast<std::size_t>(v)])].push_back(v);
    return comps;
}

int random_member(const std::vector<int>& comp, Rng& rng)
{
    return comp[rng.below(comp.size())];
}

void bfs_visit(const Graph& g, int root, Rng& rng, std::vector<char>& visited, std::vector<int>& sequence,
               bool cm, TieBreak tie)
{
    std::queue<int> q;
    visited[static_cast<std::size_t>(root)] = 1;
    q.push(root);
    std::vector<int> fresh;
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        sequence.push_back(v);
        fresh.clear();
        for (int u : g.neighbors(v))
            if (!visited[static_cast<std::size_t>(u)])
                fresh.push_back(u);
        if (!cm || tie == TieBreak::Random)
            rng.shuffle(fresh);
        if (cm)
            std::stable_sort(fresh.begin(), fresh.end(),
                             [&](int a, int b) { return g.degree(a) < g.degree(b); });
        for (int u : fresh) {
            visited[static_cast<std::size_t>(u)] = 1;
            q.push(u);
        }
    }
}

} // namespace

int pseudo_peripheral_node(const Graph& g, std::uint64_t seed)
{
    if (g.num_nodes() == 0)
        throw InputError("pseudo-peripheral node of an empty graph");
    if (!is_connected(g))
        throw InputError("pseudo-peripheral node requires a connected graph");
    Rng rng(seed);
    return george_liu(g, static_cast<int>(rng.below(static_cast<std::uint64_t>(g.num_nodes()))));
}

Ordering cuthill_mckee(const Graph& g, const OrderingConfig& cfg)
{
    Rng rng(cfg.seed);
    std::vector<char> visited(static_cast<std::size_t>(g.num_nodes()), 0);
    std::vector<int> sequence;
    sequence.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (const auto& comp : components(g)) {
        int start;
        if (cfg.tie_break == TieBreak::Random) {
            start = random_member(comp, rng);
        } else {
            start = comp.front();
            for (int v : comp)
                if (g.degree(v) < g.degree(start))
                    start = v;
        }
        bfs_visit(g, george_liu(g, start), rng, visited, sequence, true, cfg.tie_break);
    }
    return Ordering::from_sequence(sequence, OrderingFamily::CM);
}

Ordering bfs_order(const Graph& g, const OrderingConfig& cfg)
{
    Rng rng(cfg.seed);
    std::vector<char> visited(static_cast<std::size_t>(g.num_nodes()), 0);
    std::vector<int> sequence;
    sequence.reserve(static_cast<std::size_t>(g.num_nodes()));
    for (const auto& comp : components(g))
        bfs_visit(g, random_member(comp, rng), rng, visited, sequence, false, TieBreak::Random);
    return Ordering::from_sequence(sequence, OrderingFamily::BFS);
}

Ordering bfs_order_from(const Graph& g, int root, std::uint64_t seed)
{
    if (root < 0 || root >= g.num_nodes())
        throw InputError("BFS root " + std::to_string(root) + " out of range");
    Rng rng(seed);
    std::vector<char> visited(static_cast<std::size_t>(g.num_nodes()), 0);
    std::vector<int> sequence;
    sequence.reserve(static_cast<std::size_t>(g.num_nodes()));
    bfs_visit(g, root, rng, visited, sequence, false, TieBreak::Random);
    for (const auto& comp : components(g))
        if (!visited[static_cast<std::size_t>(comp.front())])
            bfs_visit(g, random_member(comp, rng), rng, visited, sequence, false, TieBreak::Random);
    return Ordering::from_sequence(sequence, OrderingFamily::BFS);
}

Ordering dfs_order(const Graph& g, const OrderingConfig& cfg)
{
    Rng rng(cfg.seed);
    const int n = g.num_nodes();
    std::vector<char> visited(static_cast<std::size_t>(n), 0);
    std::vector<int> sequence;
    sequence.reserve(static_cast<std::size_t>(n));

    struct Frame {
        std::vector<int> pending;
        std::size_t next = 0;
    };
    std::vector<Frame> stack;
    const auto enter = [&](int v) {
        visited[static_cast<std::size_t>(v)] = 1;
        sequence.push_back(v);
        Frame f;
        f.pending.assign(g.neighbors(v).begin(), g.neighbors(v).end());
        rng.shuffle(f.pending);
        stack.push_back(std::move(f));
    };

    for (const auto& comp : components(g)) {
        enter(random_member(comp, rng));
        while (!stack.empty()) {
            auto& top = stack.back();
            if (top.next == top.pending.size()) {
                stack.pop_back();
                continue;
            }
            const int u = top.pending[top.next++];
            if (!visited[static_cast<std::size_t>(u)])
                enter(u);
        }
    }
    return Ordering::from_sequence(sequence, OrderingFamily::DFS);
}

Ordering make_ordering(const Graph& g, const OrderingConfig& cfg)
{
    switch (cfg.family) {
    case OrderingFamily::BFS: return bfs_order(g, cfg);
    case OrderingFamily::DFS: return dfs_order(g, cfg);
    case OrderingFamily::CM: return cuthill_mckee(g, cfg);
    case OrderingFamily::Identity: return Ordering::identity(g.num_nodes());
    case OrderingFamily::Exact: return exact_bandwidth_ordering(g);
    }
    throw InputError("unknown ordering family");
}

namespace {

/// Decides whether an ordering of bandwidth <= width exists, filling
/// position-by-position and rejecting partial layouts that already stretch
/// an edge past the width.
class BandwidthSearch {
public:
    BandwidthSearch(const Graph& g, int width)
        : g_(g), width_(width), pos_(static_cast<std::size_t>(g.num_nodes()), -1),
          unplaced_nb_(static_cast<std::size_t>(g.num_nodes()))
    {
        for (int v = 0; v < g.num_nodes(); ++v)
            unplaced_nb_[static_cast<std::size_t>(v)] = g.degree(v);
    }

    bool solve() { return place(0); }

    std::vector<int> sequence() const
    {
        std::vector<int> seq(pos_.size());
        for (std::size_t v = 0; v < pos_.size(); ++v)
            seq[static_cast<std::size_t>(pos_[v])] = static_cast<int>(v);
        return seq;
    }

private:
    bool place(int p)
    {
        const int n = g_.num_nodes();
        if (p == n)
            return true;
        // Every placed node still waiting on a neighbour must be within reach of slot p.
        for (int q = std::max(0, p - width_ - 1); q < p - width_; ++q)
            if (unplaced_nb_[static_cast<std::size_t>(order_[static_cast<std::size_t>(q)])] > 0)
                return false;
        for (int v = 0; v < n; ++v) {
            if (pos_[static_cast<std::size_t>(v)] >= 0 || !fits(v, p))
                continue;
            pos_[static_cast<std::size_t>(v)] = p;
            order_.push_back(v);
            for (int u : g_.neighbors(v)) {
                --unplaced_nb_[static_cast<std::size_t>(u)];
            }
            if (place(p + 1))
                return true;
            for (int u : g_.neighbors(v))
                ++unplaced_nb_[static_cast<std::size_t>(u)];
            order_.pop_back();
            pos_[static_cast<std::size_t>(v)] = -1;
        }
        return false;
    }

    bool fits(int v, int p) const
    {
        for (int u : g_.neighbors(v)) {
            const int pu = pos_[static_cast<std::size_t>(u)];
            if (pu >= 0 && p - pu > width_)
                return false;
        }
        return true;
    }

    const Graph& g_;
    int width_;
    std::vector<int> pos_;
    std::vector<int> unplaced_nb_;
    std::vector<int> order_;
};

} // namespace

Ordering exact_bandwidth_ordering(const Graph& g)
{
    const int n = g.num_nodes();
    if (n > kExactBandwidthMaxNodes)
        throw CapabilityError("exact bandwidth limited to " + std::to_string(kExactBandwidthMaxNodes) +
                              " nodes, got " + std::to_string(n));
    if (g.num_edges() == 0) {
        auto o = Ordering::identity(n);
        o.family = OrderingFamily::Exact;
        return o;
    }
    for (int width = std::max(1, (g.max_degree() + 1) / 2);; ++width) {
        BandwidthSearch search(g, width);
        if (search.solve())
            return Ordering::from_sequence(search.sequence(), OrderingFamily::Exact);
    }
}

int exact_bandwidth(const Graph& g)
{
    return bandwidth_of_ordering(g, exact_bandwidth_ordering(g));
}

} // namespace bandgen
