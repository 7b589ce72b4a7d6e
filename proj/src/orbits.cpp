#include "bandgen/metrics.hpp"

#include <algorithm>

namespace bandgen {

std::vector<double> clustering_coefficients(const Graph& g)
{
    const int n = g.num_nodes();
    std::vector<double> c(static_cast<std::size_t>(n), 0.0);
    for (int v = 0; v < n; ++v) {
        const auto nb = g.neighbors(v);
        const auto d = static_cast<std::int64_t>(nb.size());
        if (d < 2)
            continue;
        std::int64_t links = 0;
        for (std::size_t i = 0; i < nb.size(); ++i)
            for (std::size_t j = i + 1; j < nb.size(); ++j)
                if (g.has_edge(nb[i], nb[j]))
                    ++links;
        c[static_cast<std::size_t>(v)] = 2.0 * static_cast<double>(links) / static_cast<double>(d * (d - 1));
    }
    return c;
}

namespace {

/// Enumerates each connected induced subgraph with 2-4 nodes exactly once
/// (ESU: extension sets only grow with exclusive neighbours above the root).
class GraphletCounter {
public:
    explicit GraphletCounter(const Graph& g)
        : g_(g), counts_(static_cast<std::size_t>(g.num_nodes())), mark_(static_cast<std::size_t>(g.num_nodes()), 0)
    {}

    std::vector<OrbitCounts> run()
    {
        for (int v = 0; v < g_.num_nodes(); ++v) {
            root_ = v;
            sub_.assign(1, v);
            mark_[static_cast<std::size_t>(v)] = 1;
            std::vector<int> ext;
            for (int u : g_.neighbors(v))
                if (u > v)
                    ext.push_back(u);
            extend(ext);
            mark_[static_cast<std::size_t>(v)] = 0;
        }
        return std::move(counts_);
    }

private:
    // mark_[v] == 1 while v is in the current subgraph.
    void extend(std::vector<int> ext)
    {
        if (sub_.size() >= 2)
            classify();
        if (sub_.size() == 4)
            return;
        while (!ext.empty()) {
            const int w = ext.back();
            ext.pop_back();
            std::vector<int> next = ext;
            for (int u : g_.neighbors(w)) {
                if (u <= root_ || in_sub(u) || adjacent_to_sub(u))
                    continue;
                if (std::find(next.begin(), next.end(), u) == next.end())
                    next.push_back(u);
            }
            sub_.push_back(w);
            mark_[static_cast<std::size_t>(w)] = 1;
            extend(std::move(next));
            mark_[static_cast<std::size_t>(w)] = 0;
            sub_.pop_back();
        }
    }

    bool in_sub(int u) const { return mark_[static_cast<std::size_t>(u)] == 1; }

    bool adjacent_to_sub(int u) const
    {
        for (int s : sub_)
            if (g_.has_edge(s, u))
                return true;
        return false;
    }

    void classify()
    {
        const std::size_t k = sub_.size();
        std::array<int, 4> deg{};
        int edges = 0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                if (g_.has_edge(sub_[i], sub_[j])) {
                    ++deg[i];
                    ++deg[j];
                    ++edges;
                }
        const int maxdeg = *std::max_element(deg.begin(), deg.begin() + static_cast<long>(k));
        for (std::size_t i = 0; i < k; ++i)
            ++counts_[static_cast<std::size_t>(sub_[i])][static_cast<std::size_t>(orbit(k, edges, maxdeg, deg[i]))];
    }

    static int orbit(std::size_t k, int edges, int maxdeg, int d)
    {
        if (k == 2)
            return 0;
        if (k == 3)
            return edges == 3 ? 3 : (d == 1 ? 1 : 2);
        switch (edges) {
        case 3:
            if (maxdeg == 3)
                return d == 3 ? 7 : 6;
            return d == 1 ? 4 : 5;
        case 4:
            if (maxdeg == 2)
                return 8;
            return d == 1 ? 9 : (d == 2 ? 10 : 11);
        case 5: return d == 2 ? 12 : 13;
        default: return 14;
        }
    }

    const Graph& g_;
    std::vector<OrbitCounts> counts_;
    std::vector<char> mark_;
    std::vector<int> sub_;
    int root_ = 0;
};

} // namespace

std::vector<OrbitCounts> orbit_counts4(const Graph& g)
{
    return GraphletCounter(g).run();
}

} // namespace bandgen
