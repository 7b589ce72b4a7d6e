#include "bandgen/graph.hpp"

#include "bandgen/error.hpp"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <queue>
#include <string>

namespace bandgen {

struct GraphBuilder {
    static Graph build(std::vector<std::vector<int>> adj)
    {
        Graph g;
        std::size_t total = 0;
        for (auto& nb : adj)
            total += nb.size();
        g.adj_ = std::move(adj);
        g.num_edges_ = total / 2;
        return g;
    }
};

Graph::Graph(int n) : adj_(static_cast<std::size_t>(std::max(n, 0))) {}

int Graph::max_degree() const noexcept
{
    std::size_t best = 0;
    for (const auto& nb : adj_)
        best = std::max(best, nb.size());
    return static_cast<int>(best);
}

bool Graph::has_edge(int u, int v) const
{
    const auto& nb = adj_[static_cast<std::size_t>(u)];
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<Edge> Graph::edges() const
{
    std::vector<Edge> out;
    out.reserve(num_edges_);
    for (int u = 0; u < num_nodes(); ++u)
        for (int v : adj_[static_cast<std::size_t>(u)])
            if (u < v)
                out.emplace_back(u, v);
    return out;
}

EdgeListResult from_edge_list(int n, std::span<const Edge> edges)
{
    if (n < 0)
        throw InputError("node count must be non-negative, got " + std::to_string(n));
    EdgeListResult res;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
    for (const auto& [u, v] : edges) {
        if (u < 0 || v < 0 || u >= n || v >= n)
            throw InputError("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                             ") out of range for n = " + std::to_string(n));
        if (u == v) {
            ++res.self_loops_dropped;
            continue;
        }
        adj[static_cast<std::size_t>(u)].push_back(v);
        adj[static_cast<std::size_t>(v)].push_back(u);
    }
    std::size_t dup_endpoints = 0;
    for (auto& nb : adj) {
        std::sort(nb.begin(), nb.end());
        const auto last = std::unique(nb.begin(), nb.end());
        dup_endpoints += static_cast<std::size_t>(nb.end() - last);
        nb.erase(last, nb.end());
    }
    res.duplicates_dropped = dup_endpoints / 2;
    res.graph = GraphBuilder::build(std::move(adj));
    return res;
}

Graph make_graph(int n, std::span<const Edge> edges)
{
    return from_edge_list(n, edges).graph;
}

const char* to_string(OrderingFamily f) noexcept
{
    switch (f) {
    case OrderingFamily::Identity: return "identity";
    case OrderingFamily::BFS: return "bfs";
    case OrderingFamily::DFS: return "dfs";
    case OrderingFamily::CM: return "cm";
    case OrderingFamily::Exact: return "exact";
    }
    return "unknown";
}

Ordering Ordering::identity(int n)
{
    Ordering o;
    o.perm.resize(static_cast<std::size_t>(n));
    std::iota(o.perm.begin(), o.perm.end(), 0);
    return o;
}

Ordering Ordering::from_sequence(std::span<const int> sequence, OrderingFamily family)
{
    Ordering o;
    o.family = family;
    o.perm.assign(sequence.size(), -1);
    for (std::size_t pos = 0; pos < sequence.size(); ++pos)
        o.perm[static_cast<std::size_t>(sequence[pos])] = static_cast<int>(pos);
    return o;
}

std::vector<int> Ordering::inverse() const
{
    std::vector<int> inv(perm.size());
    for (std::size_t v = 0; v < perm.size(); ++v)
        inv[static_cast<std::size_t>(perm[v])] = static_cast<int>(v);
    return inv;
}

bool Ordering::is_permutation() const
{
    std::vector<char> seen(perm.size(), 0);
    for (int p : perm) {
        if (p < 0 || p >= size() || seen[static_cast<std::size_t>(p)])
            return false;
        seen[static_cast<std::size_t>(p)] = 1;
    }
    return true;
}

namespace {

void check_ordering(const Graph& g, const Ordering& o)
{
    if (o.size() != g.num_nodes())
        throw InputError("ordering length " + std::to_string(o.size()) + " does not match node count " +
                         std::to_string(g.num_nodes()));
    if (!o.is_permutation())
        throw InputError("ordering is not a permutation");
}

} // namespace

Graph apply_ordering(const Graph& g, const Ordering& o)
{
    check_ordering(g, o);
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(g.num_nodes()));
    for (int v = 0; v < g.num_nodes(); ++v) {
        auto& nb = adj[static_cast<std::size_t>(o.perm[static_cast<std::size_t>(v)])];
        for (int u : g.neighbors(v))
            nb.push_back(o.perm[static_cast<std::size_t>(u)]);
        std::sort(nb.begin(), nb.end());
    }
    return GraphBuilder::build(std::move(adj));
}

int bandwidth_of_ordering(const Graph& g, const Ordering& o)
{
    check_ordering(g, o);
    int bw = 0;
    for (int v = 0; v < g.num_nodes(); ++v)
        for (int u : g.neighbors(v))
            bw = std::max(bw, std::abs(o.perm[static_cast<std::size_t>(v)] - o.perm[static_cast<std::size_t>(u)]));
    return bw;
}

BandMatrix band_reparameterize(const Graph& g, const Ordering& o, int width)
{
    check_ordering(g, o);
    if (width < 0)
        throw InputError("band width must be non-negative");
    BandMatrix b;
    b.n = g.num_nodes();
    b.width = width;
    b.rows.resize(static_cast<std::size_t>(b.n));
    for (int i = 0; i < b.n; ++i)
        b.rows[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(std::min(i, width)), 0);

    for (const auto& [u, v] : g.edges()) {
        const int pu = o.perm[static_cast<std::size_t>(u)];
        const int pv = o.perm[static_cast<std::size_t>(v)];
        const int hi = std::max(pu, pv);
        const int stretch = hi - std::min(pu, pv);
        if (stretch > width)
            throw BandOverflowError(u, v, stretch, width);
        b.rows[static_cast<std::size_t>(hi)][static_cast<std::size_t>(stretch - 1)] = 1;
    }
    return b;
}

Graph band_expand(const BandMatrix& b, const Ordering& o)
{
    if (o.size() != b.n)
        throw InputError("ordering length does not match band matrix size");
    const auto inv = o.inverse();
    std::vector<Edge> edges;
    for (int i = 0; i < b.n; ++i) {
        const auto& row = b.rows[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < row.size(); ++k)
            if (row[k])
                edges.emplace_back(inv[static_cast<std::size_t>(i)],
                                   inv[static_cast<std::size_t>(i - 1 - static_cast<int>(k))]);
    }
    return make_graph(b.n, edges);
}

std::vector<Edge> banded_edge_set(int n, int width)
{
    std::vector<Edge> out;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n && j - i <= width; ++j)
            out.emplace_back(i, j);
    return out;
}

std::int64_t banded_pair_count(int n, int width) noexcept
{
    const std::int64_t nn = n;
    const std::int64_t w = width;
    if (w >= nn)
        return nn * (nn - 1) / 2;
    return nn * w - w * (w + 1) / 2;
}

double savings_factor(int n, int width)
{
    if (n < 2 || width < 1)
        throw InputError("savings factor needs n >= 2 and width >= 1");
    if (width >= n - 1)
        return 1.0;
    const auto full = static_cast<double>(static_cast<std::int64_t>(n) * (n - 1) / 2);
    return full / static_cast<double>(banded_pair_count(n, width));
}

TrainSequence to_sequence(const BandMatrix& b)
{
    TrainSequence s;
    s.num_rows = b.n + 2;
    s.row_width = b.width + 1;
    s.data.assign(static_cast<std::size_t>(s.num_rows) * static_cast<std::size_t>(s.row_width), 0);
    s.row(0)[0] = 1;
    s.row(s.num_rows - 1)[0] = 1;
    for (int i = 0; i < b.n; ++i) {
        const auto& src = b.rows[static_cast<std::size_t>(i)];
        std::copy(src.begin(), src.end(), s.row(i + 1).begin() + 1);
    }
    return s;
}

BandMatrix from_sequence(const TrainSequence& s)
{
    if (s.num_rows < 2 || s.row_width < 1 ||
        s.data.size() != static_cast<std::size_t>(s.num_rows) * static_cast<std::size_t>(s.row_width))
        throw FormatError("sequence shape is inconsistent");
    const auto is_boundary = [&](int r) {
        const auto row = s.row(r);
        return row[0] == 1 && std::all_of(row.begin() + 1, row.end(), [](std::uint8_t x) { return x == 0; });
    };
    if (!is_boundary(0) || !is_boundary(s.num_rows - 1))
        throw FormatError("sequence must start and end with a boundary row");

    BandMatrix b;
    b.n = s.num_rows - 2;
    b.width = s.row_width - 1;
    b.rows.resize(static_cast<std::size_t>(b.n));
    for (int i = 0; i < b.n; ++i) {
        const auto row = s.row(i + 1);
        if (row[0] != 0)
            throw FormatError("interior row " + std::to_string(i + 1) + " carries a boundary indicator");
        const int len = std::min(i, b.width);
        for (int k = len; k < b.width; ++k)
            if (row[static_cast<std::size_t>(k + 1)] != 0)
                throw FormatError("row " + std::to_string(i + 1) + " references a node before the first");
        b.rows[static_cast<std::size_t>(i)].assign(row.begin() + 1, row.begin() + 1 + len);
    }
    return b;
}

std::vector<int> component_labels(const Graph& g, int* count)
{
    const int n = g.num_nodes();
    std::vector<int> label(static_cast<std::size_t>(n), -1);
    int next = 0;
    std::queue<int> q;
    for (int s = 0; s < n; ++s) {
        if (label[static_cast<std::size_t>(s)] >= 0)
            continue;
        label[static_cast<std::size_t>(s)] = next;
        q.push(s);
        while (!q.empty()) {
            const int v = q.front();
            q.pop();
            for (int u : g.neighbors(v))
                if (label[static_cast<std::size_t>(u)] < 0) {
                    label[static_cast<std::size_t>(u)] = next;
                    q.push(u);
                }
        }
        ++next;
    }
    if (count)
        *count = next;
    return label;
}

bool is_connected(const Graph& g)
{
    int count = 0;
    component_labels(g, &count);
    return count == 1;
}

Graph induced_subgraph(const Graph& g, std::span<const int> nodes)
{
    std::vector<int> index(static_cast<std::size_t>(g.num_nodes()), -1);
    for (std::size_t i = 0; i < nodes.size(); ++i)
        index[static_cast<std::size_t>(nodes[i])] = static_cast<int>(i);
    std::vector<std::vector<int>> adj(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        for (int u : g.neighbors(nodes[i]))
            if (index[static_cast<std::size_t>(u)] >= 0)
                adj[i].push_back(index[static_cast<std::size_t>(u)]);
        std::sort(adj[i].begin(), adj[i].end());
    }
    return GraphBuilder::build(std::move(adj));
}

Graph largest_component(const Graph& g)
{
    int count = 0;
    const auto label = component_labels(g, &count);
    if (count <= 1)
        return g;
    std::vector<int> size(static_cast<std::size_t>(count), 0);
    for (int l : label)
        ++size[static_cast<std::size_t>(l)];
    // Ties go to the component with the smallest minimum index.
    const int best = static_cast<int>(std::max_element(size.begin(), size.end()) - size.begin());
    std::vector<int> nodes;
    for (int v = 0; v < g.num_nodes(); ++v)
        if (label[static_cast<std::size_t>(v)] == best)
            nodes.push_back(v);
    return induced_subgraph(g, nodes);
}

} // namespace bandgen
