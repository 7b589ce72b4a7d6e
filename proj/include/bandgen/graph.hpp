#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace bandgen {

using Edge = std::pair<int, int>;

/// Undirected simple graph stored as sorted, duplicate-free adjacency lists.
class Graph {
public:
    Graph() = default;
    explicit Graph(int n);

    int num_nodes() const noexcept { return static_cast<int>(adj_.size()); }
    std::size_t num_edges() const noexcept { return num_edges_; }

    std::span<const int> neighbors(int v) const { return adj_[static_cast<std::size_t>(v)]; }
    int degree(int v) const { return static_cast<int>(adj_[static_cast<std::size_t>(v)].size()); }
    int max_degree() const noexcept;
    bool has_edge(int u, int v) const;

    /// Edges as (u, v) with u < v, lexicographically sorted.
    std::vector<Edge> edges() const;

    const std::vector<std::vector<int>>& adjacency() const noexcept { return adj_; }

    friend bool operator==(const Graph&, const Graph&) = default;

private:
    friend struct GraphBuilder;
    std::vector<std::vector<int>> adj_;
    std::size_t num_edges_ = 0;
};

struct EdgeListResult {
    Graph graph;
    std::size_t duplicates_dropped = 0;
    std::size_t self_loops_dropped = 0;
};

/// Builds a simple graph; self-loops and repeated pairs are dropped and counted.
/// Throws InputError on an out-of-range endpoint.
EdgeListResult from_edge_list(int n, std::span<const Edge> edges);

/// Convenience wrapper discarding the cleanup counts.
Graph make_graph(int n, std::span<const Edge> edges);

enum class OrderingFamily { Identity, BFS, DFS, CM, Exact };

const char* to_string(OrderingFamily f) noexcept;

/// perm[v] is the position of original node v.
struct Ordering {
    std::vector<int> perm;
    OrderingFamily family = OrderingFamily::Identity;

    static Ordering identity(int n);
    /// Builds from a visit sequence: sequence[pos] = original node.
    static Ordering from_sequence(std::span<const int> sequence, OrderingFamily family);

    int size() const noexcept { return static_cast<int>(perm.size()); }
    std::vector<int> inverse() const;
    bool is_permutation() const;
};

/// Relabels g so node perm[v] of the result is node v of the input.
Graph apply_ordering(const Graph& g, const Ordering& o);

/// Maximum |perm[u] - perm[v]| over edges; 0 for an edgeless graph.
int bandwidth_of_ordering(const Graph& g, const Ordering& o);

/// Lower-band storage of an ordered adjacency matrix.
/// Entry (i, k) of row i encodes edge {i, i-1-k} in ordered labels.
struct BandMatrix {
    int n = 0;
    int width = 0;
    std::vector<std::vector<std::uint8_t>> rows;

    friend bool operator==(const BandMatrix&, const BandMatrix&) = default;
};

BandMatrix band_reparameterize(const Graph& g, const Ordering& o, int width);

/// Inverse of band_reparameterize; returns the graph in original labels.
Graph band_expand(const BandMatrix& b, const Ordering& o);

/// All pairs (i, j), i < j, with 1 <= j - i <= width.
std::vector<Edge> banded_edge_set(int n, int width);

/// Closed-form size of banded_edge_set.
std::int64_t banded_pair_count(int n, int width) noexcept;

/// n(n-1)/2 divided by the band pair count; 1.0 once width >= n-1.
double savings_factor(int n, int width);

/// Model-facing layout: boundary indicator column followed by the band row,
/// with a boundary row before the first and after the last node.
struct TrainSequence {
    int num_rows = 0;
    int row_width = 0; // band width + 1
    std::vector<std::uint8_t> data;

    std::span<const std::uint8_t> row(int i) const
    {
        return {data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(row_width),
                static_cast<std::size_t>(row_width)};
    }
    std::span<std::uint8_t> row(int i)
    {
        return {data.data() + static_cast<std::size_t>(i) * static_cast<std::size_t>(row_width),
                static_cast<std::size_t>(row_width)};
    }

    friend bool operator==(const TrainSequence&, const TrainSequence&) = default;
};

TrainSequence to_sequence(const BandMatrix& b);
BandMatrix from_sequence(const TrainSequence& s);

/// Connected components labelled in order of their minimum node index.
std::vector<int> component_labels(const Graph& g, int* count = nullptr);
bool is_connected(const Graph& g);
Graph induced_subgraph(const Graph& g, std::span<const int> nodes);
Graph largest_component(const Graph& g);

} // namespace bandgen
