#include "bandgen/datasets.hpp"
#include "bandgen/delaunay.hpp"
#include "bandgen/error.hpp"
#include "bandgen/rng.hpp"
#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace bandgen;
using namespace bandgen::testing;

namespace {

/// O(n^4) Delaunay: a triangle is kept iff no other point lies strictly
/// inside its circumcircle.
std::set<Edge> naive_delaunay_edges(const std::vector<Point2>& p)
{
    const int n = static_cast<int>(p.size());
    std::set<Edge> edges;
    auto incircle = [&](int a, int b, int c, int d) {
        const double adx = p[a].x - p[d].x, ady = p[a].y - p[d].y;
        const double bdx = p[b].x - p[d].x, bdy = p[b].y - p[d].y;
        const double cdx = p[c].x - p[d].x, cdy = p[c].y - p[d].y;
        return (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) - (bdx * bdx + bdy * bdy) * (adx * cdy - cdx * ady) +
               (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
    };
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            for (int c = b + 1; c < n; ++c) {
                const double orient = (p[b].x - p[a].x) * (p[c].y - p[a].y) - (p[b].y - p[a].y) * (p[c].x - p[a].x);
                if (std::abs(orient) < 1e-15)
                    continue;
                bool empty = true;
                for (int d = 0; d < n && empty; ++d) {
                    if (d == a || d == b || d == c)
                        continue;
                    const double s = orient > 0 ? incircle(a, b, c, d) : incircle(a, c, b, d);
                    empty = s <= 0;
                }
                if (empty) {
                    edges.insert({a, b});
                    edges.insert({a, c});
                    edges.insert({b, c});
                }
            }
    return edges;
}

} // namespace

TEST_CASE("Delaunay graph matches the naive empty-circumcircle oracle")
{
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        Rng rng(seed);
        std::vector<Point2> pts(10);
        for (auto& q : pts)
            q = {rng.uniform(), rng.uniform()};
        const auto g = delaunay_graph(pts);
        const auto oracle = naive_delaunay_edges(pts);
        const auto got = g.edges();
        CHECK(std::set<Edge>(got.begin(), got.end()) == oracle);
    }
}

TEST_CASE("Delaunay triangles are counter-clockwise and satisfy Euler's formula")
{
    Rng rng(5);
    std::vector<Point2> pts(40);
    for (auto& q : pts)
        q = {rng.uniform(), rng.uniform()};
    const auto tris = delaunay_triangulate(pts);
    const auto hull = convex_hull(pts);
    for (const auto& t : tris) {
        const auto& a = pts[static_cast<std::size_t>(t[0])];
        const auto& b = pts[static_cast<std::size_t>(t[1])];
        const auto& c = pts[static_cast<std::size_t>(t[2])];
        CHECK((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x) > 0);
    }
    // A triangulation of n points with h on the hull has 2n - 2 - h triangles.
    CHECK(tris.size() == 2 * pts.size() - 2 - hull.size());
    const auto g = delaunay_graph(pts);
    CHECK(g.num_edges() == 3 * pts.size() - 3 - hull.size());
}

TEST_CASE("collinear input is degenerate")
{
    std::vector<Point2> pts{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    CHECK_THROWS_AS(delaunay_triangulate(pts), DegenerateInput);
}

TEST_CASE("planar graphs are connected and sparse")
{
    const auto graphs = gen_planar(20, 11);
    for (const auto& g : graphs) {
        CHECK(g.num_nodes() == kPlanarNodes);
        CHECK(is_connected(g));
        CHECK(g.num_edges() <= 3 * kPlanarNodes - 6);
    }
}

TEST_CASE("grid2d corpus")
{
    const auto grids = gen_grid2d();
    CHECK(grids.size() == 66);
    CHECK(grid_graph(10, 10).num_edges() == 180);
    for (const auto& g : grids) {
        CHECK(is_connected(g));
        CHECK(g.max_degree() <= 4);
    }
}

TEST_CASE("community2 graphs")
{
    const auto graphs = gen_community2(200, 3);
    for (std::uint64_t i = 0; i < graphs.size(); ++i) {
        int sampled = 0;
        const auto g = community2_graph(derive_seed(3, i), &sampled);
        CHECK(g == graphs[i]);
        CHECK(sampled >= kCommunityMinNodes);
        CHECK(sampled <= kCommunityMaxNodes);
        CHECK(is_connected(g));
        CHECK(g.num_nodes() <= sampled);
    }
}

TEST_CASE("community2 intra-community degree concentrates at p (N/2 - 1)")
{
    double sum_mean = 0.0;
    double sum_sigma2 = 0.0;
    double observed = 0.0;
    for (std::uint64_t i = 0; i < 200; ++i) {
        int sampled = 0;
        const auto g = community2_graph(derive_seed(9, i), &sampled);
        const int half = (sampled + 1) / 2;
        // Nodes of the first block keep their relative order under the
        // component cut only when nothing is dropped; restrict to such graphs.
        if (g.num_nodes() != sampled)
            continue;
        std::int64_t intra = 0;
        for (const auto& [u, v] : g.edges())
            intra += (u < half && v < half);
        const double deg = 2.0 * static_cast<double>(intra) / half;
        const double mu = kCommunityIntraP * (half - 1);
        observed += deg;
        sum_mean += mu;
        // Var of mean degree over the block: 4 Var(E)/half^2, E ~ Bin(half(half-1)/2, p).
        sum_sigma2 += 4.0 * (half * (half - 1) / 2.0) * kCommunityIntraP * (1 - kCommunityIntraP) / (half * half);
    }
    CHECK(std::abs(observed - sum_mean) <= 3.0 * std::sqrt(sum_sigma2));
}

TEST_CASE("replicate produces isomorphic relabelled copies")
{
    const std::vector<Graph> base{grid_graph(3, 4)};
    const auto copies = replicate(base, 3, 7);
    REQUIRE(copies.size() == 3);
    for (const auto& c : copies) {
        CHECK(c.num_edges() == base[0].num_edges());
        CHECK(c.num_nodes() == base[0].num_nodes());
    }
}

TEST_CASE("JSONL round trip and validation")
{
    const std::vector<Graph> graphs{path_graph(3), Graph(2), grid_graph(2, 3)};
    std::stringstream ss;
    for (const auto& g : graphs)
        ss << graph_to_json_line(g) << '\n';
    ss << '\n';
    CHECK(parse_jsonl(ss) == graphs);
    CHECK(graph_to_json_line(path_graph(3)) == R"({"n":3,"edges":[[0,1],[1,2]]})");

    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_jsonl(in);
    };
    CHECK_THROWS_AS(parse("{\"n\":3,\"edges\":[[1,0]]}\n"), FormatError);
    CHECK_THROWS_AS(parse("{\"n\":3,\"edges\":[[0,3]]}\n"), InputError);
    CHECK_THROWS_AS(parse("not json\n"), FormatError);
    CHECK_THROWS_AS(parse("{\"edges\":[]}\n"), FormatError);
    CHECK_THROWS_AS(parse("{\"n\":-1,\"edges\":[]}\n"), InputError);
}

TEST_CASE("split sizes")
{
    const auto s = split_sizes(66, {0.6, 0.2, 0.2});
    CHECK(s == std::array<std::size_t, 3>{40, 13, 13});
    const auto grids = gen_grid2d();
    const auto sp = split(grids, {0.6, 0.2, 0.2}, 4);
    CHECK(sp.train.size() == 40);
    CHECK(sp.val.size() == 13);
    CHECK(sp.test.size() == 13);
    const auto again = split(grids, {0.6, 0.2, 0.2}, 4);
    CHECK(again.test == sp.test);
}

TEST_CASE("bandwidth report")
{
    const std::vector<Graph> graphs{path_graph(5), grid_graph(3, 4), Graph(1)};
    OrderingConfig cfg;
    const auto r = bandwidth_report(graphs, cfg, "mix");
    CHECK(r.count == 3);
    CHECK(r.per_graph_bandwidth == std::vector<int>{1, 3, 0});
    CHECK(r.max_bandwidth == 3);
    CHECK(r.per_graph_savings[0] == doctest::Approx(savings_factor(5, 1)));
    CHECK(r.per_graph_savings[2] == 1.0);
    CHECK(report_tsv_header() == "dataset\tn_mean\tn_std\tbw_mean\tbw_std\tsavings_mean\tsavings_std\tbw_max");
    const auto row = report_tsv_row(r);
    CHECK(row.rfind("mix\t", 0) == 0);
    const auto ms = mean_std({1.0, 2.0, 3.0, 4.0});
    CHECK(ms.mean == 2.5);
    CHECK(ms.std == doctest::Approx(std::sqrt(1.25)));
}

TEST_CASE("filters")
{
    const std::vector<Graph> graphs{path_graph(4), Graph(3), grid_graph(3, 3)};
    CHECK(filter_connected(graphs).size() == 2);
    CHECK(filter_size(graphs, 4, 8).size() == 1);
}
