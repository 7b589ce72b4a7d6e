#include "bandgen/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace bandgen {

namespace {

double orient(const Point2& a, const Point2& b, const Point2& c)
{
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

/// Positive when d lies inside the circumcircle of the CCW triangle abc.
double in_circle(const Point2& a, const Point2& b, const Point2& c, const Point2& d)
{
    const double adx = a.x - d.x, ady = a.y - d.y;
    const double bdx = b.x - d.x, bdy = b.y - d.y;
    const double cdx = c.x - d.x, cdy = c.y - d.y;
    const double ad = adx * adx + ady * ady;
    const double bd = bdx * bdx + bdy * bdy;
    const double cd = cdx * cdx + cdy * cdy;
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx);
}

} // namespace

std::vector<Triangle> delaunay_triangulate(std::span<const Point2> input)
{
    const int n = static_cast<int>(input.size());
    if (n < 3)
        return {};

    double minx = input[0].x, maxx = input[0].x, miny = input[0].y, maxy = input[0].y;
    for (const auto& p : input) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const double span = std::max({maxx - minx, maxy - miny, 1e-9});
    const double cx = 0.5 * (minx + maxx), cy = 0.5 * (miny + maxy);
    const double big = 1e3 * span;

    std::vector<Point2> pts(input.begin(), input.end());
    pts.push_back({cx - big, cy - big});
    pts.push_back({cx + big, cy - big});
    pts.push_back({cx, cy + big});

    std::vector<Triangle> tris{{n, n + 1, n + 2}};
    std::vector<Triangle> kept;
    std::map<std::pair<int, int>, int> boundary;

    for (int p = 0; p < n; ++p) {
        kept.clear();
        boundary.clear();
        for (const auto& t : tris) {
            const double det = in_circle(pts[static_cast<std::size_t>(t[0])], pts[static_cast<std::size_t>(t[1])],
                                         pts[static_cast<std::size_t>(t[2])], pts[static_cast<std::size_t>(p)]);
            const bool real = t[0] < n && t[1] < n && t[2] < n;
            if (real && std::abs(det) <= kInCircleEpsilon)
                throw DegenerateInput("near-cocircular points in triangulation");
            if (det > 0.0) {
                for (int e = 0; e < 3; ++e) {
                    const int a = t[static_cast<std::size_t>(e)];
                    const int b = t[static_cast<std::size_t>((e + 1) % 3)];
                    // Interior cavity edges are seen twice in opposite directions.
                    const auto rev = boundary.find({b, a});
                    if (rev != boundary.end())
                        boundary.erase(rev);
                    else
                        boundary[{a, b}] = 1;
                }
            } else {
                kept.push_back(t);
            }
        }
        if (boundary.empty())
            throw DegenerateInput("point outside every circumcircle");
        for (const auto& [edge, _] : boundary) {
            const Triangle t{edge.first, edge.second, p};
            if (orient(pts[static_cast<std::size_t>(t[0])], pts[static_cast<std::size_t>(t[1])],
                       pts[static_cast<std::size_t>(t[2])]) <= 0.0)
                throw DegenerateInput("collinear cavity edge");
            kept.push_back(t);
        }
        tris.swap(kept);
    }

    std::vector<Triangle> out;
    for (const auto& t : tris)
        if (t[0] < n && t[1] < n && t[2] < n)
            out.push_back(t);
    if (out.empty())
        throw DegenerateInput("collinear point set");
    return out;
}

std::vector<int> convex_hull(std::span<const Point2> pts)
{
    const int n = static_cast<int>(pts.size());
    std::vector<int> idx(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        const auto& pa = pts[static_cast<std::size_t>(a)];
        const auto& pb = pts[static_cast<std::size_t>(b)];
        return pa.x < pb.x || (pa.x == pb.x && pa.y < pb.y);
    });
    if (n < 3)
        return idx;
    std::vector<int> hull(2 * static_cast<std::size_t>(n));
    std::size_t k = 0;
    const auto turn = [&](int a, int b, int c) {
        return orient(pts[static_cast<std::size_t>(a)], pts[static_cast<std::size_t>(b)],
                      pts[static_cast<std::size_t>(c)]);
    };
    for (int i = 0; i < n; ++i) {
        while (k >= 2 && turn(hull[k - 2], hull[k - 1], idx[static_cast<std::size_t>(i)]) <= 0.0)
            --k;
        hull[k++] = idx[static_cast<std::size_t>(i)];
    }
    for (int i = n - 2, lower = static_cast<int>(k) + 1; i >= 0; --i) {
        while (static_cast<int>(k) >= lower && turn(hull[k - 2], hull[k - 1], idx[static_cast<std::size_t>(i)]) <= 0.0)
            --k;
        hull[k++] = idx[static_cast<std::size_t>(i)];
    }
    hull.resize(k - 1);
    return hull;
}

Graph delaunay_graph(std::span<const Point2> pts)
{
    std::vector<Edge> edges;
    for (const auto& t : delaunay_triangulate(pts))
        for (int e = 0; e < 3; ++e)
            edges.emplace_back(t[static_cast<std::size_t>(e)], t[static_cast<std::size_t>((e + 1) % 3)]);
    // Hull edges can vanish with the super-triangle when a hull edge is nearly
    // flat; they are always Delaunay edges, so restore them.
    const auto hull = convex_hull(pts);
    for (std::size_t i = 0; i < hull.size() && hull.size() >= 2; ++i)
        edges.emplace_back(hull[i], hull[(i + 1) % hull.size()]);
    return make_graph(static_cast<int>(pts.size()), edges);
}

} // namespace bandgen
