#pragma once

#include "bandgen/graph.hpp"

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

namespace bandgen {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

using Triangle = std::array<int, 3>;

/// In-circumcircle tests closer to zero than this are treated as degenerate.
inline constexpr double kInCircleEpsilon = 1e-12;

/// Thrown when a point set is (numerically) cocircular or collinear.
struct DegenerateInput : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bowyer-Watson incremental triangulation with an enclosing super-triangle.
/// Returned triangles index into pts and are counter-clockwise.
std::vector<Triangle> delaunay_triangulate(std::span<const Point2> pts);

/// Indices of the convex hull, counter-clockwise (monotone chain).
std::vector<int> convex_hull(std::span<const Point2> pts);

/// Graph on pts whose edges are the edges of the triangulation.
Graph delaunay_graph(std::span<const Point2> pts);

} // namespace bandgen
