#pragma once

#include <dynlap/geo.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace dynlap {

using Triangle = std::array<std::uint32_t, 3>;

/// Sign of the orientation determinant of (a, b, c): > 0 counter-clockwise, < 0 clockwise, 0 collinear.
/// Exact: a floating-point filter falls back to expansion arithmetic near zero.
double orient2d(LonLat a, LonLat b, LonLat c);

/// > 0 when d lies strictly inside the circumcircle of the counter-clockwise triangle (a, b, c).
double incircle(LonLat a, LonLat b, LonLat c, LonLat d);

/// Delaunay triangulation of distinct planar points (x = lon, y = lat), triangles counter-clockwise.
///
/// Sweep-hull construction with Lawson edge flips. Throws a numerical error when fewer than three
/// points are given or all points are collinear.
std::vector<Triangle> delaunay_triangulate(std::span<const LonLat> points);

} // namespace dynlap
