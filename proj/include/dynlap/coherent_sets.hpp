#pragma once

#include <dynlap/contour.hpp>
#include <dynlap/mesh.hpp>
#include <dynlap/trajectory.hpp>

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace dynlap {

/// Barycentric-linear interpolation of a hat-basis field onto the grid of `spacing`-multiples
/// covering the mesh's bounding box. Nodes outside every triangle get 0.
GriddedField grid_interpolate(const std::vector<double>& coefficients, const TriMesh& mesh, double spacing,
                              std::size_t month = 0);

/// Boundary of one month's evolved superlevel set.
struct MonthBoundary {
    std::size_t month = 0;  ///< zero-based
    std::vector<Polygon> polygons;
    double length_km = 0.0;
    double area_km2 = 0.0;
};

/// Superlevel sets A^k_c of one feature, followed through every month at a fixed threshold.
struct LevelSetFamily {
    std::size_t feature = 0;  ///< zero-based
    double threshold = 0.0;
    std::vector<MonthBoundary> months;
};

/// Polygons, lengths and areas of {field >= c} for every month's field.
LevelSetFamily evolve_boundaries(std::size_t feature, double c, std::span<const GriddedField> fields);

/// Mean over months of length / area. nullopt when some month has zero area; `empty_month`
/// then receives the first such month.
std::optional<double> family_cheeger(const LevelSetFamily& family, std::size_t* empty_month = nullptr);

/// Dynamic Cheeger value of {field >= c}; throws naming the first month whose set is empty.
double cheeger_value(double c, std::span<const GriddedField> fields);

struct CheegerCurve {
    std::size_t feature = 0;
    std::vector<double> thresholds;  ///< step, 2 step, ..., 1 - step
    std::vector<double> values;      ///< NaN where undefined
    double c_min = 0.0;              ///< global minimizer, ties to the smaller threshold
    std::vector<double> local_minima;
};

/// Tabulates h over the threshold grid and picks its global minimizer. Throws if h is undefined
/// at every threshold. Thresholds are evaluated on up to `threads` worker threads.
CheegerCurve optimize_threshold(std::size_t feature, std::span<const GriddedField> fields, double step = 0.01,
                                std::size_t threads = 1);

/// `k,c,h` rows (k one-based, undefined h written as empty).
void write_cheeger_csv(std::ostream& out, const std::vector<CheegerCurve>& curves);

/// FeatureCollection with one MultiPolygon Feature per month; holes are attached to the smallest
/// enclosing outer ring. Properties: k and t (one-based), c, boundary_km, area_km2.
void write_family_geojson(std::ostream& out, const LevelSetFamily& family);

} // namespace dynlap
