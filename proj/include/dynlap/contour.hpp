#pragma once

#include <dynlap/geo.hpp>

#include <cstddef>
#include <vector>

namespace dynlap {

/// Values on a regular lon/lat grid; node (i, j) sits at origin + (i, j) * spacing.
/// NaN marks a missing value, which contouring and area counting treat as 0.
class GriddedField {
public:
    GriddedField(LonLat origin, double spacing, std::size_t nx, std::size_t ny, std::vector<double> values,
                 std::size_t month = 0);

    LonLat origin() const { return origin_; }
    double spacing() const { return spacing_; }
    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t month() const { return month_; }
    const std::vector<double>& values() const { return values_; }

    double at(std::size_t i, std::size_t j) const { return values_[j * nx_ + i]; }
    LonLat node(std::size_t i, std::size_t j) const
    {
        return {origin_.lon + static_cast<double>(i) * spacing_, origin_.lat + static_cast<double>(j) * spacing_};
    }

private:
    LonLat origin_;
    double spacing_;
    std::size_t nx_;
    std::size_t ny_;
    std::vector<double> values_;
    std::size_t month_;
};

/// Closed ring, first vertex repeated at the end. Outer rings run counter-clockwise, holes clockwise.
using Polygon = std::vector<LonLat>;

/// Marching squares for the boundary of {value >= c}, linear interpolation along cell edges.
/// The grid is padded with a ring of zeros so every ring closes. Saddle cells are resolved by
/// the mean of their four corners.
std::vector<Polygon> extract_contours(const GriddedField& field, double c);

/// Sum over all ring edges of the latitude-scaled edge length, km.
double boundary_length_km(const std::vector<Polygon>& polygons);

/// Sum over nodes with value >= c of 111.19^2 * spacing^2 * cos(lat), km^2.
double superlevel_area_km2(const GriddedField& field, double c);

/// Signed shoelace area in degrees^2 (positive for counter-clockwise rings).
double signed_area_deg2(const Polygon& ring);

/// Shoelace area with each trapezoid scaled by cos of its mean latitude, km^2 (signed).
double scaled_area_km2(const Polygon& ring);

/// Even-odd point-in-ring test.
bool ring_contains(const Polygon& ring, LonLat p);

} // namespace dynlap
