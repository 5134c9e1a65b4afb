#pragma once

#include <numbers>

namespace dynlap {

inline constexpr double kEarthRadiusKm = 6371.0;
/// Length of one degree of arc on the sphere (pi * R / 180 = 111.19 km).
inline constexpr double kKmPerDegree = std::numbers::pi * kEarthRadiusKm / 180.0;

/// A point in the flat longitude/latitude plane, degrees.
struct LonLat {
    double lon = 0.0;
    double lat = 0.0;

    friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Maps any finite longitude into [-180, 180).
double normalize_lon(double lon);

/// Haversine distance with Earth radius 6371 km.
double great_circle_km(LonLat p, LonLat q);

/// Latitude-scaled planar length of a lon/lat segment, using the segment's mean latitude.
double scaled_segment_km(LonLat p, LonLat q);

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

} // namespace dynlap
