#include <dynlap/geo.hpp>

#include <algorithm>
#include <cmath>

namespace dynlap {

double normalize_lon(double lon)
{
    if (lon >= -180.0 && lon < 180.0) {
        return lon;
    }
    double x = std::fmod(lon + 180.0, 360.0);
    if (x < 0.0) {
        x += 360.0;
    }
    x -= 180.0;
    // fmod can round a tiny negative offset up to exactly 180.
    return x >= 180.0 ? -180.0 : x;
}

double great_circle_km(LonLat p, LonLat q)
{
    const double phi1 = deg_to_rad(p.lat);
    const double phi2 = deg_to_rad(q.lat);
    const double dphi = phi2 - phi1;
    const double dlambda = deg_to_rad(q.lon - p.lon);
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    const double a = std::clamp(s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2, 0.0, 1.0);
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(a));
}

double scaled_segment_km(LonLat p, LonLat q)
{
    const double mean_lat = 0.5 * (p.lat + q.lat);
    const double dx = (q.lon - p.lon) * std::cos(deg_to_rad(mean_lat));
    const double dy = q.lat - p.lat;
    return std::hypot(dx, dy) * kKmPerDegree;
}

} // namespace dynlap
