#include <dynlap/contour.hpp>

#include <dynlap/error.hpp>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>

namespace dynlap {

GriddedField::GriddedField(LonLat origin, double spacing, std::size_t nx, std::size_t ny, std::vector<double> values,
                           std::size_t month)
    : origin_(origin), spacing_(spacing), nx_(nx), ny_(ny), values_(std::move(values)), month_(month)
{
    if (!(spacing_ > 0.0)) {
        fail_validation("grid spacing must be positive");
    }
    if (values_.size() != nx_ * ny_) {
        fail_validation("grid has " + std::to_string(values_.size()) + " values, expected " +
                        std::to_string(nx_ * ny_));
    }
}

namespace {

// A grid edge: horizontal edges join (i, j)-(i+1, j), vertical edges (i, j)-(i, j+1).
// Index -1 and nx / ny address the zero padding.
struct EdgeKey {
    std::uint8_t vertical;
    std::int64_t i;
    std::int64_t j;

    friend auto operator<=>(const EdgeKey&, const EdgeKey&) = default;
};

struct Segment {
    EdgeKey from;
    EdgeKey to;
};

class Contourer {
public:
    Contourer(const GriddedField& f, double c) : f_(f), c_(c) {}

    std::vector<Polygon> run()
    {
        const auto nx = static_cast<std::int64_t>(f_.nx());
        const auto ny = static_cast<std::int64_t>(f_.ny());
        std::vector<Segment> segments;
        for (std::int64_t j = -1; j < ny; ++j) {
            for (std::int64_t i = -1; i < nx; ++i) {
                cell(i, j, segments);
            }
        }
        std::map<EdgeKey, std::size_t> by_start;
        for (std::size_t s = 0; s < segments.size(); ++s) {
            by_start.emplace(segments[s].from, s);
        }
        std::vector<char> used(segments.size(), 0);
        std::vector<Polygon> out;
        for (std::size_t s0 = 0; s0 < segments.size(); ++s0) {
            if (used[s0]) {
                continue;
            }
            Polygon ring;
            std::size_t s = s0;
            while (!used[s]) {
                used[s] = 1;
                push(ring, crossing(segments[s].from));
                const auto next = by_start.find(segments[s].to);
                if (next == by_start.end()) {
                    fail_numerical("contour failed to close");
                }
                s = next->second;
            }
            while (ring.size() > 1 && ring.back() == ring.front()) {
                ring.pop_back();
            }
            if (ring.size() < 3) {
                continue;
            }
            ring.push_back(ring.front());
            out.push_back(std::move(ring));
        }
        return out;
    }

private:
    double value(std::int64_t i, std::int64_t j) const
    {
        if (i < 0 || j < 0 || i >= static_cast<std::int64_t>(f_.nx()) || j >= static_cast<std::int64_t>(f_.ny())) {
            return 0.0;
        }
        const double v = f_.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        return std::isnan(v) ? 0.0 : v;
    }

    LonLat node(std::int64_t i, std::int64_t j) const
    {
        const double s = f_.spacing();
        return {f_.origin().lon + static_cast<double>(i) * s, f_.origin().lat + static_cast<double>(j) * s};
    }

    LonLat crossing(const EdgeKey& e) const
    {
        const std::int64_t i1 = e.vertical ? e.i : e.i + 1;
        const std::int64_t j1 = e.vertical ? e.j + 1 : e.j;
        const double v0 = value(e.i, e.j);
        const double v1 = value(i1, j1);
        const double t = (c_ - v0) / (v1 - v0);
        const LonLat p0 = node(e.i, e.j);
        const LonLat p1 = node(i1, j1);
        return {p0.lon + t * (p1.lon - p0.lon), p0.lat + t * (p1.lat - p0.lat)};
    }

    static void push(Polygon& ring, LonLat p)
    {
        if (ring.empty() || !(ring.back() == p)) {
            ring.push_back(p);
        }
    }

    void cell(std::int64_t i, std::int64_t j, std::vector<Segment>& segments) const
    {
        // Corners counter-clockwise from the lower left; edge k runs from corner k to corner k+1.
        const std::array<std::array<std::int64_t, 2>, 4> corner{{{i, j}, {i + 1, j}, {i + 1, j + 1}, {i, j + 1}}};
        const std::array<EdgeKey, 4> edge{{{0, i, j}, {1, i + 1, j}, {0, i, j + 1}, {1, i, j}}};
        std::array<double, 4> v;
        std::array<bool, 4> in;
        int count = 0;
        for (int k = 0; k < 4; ++k) {
            v[k] = value(corner[k][0], corner[k][1]);
            in[k] = v[k] >= c_;
            count += in[k];
        }
        if (count == 0 || count == 4) {
            return;
        }
        // Crossings in counter-clockwise order; an exit leaves the superlevel set.
        std::array<int, 4> cross_edge{};
        std::array<bool, 4> exit{};
        int n = 0;
        for (int k = 0; k < 4; ++k) {
            if (in[k] != in[(k + 1) % 4]) {
                cross_edge[n] = k;
                exit[n] = in[k];
                ++n;
            }
        }
        if (n == 2) {
            const int x = exit[0] ? 0 : 1;
            segments.push_back({edge[cross_edge[x]], edge[cross_edge[1 - x]]});
            return;
        }
        // Saddle: four crossings alternating exit/entry.
        const bool joined = 0.25 * (v[0] + v[1] + v[2] + v[3]) >= c_;
        for (int m = 0; m < 4; ++m) {
            if (!exit[m]) {
                continue;
            }
            const int partner = joined ? (m + 1) % 4 : (m + 3) % 4;
            segments.push_back({edge[cross_edge[m]], edge[cross_edge[partner]]});
        }
    }

    const GriddedField& f_;
    double c_;
};

} // namespace

std::vector<Polygon> extract_contours(const GriddedField& field, double c)
{
    if (!(c > 0.0)) {
        fail_validation("contour threshold must be positive");
    }
    return Contourer(field, c).run();
}

double boundary_length_km(const std::vector<Polygon>& polygons)
{
    double total = 0.0;
    for (const auto& ring : polygons) {
        for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
            total += scaled_segment_km(ring[k], ring[k + 1]);
        }
    }
    return total;
}

double superlevel_area_km2(const GriddedField& field, double c)
{
    const double cell = kKmPerDegree * kKmPerDegree * field.spacing() * field.spacing();
    double total = 0.0;
    for (std::size_t j = 0; j < field.ny(); ++j) {
        const double w = cell * std::cos(deg_to_rad(field.node(0, j).lat));
        for (std::size_t i = 0; i < field.nx(); ++i) {
            if (field.at(i, j) >= c) {
                total += w;
            }
        }
    }
    return total;
}

double signed_area_deg2(const Polygon& ring)
{
    double twice = 0.0;
    for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        twice += ring[k].lon * ring[k + 1].lat - ring[k + 1].lon * ring[k].lat;
    }
    return 0.5 * twice;
}

double scaled_area_km2(const Polygon& ring)
{
    // Area element cos(lat) dlon dlat integrated by Green's theorem as the line integral of
    // -sin(lat) dlon, exact along each straight lon/lat edge.
    double integral = 0.0;
    for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        const double dlon = ring[k + 1].lon - ring[k].lon;
        const double p0 = deg_to_rad(ring[k].lat);
        const double p1 = deg_to_rad(ring[k + 1].lat);
        const double mean_sin =
            std::abs(p1 - p0) > 1e-9 ? (std::cos(p0) - std::cos(p1)) / (p1 - p0) : std::sin(0.5 * (p0 + p1));
        integral -= dlon * mean_sin;
    }
    return integral * (180.0 / std::numbers::pi) * kKmPerDegree * kKmPerDegree;
}

bool ring_contains(const Polygon& ring, LonLat p)
{
    bool inside = false;
    for (std::size_t k = 0; k + 1 < ring.size(); ++k) {
        const LonLat a = ring[k];
        const LonLat b = ring[k + 1];
        if ((a.lat > p.lat) != (b.lat > p.lat)) {
            const double x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
            if (p.lon < x) {
                inside = !inside;
            }
        }
    }
    return inside;
}

} // namespace dynlap
