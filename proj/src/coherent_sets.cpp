#include <dynlap/coherent_sets.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

namespace dynlap {

GriddedField grid_interpolate(const std::vector<double>& coefficients, const TriMesh& mesh, double spacing,
                              std::size_t month)
{
    if (!(spacing > 0.0)) {
        fail_validation("grid spacing must be positive");
    }
    if (coefficients.size() != mesh.dimension()) {
        fail_validation("coefficient count does not match the mesh's global index space");
    }
    double lo_lon = std::numeric_limits<double>::infinity();
    double lo_lat = lo_lon;
    double hi_lon = -lo_lon;
    double hi_lat = -lo_lon;
    for (const auto& p : mesh.vertices()) {
        lo_lon = std::min(lo_lon, p.lon);
        lo_lat = std::min(lo_lat, p.lat);
        hi_lon = std::max(hi_lon, p.lon);
        hi_lat = std::max(hi_lat, p.lat);
    }
    const double i0 = std::floor(lo_lon / spacing);
    const double j0 = std::floor(lo_lat / spacing);
    const auto nx = static_cast<std::size_t>(std::ceil(hi_lon / spacing) - i0) + 1;
    const auto ny = static_cast<std::size_t>(std::ceil(hi_lat / spacing) - j0) + 1;

    const TriangleLocator locator(mesh);
    std::vector<double> values(nx * ny, 0.0);
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            // Node coordinates are integer multiples of the spacing so grids of different months align.
            const LonLat p{(i0 + static_cast<double>(i)) * spacing, (j0 + static_cast<double>(j)) * spacing};
            const auto hit = locator.locate(p);
            if (!hit) {
                continue;
            }
            const auto& tri = mesh.triangles()[hit->triangle];
            double v = 0.0;
            for (int k = 0; k < 3; ++k) {
                v += hit->barycentric[k] * coefficients[mesh.global_index()[tri[k]]];
            }
            values[j * nx + i] = v;
        }
    }
    return GriddedField({i0 * spacing, j0 * spacing}, spacing, nx, ny, std::move(values), month);
}

LevelSetFamily evolve_boundaries(std::size_t feature, double c, std::span<const GriddedField> fields)
{
    LevelSetFamily family;
    family.feature = feature;
    family.threshold = c;
    for (const auto& f : fields) {
        MonthBoundary b;
        b.month = f.month();
        b.polygons = extract_contours(f, c);
        b.length_km = boundary_length_km(b.polygons);
        b.area_km2 = superlevel_area_km2(f, c);
        family.months.push_back(std::move(b));
    }
    return family;
}

std::optional<double> family_cheeger(const LevelSetFamily& family, std::size_t* empty_month)
{
    if (family.months.empty()) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (const auto& m : family.months) {
        if (!(m.area_km2 > 0.0)) {
            if (empty_month != nullptr) {
                *empty_month = m.month;
            }
            return std::nullopt;
        }
        sum += m.length_km / m.area_km2;
    }
    return sum / static_cast<double>(family.months.size());
}

double cheeger_value(double c, std::span<const GriddedField> fields)
{
    if (fields.empty()) {
        fail_validation("Cheeger value needs at least one month");
    }
    std::size_t month = 0;
    const auto h = family_cheeger(evolve_boundaries(0, c, fields), &month);
    if (!h) {
        fail_numerical("superlevel set at c = " + csv::format_double(c) + " is empty in month " +
                       std::to_string(month + 1));
    }
    return *h;
}

CheegerCurve optimize_threshold(std::size_t feature, std::span<const GriddedField> fields, double step,
                                std::size_t threads)
{
    if (!(step > 0.0 && step < 0.5)) {
        fail_validation("threshold step must lie in (0, 0.5)");
    }
    if (fields.empty()) {
        fail_validation("threshold search needs at least one month");
    }
    const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
    CheegerCurve curve;
    curve.feature = feature;
    for (std::size_t j = 1; j < n; ++j) {
        curve.thresholds.push_back(static_cast<double>(j) / static_cast<double>(n));
    }
    curve.values.assign(curve.thresholds.size(), std::numeric_limits<double>::quiet_NaN());

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t j = next++; j < curve.thresholds.size(); j = next++) {
            const auto h = family_cheeger(evolve_boundaries(feature, curve.thresholds[j], fields));
            if (h) {
                curve.values[j] = *h;
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, curve.thresholds.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }

    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < curve.values.size(); ++j) {
        const double h = curve.values[j];
        if (std::isnan(h)) {
            continue;
        }
        if (!best || h < curve.values[*best]) {
            best = j;
        }
        const bool below_prev = j == 0 || std::isnan(curve.values[j - 1]) || h < curve.values[j - 1];
        const bool below_next =
            j + 1 == curve.values.size() || std::isnan(curve.values[j + 1]) || h <= curve.values[j + 1];
        if (below_prev && below_next) {
            curve.local_minima.push_back(curve.thresholds[j]);
        }
    }
    if (!best) {
        fail_numerical("feature " + std::to_string(feature + 1) +
                       ": the Cheeger value is undefined at every threshold (empty superlevel set in some month)");
    }
    curve.c_min = curve.thresholds[*best];
    return curve;
}

void write_cheeger_csv(std::ostream& out, const std::vector<CheegerCurve>& curves)
{
    out << "k,c,h\n";
    for (const auto& curve : curves) {
        for (std::size_t j = 0; j < curve.thresholds.size(); ++j) {
            out << (curve.feature + 1) << ',' << csv::format_double(curve.thresholds[j]) << ',';
            if (!std::isnan(curve.values[j])) {
                out << csv::format_double(curve.values[j]);
            }
            out << '\n';
        }
    }
}

namespace {

nlohmann::ordered_json ring_json(const Polygon& ring)
{
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : ring) {
        arr.push_back({p.lon, p.lat});
    }
    return arr;
}

nlohmann::ordered_json multipolygon(const std::vector<Polygon>& polygons)
{
    std::vector<std::size_t> outer;
    std::vector<std::size_t> holes;
    for (std::size_t k = 0; k < polygons.size(); ++k) {
        (signed_area_deg2(polygons[k]) >= 0.0 ? outer : holes).push_back(k);
    }
    std::vector<std::vector<std::size_t>> attached(outer.size());
    for (const std::size_t h : holes) {
        std::optional<std::size_t> owner;
        double owner_area = 0.0;
        for (std::size_t o = 0; o < outer.size(); ++o) {
            const double a = signed_area_deg2(polygons[outer[o]]);
            if (ring_contains(polygons[outer[o]], polygons[h].front()) && (!owner || a < owner_area)) {
                owner = o;
                owner_area = a;
            }
        }
        if (owner) {
            attached[*owner].push_back(h);
        }
    }
    auto coords = nlohmann::ordered_json::array();
    for (std::size_t o = 0; o < outer.size(); ++o) {
        auto poly = nlohmann::ordered_json::array();
        poly.push_back(ring_json(polygons[outer[o]]));
        for (const std::size_t h : attached[o]) {
            poly.push_back(ring_json(polygons[h]));
        }
        coords.push_back(std::move(poly));
    }
    return coords;
}

} // namespace

void write_family_geojson(std::ostream& out, const LevelSetFamily& family)
{
    nlohmann::ordered_json fc;
    fc["type"] = "FeatureCollection";
    fc["features"] = nlohmann::ordered_json::array();
    for (const auto& m : family.months) {
        nlohmann::ordered_json feature;
        feature["type"] = "Feature";
        feature["properties"] = {{"k", family.feature + 1},
                                 {"t", m.month + 1},
                                 {"c", family.threshold},
                                 {"boundary_km", m.length_km},
                                 {"area_km2", m.area_km2}};
        feature["geometry"] = {{"type", "MultiPolygon"}, {"coordinates", multipolygon(m.polygons)}};
        fc["features"].push_back(std::move(feature));
    }
    out << fc.dump() << '\n';
}

} // namespace dynlap
