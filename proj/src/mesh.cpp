#include <dynlap/mesh.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <string>

namespace dynlap {

namespace {

constexpr double kMergeTol = 1e-9;  // degrees

double signed_area(LonLat a, LonLat b, LonLat c)
{
    return 0.5 * ((b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon));
}

} // namespace

TriMesh::TriMesh(std::vector<LonLat> vertices, std::vector<std::size_t> global_index, std::vector<Triangle> triangles,
                 std::size_t float_count, std::size_t dimension)
    : vertices_(std::move(vertices)),
      global_index_(std::move(global_index)),
      triangles_(std::move(triangles)),
      float_count_(float_count),
      dimension_(dimension)
{
    if (global_index_.size() != vertices_.size()) {
        fail_validation("mesh vertex and global index tables differ in length");
    }
    if (float_count_ > dimension_) {
        fail_validation("mesh float count exceeds its dimension");
    }
    std::vector<char> used(dimension_, 0);
    for (const std::size_t g : global_index_) {
        if (g >= dimension_) {
            fail_validation("mesh global index " + std::to_string(g + 1) + " outside 1.." + std::to_string(dimension_));
        }
        if (used[g]) {
            fail_validation("mesh global index " + std::to_string(g + 1) + " appears twice");
        }
        used[g] = 1;
    }
    for (auto& tri : triangles_) {
        for (int k = 0; k < 3; ++k) {
            if (tri[k] >= vertices_.size()) {
                fail_validation("triangle references a missing vertex");
            }
        }
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
            fail_validation("triangle repeats a vertex");
        }
        const double o = orient2d(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
        if (o == 0.0) {
            fail_validation("degenerate (zero-area) triangle in mesh");
        }
        if (o < 0.0) {
            std::swap(tri[1], tri[2]);
        }
    }
}

std::array<LonLat, 3> TriMesh::corners(std::size_t tri) const
{
    const auto& t = triangles_[tri];
    return {vertices_[t[0]], vertices_[t[1]], vertices_[t[2]]};
}

double TriMesh::triangle_area(std::size_t tri) const
{
    const auto c = corners(tri);
    return signed_area(c[0], c[1], c[2]);
}

double TriMesh::total_area() const
{
    double sum = 0.0;
    for (std::size_t k = 0; k < triangles_.size(); ++k) {
        sum += triangle_area(k);
    }
    return sum;
}

TriMesh triangulate_slice(const TrajectoryArray& traj, std::size_t t, const CoastlineSet& coast)
{
    const std::size_t float_count = traj.float_count();
    const std::size_t dimension = float_count + coast.points.size();

    std::vector<LonLat> pts;
    std::vector<std::size_t> gidx;
    for (const std::size_t i : traj.reporting_set(t)) {
        pts.push_back(*traj.at(i, t));
        gidx.push_back(i);
    }
    for (std::size_t j = 0; j < coast.points.size(); ++j) {
        pts.push_back(coast.points[j]);
        gidx.push_back(float_count + j);
    }

    // Merge coincident points; the lowest global index survives.
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (pts[a].lon != pts[b].lon) {
            return pts[a].lon < pts[b].lon;
        }
        if (pts[a].lat != pts[b].lat) {
            return pts[a].lat < pts[b].lat;
        }
        return gidx[a] < gidx[b];
    });
    std::vector<char> dropped(pts.size(), 0);
    std::size_t merged = 0;
    for (std::size_t a = 0; a < order.size(); ++a) {
        const std::size_t pa = order[a];
        if (dropped[pa]) {
            continue;
        }
        for (std::size_t b = a + 1; b < order.size() && pts[order[b]].lon - pts[pa].lon <= kMergeTol; ++b) {
            const std::size_t pb = order[b];
            if (dropped[pb] || std::abs(pts[pb].lat - pts[pa].lat) > kMergeTol) {
                continue;
            }
            // Keep whichever of the pair has the lower global index.
            if (gidx[pb] < gidx[pa]) {
                dropped[pa] = 1;
                ++merged;
                break;
            }
            dropped[pb] = 1;
            ++merged;
        }
    }
    if (merged > 0) {
        spdlog::warn("month {}: merged {} coincident points", t + 1, merged);
    }

    std::vector<LonLat> vertices;
    std::vector<std::size_t> global_index;
    for (std::size_t k = 0; k < pts.size(); ++k) {
        if (!dropped[k]) {
            vertices.push_back(pts[k]);
            global_index.push_back(gidx[k]);
        }
    }
    if (vertices.size() < 3) {
        fail_numerical("month " + std::to_string(t + 1) + ": fewer than 3 distinct points to mesh");
    }
    auto triangles = delaunay_triangulate(vertices);
    return TriMesh(std::move(vertices), std::move(global_index), std::move(triangles), float_count, dimension);
}

TriMesh filter_triangles(const TriMesh& mesh, double max_edge_km)
{
    if (!(max_edge_km > 0.0)) {
        fail_validation("max_edge_km must be positive");
    }
    const auto& v = mesh.vertices();
    auto too_long = [&](std::uint32_t a, std::uint32_t b) {
        if (std::abs(v[a].lon - v[b].lon) > 180.0) {
            return true;
        }
        return great_circle_km(v[a], v[b]) > max_edge_km;
    };
    std::vector<Triangle> kept;
    kept.reserve(mesh.triangles().size());
    for (const auto& tri : mesh.triangles()) {
        if (too_long(tri[0], tri[1]) || too_long(tri[1], tri[2]) || too_long(tri[2], tri[0])) {
            continue;
        }
        kept.push_back(tri);
    }
    if (kept.empty()) {
        fail_numerical("empty mesh: no triangle has all edges within " + csv::format_double(max_edge_km) + " km");
    }
    return TriMesh(mesh.vertices(), mesh.global_index(), std::move(kept), mesh.float_count(), mesh.dimension());
}

TriangleLocator::TriangleLocator(const TriMesh& mesh) : mesh_(&mesh)
{
    const auto& v = mesh.vertices();
    if (mesh.triangles().empty()) {
        return;
    }
    double max_lon = -std::numeric_limits<double>::infinity();
    double max_lat = max_lon;
    min_lon_ = std::numeric_limits<double>::infinity();
    min_lat_ = min_lon_;
    for (const auto& p : v) {
        min_lon_ = std::min(min_lon_, p.lon);
        min_lat_ = std::min(min_lat_, p.lat);
        max_lon = std::max(max_lon, p.lon);
        max_lat = std::max(max_lat, p.lat);
    }
    const double w = std::max(max_lon - min_lon_, 1e-12);
    const double h = std::max(max_lat - min_lat_, 1e-12);
    const double per_side = std::max(1.0, std::sqrt(static_cast<double>(mesh.triangles().size())));
    cell_ = std::max(w, h) / per_side;
    nx_ = static_cast<std::size_t>(w / cell_) + 1;
    ny_ = static_cast<std::size_t>(h / cell_) + 1;
    buckets_.resize(nx_ * ny_);
    for (std::size_t k = 0; k < mesh.triangles().size(); ++k) {
        const auto c = mesh.corners(k);
        const double lo_x = std::min({c[0].lon, c[1].lon, c[2].lon});
        const double hi_x = std::max({c[0].lon, c[1].lon, c[2].lon});
        const double lo_y = std::min({c[0].lat, c[1].lat, c[2].lat});
        const double hi_y = std::max({c[0].lat, c[1].lat, c[2].lat});
        const auto ix0 = static_cast<std::size_t>(std::max(0.0, (lo_x - min_lon_) / cell_));
        const auto ix1 = std::min(nx_ - 1, static_cast<std::size_t>((hi_x - min_lon_) / cell_));
        const auto iy0 = static_cast<std::size_t>(std::max(0.0, (lo_y - min_lat_) / cell_));
        const auto iy1 = std::min(ny_ - 1, static_cast<std::size_t>((hi_y - min_lat_) / cell_));
        for (std::size_t iy = iy0; iy <= iy1; ++iy) {
            for (std::size_t ix = ix0; ix <= ix1; ++ix) {
                buckets_[iy * nx_ + ix].push_back(static_cast<std::uint32_t>(k));
            }
        }
    }
}

std::optional<TriangleLocator::Hit> TriangleLocator::locate(LonLat p) const
{
    if (buckets_.empty()) {
        return std::nullopt;
    }
    const double fx = (p.lon - min_lon_) / cell_;
    const double fy = (p.lat - min_lat_) / cell_;
    // Slack of one cell catches points sitting exactly on the bounding box.
    if (fx < -1e-9 || fy < -1e-9 || fx > static_cast<double>(nx_) || fy > static_cast<double>(ny_)) {
        return std::nullopt;
    }
    const auto ix = std::min(nx_ - 1, static_cast<std::size_t>(std::max(0.0, fx)));
    const auto iy = std::min(ny_ - 1, static_cast<std::size_t>(std::max(0.0, fy)));
    for (const std::uint32_t k : buckets_[iy * nx_ + ix]) {
        const auto c = mesh_->corners(k);
        const double area2 = 2.0 * signed_area(c[0], c[1], c[2]);
        const double l0 = 2.0 * signed_area(p, c[1], c[2]) / area2;
        const double l1 = 2.0 * signed_area(c[0], p, c[2]) / area2;
        const double l2 = 1.0 - l0 - l1;
        constexpr double eps = -1e-12;
        if (l0 >= eps && l1 >= eps && l2 >= eps) {
            return Hit{k, {l0, l1, l2}};
        }
    }
    return std::nullopt;
}

HatBasisField::HatBasisField(std::shared_ptr<const TriMesh> mesh, std::vector<double> coefficients)
    : mesh_(std::move(mesh)), coefficients_(std::move(coefficients))
{
    if (coefficients_.size() != mesh_->dimension()) {
        fail_validation("field coefficient count does not match the mesh's global index space");
    }
    locator_ = std::make_shared<TriangleLocator>(*mesh_);
}

std::optional<double> HatBasisField::evaluate(LonLat p) const
{
    const auto hit = locator_->locate(p);
    if (!hit) {
        return std::nullopt;
    }
    const auto& tri = mesh_->triangles()[hit->triangle];
    double value = 0.0;
    for (int k = 0; k < 3; ++k) {
        value += hit->barycentric[k] * vertex_value(tri[k]);
    }
    return value;
}

void write_mesh_vertices(std::ostream& out, const TriMesh& mesh)
{
    out << "global_index,lon,lat\n";
    for (std::size_t k = 0; k < mesh.vertices().size(); ++k) {
        out << (mesh.global_index()[k] + 1) << ',' << csv::format_double(mesh.vertices()[k].lon) << ','
            << csv::format_double(mesh.vertices()[k].lat) << '\n';
    }
}

void write_mesh_triangles(std::ostream& out, const TriMesh& mesh)
{
    out << "v1,v2,v3\n";
    for (const auto& t : mesh.triangles()) {
        out << t[0] << ',' << t[1] << ',' << t[2] << '\n';
    }
}

TriMesh read_mesh(std::istream& vertices_in, std::istream& triangles_in, std::size_t float_count,
                  std::size_t dimension)
{
    std::vector<LonLat> vertices;
    std::vector<std::size_t> global_index;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(vertices_in, line)) {
        ++line_no;
        if (line_no == 1 || csv::trim(line).empty()) {
            continue;
        }
        const auto f = csv::split(line);
        const auto g = f.size() == 3 ? csv::parse_int(f[0]) : std::nullopt;
        const auto lon = f.size() == 3 ? csv::parse_double(f[1]) : std::nullopt;
        const auto lat = f.size() == 3 ? csv::parse_double(f[2]) : std::nullopt;
        if (!g || !lon || !lat || *g < 1) {
            fail_validation("malformed mesh vertex row, line " + std::to_string(line_no));
        }
        global_index.push_back(static_cast<std::size_t>(*g - 1));
        vertices.push_back({*lon, *lat});
    }
    std::vector<Triangle> triangles;
    line_no = 0;
    while (std::getline(triangles_in, line)) {
        ++line_no;
        if (line_no == 1 || csv::trim(line).empty()) {
            continue;
        }
        const auto f = csv::split(line);
        if (f.size() != 3) {
            fail_validation("malformed mesh triangle row, line " + std::to_string(line_no));
        }
        Triangle tri{};
        for (int k = 0; k < 3; ++k) {
            const auto v = csv::parse_int(f[k]);
            if (!v || *v < 0) {
                fail_validation("malformed mesh triangle row, line " + std::to_string(line_no));
            }
            tri[k] = static_cast<std::uint32_t>(*v);
        }
        triangles.push_back(tri);
    }
    return TriMesh(std::move(vertices), std::move(global_index), std::move(triangles), float_count, dimension);
}

} // namespace dynlap
