#include <doctest.h>

#include <dynlap/delaunay.hpp>
#include <dynlap/error.hpp>
#include <dynlap/mesh.hpp>
#include <dynlap/rng.hpp>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <sstream>

using namespace dynlap;

namespace {

TrajectoryArray static_floats(const std::vector<LonLat>& pts)
{
    std::vector<std::string> ids;
    std::vector<std::optional<LonLat>> pos;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ids.push_back("f" + std::to_string(i));
        pos.emplace_back(pts[i]);
    }
    return TrajectoryArray(ids, {2011, 1}, 1, pos);
}

// Andrew's monotone chain; area of the convex hull by the shoelace formula.
double hull_area(std::vector<LonLat> p)
{
    std::sort(p.begin(), p.end(), [](LonLat a, LonLat b) { return a.lon < b.lon || (a.lon == b.lon && a.lat < b.lat); });
    auto cross = [](LonLat o, LonLat a, LonLat b) {
        return (a.lon - o.lon) * (b.lat - o.lat) - (a.lat - o.lat) * (b.lon - o.lon);
    };
    std::vector<LonLat> h(2 * p.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        while (k >= 2 && cross(h[k - 2], h[k - 1], p[i]) <= 0) {
            --k;
        }
        h[k++] = p[i];
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i > 0; --i) {
        while (k >= t && cross(h[k - 2], h[k - 1], p[i - 1]) <= 0) {
            --k;
        }
        h[k++] = p[i - 1];
    }
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) {
        a += h[i].lon * h[i + 1].lat - h[i + 1].lon * h[i].lat;
    }
    return 0.5 * a;
}

// Circumcircle test computed from the explicit circumcenter, independent of the library predicate.
bool strictly_inside_circumcircle(LonLat a, LonLat b, LonLat c, LonLat p, double tol)
{
    const double d = 2.0 * (a.lon * (b.lat - c.lat) + b.lon * (c.lat - a.lat) + c.lon * (a.lat - b.lat));
    const double a2 = a.lon * a.lon + a.lat * a.lat;
    const double b2 = b.lon * b.lon + b.lat * b.lat;
    const double c2 = c.lon * c.lon + c.lat * c.lat;
    const double ux = (a2 * (b.lat - c.lat) + b2 * (c.lat - a.lat) + c2 * (a.lat - b.lat)) / d;
    const double uy = (a2 * (c.lon - b.lon) + b2 * (a.lon - c.lon) + c2 * (b.lon - a.lon)) / d;
    const double r = std::hypot(a.lon - ux, a.lat - uy);
    return std::hypot(p.lon - ux, p.lat - uy) < r - tol;
}

std::vector<LonLat> random_points(Rng& rng, std::size_t n, double w, double h)
{
    std::vector<LonLat> p;
    for (std::size_t i = 0; i < n; ++i) {
        p.push_back({rng.uniform(0, w), rng.uniform(0, h)});
    }
    return p;
}

} // namespace

TEST_CASE("three points give one triangle")
{
    const auto tri = delaunay_triangulate(std::vector<LonLat>{{0, 0}, {1, 0}, {0, 1}});
    REQUIRE(tri.size() == 1);
}

TEST_CASE("unit square corners give two triangles of total area 1")
{
    const CoastlineSet none;
    const auto tr = static_floats({{0, 0}, {1, 0}, {1, 1}, {0, 1}});
    const TriMesh m = triangulate_slice(tr, 0, none);
    CHECK(m.triangles().size() == 2);
    CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-15));
    for (std::size_t k = 0; k < m.triangles().size(); ++k) {
        CHECK(m.triangle_area(k) > 0.0);
    }
}

TEST_CASE("collinear points are rejected")
{
    const CoastlineSet none;
    CHECK_THROWS_AS(triangulate_slice(static_floats({{0, 0}, {1, 1}, {2, 2}}), 0, none), Error);
    CHECK_THROWS_AS(triangulate_slice(static_floats({{0, 0}, {1, 1}}), 0, none), Error);
}

TEST_CASE("coincident float and coastline point merge to the float")
{
    CoastlineSet coast{{{0, 0}, {5, 0}, {0, 5}}};
    const TriMesh m = triangulate_slice(static_floats({{1, 1}, {5, 0}}), 0, coast);
    CHECK(m.vertices().size() == 4);
    const std::set<std::size_t> g(m.global_index().begin(), m.global_index().end());
    CHECK(g == std::set<std::size_t>{0, 1, 2, 4});
}

TEST_CASE("global indices skip non-reporting floats")
{
    using P = std::optional<LonLat>;
    const TrajectoryArray tr({"a", "b", "c", "d"}, {2011, 1}, 2,
                             {P{LonLat{0, 0}}, P{LonLat{0, 0}}, P{}, P{LonLat{3, 0}}, P{LonLat{0, 3}}, P{LonLat{0, 3}},
                              P{LonLat{2, 2}}, P{}});
    CoastlineSet coast{{{-1, -1}, {4, -1}}};
    const TriMesh m = triangulate_slice(tr, 1, coast);
    const std::set<std::size_t> g(m.global_index().begin(), m.global_index().end());
    CHECK(g == std::set<std::size_t>{0, 1, 2, 4, 5});
    CHECK(m.dimension() == 6);
}

TEST_CASE("property: Delaunay empty circumcircles and hull coverage on random sets")
{
    Rng rng(11);
    for (int trial = 0; trial < 40; ++trial) {
        const std::size_t n = 3 + rng.index(150);
        const auto pts = random_points(rng, n, 20.0, 10.0);
        const auto tris = delaunay_triangulate(pts);
        double area = 0.0;
        for (const auto& t : tris) {
            const double a = 0.5 * orient2d(pts[t[0]], pts[t[1]], pts[t[2]]);
            CHECK(a > 0.0);
            area += 0.5 * ((pts[t[1]].lon - pts[t[0]].lon) * (pts[t[2]].lat - pts[t[0]].lat) -
                           (pts[t[1]].lat - pts[t[0]].lat) * (pts[t[2]].lon - pts[t[0]].lon));
        }
        CHECK(area == doctest::Approx(hull_area(pts)).epsilon(1e-8));
        std::size_t violations = 0;
        for (const auto& t : tris) {
            for (std::size_t v = 0; v < n; ++v) {
                if (v != t[0] && v != t[1] && v != t[2] &&
                    strictly_inside_circumcircle(pts[t[0]], pts[t[1]], pts[t[2]], pts[v], 1e-10)) {
                    ++violations;
                }
            }
        }
        CHECK(violations == 0);
    }
}

TEST_CASE("property: Delaunay on lattices with many cocircular quadruples")
{
    for (int n : {2, 3, 7, 20}) {
        std::vector<LonLat> pts;
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                pts.push_back({0.5 * i, 0.5 * j});
            }
        }
        const auto tris = delaunay_triangulate(pts);
        CHECK(tris.size() == static_cast<std::size_t>(2 * (n - 1) * (n - 1)));
        double area = 0.0;
        for (const auto& t : tris) {
            area += 0.5 * orient2d(pts[t[0]], pts[t[1]], pts[t[2]]);
        }
        CHECK(area == doctest::Approx(0.25 * (n - 1) * (n - 1)).epsilon(1e-12));
    }
}

TEST_CASE("filtering by great-circle edge length")
{
    const CoastlineSet none;
    const TriMesh small = triangulate_slice(static_floats({{0, 0}, {0.9, 0}, {0, 0.9}}), 0, none);
    CHECK(filter_triangles(small, 1500.0).triangles().size() == 1);
    CHECK_THROWS_AS(filter_triangles(small, 50.0), Error);
    CHECK_THROWS_AS(filter_triangles(small, 0.0), Error);

    // The long sliver to the far point exceeds 1500 km; the compact pair survives.
    const TriMesh wide = triangulate_slice(static_floats({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {30, 0.5}}), 0, none);
    const TriMesh kept = filter_triangles(wide, 1500.0);
    CHECK(kept.triangles().size() == 2);
    CHECK(kept.vertices().size() == wide.vertices().size());
    try {
        filter_triangles(small, 50.0);
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("empty mesh") != std::string::npos);
    }
}

TEST_CASE("hat-basis field interpolates linearly")
{
    const CoastlineSet none;
    auto mesh = std::make_shared<const TriMesh>(
        triangulate_slice(static_floats({{0, 0}, {2, 0}, {0, 2}, {2, 2}}), 0, none));
    // f = 1 + lon + 3 lat is reproduced exactly by P1 interpolation.
    const HatBasisField f(mesh, {1.0, 3.0, 7.0, 9.0});
    CHECK(*f.evaluate({0, 0}) == doctest::Approx(1.0));
    CHECK(*f.evaluate({0.5, 1.25}) == doctest::Approx(1 + 0.5 + 3.75));
    CHECK(*f.evaluate({2.0, 1.0}) == doctest::Approx(6.0));
    CHECK_FALSE(f.evaluate({3.0, 1.0}).has_value());
    CHECK_THROWS_AS(HatBasisField(mesh, {1.0}), Error);
}

TEST_CASE("mesh dump round trip")
{
    CoastlineSet coast{{{-1, -1}, {3, -1}, {3, 3}, {-1, 3}}};
    const TriMesh m = triangulate_slice(static_floats({{0, 0}, {1, 0.5}, {0.25, 2}}), 0, coast);
    std::ostringstream v;
    std::ostringstream t;
    write_mesh_vertices(v, m);
    write_mesh_triangles(t, m);
    std::istringstream vi(v.str());
    std::istringstream ti(t.str());
    const TriMesh back = read_mesh(vi, ti, 3, 7);
    CHECK(back.vertices() == m.vertices());
    CHECK(back.global_index() == m.global_index());
    CHECK(back.triangles() == m.triangles());
    CHECK(v.str().rfind("global_index,lon,lat\n", 0) == 0);
}
