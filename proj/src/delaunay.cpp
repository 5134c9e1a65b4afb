#include <dynlap/delaunay.hpp>

#include <dynlap/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>

namespace dynlap {

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
constexpr std::int64_t kNoTwin = -1;

// Error-free transformations for the exact orientation fallback.
void two_sum(double a, double b, double& s, double& e)
{
    s = a + b;
    const double bv = s - a;
    const double av = s - bv;
    e = (a - av) + (b - bv);
}

void two_product(double a, double b, double& p, double& e)
{
    p = a * b;
    e = std::fma(a, b, -p);
}

// Adds b into a nonoverlapping expansion (increasing magnitude), dropping zero components.
void grow_expansion(std::vector<double>& e, double b)
{
    double q = b;
    std::size_t out = 0;
    for (std::size_t k = 0; k < e.size(); ++k) {
        double sum;
        double err;
        two_sum(q, e[k], sum, err);
        q = sum;
        if (err != 0.0) {
            e[out++] = err;
        }
    }
    e.resize(out);
    if (q != 0.0) {
        e.push_back(q);
    }
}

double orient2d_exact(LonLat a, LonLat b, LonLat c)
{
    // det = bx*cy - bx*ay - ax*cy - by*cx + by*ax + ay*cx
    const double terms[6][3] = {
        {b.lon, c.lat, 1.0},  {b.lon, a.lat, -1.0}, {a.lon, c.lat, -1.0},
        {b.lat, c.lon, -1.0}, {b.lat, a.lon, 1.0},  {a.lat, c.lon, 1.0},
    };
    std::vector<double> expansion;
    expansion.reserve(16);
    for (const auto& t : terms) {
        double p;
        double err;
        two_product(t[0], t[1], p, err);
        grow_expansion(expansion, t[2] * err);
        grow_expansion(expansion, t[2] * p);
    }
    return expansion.empty() ? 0.0 : expansion.back();
}

double circumradius_sq(LonLat a, LonLat b, LonLat c)
{
    const double dx = b.lon - a.lon;
    const double dy = b.lat - a.lat;
    const double ex = c.lon - a.lon;
    const double ey = c.lat - a.lat;
    const double bl = dx * dx + dy * dy;
    const double cl = ex * ex + ey * ey;
    const double det = dx * ey - dy * ex;
    if (det == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    const double d = 0.5 / det;
    const double x = (ey * bl - dy * cl) * d;
    const double y = (dx * cl - ex * bl) * d;
    const double r = x * x + y * y;
    return std::isfinite(r) ? r : std::numeric_limits<double>::infinity();
}

LonLat circumcenter(LonLat a, LonLat b, LonLat c)
{
    const double dx = b.lon - a.lon;
    const double dy = b.lat - a.lat;
    const double ex = c.lon - a.lon;
    const double ey = c.lat - a.lat;
    const double bl = dx * dx + dy * dy;
    const double cl = ex * ex + ey * ey;
    const double d = 0.5 / (dx * ey - dy * ex);
    return {a.lon + (ey * bl - dy * cl) * d, a.lat + (dx * cl - ex * bl) * d};
}

// Monotone in the angle of (dx, dy), range [0, 1).
double pseudo_angle(double dx, double dy)
{
    const double p = dx / (std::abs(dx) + std::abs(dy));
    return (dy > 0.0 ? 3.0 - p : 1.0 + p) / 4.0;
}

std::size_t next_edge(std::size_t e) { return e % 3 == 2 ? e - 2 : e + 1; }
std::size_t prev_edge(std::size_t e) { return e % 3 == 0 ? e + 2 : e - 1; }

class SweepHull {
public:
    explicit SweepHull(std::span<const LonLat> pts) : pts_(pts) {}

    std::vector<Triangle> run();

private:
    std::size_t add_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::int64_t ta, std::int64_t tb,
                             std::int64_t tc);
    void link(std::size_t a, std::int64_t b);
    void legalize(std::size_t a);
    void retarget_hull_edge(std::size_t from, std::size_t to);
    std::size_t hash_key(LonLat p) const;

    std::span<const LonLat> pts_;
    std::vector<std::uint32_t> tris_;
    std::vector<std::int64_t> twins_;
    std::vector<std::uint32_t> hull_next_;
    std::vector<std::uint32_t> hull_prev_;
    std::vector<std::size_t> hull_edge_;  // hull halfedge leaving each hull vertex
    std::vector<std::uint32_t> hash_;
    std::vector<std::size_t> stack_;
    LonLat center_;
};

std::size_t SweepHull::hash_key(LonLat p) const
{
    const double a = pseudo_angle(p.lon - center_.lon, p.lat - center_.lat);
    const auto n = hash_.size();
    return static_cast<std::size_t>(std::floor(a * static_cast<double>(n))) % n;
}

std::size_t SweepHull::add_triangle(std::uint32_t a, std::uint32_t b, std::uint32_t c, std::int64_t ta,
                                    std::int64_t tb, std::int64_t tc)
{
    const std::size_t t = tris_.size();
    tris_.insert(tris_.end(), {a, b, c});
    twins_.insert(twins_.end(), {kNoTwin, kNoTwin, kNoTwin});
    link(t, ta);
    link(t + 1, tb);
    link(t + 2, tc);
    return t;
}

void SweepHull::link(std::size_t a, std::int64_t b)
{
    twins_[a] = b;
    if (b != kNoTwin) {
        twins_[static_cast<std::size_t>(b)] = static_cast<std::int64_t>(a);
    }
}

// A hull halfedge moved slots during a flip; hull_edge_ is keyed by the edge's start vertex.
void SweepHull::retarget_hull_edge(std::size_t from, std::size_t to)
{
    const std::uint32_t start = tris_[from];
    if (hull_edge_[start] == from) {
        hull_edge_[start] = to;
    }
}

void SweepHull::legalize(std::size_t a)
{
    stack_.clear();
    while (true) {
        const std::int64_t b_signed = twins_[a];
        if (b_signed == kNoTwin) {
            if (stack_.empty()) {
                return;
            }
            a = stack_.back();
            stack_.pop_back();
            continue;
        }
        const auto b = static_cast<std::size_t>(b_signed);
        // Flip the shared edge p0-p1 to pl-pr when pl lies inside the circle through p0, p1, pr.
        const std::size_t ar = prev_edge(a);
        const std::size_t bl = prev_edge(b);
        const std::uint32_t pr = tris_[a];
        const std::uint32_t pl = tris_[next_edge(a)];
        const std::uint32_t p0 = tris_[ar];
        const std::uint32_t p1 = tris_[bl];

        if (incircle(pts_[pr], pts_[pl], pts_[p0], pts_[p1]) > 0.0) {
            const std::int64_t twin_bl = twins_[bl];
            const std::int64_t twin_ar = twins_[ar];
            // Edge p1->pl moves from slot bl to slot a; edge p0->pr from ar to b.
            if (twin_bl == kNoTwin) {
                retarget_hull_edge(bl, a);
            }
            if (twin_ar == kNoTwin) {
                retarget_hull_edge(ar, b);
            }
            tris_[a] = p1;
            tris_[b] = p0;
            link(a, twin_bl);
            link(b, twin_ar);
            link(ar, static_cast<std::int64_t>(bl));
            stack_.push_back(next_edge(b));
        } else {
            if (stack_.empty()) {
                return;
            }
            a = stack_.back();
            stack_.pop_back();
        }
    }
}

std::vector<Triangle> SweepHull::run()
{
    const std::size_t n = pts_.size();
    if (n < 3) {
        fail_numerical("triangulation needs at least 3 points, got " + std::to_string(n));
    }

    double min_x = std::numeric_limits<double>::infinity();
    double min_y = min_x;
    double max_x = -min_x;
    double max_y = -min_x;
    for (const auto& p : pts_) {
        min_x = std::min(min_x, p.lon);
        min_y = std::min(min_y, p.lat);
        max_x = std::max(max_x, p.lon);
        max_y = std::max(max_y, p.lat);
    }
    const LonLat mid{0.5 * (min_x + max_x), 0.5 * (min_y + max_y)};
    auto dist2 = [](LonLat a, LonLat b) {
        const double dx = a.lon - b.lon;
        const double dy = a.lat - b.lat;
        return dx * dx + dy * dy;
    };

    // Seed: point nearest the bbox centre, its nearest neighbour, and the third point giving
    // the smallest circumcircle.
    std::uint32_t i0 = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < n; ++i) {
        const double d = dist2(mid, pts_[i]);
        if (d < best) {
            best = d;
            i0 = i;
        }
    }
    std::uint32_t i1 = kNone;
    best = std::numeric_limits<double>::infinity();
    for (std::uint32_t i = 0; i < n; ++i) {
        if (i == i0) {
            continue;
        }
        const double d = dist2(pts_[i0], pts_[i]);
        if (d < best && d > 0.0) {
            best = d;
            i1 = i;
        }
    }
    std::uint32_t i2 = kNone;
    best = std::numeric_limits<double>::infinity();
    if (i1 != kNone) {
        for (std::uint32_t i = 0; i < n; ++i) {
            if (i == i0 || i == i1) {
                continue;
            }
            const double r = circumradius_sq(pts_[i0], pts_[i1], pts_[i]);
            if (r < best && orient2d(pts_[i0], pts_[i1], pts_[i]) != 0.0) {
                best = r;
                i2 = i;
            }
        }
    }
    if (i2 == kNone) {
        fail_numerical("all points are collinear; cannot triangulate");
    }
    if (orient2d(pts_[i0], pts_[i1], pts_[i2]) < 0.0) {
        std::swap(i1, i2);
    }
    center_ = circumcenter(pts_[i0], pts_[i1], pts_[i2]);

    std::vector<double> dists(n);
    for (std::size_t i = 0; i < n; ++i) {
        dists[i] = dist2(pts_[i], center_);
    }
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return dists[a] < dists[b]; });

    hull_next_.assign(n, kNone);
    hull_prev_.assign(n, kNone);
    hull_edge_.assign(n, 0);
    hash_.assign(static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n)))), kNone);
    tris_.reserve(6 * n);
    twins_.reserve(6 * n);

    std::uint32_t hull_start = i0;
    hull_next_[i0] = i1;
    hull_prev_[i1] = i0;
    hull_next_[i1] = i2;
    hull_prev_[i2] = i1;
    hull_next_[i2] = i0;
    hull_prev_[i0] = i2;
    add_triangle(i0, i1, i2, kNoTwin, kNoTwin, kNoTwin);
    hull_edge_[i0] = 0;
    hull_edge_[i1] = 1;
    hull_edge_[i2] = 2;
    hash_[hash_key(pts_[i0])] = i0;
    hash_[hash_key(pts_[i1])] = i1;
    hash_[hash_key(pts_[i2])] = i2;

    const double scale = std::max({max_x - min_x, max_y - min_y, 1e-300});
    const double dup_tol = 1e-14 * scale;
    LonLat last{std::numeric_limits<double>::quiet_NaN(), 0.0};

    for (const std::uint32_t i : order) {
        const LonLat p = pts_[i];
        if (std::abs(p.lon - last.lon) <= dup_tol && std::abs(p.lat - last.lat) <= dup_tol) {
            continue;
        }
        last = p;
        if (i == i0 || i == i1 || i == i2) {
            continue;
        }

        // Find a hull vertex near p's angle, then walk to the first edge that p sees.
        std::uint32_t start = kNone;
        const std::size_t key = hash_key(p);
        for (std::size_t j = 0; j < hash_.size(); ++j) {
            start = hash_[(key + j) % hash_.size()];
            if (start != kNone && start != hull_next_[start]) {
                break;
            }
        }
        start = hull_prev_[start];
        std::uint32_t e = start;
        while (true) {
            const std::uint32_t q = hull_next_[e];
            if (orient2d(pts_[e], pts_[q], p) < 0.0) {
                break;
            }
            e = q;
            if (e == start) {
                e = kNone;
                break;
            }
        }
        if (e == kNone) {
            continue;  // on the hull boundary or a near-duplicate
        }

        std::uint32_t q = hull_next_[e];
        std::size_t t = add_triangle(q, e, i, static_cast<std::int64_t>(hull_edge_[e]), kNoTwin, kNoTwin);
        hull_edge_[e] = t + 1;
        hull_edge_[i] = t + 2;
        legalize(t);

        // Forward over further visible edges.
        std::uint32_t nxt = q;
        while (true) {
            const std::uint32_t q2 = hull_next_[nxt];
            if (!(orient2d(pts_[nxt], pts_[q2], p) < 0.0)) {
                break;
            }
            t = add_triangle(q2, nxt, i, static_cast<std::int64_t>(hull_edge_[nxt]),
                             static_cast<std::int64_t>(hull_edge_[i]), kNoTwin);
            hull_edge_[i] = t + 2;
            hull_next_[nxt] = nxt;  // removed from hull
            legalize(t);
            nxt = q2;
        }

        // Backward, only needed when the first edge found was the walk's starting edge.
        if (e == start) {
            while (true) {
                const std::uint32_t w = hull_prev_[e];
                if (!(orient2d(pts_[w], pts_[e], p) < 0.0)) {
                    break;
                }
                t = add_triangle(e, w, i, static_cast<std::int64_t>(hull_edge_[w]), kNoTwin,
                                 static_cast<std::int64_t>(hull_edge_[e]));
                hull_edge_[w] = t + 1;
                hull_next_[e] = e;
                legalize(t);
                e = w;
            }
        }

        hull_start = e;
        hull_prev_[i] = e;
        hull_next_[e] = i;
        hull_prev_[nxt] = i;
        hull_next_[i] = nxt;
        hash_[hash_key(p)] = i;
        hash_[hash_key(pts_[e])] = e;
    }
    (void)hull_start;

    std::vector<Triangle> out;
    out.reserve(tris_.size() / 3);
    for (std::size_t k = 0; k < tris_.size(); k += 3) {
        out.push_back({tris_[k], tris_[k + 1], tris_[k + 2]});
    }
    return out;
}

} // namespace

double orient2d(LonLat a, LonLat b, LonLat c)
{
    const double left = (b.lon - a.lon) * (c.lat - a.lat);
    const double right = (b.lat - a.lat) * (c.lon - a.lon);
    const double det = left - right;
    const double bound = 3.3306690738754716e-16 * (std::abs(left) + std::abs(right));
    if (std::abs(det) > bound) {
        return det;
    }
    return orient2d_exact(a, b, c);
}

double incircle(LonLat a, LonLat b, LonLat c, LonLat d)
{
    const double adx = a.lon - d.lon;
    const double ady = a.lat - d.lat;
    const double bdx = b.lon - d.lon;
    const double bdy = b.lat - d.lat;
    const double cdx = c.lon - d.lon;
    const double cdy = c.lat - d.lat;
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double bc = bdx * cdy - cdx * bdy;
    const double ca = cdx * ady - adx * cdy;
    const double ab = adx * bdy - bdx * ady;
    const double det = alift * bc + blift * ca + clift * ab;
    const double permanent = alift * (std::abs(bdx * cdy) + std::abs(cdx * bdy)) +
                             blift * (std::abs(cdx * ady) + std::abs(adx * cdy)) +
                             clift * (std::abs(adx * bdy) + std::abs(bdx * ady));
    // Near-cocircular configurations count as on the circle, so flips cannot cycle.
    if (std::abs(det) <= 1e-13 * permanent) {
        return 0.0;
    }
    return det;
}

std::vector<Triangle> delaunay_triangulate(std::span<const LonLat> points)
{
    return SweepHull(points).run();
}

} // namespace dynlap
