#include <dynlap/synthetic.hpp>

#include <dynlap/error.hpp>
#include <dynlap/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

namespace dynlap {

namespace {

LonLat center_at(const Vortex& v, std::size_t t)
{
    const auto s = static_cast<double>(t);
    return {v.center.lon + s * v.drift.lon, v.center.lat + s * v.drift.lat};
}

double planar_distance(LonLat a, LonLat b)
{
    return std::hypot(a.lon - b.lon, a.lat - b.lat);
}

TrajectoryArray static_array(const FlowSpec& spec, const std::vector<LonLat>& seeds)
{
    std::vector<std::string> ids;
    std::vector<std::optional<LonLat>> pos;
    pos.reserve(seeds.size() * spec.months);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        ids.push_back(synthetic_float_id(i));
        for (std::size_t t = 0; t < spec.months; ++t) {
            pos.emplace_back(seeds[i]);
        }
    }
    return TrajectoryArray(std::move(ids), spec.start_month, spec.months, std::move(pos));
}

} // namespace

std::string synthetic_float_id(std::size_t index)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "S%05zu", index + 1);
    return buf;
}

void validate_flow(const FlowSpec& spec)
{
    if (!(spec.lon_max > spec.lon_min) || !(spec.lat_max > spec.lat_min)) {
        fail_validation("synthetic domain rectangle is empty");
    }
    if (spec.lon_min < -180.0 || spec.lon_max >= 180.0 || spec.lat_min < -90.0 || spec.lat_max > 90.0) {
        fail_validation("synthetic domain must lie within lon [-180, 180) and lat [-90, 90]");
    }
    if (spec.months < 2) {
        fail_validation("synthetic flows need at least 2 months");
    }
    if (!(spec.ring_spacing > 0.0)) {
        fail_validation("boundary ring spacing must be positive");
    }
    const std::size_t seeds = spec.seeding == Seeding::Grid
                                  ? (spec.grid_nx < 2 || spec.grid_ny < 2 ? 0 : (spec.grid_nx - 2) * (spec.grid_ny - 2))
                                  : spec.seed_count;
    if (seeds < 3) {
        fail_validation("synthetic flows need at least 3 seed points");
    }
    if (spec.kind != FlowKind::MovingVortices) {
        return;
    }
    if (spec.vortices.empty()) {
        fail_validation("moving-vortex flow needs at least one vortex");
    }
    for (std::size_t t = 0; t < spec.months; ++t) {
        for (std::size_t a = 0; a < spec.vortices.size(); ++a) {
            const Vortex& v = spec.vortices[a];
            if (!(v.radius > 0.0)) {
                fail_validation("vortex radius must be positive");
            }
            const LonLat c = center_at(v, t);
            if (c.lon - v.radius <= spec.lon_min || c.lon + v.radius >= spec.lon_max ||
                c.lat - v.radius <= spec.lat_min || c.lat + v.radius >= spec.lat_max) {
                fail_validation("vortex " + std::to_string(a + 1) + " leaves the domain at month " +
                                std::to_string(t + 1));
            }
            for (std::size_t b = a + 1; b < spec.vortices.size(); ++b) {
                const Vortex& w = spec.vortices[b];
                if (planar_distance(c, center_at(w, t)) <= v.radius + w.radius) {
                    fail_validation("vortices " + std::to_string(a + 1) + " and " + std::to_string(b + 1) +
                                    " overlap at month " + std::to_string(t + 1));
                }
            }
        }
    }
}

TrajectoryArray gen_identity(const FlowSpec& spec)
{
    validate_flow(spec);
    std::vector<LonLat> seeds;
    if (spec.seeding == Seeding::Grid) {
        const double dx = (spec.lon_max - spec.lon_min) / static_cast<double>(spec.grid_nx - 1);
        const double dy = (spec.lat_max - spec.lat_min) / static_cast<double>(spec.grid_ny - 1);
        for (std::size_t j = 1; j + 1 < spec.grid_ny; ++j) {
            for (std::size_t i = 1; i + 1 < spec.grid_nx; ++i) {
                seeds.push_back({spec.lon_min + static_cast<double>(i) * dx, spec.lat_min + static_cast<double>(j) * dy});
            }
        }
    } else {
        Rng rng(spec.seed);
        while (seeds.size() < spec.seed_count) {
            const LonLat p{rng.uniform(spec.lon_min, spec.lon_max), rng.uniform(spec.lat_min, spec.lat_max)};
            if (p.lon > spec.lon_min && p.lat > spec.lat_min) {
                seeds.push_back(p);
            }
        }
    }
    return static_array(spec, seeds);
}

TrajectoryArray gen_moving_vortices(const FlowSpec& spec, std::vector<int>* membership)
{
    validate_flow(spec);
    if (spec.kind != FlowKind::MovingVortices) {
        fail_validation("flow spec is not a moving-vortex flow");
    }
    std::vector<LonLat> seeds;
    std::vector<int> owner;
    auto disk_at = [&](LonLat p, std::size_t t) -> int {
        for (std::size_t v = 0; v < spec.vortices.size(); ++v) {
            if (planar_distance(p, center_at(spec.vortices[v], t)) <= spec.vortices[v].radius) {
                return static_cast<int>(v);
            }
        }
        return -1;
    };
    if (spec.seeding == Seeding::Grid) {
        const TrajectoryArray g = gen_identity(spec);
        for (std::size_t i = 0; i < g.float_count(); ++i) {
            seeds.push_back(*g.at(i, 0));
        }
    } else {
        Rng rng(spec.seed);
        while (seeds.size() < spec.seed_count) {
            const LonLat p{rng.uniform(spec.lon_min, spec.lon_max), rng.uniform(spec.lat_min, spec.lat_max)};
            if (!(p.lon > spec.lon_min && p.lat > spec.lat_min)) {
                continue;
            }
            if (disk_at(p, 0) < 0) {
                bool swept = false;
                for (std::size_t t = 1; t < spec.months && !swept; ++t) {
                    swept = disk_at(p, t) >= 0;
                }
                if (swept) {
                    continue;
                }
            }
            seeds.push_back(p);
        }
    }

    std::vector<std::string> ids;
    std::vector<std::optional<LonLat>> pos(seeds.size() * spec.months);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        ids.push_back(synthetic_float_id(i));
        owner.push_back(disk_at(seeds[i], 0));
        LonLat p = seeds[i];
        for (std::size_t t = 0; t < spec.months; ++t) {
            pos[i * spec.months + t] = p;
            const int v = disk_at(p, t);
            if (v < 0) {
                continue;
            }
            const Vortex& vx = spec.vortices[static_cast<std::size_t>(v)];
            const LonLat c = center_at(vx, t);
            const double cs = std::cos(vx.omega);
            const double sn = std::sin(vx.omega);
            const double dx = p.lon - c.lon;
            const double dy = p.lat - c.lat;
            p = {c.lon + cs * dx - sn * dy + vx.drift.lon, c.lat + sn * dx + cs * dy + vx.drift.lat};
        }
    }
    if (membership != nullptr) {
        *membership = std::move(owner);
    }
    return TrajectoryArray(std::move(ids), spec.start_month, spec.months, std::move(pos));
}

CoastlineSet boundary_ring(const FlowSpec& spec)
{
    validate_flow(spec);
    const double w = spec.lon_max - spec.lon_min;
    const double h = spec.lat_max - spec.lat_min;
    const auto nx = static_cast<std::size_t>(std::max(1.0, std::round(w / spec.ring_spacing)));
    const auto ny = static_cast<std::size_t>(std::max(1.0, std::round(h / spec.ring_spacing)));
    CoastlineSet ring;
    auto lon = [&](std::size_t i) { return spec.lon_min + w * static_cast<double>(i) / static_cast<double>(nx); };
    auto lat = [&](std::size_t j) { return spec.lat_min + h * static_cast<double>(j) / static_cast<double>(ny); };
    for (std::size_t i = 0; i < nx; ++i) {
        ring.points.push_back({lon(i), spec.lat_min});
    }
    for (std::size_t j = 0; j < ny; ++j) {
        ring.points.push_back({spec.lon_max, lat(j)});
    }
    for (std::size_t i = nx; i > 0; --i) {
        ring.points.push_back({lon(i), spec.lat_max});
    }
    for (std::size_t j = ny; j > 0; --j) {
        ring.points.push_back({spec.lon_min, lat(j)});
    }
    return ring;
}

std::vector<double> argo_like_lifetimes(std::size_t months, double full_fraction)
{
    if (months < 1 || !(full_fraction >= 0.0 && full_fraction <= 1.0)) {
        fail_validation("lifetime distribution needs T >= 1 and a full-lifetime fraction in [0, 1]");
    }
    if (months == 1) {
        return {1.0};
    }
    std::vector<double> pmf(months, (1.0 - full_fraction) / static_cast<double>(months - 1));
    pmf.back() = full_fraction;
    return pmf;
}

TrajectoryArray apply_dropout(const TrajectoryArray& traj, const std::vector<double>& lifetime_pmf,
                              std::uint64_t seed)
{
    const std::size_t months = traj.month_count();
    if (lifetime_pmf.size() != months) {
        fail_validation("lifetime distribution must cover 1.." + std::to_string(months) + " months");
    }
    double total = 0.0;
    for (const double p : lifetime_pmf) {
        if (!(p >= 0.0)) {
            fail_validation("lifetime probabilities must be nonnegative");
        }
        total += p;
    }
    if (!(total > 0.0)) {
        fail_validation("lifetime distribution has no mass");
    }
    Rng rng(seed);
    std::vector<std::string> ids;
    std::vector<std::optional<LonLat>> pos;
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        const double u = rng.uniform() * total;
        std::size_t life = months;
        double acc = 0.0;
        for (std::size_t l = 0; l < months; ++l) {
            acc += lifetime_pmf[l];
            if (u < acc) {
                life = l + 1;
                break;
            }
        }
        const auto start = static_cast<std::size_t>(rng.index(months - life + 1));
        std::vector<std::optional<LonLat>> row(months);
        bool any = false;
        for (std::size_t t = start; t < start + life; ++t) {
            row[t] = traj.at(i, t);
            any = any || row[t].has_value();
        }
        if (!any) {
            continue;
        }
        ids.push_back(traj.float_ids()[i]);
        pos.insert(pos.end(), row.begin(), row.end());
    }
    if (ids.empty()) {
        fail_validation("dropout removed every float");
    }
    return TrajectoryArray(std::move(ids), traj.start_month(), months, std::move(pos));
}

} // namespace dynlap
