// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <dynlap/coherent_sets.hpp>
#include <dynlap/config.hpp>
#include <dynlap/csv.hpp>
#include <dynlap/eigensolver.hpp>
#include <dynlap/error.hpp>
#include <dynlap/fem.hpp>
#include <dynlap/mesh.hpp>
#include <dynlap/pipeline.hpp>
#include <dynlap/rng.hpp>
#include <dynlap/seba.hpp>
#include <dynlap/synthetic.hpp>

#include <Eigen/Dense>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>

#include <unistd.h>

using namespace dynlap;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* format, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("dynlap_acceptance_" + std::to_string(getpid())) / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig bundled_config(const std::string& name, const fs::path& output_dir)
{
    std::ifstream in(fs::path(DYNLAP_SOURCE_DIR) / "configs" / name);
    if (!in) {
        fail_io("cannot open bundled config " + name);
    }
    auto file = parse_config_text(in, name);
    return build_config({file, {{"output_dir", output_dir.string()}}});
}

// Meshes, assembles and averages every month the way the pipeline does.
TimeAveragedSystem averaged(const TrajectoryArray& traj, const CoastlineSet& coast, double max_edge_km = 1500.0)
{
    std::vector<SliceMatrices> slices;
    for (std::size_t t = 0; t < traj.month_count(); ++t) {
        slices.push_back(assemble_slice(filter_triangles(triangulate_slice(traj, t, coast), max_edge_km)));
    }
    const std::size_t i = traj.float_count();
    return average_system(slices, {i, i + coast.points.size()});
}

Eigen::MatrixXd dense(const SparseSymmetric& m)
{
    return Eigen::MatrixXd(m.matrix());
}

Outcome ac1()
{
    const auto t0 = Clock::now();
    const TriMesh square({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {0, 1, 2, 3}, {Triangle{0, 1, 2}, Triangle{0, 2, 3}}, 4, 4);
    const auto s = assemble_slice(square);
    // Hand computation: the right-angle vertices 1 and 3 each belong to one triangle, the diagonal
    // vertices 0 and 2 to both.
    Eigen::Matrix4d k_ref;
    k_ref << 1, -0.5, 0, -0.5, -0.5, 1, -0.5, 0, 0, -0.5, 1, -0.5, -0.5, 0, -0.5, 1;
    Eigen::Matrix4d m_ref;
    m_ref << 4, 1, 2, 1, 1, 2, 1, 0, 2, 1, 4, 1, 1, 0, 1, 2;
    m_ref /= 24.0;
    const double ek = (dense(s.stiffness) - k_ref).cwiseAbs().maxCoeff();
    const double em = (dense(s.mass) - m_ref).cwiseAbs().maxCoeff();
    const double secs = seconds_since(t0);
    return {ek <= 1e-12 && em <= 1e-12 && secs < 1.0,
            fmt("max |K-K_ref| = %.1e, max |M-M_ref| = %.1e, %.3f s", ek, em, secs)};
}

Outcome ac2()
{
    const auto t0 = Clock::now();
    FlowSpec spec;
    spec.seeding = Seeding::Grid;
    spec.months = 3;
    const auto traj = gen_identity(spec);
    const auto coast = boundary_ring(spec);
    const auto sol = solve_leading(averaged(traj, coast), {3, 1e-8, 5000});
    const double secs = seconds_since(t0);
    const double pi2 = std::numbers::pi * std::numbers::pi;
    const double e1 = std::abs(sol.pairs[0].eigenvalue / (-2 * pi2) - 1);
    const double e2 = std::abs(sol.pairs[1].eigenvalue / (-5 * pi2) - 1);
    const double e3 = std::abs(sol.pairs[2].eigenvalue / (-5 * pi2) - 1);
    return {e1 <= 0.02 && e2 <= 0.03 && e3 <= 0.03 && secs < 10.0,
            fmt("lambda = %.4f, %.4f, %.4f (rel. err %.2e, %.2e, %.2e), %.2f s", sol.pairs[0].eigenvalue,
                sol.pairs[1].eigenvalue, sol.pairs[2].eigenvalue, e1, e2, e3, secs)};
}

// Independent shoelace area of the mesh triangles.
double meshed_area(const TriMesh& mesh)
{
    double total = 0.0;
    for (const auto& t : mesh.triangles()) {
        const auto& a = mesh.vertices()[t[0]];
        const auto& b = mesh.vertices()[t[1]];
        const auto& c = mesh.vertices()[t[2]];
        total += 0.5 * std::abs((b.lon - a.lon) * (c.lat - a.lat) - (b.lat - a.lat) * (c.lon - a.lon));
    }
    return total;
}

Outcome ac3()
{
    Rng rng(303);
    double worst_mass = 0.0;
    double worst_kernel = 0.0;
    std::size_t slices = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const double lon0 = rng.uniform(-170, 150);
        const double lat0 = rng.uniform(-70, 50);
        const double w = rng.uniform(1, 20);
        const std::size_t floats = 10 + rng.index(300);
        const std::size_t months = 1 + rng.index(4);
        std::vector<std::string> ids;
        std::vector<std::optional<LonLat>> pos;
        for (std::size_t i = 0; i < floats; ++i) {
            ids.push_back("F" + std::to_string(i));
            for (std::size_t t = 0; t < months; ++t) {
                if (t == 0 || rng.uniform() < 0.8) {
                    pos.emplace_back(LonLat{lon0 + rng.uniform(0, w), lat0 + rng.uniform(0, w)});
                } else {
                    pos.emplace_back();
                }
            }
        }
        const TrajectoryArray traj(ids, {2011, 1}, months, pos);
        CoastlineSet coast;
        const std::size_t c = 3 + rng.index(40);
        for (std::size_t k = 0; k < c; ++k) {
            coast.points.push_back({lon0 + rng.uniform(-1, w + 1), lat0 + rng.uniform(-1, w + 1)});
        }
        const double max_edge = rng.uniform() < 0.5 ? 1500.0 : rng.uniform(100, 1500);
        for (std::size_t t = 0; t < months; ++t) {
            const auto mesh = filter_triangles(triangulate_slice(traj, t, coast), max_edge);
            const auto s = assemble_slice(mesh);
            const double area = meshed_area(mesh);
            const double mass = s.mass.matrix().sum();
            if (area > 0.0) {
                worst_mass = std::max(worst_mass, std::abs(mass - area) / area);
            }
            const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(s.stiffness.dimension()));
            const double maxd = s.stiffness.matrix().coeffs().cwiseAbs().maxCoeff();
            if (maxd > 0.0) {
                worst_kernel = std::max(worst_kernel, (s.stiffness.matrix() * ones).cwiseAbs().maxCoeff() / maxd);
            }
            ++slices;
        }
    }
    return {worst_mass <= 1e-8 && worst_kernel <= 1e-10,
            fmt("%zu slices: worst |mass-area|/area = %.1e, worst |D1|/max|D| = %.1e", slices, worst_mass,
                worst_kernel)};
}

Outcome ac4()
{
    Rng rng(404);
    const std::size_t floats = 400;
    const std::size_t months = 6;
    std::vector<std::string> ids;
    std::vector<std::optional<LonLat>> pos;
    for (std::size_t i = 0; i < floats; ++i) {
        ids.push_back("F" + std::to_string(i));
        LonLat p{rng.uniform(-20, -12), rng.uniform(10, 18)};
        for (std::size_t t = 0; t < months; ++t) {
            p = {std::clamp(p.lon + rng.uniform(-0.4, 0.4), -20.0, -12.0),
                 std::clamp(p.lat + rng.uniform(-0.4, 0.4), 10.0, 18.0)};
            pos.emplace_back(rng.uniform() < 0.85 ? std::optional<LonLat>(p) : std::nullopt);
        }
    }
    CoastlineSet coast;
    for (int k = 0; k < 32; ++k) {
        const double s = -20.0 + 8.0 * k / 32.0;
        const double u = 10.0 + 8.0 * k / 32.0;
        coast.points.push_back({s, 10.0});
        coast.points.push_back({-12.0, u});
        coast.points.push_back({-12.0 - (s + 20.0), 18.0});
        coast.points.push_back({-20.0, 28.0 - u});
    }
    auto moved_pos = pos;
    for (auto& p : moved_pos) {
        if (p) {
            p = LonLat{p->lon + 5.0, p->lat + 3.0};
        }
    }
    CoastlineSet moved_coast = coast;
    for (auto& p : moved_coast.points) {
        p = {p.lon + 5.0, p.lat + 3.0};
    }
    const auto a = solve_leading(averaged(TrajectoryArray(ids, {2011, 1}, months, pos), coast), {8});
    const auto b = solve_leading(averaged(TrajectoryArray(ids, {2011, 1}, months, moved_pos), moved_coast), {8});
    double worst = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
        worst = std::max(worst, std::abs(a.pairs[k].eigenvalue - b.pairs[k].eigenvalue) /
                                    std::abs(a.pairs[k].eigenvalue));
    }
    return {worst < 1e-6, fmt("8 eigenvalues, worst relative change %.1e", worst)};
}

Outcome ac5(double pipeline_residual)
{
    Rng rng(505);
    double worst_fixed = 0.0;
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 30 + static_cast<Eigen::Index>(rng.index(200));
        const Eigen::Index r = 1 + static_cast<Eigen::Index>(rng.index(5));
        std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), Eigen::Index{0});
        for (std::size_t i = perm.size(); i > 1; --i) {
            std::swap(perm[i - 1], perm[rng.index(i)]);
        }
        Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, r);
        std::size_t next = 0;
        for (Eigen::Index c = 0; c < r; ++c) {
            const auto m = static_cast<Eigen::Index>(1 + rng.index(static_cast<std::uint64_t>(n / r / 2)));
            for (Eigen::Index k = 0; k < m; ++k) {
                u(perm[next++], c) = (rng.uniform() < 0.5 ? -1.0 : 1.0) / std::sqrt(static_cast<double>(m));
            }
        }
        const auto b = seba_rotate(u);
        for (Eigen::Index c = 0; c < r; ++c) {
            Eigen::VectorXd expected = u.col(c) / u.col(c).cwiseAbs().maxCoeff();
            double best = INFINITY;
            for (Eigen::Index d = 0; d < r; ++d) {
                best = std::min({best, (b.columns.col(d) - expected).cwiseAbs().maxCoeff(),
                                 (b.columns.col(d) + expected).cwiseAbs().maxCoeff()});
            }
            worst_fixed = std::max(worst_fixed, best);
        }
    }

    // Near-sparse synthetic bases: plateaus with small noise, mixed by random rotations.
    double worst_span = 0.0;
    int converged = 0;
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::Index n = 300 + static_cast<Eigen::Index>(rng.index(300));
        const Eigen::Index r = 2 + static_cast<Eigen::Index>(rng.index(4));
        Eigen::MatrixXd u(n, r);
        for (Eigen::Index c = 0; c < r; ++c) {
            const double center = (c + 0.5) * static_cast<double>(n) / static_cast<double>(r);
            const double half = rng.uniform(5, 25);
            for (Eigen::Index i = 0; i < n; ++i) {
                u(i, c) = 1.0 / (1.0 + std::exp(3.0 * (std::abs(i - center) - half))) + 1e-3 * rng.normal();
            }
        }
        Eigen::MatrixXd g(r, r);
        for (Eigen::Index i = 0; i < g.size(); ++i) {
            g.data()[i] = rng.normal();
        }
        const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
        const auto b = seba_rotate(u * q);
        if (b.converged) {
            ++converged;
            worst_span = std::max(worst_span, b.span_residual);
        }
    }
    return {worst_fixed <= 1e-8 && converged > 0 && worst_span <= 0.1,
            fmt("fixed point max dev %.1e; span residual max %.3f over %d converged synthetic bases "
                "(vortex pipeline run, for reference: %.3f)",
                worst_fixed, worst_span, converged, pipeline_residual)};
}

struct VortexEvaluation {
    Outcome outcome;
    double span_residual = NAN;
};

VortexEvaluation ac6()
{
    const fs::path dir = scratch("ac6");
    const RunConfig cfg = bundled_config("vortices.conf", dir);
    const auto t0 = Clock::now();
    run_pipeline(cfg);
    const double secs = seconds_since(t0);

    std::ifstream tin(dir / "trajectories.csv");
    const auto traj = read_trajectory_csv(tin, cfg.start_month, cfg.months);
    std::map<std::string, int> member;
    {
        std::ifstream min(dir / "synthetic_membership.csv");
        std::string line;
        std::getline(min, line);
        while (std::getline(min, line)) {
            const auto comma = line.find(',');
            member[line.substr(0, comma)] = std::stoi(line.substr(comma + 1));
        }
    }
    std::ifstream sin(dir / "seba.csv");
    const std::size_t dimension = traj.float_count() + slurp(dir / "coastline.csv").size();  // upper bound
    const Eigen::MatrixXd seba = read_seba(sin, dimension);
    std::size_t full = 0;
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        bool all = true;
        for (std::size_t t = 0; t < traj.month_count(); ++t) {
            all = all && traj.at(i, t).has_value();
        }
        full += all;
    }

    // Fraction of floats in `group` whose value in feature k passes `test`.
    auto fraction = [&](Eigen::Index k, int group, const std::function<bool(double)>& test) {
        std::size_t n = 0;
        std::size_t hit = 0;
        for (std::size_t i = 0; i < traj.float_count(); ++i) {
            if (member.at(traj.float_ids()[i]) != group) {
                continue;
            }
            ++n;
            hit += test(seba(static_cast<Eigen::Index>(i), k));
        }
        return n == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(n);
    };
    // Best assignment of the two disks to the two leading features.
    double best_score = -1.0;
    std::string best_detail;
    bool pass = false;
    for (const auto& disks : {std::array<int, 2>{1, 2}, std::array<int, 2>{2, 1}}) {
        bool ok = seba.cols() >= 2;
        double score = 1.0;
        std::string detail;
        for (Eigen::Index k = 0; k < 2 && k < seba.cols(); ++k) {
            const double in = fraction(k, disks[static_cast<std::size_t>(k)], [](double v) { return v >= 0.5; });
            const double out = fraction(k, 0, [](double v) { return v < 0.2; });
            ok = ok && in >= 0.9 && out >= 0.9;
            score = std::min({score, in, out});
            detail += fmt("feature %d/disk %d: inside>=0.5 %.3f, outside<0.2 %.3f; ", static_cast<int>(k + 1),
                          disks[static_cast<std::size_t>(k)], in, out);
        }
        if (score > best_score) {
            best_score = score;
            best_detail = detail;
            pass = ok;
        }
    }
    const double full_share = static_cast<double>(full) / static_cast<double>(traj.float_count());
    const auto seba_info = nlohmann::json::parse(slurp(dir / "seba.json"));
    VortexEvaluation ev;
    ev.span_residual = seba_info["span_residual"].get<double>();
    ev.outcome = {pass && secs < 60.0 && traj.float_count() == 2000 && traj.month_count() == 24,
                  best_detail + fmt("%zu floats, %.1f%% full-length, %.2f s", traj.float_count(),
                                    100.0 * full_share, secs)};
    return ev;
}

// Cone of height 1 vanishing at `radius_km` (equatorial flat metric), sampled at scattered floats,
// meshed and interpolated onto the 1-degree grid.
GriddedField cone_field(LonLat center, double radius_km, std::size_t month, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<LonLat> pts;
    std::vector<std::size_t> g;
    std::vector<double> coeffs;
    for (std::size_t i = 0; i < 5000; ++i) {
        const LonLat p{center.lon + rng.uniform(-14, 14), center.lat + rng.uniform(-14, 14)};
        pts.push_back(p);
        g.push_back(i);
        const double d = std::hypot(p.lon - center.lon, p.lat - center.lat) * kKmPerDegree;
        coeffs.push_back(std::max(0.0, 1.0 - d / radius_km));
    }
    const TriMesh mesh(pts, g, delaunay_triangulate(pts), pts.size(), pts.size());
    return grid_interpolate(coeffs, mesh, 1.0, month);
}

Outcome ac7()
{
    std::vector<GriddedField> still;
    std::vector<GriddedField> moving;
    for (std::size_t t = 0; t < 6; ++t) {
        still.push_back(cone_field({0.37, 0.21}, 1000.0, t, 70 + t));
        moving.push_back(cone_field({-5.0 + 1.73 * t, -1.5 + 0.61 * t}, 1000.0, t, 80 + t));
    }
    const double hs = cheeger_value(0.5, still);
    const double hm = cheeger_value(0.5, moving);
    const double es = std::abs(hs / 0.004 - 1);
    const double em = std::abs(hm / hs - 1);
    return {es <= 0.05 && em <= 0.05,
            fmt("static h = %.6f km^-1 (rel. err %.3f), translating h = %.6f (rel. diff %.3f)", hs, es, hm, em)};
}

Outcome ac8()
{
    // Flat-topped cone: {f >= c} is the disk of radius 10 (1 - c/2) degrees, on a 0.1-degree grid.
    std::vector<GriddedField> fields;
    for (std::size_t t = 0; t < 2; ++t) {
        const double cx = 0.03 + 0.5 * static_cast<double>(t);
        const double cy = 0.017;
        const std::size_t n = 221;
        std::vector<double> v(n * n);
        for (std::size_t j = 0; j < n; ++j) {
            for (std::size_t i = 0; i < n; ++i) {
                const double r = std::hypot(-11.0 + 0.1 * i - cx, -11.0 + 0.1 * j - cy) / 10.0;
                v[j * n + i] = std::min(1.0, 2.0 * std::max(0.0, 1.0 - r));
            }
        }
        fields.emplace_back(LonLat{-11.0, -11.0}, 0.1, n, n, std::move(v), t);
    }
    const auto curve = optimize_threshold(0, fields, 0.01, 4);

    // Brute force straight from contours and node areas.
    std::vector<double> brute;
    for (int j = 1; j < 100; ++j) {
        const double c = j / 100.0;
        double sum = 0.0;
        for (const auto& f : fields) {
            sum += boundary_length_km(extract_contours(f, c)) / superlevel_area_km2(f, c);
        }
        brute.push_back(sum / static_cast<double>(fields.size()));
    }
    std::size_t argmin = 0;
    bool monotone = true;
    bool exact = curve.values.size() == brute.size();
    for (std::size_t j = 0; j < brute.size(); ++j) {
        if (brute[j] < brute[argmin]) {
            argmin = j;
        }
        monotone = monotone && (j == 0 || brute[j] > brute[j - 1]);
        exact = exact && curve.values[j] == brute[j] && curve.thresholds[j] == (j + 1) / 100.0;
    }
    return {monotone && exact && curve.c_min == 0.01 && (argmin + 1) / 100.0 == 0.01,
            fmt("99 thresholds, strictly increasing: %s, matches brute force exactly: %s, c_min = %.2f",
                monotone ? "yes" : "no", exact ? "yes" : "no", curve.c_min)};
}

Outcome ac9()
{
    const fs::path a = scratch("ac9a");
    const fs::path b = scratch("ac9b");
    const RunConfig ca = bundled_config("vortices.conf", a);
    const RunConfig cb = bundled_config("vortices.conf", b);
    run_pipeline(ca);
    run_pipeline(cb);
    std::size_t compared = 0;
    std::size_t differing = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a)) {
        const auto ext = entry.path().extension();
        if (ext != ".csv" && ext != ".geojson" && ext != ".txt") {
            continue;
        }
        const auto rel = fs::relative(entry.path(), a);
        ++compared;
        if (!fs::exists(b / rel) || slurp(entry.path()) != slurp(b / rel)) {
            ++differing;
        }
    }
    // Every feature file carries T months, all at the feature's single threshold.
    std::size_t features = 0;
    bool per_month = true;
    for (const auto& entry : fs::directory_iterator(a)) {
        if (entry.path().extension() != ".geojson") {
            continue;
        }
        ++features;
        const auto doc = nlohmann::json::parse(slurp(entry.path()));
        const auto& list = doc["features"];
        per_month = per_month && list.size() == ca.months;
        for (std::size_t t = 0; t < list.size(); ++t) {
            per_month = per_month && list[t]["properties"]["t"] == t + 1 &&
                        list[t]["properties"]["c"] == list[0]["properties"]["c"] &&
                        !list[t]["geometry"]["coordinates"].empty();
        }
    }
    return {compared > 0 && differing == 0 && features > 0 && per_month,
            fmt("%zu artifacts compared, %zu differ; %zu feature files with %zu months each: %s", compared,
                differing, features, ca.months, per_month ? "yes" : "no")};
}

Outcome ac10()
{
    const fs::path dir = scratch("ac10");
    // Random-walk floats surfacing every 10 days over six years, and a coastline loop.
    Rng rng(1010);
    {
        std::ofstream out(dir / "floats.csv");
        out << "float_id,timestamp,lon,lat\n";
        for (int f = 0; f < 150; ++f) {
            LonLat p{rng.uniform(-40, -10), rng.uniform(-30, 0)};
            const auto start = std::chrono::sys_days{std::chrono::year{2011} / 1 / 1} +
                               std::chrono::days{static_cast<int>(rng.index(400))};
            for (int k = 0; k < 220; ++k) {
                const auto day = start + std::chrono::days{10 * k};
                if (day >= std::chrono::sys_days{std::chrono::year{2017} / 1 / 1}) {
                    break;
                }
                p = {std::clamp(p.lon + rng.uniform(-0.3, 0.3), -40.0, -10.0),
                     std::clamp(p.lat + rng.uniform(-0.3, 0.3), -30.0, 0.0)};
                out << 'A' << f << ',' << format_timestamp(std::chrono::sys_seconds{day}) << ','
                    << csv::format_double(p.lon) << ',' << csv::format_double(p.lat) << '\n';
            }
        }
        std::ofstream coast(dir / "coast.csv");
        coast << "lon,lat\n";
        for (int k = 0; k < 400; ++k) {
            const double a = 2 * std::numbers::pi * k / 400;
            coast << csv::format_double(-25 + 19 * std::cos(a)) << ',' << csv::format_double(-15 + 19 * std::sin(a))
                  << '\n';
        }
    }
    const RunConfig cfg = build_config({{{"input_floats", (dir / "floats.csv").string()},
                                         {"input_coastline", (dir / "coast.csv").string()},
                                         {"output_dir", (dir / "out").string()}}});
    run_pipeline(cfg);
    const auto m = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
    const auto& c = m["config"];
    const bool constants = c["day_first"] == "1" && c["day_last"] == "12" && c["coastline_stride"] == "5" &&
                           c["eig_count"] == "8" && c["grid_spacing"] == "1" && c["c_step"] == "0.01" &&
                           c["months"] == "72";
    // The constants were also the ones in effect.
    std::size_t mesh_months = 0;
    std::size_t eigenpairs = 0;
    std::size_t thresholds = 0;
    for (const auto& s : m["stages"]) {
        if (s["name"] == "mesh") {
            mesh_months = s["info"]["months"].size();
        }
        if (s["name"] == "solve") {
            eigenpairs = s["info"]["eigenvalues"].size();
        }
    }
    {
        std::istringstream curves(slurp(dir / "out" / "cheeger_curves.csv"));
        std::string line;
        std::getline(curves, line);
        while (std::getline(curves, line)) {
            thresholds += line.rfind("1,", 0) == 0;
        }
    }
    const bool applied = mesh_months == 72 && eigenpairs == 8 && thresholds == 99 && m["status"] == "ok";
    return {constants && applied,
            fmt("manifest: days %s..%s, stride %s, k %s, grid %s deg, c step %s, T %s; meshed months %zu, "
                "eigenpairs %zu, thresholds %zu",
                c["day_first"].get<std::string>().c_str(), c["day_last"].get<std::string>().c_str(),
                c["coastline_stride"].get<std::string>().c_str(), c["eig_count"].get<std::string>().c_str(),
                c["grid_spacing"].get<std::string>().c_str(), c["c_step"].get<std::string>().c_str(),
                c["months"].get<std::string>().c_str(), mesh_months, eigenpairs, thresholds)};
}

} // namespace

int main()
{
    spdlog::set_level(spdlog::level::err);
    int failures = 0;
    auto report = [&](int n, const char* title, const std::function<Outcome()>& check) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        std::printf("AC%-2d %s  %s: %s\n", n, o.pass ? "PASS" : "FAIL", title, o.detail.c_str());
        std::fflush(stdout);
        failures += !o.pass;
    };
    VortexEvaluation vortex;
    try {
        vortex = ac6();
    } catch (const std::exception& e) {
        vortex.outcome = {false, std::string("threw: ") + e.what()};
    }
    report(1, "element oracle", ac1);
    report(2, "static-limit spectrum", ac2);
    report(3, "conservation and kernel", ac3);
    report(4, "rigid-motion invariance", ac4);
    report(5, "SEBA fixed point and span", [&] { return ac5(vortex.span_residual); });
    report(6, "coherent-set recovery", [&] { return vortex.outcome; });
    report(7, "Cheeger geometry", ac7);
    report(8, "threshold search contract", ac8);
    report(9, "end-to-end determinism", ac9);
    report(10, "default constants", ac10);
    fs::remove_all(fs::temp_directory_path() / ("dynlap_acceptance_" + std::to_string(getpid())));
    std::printf("%d of 10 criteria passed\n", 10 - failures);
    return failures == 0 ? 0 : 1;
}
