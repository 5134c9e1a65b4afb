#include <dynlap/pipeline.hpp>

#include <dynlap/coherent_sets.hpp>
#include <dynlap/csv.hpp>
#include <dynlap/diagnostics.hpp>
#include <dynlap/eigensolver.hpp>
#include <dynlap/error.hpp>
#include <dynlap/fem.hpp>
#include <dynlap/mesh.hpp>
#include <dynlap/seba.hpp>
#include <dynlap/synthetic.hpp>
#include <dynlap/trajectory.hpp>

#include <Eigen/Core>
#include <spdlog/spdlog.h>
#include <spdlog/version.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

namespace dynlap {

namespace fs = std::filesystem;

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream)
{
    // splitmix64 finalizer
    std::uint64_t z = seed + stream * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

fs::path artifact(const RunConfig& cfg, const std::string& name)
{
    return fs::path(cfg.output_dir) / name;
}

std::string month_file(std::size_t t, const char* suffix)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "mesh/month_%03zu_%s.csv", t + 1, suffix);
    return buf;
}

std::ifstream open_input(const fs::path& path, const char* producer)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        if (producer != nullptr) {
            fail_io("missing artifact " + path.string() + " (produced by the '" + producer + "' stage)");
        }
        fail_io("cannot open input file " + path.string());
    }
    return in;
}

std::ofstream open_output(const fs::path& path)
{
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        fail_io("cannot write " + path.string());
    }
    return out;
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& fn)
{
    auto out = open_output(path);
    fn(out);
    out.flush();
    if (!out) {
        fail_io("error while writing " + path.string());
    }
}

void write_json(const fs::path& path, const nlohmann::ordered_json& j)
{
    write_file(path, [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers; the lowest-index failure is rethrown.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn)
{
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    std::size_t failed_at = n;
    std::exception_ptr failure;
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(mu);
                if (i < failed_at) {
                    failed_at = i;
                    failure = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < std::min(threads, n); ++w) {
        pool.emplace_back(work);
    }
    work();
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

struct Inputs {
    TrajectoryArray traj;
    CoastlineSet coast;
    std::size_t dimension() const { return traj.float_count() + coast.points.size(); }
};

Inputs load_inputs(const RunConfig& cfg)
{
    auto tin = open_input(artifact(cfg, "trajectories.csv"), "ingest");
    auto cin = open_input(artifact(cfg, "coastline.csv"), "ingest");
    TrajectoryArray traj = read_trajectory_csv(tin, cfg.start_month, cfg.months);
    CoastlineSet coast = load_coastline(cin, 1);
    return {std::move(traj), std::move(coast)};
}

TriMesh load_mesh(const RunConfig& cfg, const Inputs& in, std::size_t t)
{
    auto vin = open_input(artifact(cfg, month_file(t, "vertices")), "mesh");
    auto tin = open_input(artifact(cfg, month_file(t, "triangles")), "mesh");
    return read_mesh(vin, tin, in.traj.float_count(), in.dimension());
}

std::vector<std::size_t> read_free_indices(const RunConfig& cfg, std::size_t dimension)
{
    auto in = open_input(artifact(cfg, "free_indices.csv"), "assemble");
    std::vector<std::size_t> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 || csv::trim(line).empty()) {
            continue;
        }
        const auto g = csv::parse_int(line);
        if (!g || *g < 1 || *g > static_cast<std::int64_t>(dimension)) {
            fail_validation("malformed free index, line " + std::to_string(line_no));
        }
        out.push_back(static_cast<std::size_t>(*g - 1));
    }
    return out;
}

std::optional<double> identity_expected_lambda(const RunConfig& cfg)
{
    if (cfg.synthetic != SyntheticKind::Identity) {
        return std::nullopt;
    }
    const double w = cfg.synth.lon_max - cfg.synth.lon_min;
    const double h = cfg.synth.lat_max - cfg.synth.lat_min;
    return -std::numbers::pi * std::numbers::pi * (1.0 / (w * w) + 1.0 / (h * h));
}

nlohmann::ordered_json stage_synth(const RunConfig& cfg)
{
    if (cfg.synthetic == SyntheticKind::None) {
        fail_validation("the synth stage needs synthetic = identity or vortices");
    }
    FlowSpec spec = cfg.synth;
    spec.seed = derive_seed(cfg.seed, 1);
    std::vector<int> membership;
    TrajectoryArray traj = cfg.synthetic == SyntheticKind::Identity ? gen_identity(spec)
                                                                     : gen_moving_vortices(spec, &membership);
    if (membership.empty()) {
        membership.assign(traj.float_count(), -1);
    }
    if (cfg.synth_dropout) {
        const std::vector<std::string> ids_before = traj.float_ids();
        traj = apply_dropout(traj, argo_like_lifetimes(cfg.months, cfg.synth_full_fraction), derive_seed(cfg.seed, 2));
        std::vector<int> kept;
        std::size_t k = 0;
        for (std::size_t i = 0; i < ids_before.size() && k < traj.float_count(); ++i) {
            if (ids_before[i] == traj.float_ids()[k]) {
                kept.push_back(membership[i]);
                ++k;
            }
        }
        membership = std::move(kept);
    }
    const CoastlineSet ring = boundary_ring(spec);
    write_file(artifact(cfg, "synthetic_floats.csv"),
               [&](std::ostream& out) { write_float_records(out, to_float_records(traj, cfg.day_first)); });
    write_file(artifact(cfg, "synthetic_coastline.csv"), [&](std::ostream& out) { write_coastline_csv(out, ring); });
    write_file(artifact(cfg, "synthetic_membership.csv"), [&](std::ostream& out) {
        out << "float_id,vortex\n";
        for (std::size_t i = 0; i < traj.float_count(); ++i) {
            out << traj.float_ids()[i] << ',' << (membership[i] + 1) << '\n';
        }
    });
    std::size_t full = 0;
    for (const std::size_t life : lifetimes(traj)) {
        full += life == cfg.months;
    }
    return {{"floats", traj.float_count()},
            {"coastline_points", ring.points.size()},
            {"full_lifetime_floats", full}};
}

nlohmann::ordered_json stage_ingest(const RunConfig& cfg)
{
    const bool synth = cfg.synthetic != SyntheticKind::None;
    const fs::path floats_path =
        !cfg.input_floats.empty() ? fs::path(cfg.input_floats) : artifact(cfg, "synthetic_floats.csv");
    const fs::path coast_path =
        !cfg.input_coastline.empty() ? fs::path(cfg.input_coastline) : artifact(cfg, "synthetic_coastline.csv");
    const char* producer = synth && cfg.input_floats.empty() ? "synth" : nullptr;
    auto fin = open_input(floats_path, producer);
    const auto records = parse_float_records(fin);
    auto binned = bin_monthly(records, cfg.start_month, cfg.months, {cfg.day_first, cfg.day_last});
    auto cin = open_input(coast_path, synth && cfg.input_coastline.empty() ? "synth" : nullptr);
    const CoastlineSet coast = load_coastline(cin, cfg.coastline_stride);
    write_file(artifact(cfg, "trajectories.csv"),
               [&](std::ostream& out) { write_trajectory_csv(out, binned.trajectories); });
    write_file(artifact(cfg, "coastline.csv"), [&](std::ostream& out) { write_coastline_csv(out, coast); });
    return {{"records", records.size()},
            {"floats", binned.trajectories.float_count()},
            {"dropped_floats", binned.dropped_floats},
            {"coastline_points", coast.points.size()},
            {"dimension", binned.trajectories.float_count() + coast.points.size()}};
}

nlohmann::ordered_json stage_mesh(const RunConfig& cfg, const StageOptions& options)
{
    const Inputs in = load_inputs(cfg);
    std::vector<std::size_t> months;
    if (options.mesh_month) {
        if (*options.mesh_month < 1 || *options.mesh_month > cfg.months) {
            fail_validation("mesh month must lie in 1.." + std::to_string(cfg.months));
        }
        months.push_back(*options.mesh_month - 1);
    } else {
        for (std::size_t t = 0; t < cfg.months; ++t) {
            months.push_back(t);
        }
    }
    std::vector<std::size_t> vertices(months.size());
    std::vector<std::size_t> triangles(months.size());
    parallel_for(months.size(), resolved_threads(cfg), [&](std::size_t k) {
        const std::size_t t = months[k];
        TriMesh mesh = [&] {
            try {
                return filter_triangles(triangulate_slice(in.traj, t, in.coast), cfg.max_edge_km);
            } catch (const Error& e) {
                throw Error(e.kind(), "month " + std::to_string(t + 1) + ": " + e.what());
            }
        }();
        write_file(artifact(cfg, month_file(t, "vertices")), [&](std::ostream& out) { write_mesh_vertices(out, mesh); });
        write_file(artifact(cfg, month_file(t, "triangles")),
                   [&](std::ostream& out) { write_mesh_triangles(out, mesh); });
        vertices[k] = mesh.vertices().size();
        triangles[k] = mesh.triangles().size();
    });
    nlohmann::ordered_json per_month = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < months.size(); ++k) {
        per_month.push_back({{"t", months[k] + 1}, {"vertices", vertices[k]}, {"triangles", triangles[k]}});
    }
    return {{"months", per_month}};
}

nlohmann::ordered_json stage_assemble(const RunConfig& cfg)
{
    const Inputs in = load_inputs(cfg);
    std::vector<SliceMatrices> slices(cfg.months);
    parallel_for(cfg.months, resolved_threads(cfg),
                 [&](std::size_t t) { slices[t] = assemble_slice(load_mesh(cfg, in, t)); });
    const std::size_t floats = in.traj.float_count();
    const TimeAveragedSystem sys = average_system(slices, {floats, in.dimension()}, cfg.drop_tol);
    write_file(artifact(cfg, "stiffness.txt"), [&](std::ostream& out) { write_matrix(out, sys.stiffness); });
    write_file(artifact(cfg, "mass.txt"), [&](std::ostream& out) { write_matrix(out, sys.mass); });
    write_file(artifact(cfg, "free_indices.csv"), [&](std::ostream& out) {
        out << "global_index\n";
        for (const std::size_t g : sys.free_indices) {
            out << (g + 1) << '\n';
        }
    });
    return {{"dimension", in.dimension()},
            {"floats", floats},
            {"coastline_points", in.coast.points.size()},
            {"free_indices", sys.free_indices.size()},
            {"slices", sys.slice_count}};
}

nlohmann::ordered_json stage_solve(const RunConfig& cfg)
{
    const Inputs in = load_inputs(cfg);
    const std::size_t dim = in.dimension();
    TimeAveragedSystem sys;
    {
        auto din = open_input(artifact(cfg, "stiffness.txt"), "assemble");
        auto min = open_input(artifact(cfg, "mass.txt"), "assemble");
        sys.stiffness = read_matrix(din, dim);
        sys.mass = read_matrix(min, dim);
    }
    sys.free_indices = read_free_indices(cfg, dim);
    sys.slice_count = cfg.months;
    const EigenSolution sol = solve_leading(sys, {cfg.eig_count, cfg.eig_tol, cfg.eig_max_iter});
    write_file(artifact(cfg, "eigenvalues.csv"), [&](std::ostream& out) { write_eigenvalues(out, sol.pairs); });
    write_file(artifact(cfg, "eigenvectors.csv"), [&](std::ostream& out) { write_eigenvectors(out, sol.pairs); });
    nlohmann::ordered_json values = nlohmann::ordered_json::array();
    nlohmann::ordered_json residuals = nlohmann::ordered_json::array();
    for (const auto& p : sol.pairs) {
        values.push_back(p.eigenvalue);
        residuals.push_back(p.residual);
    }
    nlohmann::ordered_json info = {{"iterations", sol.iterations},
                                   {"converged", true},
                                   {"eigenvalues", values},
                                   {"residuals", residuals}};
    if (const auto expected = identity_expected_lambda(cfg)) {
        const double rel = std::abs(sol.pairs.front().eigenvalue - *expected) / std::abs(*expected);
        info["self_test"] = {{"lambda_1", sol.pairs.front().eigenvalue},
                             {"expected", *expected},
                             {"relative_error", rel},
                             {"passed", rel <= 0.02}};
    }
    return info;
}

nlohmann::ordered_json stage_seba(const RunConfig& cfg)
{
    const Inputs in = load_inputs(cfg);
    const std::size_t dim = in.dimension();
    auto vin = open_input(artifact(cfg, "eigenvalues.csv"), "solve");
    auto ein = open_input(artifact(cfg, "eigenvectors.csv"), "solve");
    const auto pairs = read_eigenpairs(vin, ein, dim);
    const auto free = read_free_indices(cfg, dim);
    if (pairs.empty()) {
        fail_validation("eigenvalues.csv holds no eigenpairs");
    }
    Eigen::MatrixXd u(static_cast<Eigen::Index>(free.size()), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        for (std::size_t r = 0; r < free.size(); ++r) {
            u(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) =
                pairs[k].coefficients[static_cast<Eigen::Index>(free[r])];
        }
    }
    SebaOptions opt;
    opt.mu = cfg.seba_mu;
    opt.tol = cfg.seba_tol;
    opt.max_iter = cfg.seba_max_iter;
    opt.restarts = cfg.seba_restarts;
    opt.seed = derive_seed(cfg.seed, 3);
    const SebaBasis basis = seba_rotate(u, opt);
    if (!basis.converged) {
        spdlog::warn("SEBA stopped after {} iterations without converging (change {})", basis.iterations,
                     basis.rotation_change);
    }
    const Eigen::MatrixXd full = embed_rows(basis.columns, free, dim);
    write_file(artifact(cfg, "seba.csv"), [&](std::ostream& out) { write_seba(out, full); });
    const Eigen::VectorXd smax = full.rowwise().maxCoeff();
    write_file(artifact(cfg, "seba_max.csv"), [&](std::ostream& out) {
        out << "global_index,value\n";
        for (Eigen::Index i = 0; i < smax.size(); ++i) {
            if (std::abs(smax[i]) > 1e-12) {
                out << (i + 1) << ',' << csv::format_double(smax[i]) << '\n';
            }
        }
    });
    nlohmann::ordered_json support = nlohmann::ordered_json::array();
    nlohmann::ordered_json minimum = nlohmann::ordered_json::array();
    nlohmann::ordered_json flagged = nlohmann::ordered_json::array();
    for (std::size_t k = 0; k < basis.support_fraction.size(); ++k) {
        support.push_back(basis.support_fraction[k]);
        minimum.push_back(basis.min_entry[k]);
        if (basis.min_entry[k] < -0.2) {
            flagged.push_back(k + 1);
        }
    }
    return {{"mu", basis.mu},
            {"iterations", basis.iterations},
            {"rotation_change", basis.rotation_change},
            {"converged", basis.converged},
            {"span_residual", basis.span_residual},
            {"support_fraction", support},
            {"min_entry", minimum},
            {"negative_columns", flagged}};
}

nlohmann::ordered_json stage_sets(const RunConfig& cfg)
{
    const Inputs in = load_inputs(cfg);
    const std::size_t dim = in.dimension();
    auto sin = open_input(artifact(cfg, "seba.csv"), "seba");
    const Eigen::MatrixXd seba = read_seba(sin, dim);
    std::vector<TriMesh> meshes;
    for (std::size_t t = 0; t < cfg.months; ++t) {
        meshes.push_back(load_mesh(cfg, in, t));
    }
    const std::size_t threads = resolved_threads(cfg);
    std::vector<CheegerCurve> curves;
    nlohmann::ordered_json features = nlohmann::ordered_json::array();
    std::ostringstream summary;
    summary << "k,c_min,h_min,local_minima\n";
    for (Eigen::Index k = 0; k < seba.cols(); ++k) {
        const std::vector<double> coeffs(seba.col(k).data(), seba.col(k).data() + seba.rows());
        std::vector<GriddedField> fields;
        for (std::size_t t = 0; t < meshes.size(); ++t) {
            fields.push_back(grid_interpolate(coeffs, meshes[t], cfg.grid_spacing, t));
        }
        const auto feature = static_cast<std::size_t>(k);
        CheegerCurve curve;
        try {
            curve = optimize_threshold(feature, fields, cfg.c_step, threads);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Numerical) {
                throw;
            }
            spdlog::warn("{}; feature skipped", e.what());
            features.push_back({{"k", feature + 1}, {"status", "undefined"}});
            continue;
        }
        const LevelSetFamily family = evolve_boundaries(feature, curve.c_min, fields);
        char name[64];
        std::snprintf(name, sizeof(name), "feature_%02zu.geojson", feature + 1);
        write_file(artifact(cfg, name), [&](std::ostream& out) { write_family_geojson(out, family); });
        const double h_min = *family_cheeger(family);
        std::string minima;
        for (const double c : curve.local_minima) {
            minima += (minima.empty() ? "" : ";") + csv::format_double(c);
        }
        summary << (feature + 1) << ',' << csv::format_double(curve.c_min) << ',' << csv::format_double(h_min) << ','
                << minima << '\n';
        features.push_back({{"k", feature + 1},
                            {"status", "ok"},
                            {"c_min", curve.c_min},
                            {"h_min", h_min},
                            {"local_minima", curve.local_minima},
                            {"file", name}});
        curves.push_back(std::move(curve));
    }
    write_file(artifact(cfg, "cheeger_curves.csv"), [&](std::ostream& out) { write_cheeger_csv(out, curves); });
    write_file(artifact(cfg, "sets_summary.csv"), [&](std::ostream& out) { out << summary.str(); });
    return {{"features", features}};
}

nlohmann::ordered_json stage_diag(const RunConfig& cfg)
{
    const Inputs in = load_inputs(cfg);
    const FleetStats stats = fleet_stats(in.traj);
    const auto bins = lifetime_histogram(in.traj, cfg.lifetime_bin_width);
    const std::size_t t = cfg.display_month - 1;
    auto mesh = std::make_shared<const TriMesh>(load_mesh(cfg, in, t));
    const HatBasisField field = rms_speed_field(in.traj, mesh);
    write_file(artifact(cfg, "active_counts.csv"), [&](std::ostream& out) { write_active_counts(out, stats.active); });
    write_file(artifact(cfg, "lifetime_histogram.csv"),
               [&](std::ostream& out) { write_lifetime_histogram(out, bins); });
    write_file(artifact(cfg, "rms_speed.csv"), [&](std::ostream& out) { write_rms_speeds(out, in.traj, stats.rms); });
    write_file(artifact(cfg, "rms_field.csv"), [&](std::ostream& out) { write_rms_field(out, field); });
    std::size_t full = 0;
    std::size_t with_speed = 0;
    for (std::size_t i = 0; i < in.traj.float_count(); ++i) {
        full += stats.lifetime[i] == cfg.months;
        with_speed += stats.rms[i].has_value();
    }
    return {{"floats", in.traj.float_count()},
            {"full_lifetime_fraction", static_cast<double>(full) / static_cast<double>(in.traj.float_count())},
            {"floats_with_speed", with_speed},
            {"display_month", cfg.display_month}};
}

} // namespace

const char* stage_name(Stage stage)
{
    switch (stage) {
    case Stage::Synth:
        return "synth";
    case Stage::Ingest:
        return "ingest";
    case Stage::Mesh:
        return "mesh";
    case Stage::Assemble:
        return "assemble";
    case Stage::Solve:
        return "solve";
    case Stage::Seba:
        return "seba";
    case Stage::Sets:
        return "sets";
    case Stage::Diag:
        return "diag";
    }
    return "?";
}

StageReport run_stage(Stage stage, const RunConfig& cfg, const StageOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    StageReport report;
    report.name = stage_name(stage);
    spdlog::info("stage {}", report.name);
    switch (stage) {
    case Stage::Synth:
        report.info = stage_synth(cfg);
        break;
    case Stage::Ingest:
        report.info = stage_ingest(cfg);
        break;
    case Stage::Mesh:
        report.info = stage_mesh(cfg, options);
        break;
    case Stage::Assemble:
        report.info = stage_assemble(cfg);
        break;
    case Stage::Solve:
        report.info = stage_solve(cfg);
        break;
    case Stage::Seba:
        report.info = stage_seba(cfg);
        break;
    case Stage::Sets:
        report.info = stage_sets(cfg);
        break;
    case Stage::Diag:
        report.info = stage_diag(cfg);
        break;
    }
    if (!(stage == Stage::Mesh && options.mesh_month)) {
        write_json(artifact(cfg, report.name + ".json"), report.info);
    }
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

nlohmann::ordered_json make_manifest(const RunConfig& cfg, const std::vector<StageReport>& stages,
                                     const std::string& status)
{
    nlohmann::ordered_json m;
    m["tool"] = "dynlap";
    m["status"] = status;
    nlohmann::ordered_json config;
    for (const auto& [k, v] : config_echo(cfg)) {
        config[k] = v;
    }
    m["config"] = config;
    m["versions"] = {{"dynlap", kVersion},
                     {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                                    std::to_string(SPDLOG_VER_PATCH)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    nlohmann::ordered_json convergence = nlohmann::ordered_json::object();
    for (const auto& s : stages) {
        list.push_back({{"name", s.name}, {"seconds", s.seconds}, {"info", s.info}});
        if (s.name == "solve") {
            convergence["eigensolver"] = s.info.value("converged", false);
            if (s.info.contains("self_test")) {
                m["self_test"] = s.info["self_test"];
            }
        }
        if (s.name == "seba") {
            convergence["seba"] = s.info.value("converged", false);
        }
    }
    m["stages"] = list;
    m["convergence"] = convergence;
    return m;
}

nlohmann::ordered_json run_pipeline(const RunConfig& cfg)
{
    validate_config(cfg);
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) {
        fail_io("cannot create output directory " + cfg.output_dir);
    }
    fs::remove(artifact(cfg, "FAILED"), ec);
    if (cfg.synthetic == SyntheticKind::None) {
        for (const auto& p : {cfg.input_floats, cfg.input_coastline}) {
            if (!fs::exists(p)) {
                const std::string message = "input file " + p + " does not exist";
                write_file(artifact(cfg, "FAILED"), [&](std::ostream& out) { out << message << '\n'; });
                fail_io(message);
            }
        }
    }
    std::vector<Stage> order;
    if (cfg.synthetic != SyntheticKind::None) {
        order.push_back(Stage::Synth);
    }
    for (const Stage s : {Stage::Ingest, Stage::Mesh, Stage::Assemble, Stage::Solve, Stage::Seba, Stage::Sets,
                          Stage::Diag}) {
        order.push_back(s);
    }
    std::vector<StageReport> reports;
    for (const Stage s : order) {
        try {
            reports.push_back(run_stage(s, cfg));
        } catch (const Error& e) {
            const std::string message = std::string("stage ") + stage_name(s) + ": " + e.what();
            write_file(artifact(cfg, "FAILED"), [&](std::ostream& out) { out << message << '\n'; });
            auto manifest = make_manifest(cfg, reports, "failed");
            manifest["failed_stage"] = stage_name(s);
            manifest["error"] = e.what();
            write_json(artifact(cfg, "manifest.json"), manifest);
            throw Error(e.kind(), message);
        }
    }
    auto manifest = make_manifest(cfg, reports, "ok");
    write_json(artifact(cfg, "manifest.json"), manifest);
    return manifest;
}

} // namespace dynlap
