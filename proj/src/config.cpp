#include <dynlap/config.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <istream>
#include <thread>

namespace dynlap {

namespace {

std::string key_error(const std::string& key, std::string_view value, const char* expected)
{
    return "config key '" + key + "': expected " + expected + ", got '" + std::string(value) + "'";
}

double to_double(const std::string& key, std::string_view v)
{
    const auto d = csv::parse_double(v);
    if (!d || !std::isfinite(*d)) {
        fail_validation(key_error(key, v, "a number"));
    }
    return *d;
}

std::int64_t to_int(const std::string& key, std::string_view v)
{
    const auto i = csv::parse_int(v);
    if (!i) {
        fail_validation(key_error(key, v, "an integer"));
    }
    return *i;
}

std::size_t to_count(const std::string& key, std::string_view v)
{
    const auto i = to_int(key, v);
    if (i < 0) {
        fail_validation(key_error(key, v, "a nonnegative integer"));
    }
    return static_cast<std::size_t>(i);
}

std::optional<double> to_auto_double(const std::string& key, std::string_view v)
{
    if (csv::trim(v) == "auto") {
        return std::nullopt;
    }
    return to_double(key, v);
}

std::string auto_text(const std::optional<double>& v)
{
    return v ? csv::format_double(*v) : "auto";
}

std::vector<Vortex> parse_vortices(const std::string& key, std::string_view text)
{
    std::vector<Vortex> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(';', start), text.size());
        const auto item = csv::trim(text.substr(start, end - start));
        start = end + 1;
        if (item.empty()) {
            continue;
        }
        const auto f = csv::split(item);
        if (f.size() != 6) {
            fail_validation(key_error(key, item, "lon,lat,drift_lon,drift_lat,radius,omega"));
        }
        Vortex v;
        v.center = {to_double(key, f[0]), to_double(key, f[1])};
        v.drift = {to_double(key, f[2]), to_double(key, f[3])};
        v.radius = to_double(key, f[4]);
        v.omega = to_double(key, f[5]);
        out.push_back(v);
    }
    return out;
}

std::string vortices_text(const std::vector<Vortex>& vs)
{
    std::string out;
    for (const auto& v : vs) {
        if (!out.empty()) {
            out += "; ";
        }
        out += csv::format_double(v.center.lon) + "," + csv::format_double(v.center.lat) + "," +
               csv::format_double(v.drift.lon) + "," + csv::format_double(v.drift.lat) + "," +
               csv::format_double(v.radius) + "," + csv::format_double(v.omega);
    }
    return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, std::string_view)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct KeyHandler {
    ConfigKey doc;
    Setter set;
    Getter get;
};

const std::vector<KeyHandler>& handlers()
{
    static const std::vector<KeyHandler> table = {
        {{"input_floats", "", "surfacing records CSV (float_id,timestamp,lon,lat)"},
         [](RunConfig& c, const std::string&, std::string_view v) { c.input_floats = std::string(v); },
         [](const RunConfig& c) { return c.input_floats; }},
        {{"input_coastline", "", "coastline points CSV (lon,lat)"},
         [](RunConfig& c, const std::string&, std::string_view v) { c.input_coastline = std::string(v); },
         [](const RunConfig& c) { return c.input_coastline; }},
        {{"output_dir", "out", "directory receiving every artifact"},
         [](RunConfig& c, const std::string&, std::string_view v) { c.output_dir = std::string(v); },
         [](const RunConfig& c) { return c.output_dir; }},
        {{"start_month", "2011-01", "first month of the window, YYYY-MM"},
         [](RunConfig& c, const std::string& k, std::string_view v) {
             try {
                 c.start_month = YearMonth::parse(v);
             } catch (const Error&) {
                 fail_validation(key_error(k, v, "YYYY-MM"));
             }
         },
         [](const RunConfig& c) { return c.start_month.to_string(); }},
        {{"months", "72", "number of monthly slices T"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.months = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.months); }},
        {{"day_first", "1", "first day of month accepted when binning"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.day_first = static_cast<int>(to_int(k, v)); },
         [](const RunConfig& c) { return std::to_string(c.day_first); }},
        {{"day_last", "12", "last day of month accepted when binning"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.day_last = static_cast<int>(to_int(k, v)); },
         [](const RunConfig& c) { return std::to_string(c.day_last); }},
        {{"coastline_stride", "5", "keep every n-th coastline point"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.coastline_stride = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.coastline_stride); }},
        {{"max_edge_km", "1500", "drop triangles with a longer great-circle edge"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.max_edge_km = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.max_edge_km); }},
        {{"eig_count", "8", "number of leading eigenpairs k"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.eig_count = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.eig_count); }},
        {{"eig_tol", "1e-08", "eigenpair residual tolerance"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.eig_tol = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.eig_tol); }},
        {{"eig_max_iter", "5000", "eigensolver iteration cap"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.eig_max_iter = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.eig_max_iter); }},
        {{"drop_tol", "auto", "mass-diagonal cutoff for free indices (auto: 1e-14 x mean)"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.drop_tol = to_auto_double(k, v); },
         [](const RunConfig& c) { return auto_text(c.drop_tol); }},
        {{"seba_mu", "auto", "SEBA soft-threshold penalty (auto: 0.99/sqrt(free indices))"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.seba_mu = to_auto_double(k, v); },
         [](const RunConfig& c) { return auto_text(c.seba_mu); }},
        {{"seba_tol", "1e-14", "SEBA rotation-change tolerance"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.seba_tol = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.seba_tol); }},
        {{"seba_max_iter", "5000", "SEBA iteration cap"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.seba_max_iter = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.seba_max_iter); }},
        {{"seba_restarts", "0", "extra SEBA runs from seeded random rotations"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.seba_restarts = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.seba_restarts); }},
        {{"grid_spacing", "1", "contouring grid spacing, degrees"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.grid_spacing = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.grid_spacing); }},
        {{"c_step", "0.01", "threshold grid step for the Cheeger search"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.c_step = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.c_step); }},
        {{"seed", "0", "seed for every random choice (synthetic seeding, dropout, SEBA restarts)"},
         [](RunConfig& c, const std::string& k, std::string_view v) {
             c.seed = static_cast<std::uint64_t>(to_count(k, v));
         },
         [](const RunConfig& c) { return std::to_string(c.seed); }},
        {{"threads", "0", "worker threads (0 = hardware concurrency)"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.threads = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.threads); }},
        {{"display_month", "36", "month (one-based) whose mesh carries the RMS speed field"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.display_month = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.display_month); }},
        {{"lifetime_bin_width", "6", "lifetime histogram bin width, months"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.lifetime_bin_width = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.lifetime_bin_width); }},
        {{"synthetic", "none", "generate input instead of reading it: none | identity | vortices"},
         [](RunConfig& c, const std::string& k, std::string_view v) {
             const auto t = csv::trim(v);
             if (t == "none") {
                 c.synthetic = SyntheticKind::None;
             } else if (t == "identity") {
                 c.synthetic = SyntheticKind::Identity;
             } else if (t == "vortices") {
                 c.synthetic = SyntheticKind::Vortices;
             } else {
                 fail_validation(key_error(k, v, "none, identity or vortices"));
             }
         },
         [](const RunConfig& c) {
             return std::string(c.synthetic == SyntheticKind::None       ? "none"
                                : c.synthetic == SyntheticKind::Identity ? "identity"
                                                                         : "vortices");
         }},
        {{"synth_lon_min", "0", "synthetic domain west edge"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.lon_min = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.synth.lon_min); }},
        {{"synth_lon_max", "1", "synthetic domain east edge"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.lon_max = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.synth.lon_max); }},
        {{"synth_lat_min", "0", "synthetic domain south edge"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.lat_min = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.synth.lat_min); }},
        {{"synth_lat_max", "1", "synthetic domain north edge"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.lat_max = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.synth.lat_max); }},
        {{"synth_seeding", "random", "grid | random"},
         [](RunConfig& c, const std::string& k, std::string_view v) {
             const auto t = csv::trim(v);
             if (t == "grid") {
                 c.synth.seeding = Seeding::Grid;
             } else if (t == "random") {
                 c.synth.seeding = Seeding::Random;
             } else {
                 fail_validation(key_error(k, v, "grid or random"));
             }
         },
         [](const RunConfig& c) { return std::string(c.synth.seeding == Seeding::Grid ? "grid" : "random"); }},
        {{"synth_seed_count", "2000", "number of random seed points"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.seed_count = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.synth.seed_count); }},
        {{"synth_grid_nx", "41", "grid seeding: nodes per row including the boundary"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.grid_nx = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.synth.grid_nx); }},
        {{"synth_grid_ny", "41", "grid seeding: nodes per column including the boundary"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.grid_ny = to_count(k, v); },
         [](const RunConfig& c) { return std::to_string(c.synth.grid_ny); }},
        {{"synth_ring_spacing", "0.025", "spacing of the static boundary ring, degrees"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.ring_spacing = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.synth.ring_spacing); }},
        {{"synth_vortices", "", "vortices as lon,lat,drift_lon,drift_lat,radius,omega separated by ';'"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth.vortices = parse_vortices(k, v); },
         [](const RunConfig& c) { return vortices_text(c.synth.vortices); }},
        {{"synth_dropout", "none", "none | argo (contiguous random reporting windows)"},
         [](RunConfig& c, const std::string& k, std::string_view v) {
             const auto t = csv::trim(v);
             if (t == "none") {
                 c.synth_dropout = false;
             } else if (t == "argo") {
                 c.synth_dropout = true;
             } else {
                 fail_validation(key_error(k, v, "none or argo"));
             }
         },
         [](const RunConfig& c) { return std::string(c.synth_dropout ? "argo" : "none"); }},
        {{"synth_full_fraction", "0.1", "dropout: share of floats reporting for all T months"},
         [](RunConfig& c, const std::string& k, std::string_view v) { c.synth_full_fraction = to_double(k, v); },
         [](const RunConfig& c) { return csv::format_double(c.synth_full_fraction); }},
    };
    return table;
}

} // namespace

const std::vector<ConfigKey>& config_keys()
{
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> out;
        for (const auto& h : handlers()) {
            out.push_back(h.doc);
        }
        return out;
    }();
    return keys;
}

std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& origin)
{
    std::map<std::string, std::string> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = line;
        if (const auto hash = s.find('#'); hash != std::string_view::npos) {
            s = s.substr(0, hash);
        }
        s = csv::trim(s);
        if (s.empty()) {
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string_view::npos) {
            fail_validation(origin + " line " + std::to_string(line_no) + ": expected key = value");
        }
        out[std::string(csv::trim(s.substr(0, eq)))] = std::string(csv::trim(s.substr(eq + 1)));
    }
    return out;
}

std::map<std::string, std::string> config_from_environment()
{
    std::map<std::string, std::string> out;
    for (const auto& k : config_keys()) {
        std::string env = "DYNLAP_";
        for (const char* p = k.name; *p; ++p) {
            env += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
        }
        if (const char* v = std::getenv(env.c_str())) {
            out[k.name] = v;
        }
    }
    return out;
}

RunConfig build_config(const std::vector<std::map<std::string, std::string>>& layers)
{
    RunConfig cfg;
    for (const auto& layer : layers) {
        for (const auto& [key, value] : layer) {
            const auto it = std::find_if(handlers().begin(), handlers().end(),
                                         [&](const KeyHandler& h) { return key == h.doc.name; });
            if (it == handlers().end()) {
                fail_validation("unknown config key '" + key + "'");
            }
            it->set(cfg, key, value);
        }
    }
    cfg.synth.kind = cfg.synthetic == SyntheticKind::Vortices ? FlowKind::MovingVortices : FlowKind::Identity;
    cfg.synth.months = cfg.months;
    cfg.synth.start_month = cfg.start_month;
    cfg.synth.seed = cfg.seed;
    validate_config(cfg);
    return cfg;
}

void validate_config(const RunConfig& cfg)
{
    auto require = [](bool ok, const char* key, const char* rule) {
        if (!ok) {
            fail_validation(std::string("config key '") + key + "' " + rule);
        }
    };
    require(cfg.months >= 2, "months", "must be at least 2");
    require(cfg.day_first >= 1 && cfg.day_first <= 31, "day_first", "must lie in 1..31");
    require(cfg.day_last >= cfg.day_first && cfg.day_last <= 31, "day_last", "must lie in day_first..31");
    require(cfg.coastline_stride >= 1, "coastline_stride", "must be at least 1");
    require(cfg.max_edge_km > 0.0, "max_edge_km", "must be positive");
    require(cfg.eig_count >= 1, "eig_count", "must be at least 1");
    require(cfg.eig_tol > 0.0, "eig_tol", "must be positive");
    require(cfg.eig_max_iter >= 1, "eig_max_iter", "must be at least 1");
    require(!cfg.drop_tol || *cfg.drop_tol >= 0.0, "drop_tol", "must be nonnegative");
    require(!cfg.seba_mu || *cfg.seba_mu >= 0.0, "seba_mu", "must be nonnegative");
    require(cfg.seba_tol > 0.0, "seba_tol", "must be positive");
    require(cfg.seba_max_iter >= 1, "seba_max_iter", "must be at least 1");
    require(cfg.grid_spacing > 0.0, "grid_spacing", "must be positive");
    require(cfg.c_step > 0.0 && cfg.c_step < 0.5, "c_step", "must lie in (0, 0.5)");
    require(cfg.display_month >= 1 && cfg.display_month <= cfg.months, "display_month", "must lie in 1..months");
    require(cfg.lifetime_bin_width >= 1, "lifetime_bin_width", "must be at least 1");
    require(!cfg.output_dir.empty(), "output_dir", "must not be empty");
    require(cfg.synth_full_fraction >= 0.0 && cfg.synth_full_fraction <= 1.0, "synth_full_fraction",
            "must lie in [0, 1]");
    if (cfg.synthetic == SyntheticKind::None) {
        require(!cfg.input_floats.empty(), "input_floats", "must name a file (or set synthetic)");
        require(!cfg.input_coastline.empty(), "input_coastline", "must name a file (or set synthetic)");
    } else {
        validate_flow(cfg.synth);
    }
}

std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg)
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& h : handlers()) {
        out.emplace_back(h.doc.name, h.get(cfg));
    }
    return out;
}

std::size_t resolved_threads(const RunConfig& cfg)
{
    if (cfg.threads > 0) {
        return cfg.threads;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace dynlap
