#include <dynlap/config.hpp>
#include <dynlap/error.hpp>
#include <dynlap/pipeline.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

std::string help_footer()
{
    std::string s =
        "\nConfiguration precedence (lowest to highest): built-in defaults, the --config file,\n"
        "environment variables DYNLAP_<KEY> (key upper-cased, e.g. DYNLAP_EIG_COUNT=4),\n"
        "then --set key=value flags.\n\n"
        "Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 I/O error.\n\n"
        "Configuration keys (default in brackets):\n";
    for (const auto& k : dynlap::config_keys()) {
        s += "  " + std::string(k.name) + " [" + k.default_value + "]\n      " + k.description + "\n";
    }
    return s;
}

int exit_code(dynlap::ErrorKind kind)
{
    switch (kind) {
    case dynlap::ErrorKind::Validation:
        return 2;
    case dynlap::ErrorKind::Numerical:
        return 3;
    case dynlap::ErrorKind::Io:
        return 4;
    }
    return 3;
}

} // namespace

int main(int argc, char** argv)
{
    spdlog::set_default_logger(spdlog::stderr_color_mt("dynlap"));

    CLI::App app{"Finite-time coherent sets from sparse Lagrangian trajectories"};
    app.footer(help_footer());
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool quiet = false;
    bool verbose = false;
    app.add_option("-c,--config", config_path, "flat key = value configuration file");
    app.add_option("-s,--set", overrides, "override one key, key=value (repeatable)");
    app.add_flag("-q,--quiet", quiet, "log warnings and errors only");
    app.add_flag("-v,--verbose", verbose, "log debug output");

    struct Command {
        const char* name;
        const char* help;
        std::optional<dynlap::Stage> stage;
    };
    const std::vector<Command> commands = {
        {"synth", "generate a synthetic float record file and boundary ring", dynlap::Stage::Synth},
        {"ingest", "bin surfacing records into monthly trajectories, thin the coastline", dynlap::Stage::Ingest},
        {"mesh", "triangulate every month (or --month N)", dynlap::Stage::Mesh},
        {"assemble", "assemble and average stiffness/mass matrices", dynlap::Stage::Assemble},
        {"solve", "leading eigenpairs of the averaged system", dynlap::Stage::Solve},
        {"seba", "sparse eigenbasis approximation of the eigenvectors", dynlap::Stage::Seba},
        {"sets", "threshold search and evolved coherent-set boundaries", dynlap::Stage::Sets},
        {"diag", "active counts, lifetime histogram and RMS speed field", dynlap::Stage::Diag},
        {"run", "every stage in order, then manifest.json", std::nullopt},
    };
    std::map<std::string, CLI::App*> subs;
    std::optional<std::size_t> mesh_month;
    for (const auto& c : commands) {
        auto* sub = app.add_subcommand(c.name, c.help);
        sub->fallthrough();
        subs[c.name] = sub;
    }
    subs["mesh"]->add_option("--month", mesh_month, "one-based month to mesh");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    spdlog::set_level(quiet ? spdlog::level::warn : verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        std::vector<std::map<std::string, std::string>> layers;
        if (!config_path.empty()) {
            std::ifstream in(config_path);
            if (!in) {
                throw dynlap::Error(dynlap::ErrorKind::Io, "cannot open config file " + config_path);
            }
            layers.push_back(dynlap::parse_config_text(in, config_path));
        }
        layers.push_back(dynlap::config_from_environment());
        std::map<std::string, std::string> flags;
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) {
                throw dynlap::Error(dynlap::ErrorKind::Validation, "--set expects key=value, got '" + o + "'");
            }
            flags[o.substr(0, eq)] = o.substr(eq + 1);
        }
        layers.push_back(flags);
        const dynlap::RunConfig cfg = dynlap::build_config(layers);

        for (const auto& c : commands) {
            if (!subs[c.name]->parsed()) {
                continue;
            }
            if (!c.stage) {
                dynlap::run_pipeline(cfg);
                spdlog::info("run complete; artifacts in {}", cfg.output_dir);
            } else {
                dynlap::StageOptions opt;
                opt.mesh_month = mesh_month;
                dynlap::run_stage(*c.stage, cfg, opt);
            }
        }
    } catch (const dynlap::Error& e) {
        spdlog::error("{}", e.what());
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return 3;
    }
    return 0;
}
