#pragma once

#include <dynlap/synthetic.hpp>
#include <dynlap/trajectory.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dynlap {

enum class SyntheticKind { None, Identity, Vortices };

struct RunConfig {
    std::string input_floats;
    std::string input_coastline;
    std::string output_dir = "out";
    YearMonth start_month{2011, 1};
    std::size_t months = 72;
    int day_first = 1;
    int day_last = 12;
    std::size_t coastline_stride = 5;
    double max_edge_km = 1500.0;
    std::size_t eig_count = 8;
    double eig_tol = 1e-8;
    std::size_t eig_max_iter = 5000;
    std::optional<double> drop_tol;
    std::optional<double> seba_mu;
    double seba_tol = 1e-14;
    std::size_t seba_max_iter = 5000;
    std::size_t seba_restarts = 0;
    double grid_spacing = 1.0;
    double c_step = 0.01;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::size_t display_month = 36;  ///< one-based
    std::size_t lifetime_bin_width = 6;

    SyntheticKind synthetic = SyntheticKind::None;
    FlowSpec synth;
    bool synth_dropout = false;
    double synth_full_fraction = 0.1;
};

/// One documented key: name, default text, description.
struct ConfigKey {
    const char* name;
    const char* default_value;
    const char* description;
};
const std::vector<ConfigKey>& config_keys();

/// Flat `key = value` text; `#` starts a comment, blank lines are ignored.
std::map<std::string, std::string> parse_config_text(std::istream& in, const std::string& origin = "config");

/// Values from DYNLAP_<KEY> environment variables (key upper-cased) for every known key.
std::map<std::string, std::string> config_from_environment();

/// Applies `layers` in order over the defaults (later layers win), then validates.
RunConfig build_config(const std::vector<std::map<std::string, std::string>>& layers);

/// Range and consistency checks; throws a validation error naming the key.
void validate_config(const RunConfig& cfg);

/// Canonical key/value listing; feeding it back to build_config reproduces the configuration.
std::vector<std::pair<std::string, std::string>> config_echo(const RunConfig& cfg);

/// Worker count with 0 resolved to the hardware concurrency.
std::size_t resolved_threads(const RunConfig& cfg);

} // namespace dynlap
