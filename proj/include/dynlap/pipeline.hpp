#pragma once

#include <dynlap/config.hpp>

#include <json.hpp>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace dynlap {

inline constexpr const char* kVersion = "1.0.0";

enum class Stage { Synth, Ingest, Mesh, Assemble, Solve, Seba, Sets, Diag };

const char* stage_name(Stage stage);

struct StageOptions {
    std::optional<std::size_t> mesh_month;  ///< one-based; mesh only this month
};

struct StageReport {
    std::string name;
    double seconds = 0.0;
    nlohmann::ordered_json info;  ///< also written to <output_dir>/<stage>.json
};

/// Runs one stage inside cfg.output_dir, reading the previous stages' files. A missing upstream
/// file raises an I/O error naming it.
StageReport run_stage(Stage stage, const RunConfig& cfg, const StageOptions& options = {});

/// Every stage in order (synth only for synthetic configs), then manifest.json. On failure a
/// FAILED marker naming the stage is written, the partial manifest kept, and the error rethrown
/// with the stage name prefixed.
nlohmann::ordered_json run_pipeline(const RunConfig& cfg);

/// Manifest document: configuration echo, library versions, stage timings and details,
/// convergence flags and, for synthetic identity runs, the analytic spectrum check.
nlohmann::ordered_json make_manifest(const RunConfig& cfg, const std::vector<StageReport>& stages,
                                     const std::string& status);

} // namespace dynlap
