#pragma once

#include <dynlap/mesh.hpp>
#include <dynlap/trajectory.hpp>

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace dynlap {

struct FleetStats {
    std::vector<std::size_t> active;          ///< |R_t| per month
    std::vector<std::size_t> lifetime;        ///< months from first to last report, inclusive
    std::vector<std::optional<double>> rms;   ///< km/month; absent without two consecutive reports
};

std::vector<std::size_t> active_counts(const TrajectoryArray& traj);
std::vector<std::size_t> lifetimes(const TrajectoryArray& traj);

struct HistogramBin {
    std::size_t start = 0;  ///< months, inclusive
    std::size_t end = 0;    ///< months, inclusive
    std::size_t count = 0;
};

/// Bins [1, w], [w + 1, 2w], ... covering lifetimes up to T.
std::vector<HistogramBin> lifetime_histogram(const TrajectoryArray& traj, std::size_t bin_width);

/// Root mean square of great-circle displacements between consecutive reporting months.
/// Increments across a gap are skipped.
std::vector<std::optional<double>> rms_speeds(const TrajectoryArray& traj);

FleetStats fleet_stats(const TrajectoryArray& traj);

/// RMS speeds attached to the display mesh's hat basis. Coastline indices and floats without a
/// speed carry NaN.
HatBasisField rms_speed_field(const TrajectoryArray& traj, std::shared_ptr<const TriMesh> mesh);

/// `t,count` (t one-based).
void write_active_counts(std::ostream& out, const std::vector<std::size_t>& counts);
/// `bin_start,bin_end,count`.
void write_lifetime_histogram(std::ostream& out, const std::vector<HistogramBin>& bins);
/// `float_id,rms_km_per_month`, floats without a speed omitted.
void write_rms_speeds(std::ostream& out, const TrajectoryArray& traj, const std::vector<std::optional<double>>& rms);
/// `global_index,lon,lat,rms_km_per_month` for the display mesh's float vertices that carry a speed.
void write_rms_field(std::ostream& out, const HatBasisField& field);

} // namespace dynlap
