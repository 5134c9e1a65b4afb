#pragma once

#include <dynlap/geo.hpp>
#include <dynlap/trajectory.hpp>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dynlap {

enum class FlowKind { Identity, MovingVortices };
enum class Seeding { Grid, Random };

/// Rigidly rotating disk whose center drifts at constant velocity.
struct Vortex {
    LonLat center;          ///< at month 0
    LonLat drift;           ///< degrees per month
    double radius = 1.0;    ///< degrees
    double omega = 0.0;     ///< radians per month
};

struct FlowSpec {
    FlowKind kind = FlowKind::Identity;
    double lon_min = 0.0;
    double lon_max = 1.0;
    double lat_min = 0.0;
    double lat_max = 1.0;
    std::vector<Vortex> vortices;
    Seeding seeding = Seeding::Random;
    std::size_t seed_count = 2000;  ///< random seeding
    std::size_t grid_nx = 41;       ///< grid seeding: nodes per row including the boundary
    std::size_t grid_ny = 41;
    std::uint64_t seed = 0;
    std::size_t months = 24;
    YearMonth start_month{2011, 1};
    double ring_spacing = 0.025;  ///< target spacing of the boundary ring, degrees
};

/// Throws on an invalid spec: empty domain, fewer than 3 seeds, T < 2, or (for vortices) disks that
/// leave the domain or overlap at some month.
void validate_flow(const FlowSpec& spec);

/// Static floats. Grid seeding uses the interior nodes of a grid_nx by grid_ny lattice spanning the
/// domain; random seeding draws seed_count points uniformly inside it.
TrajectoryArray gen_identity(const FlowSpec& spec);

/// Each month, points within a disk rotate by omega about its center, then the centers drift;
/// other points stay put. Seeds outside the month-0 disks that some disk would later sweep over are
/// redrawn, so every float is either carried by one disk for all months or static.
/// `membership` receives the vortex index per float (-1 outside).
TrajectoryArray gen_moving_vortices(const FlowSpec& spec, std::vector<int>* membership = nullptr);

/// Static points around the domain rectangle, corners included.
CoastlineSet boundary_ring(const FlowSpec& spec);

/// Lifetime probabilities for 1..T months: `full_fraction` at T, the remainder spread evenly.
std::vector<double> argo_like_lifetimes(std::size_t months, double full_fraction);

/// Keeps a contiguous window per float with lifetime drawn from `lifetime_pmf` (entry l-1 for
/// l months) and a uniformly random start. Floats left without positions are removed; throws if
/// none remain.
TrajectoryArray apply_dropout(const TrajectoryArray& traj, const std::vector<double>& lifetime_pmf,
                              std::uint64_t seed);

/// Float identifiers "S00001", "S00002", ...
std::string synthetic_float_id(std::size_t index);

} // namespace dynlap
