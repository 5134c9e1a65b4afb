#pragma once

#include <dynlap/geo.hpp>

#include <chrono>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dynlap {

/// Calendar month label (UTC).
struct YearMonth {
    int year = 2011;
    int month = 1;  ///< 1..12

    static YearMonth parse(std::string_view text);  ///< "YYYY-MM"
    std::string to_string() const;
    YearMonth plus(int months) const;
    /// Signed number of months from this label to `other`.
    int months_until(YearMonth other) const;

    friend bool operator==(const YearMonth&, const YearMonth&) = default;
};

/// One surfacing transmission.
struct FloatRecord {
    std::string float_id;
    std::chrono::sys_seconds timestamp;
    LonLat position;
};

/// Parses an ISO-8601 UTC date-time ("2011-01-03T04:00:00Z", "2011-01-03 04:00", "2011-01-03").
std::chrono::sys_seconds parse_timestamp(std::string_view text);
std::string format_timestamp(std::chrono::sys_seconds t);

/// Reads `float_id,timestamp,lon,lat` CSV. Longitudes are normalized to [-180, 180).
std::vector<FloatRecord> parse_float_records(std::istream& in);
void write_float_records(std::ostream& out, const std::vector<FloatRecord>& records);

/// Monthly float positions with explicit gaps, I floats by T months.
class TrajectoryArray {
public:
    TrajectoryArray(std::vector<std::string> float_ids, YearMonth start_month, std::size_t months,
                    std::vector<std::optional<LonLat>> positions);

    std::size_t float_count() const { return float_ids_.size(); }
    std::size_t month_count() const { return months_; }
    const std::vector<std::string>& float_ids() const { return float_ids_; }
    YearMonth start_month() const { return start_; }
    YearMonth month_label(std::size_t t) const { return start_.plus(static_cast<int>(t)); }

    /// Position of float i at month t (both zero-based), or nullopt for a gap.
    const std::optional<LonLat>& at(std::size_t i, std::size_t t) const { return positions_[i * months_ + t]; }

    /// Zero-based indices of floats reporting at zero-based month t, ascending.
    std::vector<std::size_t> reporting_set(std::size_t t) const;

    friend bool operator==(const TrajectoryArray&, const TrajectoryArray&) = default;

private:
    std::vector<std::string> float_ids_;
    YearMonth start_;
    std::size_t months_;
    std::vector<std::optional<LonLat>> positions_;
};

struct DayWindow {
    int first = 1;
    int last = 12;
};

struct BinnedTrajectories {
    TrajectoryArray trajectories;
    std::size_t dropped_floats = 0;  ///< floats with no position in any month
};

/// Keeps, for every float and month, the earliest surfacing whose day of month lies in `window`.
/// Ties on timestamp go to the earlier record. Floats are ordered by first appearance in `records`.
BinnedTrajectories bin_monthly(const std::vector<FloatRecord>& records, YearMonth start_month, std::size_t months,
                               DayWindow window = {});

/// Trajectory CSV: `float_id,month_index,lon,lat`, month_index one-based, gaps omitted, float-major order.
void write_trajectory_csv(std::ostream& out, const TrajectoryArray& traj);
TrajectoryArray read_trajectory_csv(std::istream& in, YearMonth start_month, std::size_t months);

/// Expands an array back into surfacing records, one per present entry, dated on `day` of each month.
std::vector<FloatRecord> to_float_records(const TrajectoryArray& traj, int day = 1);

/// Domain-boundary points that carry the Dirichlet constraint.
struct CoastlineSet {
    std::vector<LonLat> points;
};

/// Reads `lon,lat` CSV, keeps every `stride`-th point (first point kept) and removes duplicates.
CoastlineSet load_coastline(std::istream& in, std::size_t stride = 5);
void write_coastline_csv(std::ostream& out, const CoastlineSet& coast);

} // namespace dynlap
