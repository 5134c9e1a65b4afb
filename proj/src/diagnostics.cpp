#include <dynlap/diagnostics.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>

#include <cmath>
#include <limits>
#include <ostream>

namespace dynlap {

std::vector<std::size_t> active_counts(const TrajectoryArray& traj)
{
    std::vector<std::size_t> out(traj.month_count(), 0);
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        for (std::size_t t = 0; t < traj.month_count(); ++t) {
            out[t] += traj.at(i, t).has_value();
        }
    }
    return out;
}

std::vector<std::size_t> lifetimes(const TrajectoryArray& traj)
{
    std::vector<std::size_t> out(traj.float_count(), 0);
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        std::size_t first = traj.month_count();
        std::size_t last = 0;
        for (std::size_t t = 0; t < traj.month_count(); ++t) {
            if (traj.at(i, t)) {
                first = std::min(first, t);
                last = t;
            }
        }
        out[i] = first <= last ? last - first + 1 : 0;
    }
    return out;
}

std::vector<HistogramBin> lifetime_histogram(const TrajectoryArray& traj, std::size_t bin_width)
{
    if (bin_width < 1) {
        fail_validation("lifetime bin width must be at least 1 month");
    }
    const std::size_t months = traj.month_count();
    std::vector<HistogramBin> bins;
    for (std::size_t start = 1; start <= months; start += bin_width) {
        bins.push_back({start, std::min(months, start + bin_width - 1), 0});
    }
    for (const std::size_t life : lifetimes(traj)) {
        if (life >= 1) {
            ++bins[(life - 1) / bin_width].count;
        }
    }
    return bins;
}

std::vector<std::optional<double>> rms_speeds(const TrajectoryArray& traj)
{
    std::vector<std::optional<double>> out(traj.float_count());
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t t = 1; t < traj.month_count(); ++t) {
            const auto& a = traj.at(i, t - 1);
            const auto& b = traj.at(i, t);
            if (a && b) {
                const double d = great_circle_km(*a, *b);
                sum += d * d;
                ++n;
            }
        }
        if (n > 0) {
            out[i] = std::sqrt(sum / static_cast<double>(n));
        }
    }
    return out;
}

FleetStats fleet_stats(const TrajectoryArray& traj)
{
    return {active_counts(traj), lifetimes(traj), rms_speeds(traj)};
}

HatBasisField rms_speed_field(const TrajectoryArray& traj, std::shared_ptr<const TriMesh> mesh)
{
    if (mesh->float_count() != traj.float_count()) {
        fail_validation("display mesh and trajectories disagree on the number of floats");
    }
    const auto rms = rms_speeds(traj);
    std::vector<double> c(mesh->dimension(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < rms.size(); ++i) {
        if (rms[i]) {
            c[i] = *rms[i];
        }
    }
    return HatBasisField(std::move(mesh), std::move(c));
}

void write_active_counts(std::ostream& out, const std::vector<std::size_t>& counts)
{
    out << "t,count\n";
    for (std::size_t t = 0; t < counts.size(); ++t) {
        out << (t + 1) << ',' << counts[t] << '\n';
    }
}

void write_lifetime_histogram(std::ostream& out, const std::vector<HistogramBin>& bins)
{
    out << "bin_start,bin_end,count\n";
    for (const auto& b : bins) {
        out << b.start << ',' << b.end << ',' << b.count << '\n';
    }
}

void write_rms_speeds(std::ostream& out, const TrajectoryArray& traj, const std::vector<std::optional<double>>& rms)
{
    out << "float_id,rms_km_per_month\n";
    for (std::size_t i = 0; i < rms.size(); ++i) {
        if (rms[i]) {
            out << traj.float_ids()[i] << ',' << csv::format_double(*rms[i]) << '\n';
        }
    }
}

void write_rms_field(std::ostream& out, const HatBasisField& field)
{
    out << "global_index,lon,lat,rms_km_per_month\n";
    const auto& mesh = field.mesh();
    for (std::size_t v = 0; v < mesh.vertices().size(); ++v) {
        const std::size_t g = mesh.global_index()[v];
        const double value = field.coefficients()[g];
        if (g < mesh.float_count() && !std::isnan(value)) {
            out << (g + 1) << ',' << csv::format_double(mesh.vertices()[v].lon) << ','
                << csv::format_double(mesh.vertices()[v].lat) << ',' << csv::format_double(value) << '\n';
        }
    }
}

} // namespace dynlap
