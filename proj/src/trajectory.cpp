#include <dynlap/trajectory.hpp>

#include <dynlap/csv.hpp>
#include <dynlap/error.hpp>

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

namespace dynlap {

namespace {

int parse_fixed_digits(std::string_view s, std::size_t pos, std::size_t n, std::string_view whole)
{
    if (pos + n > s.size()) {
        fail_validation("malformed timestamp '" + std::string(whole) + "'");
    }
    int v = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const char c = s[pos + k];
        if (c < '0' || c > '9') {
            fail_validation("malformed timestamp '" + std::string(whole) + "'");
        }
        v = v * 10 + (c - '0');
    }
    return v;
}

void check_position(double lon, double lat, std::size_t line)
{
    if (!std::isfinite(lon) || !std::isfinite(lat)) {
        fail_validation("non-finite coordinate, line " + std::to_string(line));
    }
    if (lat < -90.0 || lat > 90.0) {
        fail_validation("latitude out of range, line " + std::to_string(line));
    }
}

bool header_matches(std::string_view line, const std::vector<std::string_view>& expected)
{
    const auto fields = csv::split(line);
    if (fields.size() != expected.size()) {
        return false;
    }
    for (std::size_t k = 0; k < fields.size(); ++k) {
        if (fields[k] != expected[k]) {
            return false;
        }
    }
    return true;
}

} // namespace

YearMonth YearMonth::parse(std::string_view text)
{
    const auto t = csv::trim(text);
    if (t.size() != 7 || t[4] != '-') {
        fail_validation("month label must be YYYY-MM, got '" + std::string(text) + "'");
    }
    YearMonth ym;
    ym.year = parse_fixed_digits(t, 0, 4, text);
    ym.month = parse_fixed_digits(t, 5, 2, text);
    if (ym.month < 1 || ym.month > 12) {
        fail_validation("month out of range in '" + std::string(text) + "'");
    }
    return ym;
}

std::string YearMonth::to_string() const
{
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
    return buf;
}

YearMonth YearMonth::plus(int months) const
{
    const int total = year * 12 + (month - 1) + months;
    YearMonth ym;
    ym.year = total >= 0 ? total / 12 : (total - 11) / 12;
    ym.month = total - ym.year * 12 + 1;
    return ym;
}

int YearMonth::months_until(YearMonth other) const
{
    return (other.year * 12 + other.month) - (year * 12 + month);
}

std::chrono::sys_seconds parse_timestamp(std::string_view text)
{
    using namespace std::chrono;
    const auto s = csv::trim(text);
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') {
        fail_validation("malformed timestamp '" + std::string(text) + "'");
    }
    const int y = parse_fixed_digits(s, 0, 4, text);
    const int mo = parse_fixed_digits(s, 5, 2, text);
    const int d = parse_fixed_digits(s, 8, 2, text);
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) {
        fail_validation("invalid calendar date '" + std::string(text) + "'");
    }

    int hh = 0;
    int mm = 0;
    int ss = 0;
    int offset_minutes = 0;
    std::size_t pos = 10;
    if (pos < s.size() && (s[pos] == 'T' || s[pos] == ' ')) {
        hh = parse_fixed_digits(s, pos + 1, 2, text);
        if (pos + 3 >= s.size() || s[pos + 3] != ':') {
            fail_validation("malformed timestamp '" + std::string(text) + "'");
        }
        mm = parse_fixed_digits(s, pos + 4, 2, text);
        pos += 6;
        if (pos < s.size() && s[pos] == ':') {
            ss = parse_fixed_digits(s, pos + 1, 2, text);
            pos += 3;
            // Fractional seconds are truncated.
            if (pos < s.size() && s[pos] == '.') {
                ++pos;
                while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
                    ++pos;
                }
            }
        }
        if (hh > 23 || mm > 59 || ss > 60) {
            fail_validation("time of day out of range in '" + std::string(text) + "'");
        }
    }
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            pos += 1;
        } else if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() && s[pos + 3] == ':') {
            const int oh = parse_fixed_digits(s, pos + 1, 2, text);
            const int om = parse_fixed_digits(s, pos + 4, 2, text);
            offset_minutes = (s[pos] == '+' ? 1 : -1) * (oh * 60 + om);
            pos = s.size();
        } else {
            fail_validation("malformed timestamp '" + std::string(text) + "'");
        }
    }
    return sys_days{ymd} + hours{hh} + minutes{mm - offset_minutes} + seconds{ss};
}

std::string format_timestamp(std::chrono::sys_seconds t)
{
    using namespace std::chrono;
    const auto days = floor<std::chrono::days>(t);
    const year_month_day ymd{days};
    const hh_mm_ss tod{t - days};
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod.hours().count()), static_cast<int>(tod.minutes().count()),
                  static_cast<int>(tod.seconds().count()));
    return buf;
}

std::vector<FloatRecord> parse_float_records(std::istream& in)
{
    std::vector<FloatRecord> records;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        if (!seen_header) {
            if (!header_matches(line, {"float_id", "timestamp", "lon", "lat"})) {
                fail_validation("expected header 'float_id,timestamp,lon,lat', line " + std::to_string(line_no));
            }
            seen_header = true;
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != 4 || fields[0].empty()) {
            fail_validation("malformed row, line " + std::to_string(line_no));
        }
        const auto lon = csv::parse_double(fields[2]);
        const auto lat = csv::parse_double(fields[3]);
        if (!lon || !lat) {
            fail_validation("malformed coordinate, line " + std::to_string(line_no));
        }
        check_position(*lon, *lat, line_no);
        FloatRecord rec;
        rec.float_id = std::string(fields[0]);
        try {
            rec.timestamp = parse_timestamp(fields[1]);
        } catch (const Error& e) {
            fail_validation(std::string(e.what()) + ", line " + std::to_string(line_no));
        }
        rec.position = {normalize_lon(*lon), *lat};
        records.push_back(std::move(rec));
    }
    if (records.empty()) {
        fail_validation("empty float record file");
    }
    spdlog::info("parsed {} float records", records.size());
    return records;
}

void write_float_records(std::ostream& out, const std::vector<FloatRecord>& records)
{
    out << "float_id,timestamp,lon,lat\n";
    for (const auto& r : records) {
        out << r.float_id << ',' << format_timestamp(r.timestamp) << ',' << csv::format_double(r.position.lon) << ','
            << csv::format_double(r.position.lat) << '\n';
    }
}

TrajectoryArray::TrajectoryArray(std::vector<std::string> float_ids, YearMonth start_month, std::size_t months,
                                 std::vector<std::optional<LonLat>> positions)
    : float_ids_(std::move(float_ids)), start_(start_month), months_(months), positions_(std::move(positions))
{
    if (months_ == 0) {
        fail_validation("trajectory array needs at least one month");
    }
    if (positions_.size() != float_ids_.size() * months_) {
        fail_validation("trajectory position table has the wrong size");
    }
    for (std::size_t i = 0; i < float_ids_.size(); ++i) {
        bool any = false;
        for (std::size_t t = 0; t < months_; ++t) {
            const auto& p = positions_[i * months_ + t];
            if (!p) {
                continue;
            }
            any = true;
            if (!(p->lat >= -90.0 && p->lat <= 90.0) || !(p->lon >= -180.0 && p->lon < 180.0)) {
                fail_validation("float " + float_ids_[i] + " has an out-of-range position");
            }
        }
        if (!any) {
            fail_validation("float " + float_ids_[i] + " has no present position");
        }
    }
}

std::vector<std::size_t> TrajectoryArray::reporting_set(std::size_t t) const
{
    if (t >= months_) {
        fail_validation("month index " + std::to_string(t + 1) + " outside 1.." + std::to_string(months_));
    }
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < float_ids_.size(); ++i) {
        if (at(i, t)) {
            out.push_back(i);
        }
    }
    return out;
}

BinnedTrajectories bin_monthly(const std::vector<FloatRecord>& records, YearMonth start_month, std::size_t months,
                               DayWindow window)
{
    using namespace std::chrono;
    if (months < 2) {
        fail_validation("binning needs at least two months");
    }
    if (window.first < 1 || window.last > 31 || window.first > window.last) {
        fail_validation("invalid day window");
    }

    // Float order follows first appearance in the input.
    std::vector<std::string> all_ids;
    std::unordered_map<std::string, std::size_t> slot_of;
    struct Pick {
        sys_seconds when;
        LonLat pos;
    };
    std::vector<std::optional<Pick>> picks;

    for (const auto& rec : records) {
        auto [it, inserted] = slot_of.try_emplace(rec.float_id, all_ids.size());
        if (inserted) {
            all_ids.push_back(rec.float_id);
            picks.resize(picks.size() + months);
        }
        const year_month_day ymd{floor<days>(rec.timestamp)};
        const YearMonth label{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month()))};
        const int t = start_month.months_until(label);
        if (t < 0 || t >= static_cast<int>(months)) {
            continue;
        }
        const int day = static_cast<int>(static_cast<unsigned>(ymd.day()));
        if (day < window.first || day > window.last) {
            continue;
        }
        auto& slot = picks[it->second * months + static_cast<std::size_t>(t)];
        // Strict comparison: on equal timestamps the earlier record in the file wins.
        if (!slot || rec.timestamp < slot->when) {
            slot = Pick{rec.timestamp, rec.position};
        }
    }

    std::vector<std::string> ids;
    std::vector<std::optional<LonLat>> positions;
    std::size_t dropped = 0;
    for (std::size_t f = 0; f < all_ids.size(); ++f) {
        bool any = false;
        for (std::size_t t = 0; t < months; ++t) {
            any = any || picks[f * months + t].has_value();
        }
        if (!any) {
            ++dropped;
            continue;
        }
        ids.push_back(all_ids[f]);
        for (std::size_t t = 0; t < months; ++t) {
            const auto& p = picks[f * months + t];
            positions.push_back(p ? std::optional<LonLat>(p->pos) : std::nullopt);
        }
    }
    if (ids.empty()) {
        fail_validation("empty trajectory set");
    }
    if (dropped > 0) {
        spdlog::info("dropped {} floats with no surfacing inside the day window", dropped);
    }
    return {TrajectoryArray(std::move(ids), start_month, months, std::move(positions)), dropped};
}

void write_trajectory_csv(std::ostream& out, const TrajectoryArray& traj)
{
    out << "float_id,month_index,lon,lat\n";
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        for (std::size_t t = 0; t < traj.month_count(); ++t) {
            if (const auto& p = traj.at(i, t)) {
                out << traj.float_ids()[i] << ',' << (t + 1) << ',' << csv::format_double(p->lon) << ','
                    << csv::format_double(p->lat) << '\n';
            }
        }
    }
}

TrajectoryArray read_trajectory_csv(std::istream& in, YearMonth start_month, std::size_t months)
{
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> slot_of;
    std::vector<std::optional<LonLat>> positions;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        if (!seen_header) {
            if (!header_matches(line, {"float_id", "month_index", "lon", "lat"})) {
                fail_validation("expected header 'float_id,month_index,lon,lat', line " + std::to_string(line_no));
            }
            seen_header = true;
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != 4 || fields[0].empty()) {
            fail_validation("malformed trajectory row, line " + std::to_string(line_no));
        }
        const auto t = csv::parse_int(fields[1]);
        const auto lon = csv::parse_double(fields[2]);
        const auto lat = csv::parse_double(fields[3]);
        if (!t || !lon || !lat) {
            fail_validation("malformed trajectory row, line " + std::to_string(line_no));
        }
        if (*t < 1 || *t > static_cast<std::int64_t>(months)) {
            fail_validation("month_index outside 1.." + std::to_string(months) + ", line " + std::to_string(line_no));
        }
        check_position(*lon, *lat, line_no);
        auto [it, inserted] = slot_of.try_emplace(std::string(fields[0]), ids.size());
        if (inserted) {
            ids.emplace_back(fields[0]);
            positions.resize(positions.size() + months);
        }
        positions[it->second * months + static_cast<std::size_t>(*t - 1)] = LonLat{normalize_lon(*lon), *lat};
    }
    if (ids.empty()) {
        fail_validation("empty trajectory set");
    }
    return TrajectoryArray(std::move(ids), start_month, months, std::move(positions));
}

std::vector<FloatRecord> to_float_records(const TrajectoryArray& traj, int day)
{
    using namespace std::chrono;
    std::vector<FloatRecord> out;
    for (std::size_t i = 0; i < traj.float_count(); ++i) {
        for (std::size_t t = 0; t < traj.month_count(); ++t) {
            if (const auto& p = traj.at(i, t)) {
                const YearMonth ym = traj.month_label(t);
                const year_month_day ymd{year{ym.year}, month{static_cast<unsigned>(ym.month)},
                                         std::chrono::day{static_cast<unsigned>(day)}};
                out.push_back({traj.float_ids()[i], sys_days{ymd}, *p});
            }
        }
    }
    return out;
}

CoastlineSet load_coastline(std::istream& in, std::size_t stride)
{
    if (stride < 1) {
        fail_validation("coastline stride must be at least 1");
    }
    std::vector<LonLat> raw;
    std::string line;
    std::size_t line_no = 0;
    bool seen_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (csv::trim(line).empty()) {
            continue;
        }
        if (!seen_header) {
            if (!header_matches(line, {"lon", "lat"})) {
                fail_validation("expected header 'lon,lat', line " + std::to_string(line_no));
            }
            seen_header = true;
            continue;
        }
        const auto fields = csv::split(line);
        if (fields.size() != 2) {
            fail_validation("malformed coastline row, line " + std::to_string(line_no));
        }
        const auto lon = csv::parse_double(fields[0]);
        const auto lat = csv::parse_double(fields[1]);
        if (!lon || !lat) {
            fail_validation("malformed coastline row, line " + std::to_string(line_no));
        }
        check_position(*lon, *lat, line_no);
        raw.push_back({normalize_lon(*lon), *lat});
    }

    constexpr double kDuplicateTol = 1e-9;
    CoastlineSet coast;
    // Ordered index on (lon, lat) keeps dedup O(n log n); neighbours within tolerance are scanned.
    std::multimap<double, double> seen;
    for (std::size_t k = 0; k < raw.size(); k += stride) {
        const LonLat p = raw[k];
        bool duplicate = false;
        for (auto it = seen.lower_bound(p.lon - kDuplicateTol); it != seen.end() && it->first <= p.lon + kDuplicateTol;
             ++it) {
            if (std::abs(it->second - p.lat) <= kDuplicateTol) {
                duplicate = true;
                break;
            }
        }
        if (duplicate) {
            continue;
        }
        seen.emplace(p.lon, p.lat);
        coast.points.push_back(p);
    }
    if (coast.points.size() < 3) {
        fail_validation("coastline needs at least 3 distinct points after subsampling, got " +
                        std::to_string(coast.points.size()));
    }
    return coast;
}

void write_coastline_csv(std::ostream& out, const CoastlineSet& coast)
{
    out << "lon,lat\n";
    for (const auto& p : coast.points) {
        out << csv::format_double(p.lon) << ',' << csv::format_double(p.lat) << '\n';
    }
}

} // namespace dynlap
