#include "tastediv/geo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "tastediv/kernels.hpp"
#include "tastediv/textio.hpp"

namespace tastediv::geo {

namespace {

constexpr double kEarthRadiusKm = 6371.0;

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }

void check_lat_lon(const io::CsvReader& reader, double lat, double lon) {
    if (lat < -90.0 || lat > 90.0)
        reader.fail("latitude out of range: " + std::to_string(lat));
    if (lon < -180.0 || lon > 180.0)
        reader.fail("longitude out of range: " + std::to_string(lon));
}

void unit_vector(double lat, double lon, double& x, double& y, double& z) {
    const double phi = deg2rad(lat);
    const double lam = deg2rad(lon);
    x = std::cos(phi) * std::cos(lam);
    y = std::cos(phi) * std::sin(lam);
    z = std::sin(phi);
}

// Sorted ZIPs attaining the maximum count of `counts`.
std::vector<std::string> argmax_zips(const std::map<std::string, std::size_t>& counts) {
    std::vector<std::string> out;
    std::size_t best = 0;
    for (const auto& [zip, n] : counts) best = std::max(best, n);
    for (const auto& [zip, n] : counts)
        if (n == best && best > 0) out.push_back(zip);
    return out;
}

}  // namespace

std::vector<Ping> parse_pings(const std::string& path) {
    io::CsvReader reader(path);
    reader.expect_header({"user_id", "timestamp_iso8601", "utc_offset_minutes", "lat", "lon"});
    std::vector<Ping> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 5) reader.fail("expected 5 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) reader.fail("empty user_id");
        Ping p;
        p.user_id = f[0];
        try {
            p.timestamp = io::parse_iso8601(f[1]);
        } catch (const io::ParseError& e) {
            reader.fail(e.what());
        }
        if (!f[2].empty())
            p.utc_offset_minutes =
                static_cast<int>(io::parse_int(f[2], reader, "utc_offset_minutes"));
        p.lat = io::parse_real(f[3], reader, "lat");
        p.lon = io::parse_real(f[4], reader, "lon");
        check_lat_lon(reader, p.lat, p.lon);
        out.push_back(std::move(p));
    }
    return out;
}

std::optional<std::size_t> ZipTable::find(const std::string& zip) const {
    const auto it = std::lower_bound(zips.begin(), zips.end(), zip);
    if (it == zips.end() || *it != zip) return std::nullopt;
    return static_cast<std::size_t>(it - zips.begin());
}

ZipTable load_zips(const std::string& path) {
    io::CsvReader reader(path);
    reader.expect_header({"zip", "centroid_lat", "centroid_lon", "fips"});

    struct Row {
        std::string zip, fips;
        double lat, lon;
    };
    std::vector<Row> rows;
    std::set<std::string> seen;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 4) reader.fail("expected 4 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) reader.fail("empty zip");
        if (f[3].empty()) reader.fail("empty fips");
        if (!seen.insert(f[0]).second) reader.fail("duplicate zip: " + f[0]);
        Row r;
        r.zip = f[0];
        r.fips = f[3];
        r.lat = io::parse_real(f[1], reader, "centroid_lat");
        r.lon = io::parse_real(f[2], reader, "centroid_lon");
        check_lat_lon(reader, r.lat, r.lon);
        rows.push_back(std::move(r));
    }

    // Ascending ZIP order makes the lowest-index tie from the nearest scan
    // the lexicographically smaller ZIP.
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.zip < b.zip; });

    ZipTable out;
    out.zips.reserve(rows.size());
    for (const Row& r : rows) {
        out.zips.push_back(r.zip);
        out.fips.push_back(r.fips);
        out.lat.push_back(r.lat);
        out.lon.push_back(r.lon);
        double x, y, z;
        unit_vector(r.lat, r.lon, x, y, z);
        out.ux.push_back(x);
        out.uy.push_back(y);
        out.uz.push_back(z);
    }
    return out;
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) {
    const double dphi = deg2rad(lat2 - lat1);
    const double dlam = deg2rad(lon2 - lon1);
    const double a = std::sin(dphi / 2) * std::sin(dphi / 2) +
                     std::cos(deg2rad(lat1)) * std::cos(deg2rad(lat2)) *
                         std::sin(dlam / 2) * std::sin(dlam / 2);
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(a)));
}

std::optional<std::string> reverse_geocode(double lat, double lon, const ZipTable& zips,
                                           double max_km) {
    if (zips.size() == 0) throw std::runtime_error("reverse_geocode: empty ZIP table");
    double x, y, z;
    unit_vector(lat, lon, x, y, z);
    const kernels::NearestHit hit = kernels::nearest_point3(x, y, z, zips.ux, zips.uy, zips.uz);
    // Chord length c between unit vectors relates to the central angle a by
    // c = 2 sin(a/2), so the great-circle distance is 2R asin(c/2) — the same
    // value the haversine formula yields.
    const double chord = std::sqrt(std::max(0.0, hit.sq_dist));
    const double km = 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, chord / 2.0));
    if (km > max_km) return std::nullopt;
    return zips.zips[hit.index];
}

bool is_night(const GeocodedPing& ping, const NightWindow& window) {
    const int offset = ping.utc_offset_minutes.value_or(window.default_offset_minutes);
    const std::int64_t local = ping.timestamp + static_cast<std::int64_t>(offset) * 60;
    const std::int64_t day_sec = ((local % 86400) + 86400) % 86400;
    const std::int64_t start = static_cast<std::int64_t>(window.start_hour) * 3600;
    const std::int64_t end = static_cast<std::int64_t>(window.end_hour) * 3600;
    if (start < end) return day_sec >= start && day_sec < end;
    return day_sec >= start || day_sec < end;  // window wraps midnight
}

std::vector<std::string> plurality_zips(std::span<const GeocodedPing> pings) {
    std::map<std::string, std::size_t> counts;
    for (const GeocodedPing& p : pings) ++counts[p.zip];
    return argmax_zips(counts);
}

std::vector<std::string> night_plurality_zips(std::span<const GeocodedPing> pings,
                                              const NightWindow& window) {
    std::map<std::string, std::size_t> counts;
    for (const GeocodedPing& p : pings)
        if (is_night(p, window)) ++counts[p.zip];
    return argmax_zips(counts);
}

std::vector<std::string> n_days_zips(std::span<const GeocodedPing> pings, double min_days,
                                     bool distinct_days) {
    std::vector<std::string> out;
    if (distinct_days) {
        std::map<std::string, std::set<std::int64_t>> days;
        for (const GeocodedPing& p : pings) {
            // Floor toward -inf so pre-epoch timestamps land on the right date.
            std::int64_t day = p.timestamp / 86400;
            if (p.timestamp % 86400 < 0) --day;
            days[p.zip].insert(day);
        }
        for (const auto& [zip, d] : days)
            if (static_cast<double>(d.size()) >= min_days) out.push_back(zip);
        return out;
    }
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> spans;
    for (const GeocodedPing& p : pings) {
        auto [it, fresh] = spans.emplace(p.zip, std::make_pair(p.timestamp, p.timestamp));
        if (!fresh) {
            it->second.first = std::min(it->second.first, p.timestamp);
            it->second.second = std::max(it->second.second, p.timestamp);
        }
    }
    for (const auto& [zip, span] : spans) {
        const double days = static_cast<double>(span.second - span.first) / 86400.0;
        if (days >= min_days) out.push_back(zip);
    }
    return out;
}

HomeLocation resolve_home(const std::string& user_id, std::span<const GeocodedPing> pings,
                          const ZipTable& zips, const HomePolicy& policy) {
    HomeLocation home;
    home.user_id = user_id;
    home.plurality_set = plurality_zips(pings);
    home.night_set = night_plurality_zips(pings, policy.night);
    home.ndays_set = n_days_zips(pings, policy.min_days, policy.distinct_days);

    if (pings.size() < policy.min_pings) {
        home.reason = "too-few-pings";
        return home;
    }

    std::vector<std::string> both;
    std::set_intersection(home.plurality_set.begin(), home.plurality_set.end(),
                          home.night_set.begin(), home.night_set.end(),
                          std::back_inserter(both));
    std::vector<std::string> all;
    std::set_intersection(both.begin(), both.end(), home.ndays_set.begin(), home.ndays_set.end(),
                          std::back_inserter(all));
    if (all.empty()) {
        home.reason = "empty-intersection";
        return home;
    }

    std::string chosen = all.front();
    if (all.size() > 1) {
        // Highest overall ping count wins; lexicographic order breaks what
        // remains (`all` is already sorted, so the first max-count entry is it).
        std::map<std::string, std::size_t> counts;
        for (const GeocodedPing& p : pings) ++counts[p.zip];
        std::size_t best = 0;
        for (const std::string& zip : all) {
            const std::size_t n = counts[zip];
            if (n > best) {
                best = n;
                chosen = zip;
            }
        }
        home.reason = "tie-break";
    }

    home.resolved = true;
    home.zip = chosen;
    if (const auto idx = zips.find(chosen)) home.fips = zips.fips[*idx];
    return home;
}

const std::array<std::string, 8>& CensusRecord::labels() {
    static const std::array<std::string, 8> names = {
        "p_white", "p_black", "p_native", "p_asian",
        "p_hispanic", "p_pacific", "p_two_or_more", "p_other"};
    return names;
}

CensusTable load_census(const std::string& path) {
    io::CsvReader reader(path);
    std::vector<std::string> header = {"zip", "median_household_income", "pct_bachelor"};
    for (const std::string& label : CensusRecord::labels()) header.push_back(label);
    reader.expect_header(header);

    CensusTable out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 11) reader.fail("expected 11 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) reader.fail("empty zip");
        CensusRecord rec;
        rec.zip = f[0];
        rec.median_household_income = io::parse_real(f[1], reader, "median_household_income");
        rec.pct_bachelor = io::parse_real(f[2], reader, "pct_bachelor");
        if (rec.median_household_income < 0.0) reader.fail("negative median_household_income");
        if (rec.pct_bachelor < 0.0 || rec.pct_bachelor > 1.0)
            reader.fail("pct_bachelor out of [0,1]");
        double sum = 0.0;
        for (std::size_t r = 0; r < rec.race.size(); ++r) {
            rec.race[r] = io::parse_real(f[3 + r], reader, CensusRecord::labels()[r]);
            if (rec.race[r] < 0.0 || rec.race[r] > 1.0)
                reader.fail(CensusRecord::labels()[r] + " out of [0,1]");
            sum += rec.race[r];
        }
        if (std::abs(sum - 1.0) > 0.01)
            reader.fail("race proportions sum to " + std::to_string(sum) + ", expected 1 +- 0.01");
        if (!out.emplace(rec.zip, std::move(rec)).second)
            reader.fail("duplicate zip: " + f[0]);
    }
    return out;
}

std::map<std::string, int> load_urbanness(const std::string& path) {
    io::CsvReader reader(path);
    reader.expect_header({"fips", "urbanness"});
    std::map<std::string, int> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 2) reader.fail("expected 2 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) reader.fail("empty fips");
        const long long code = io::parse_int(f[1], reader, "urbanness");
        if (code < 1 || code > 6)
            reader.fail("urbanness code out of 1..6: " + std::to_string(code));
        if (!out.emplace(f[0], static_cast<int>(code)).second)
            reader.fail("duplicate fips: " + f[0]);
    }
    return out;
}

double racial_diversity_index(std::span<const double> proportions) {
    double sum = 0.0, sq = 0.0;
    for (double p : proportions) {
        if (p < 0.0 || p > 1.0)
            throw std::domain_error("racial_diversity_index: proportion out of [0,1]");
        sum += p;
        sq += p * p;
    }
    if (std::abs(sum - 1.0) > 0.01)
        throw std::domain_error("racial_diversity_index: proportions sum to " +
                                std::to_string(sum));
    return 1.0 - sq;
}

double simple_racial_diversity(double white_fraction) {
    if (white_fraction < 0.0 || white_fraction > 1.0)
        throw std::domain_error("simple_racial_diversity: fraction out of [0,1]");
    return 1.0 - white_fraction;
}

std::pair<std::optional<UserDemographics>, std::string> join_census(
    const HomeLocation& home, const CensusTable& census,
    const std::map<std::string, int>& urbanness) {
    if (!home.resolved || !home.zip) return {std::nullopt, "no-home"};
    const auto cit = census.find(*home.zip);
    if (cit == census.end()) return {std::nullopt, "zip-not-in-census"};
    const auto uit = home.fips ? urbanness.find(*home.fips) : urbanness.end();
    if (uit == urbanness.end()) return {std::nullopt, "fips-not-in-urbanness"};

    UserDemographics d;
    d.user_id = home.user_id;
    d.zip = *home.zip;
    d.fips = *home.fips;
    d.median_household_income = cit->second.median_household_income;
    d.pct_bachelor = cit->second.pct_bachelor;
    d.racial_diversity = racial_diversity_index(cit->second.race);
    d.simple_racial_diversity = simple_racial_diversity(cit->second.p_white());
    d.urbanness = uit->second;
    return {d, ""};
}

}  // namespace tastediv::geo
