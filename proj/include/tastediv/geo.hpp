#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tastediv::geo {

struct Ping {
    std::string user_id;
    std::int64_t timestamp = 0;              // seconds since epoch, UTC
    std::optional<int> utc_offset_minutes;   // absent when the source had none
    double lat = 0.0;
    double lon = 0.0;
};

// pings.csv: user_id,timestamp_iso8601,utc_offset_minutes,lat,lon
// (offset field may be empty). Rows keep file order.
std::vector<Ping> parse_pings(const std::string& path);

// ZIP centroid table sorted by ZIP code, with precomputed unit vectors so the
// nearest-centroid scan is a plain 3-D argmin.
struct ZipTable {
    std::vector<std::string> zips;   // ascending
    std::vector<std::string> fips;   // parallel to zips
    std::vector<double> lat, lon;    // degrees
    std::vector<double> ux, uy, uz;  // unit vectors on the sphere

    std::size_t size() const { return zips.size(); }
    std::optional<std::size_t> find(const std::string& zip) const;
};

// zips.csv: zip,centroid_lat,centroid_lon,fips
ZipTable load_zips(const std::string& path);

double haversine_km(double lat1, double lon1, double lat2, double lon2);

// Nearest ZIP centroid by great-circle distance, or nullopt when the nearest
// centroid is farther than max_km. Equidistant candidates resolve to the
// lexicographically smaller ZIP. Throws on an empty table.
std::optional<std::string> reverse_geocode(double lat, double lon, const ZipTable& zips,
                                           double max_km);

struct GeocodedPing {
    std::int64_t timestamp = 0;
    std::optional<int> utc_offset_minutes;
    std::string zip;
};

struct NightWindow {
    int start_hour = 22;  // inclusive, local time
    int end_hour = 6;     // exclusive, local time
    int default_offset_minutes = 0;  // used when a ping carries no offset
};

bool is_night(const GeocodedPing& ping, const NightWindow& window);

// ZIPs attaining the maximum ping count (empty input -> empty set).
std::vector<std::string> plurality_zips(std::span<const GeocodedPing> pings);

// Plurality over the night-time subset only.
std::vector<std::string> night_plurality_zips(std::span<const GeocodedPing> pings,
                                              const NightWindow& window);

// ZIPs whose pings span at least min_days from first to last; with
// distinct_days, ZIPs with at least min_days distinct UTC dates instead.
std::vector<std::string> n_days_zips(std::span<const GeocodedPing> pings, double min_days,
                                     bool distinct_days = false);

struct HomeLocation {
    std::string user_id;
    std::optional<std::string> zip;
    std::optional<std::string> fips;
    bool resolved = false;
    std::string reason;  // empty when resolved without a tie-break
    std::vector<std::string> plurality_set;
    std::vector<std::string> night_set;
    std::vector<std::string> ndays_set;
};

struct HomePolicy {
    NightWindow night;
    double min_days = 10.0;
    bool distinct_days = false;
    std::size_t min_pings = 10;
};

// Intersects the three candidate sets. Unresolved reasons: "too-few-pings"
// (fewer than min_pings geocoded pings) and "empty-intersection". Multi-ZIP
// intersections resolve to the highest ping count, then the lexicographically
// smaller ZIP, with reason "tie-break".
HomeLocation resolve_home(const std::string& user_id, std::span<const GeocodedPing> pings,
                          const ZipTable& zips, const HomePolicy& policy);

// Per-ZIP census demographics. Race proportions are stored in a fixed order;
// labels() names the groups.
struct CensusRecord {
    std::string zip;
    double median_household_income = 0.0;
    double pct_bachelor = 0.0;  // fraction in [0,1]
    std::array<double, 8> race{};

    static const std::array<std::string, 8>& labels();
    double p_white() const { return race[0]; }
};

using CensusTable = std::map<std::string, CensusRecord>;

// census.csv: zip,median_household_income,pct_bachelor,p_white,p_black,
// p_native,p_asian,p_hispanic,p_pacific,p_two_or_more,p_other. Race
// proportions must each lie in [0,1] and sum to 1 within 0.01.
CensusTable load_census(const std::string& path);

// urbanness.csv: fips,urbanness with codes in 1..6 (1 = most urban).
std::map<std::string, int> load_urbanness(const std::string& path);

// 1 - sum p_r^2 over the race proportions. Throws std::domain_error when a
// proportion leaves [0,1] or the sum strays more than 0.01 from 1.
double racial_diversity_index(std::span<const double> proportions);

// 1 - white_fraction.
double simple_racial_diversity(double white_fraction);

struct UserDemographics {
    std::string user_id;
    std::string zip, fips;
    double median_household_income = 0.0;
    double pct_bachelor = 0.0;
    double racial_diversity = 0.0;
    double simple_racial_diversity = 0.0;
    int urbanness = 0;
};

// Join a resolved home against census + urbanness tables. On failure the
// second member carries the reason: "no-home", "zip-not-in-census",
// "fips-not-in-urbanness".
std::pair<std::optional<UserDemographics>, std::string> join_census(
    const HomeLocation& home, const CensusTable& census,
    const std::map<std::string, int>& urbanness);

}  // namespace tastediv::geo
