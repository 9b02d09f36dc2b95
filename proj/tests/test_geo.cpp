#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "tastediv/geo.hpp"
#include "tastediv/textio.hpp"
#include "test_support.hpp"

using namespace tastediv;
using testsupport::TempDir;

namespace {

// 2020-03-01T00:00:00Z — a midnight, so hour arithmetic below stays readable.
constexpr std::int64_t kMidnight = 1583020800;

geo::GeocodedPing at(std::int64_t ts, std::string zip,
                     std::optional<int> offset = std::nullopt) {
    return {ts, offset, std::move(zip)};
}

geo::ZipTable tiny_zip_table(TempDir& tmp, const std::string& name = "zips.csv") {
    return geo::load_zips(tmp.file(name,
                                   "zip,centroid_lat,centroid_lon,fips\n"
                                   "20002,38.9,-77.0,11001\n"
                                   "10001,40.75,-74.0,36061\n"
                                   "60601,41.88,-87.62,17031\n"));
}

}  // namespace

TEST_SUITE_BEGIN("geo");

TEST_CASE("parse_pings reads offsets as optional and validates coordinates") {
    TempDir tmp;
    const auto pings = geo::parse_pings(
        tmp.file("pings.csv",
                 "user_id,timestamp_iso8601,utc_offset_minutes,lat,lon\n"
                 "u1,2020-03-01T00:00:00Z,-300,40.75,-74.0\n"
                 "u1,2020-03-01T12:00:00Z,,41.88,-87.62\n"));
    REQUIRE(pings.size() == 2);
    CHECK(pings[0].timestamp == kMidnight);
    CHECK(pings[0].utc_offset_minutes == -300);
    CHECK(pings[1].timestamp == kMidnight + 12 * 3600);
    CHECK_FALSE(pings[1].utc_offset_minutes.has_value());
    CHECK(pings[1].lat == doctest::Approx(41.88));

    CHECK_THROWS_WITH_AS(
        geo::parse_pings(tmp.file("badts.csv",
                                  "user_id,timestamp_iso8601,utc_offset_minutes,lat,lon\n"
                                  "u1,2020-03-99T00:00:00Z,,0,0\n")),
        doctest::Contains("badts.csv:2"), io::ParseError);
    CHECK_THROWS_WITH_AS(
        geo::parse_pings(tmp.file("badlat.csv",
                                  "user_id,timestamp_iso8601,utc_offset_minutes,lat,lon\n"
                                  "u1,2020-03-01T00:00:00Z,,91.0,0\n")),
        doctest::Contains("latitude out of range"), io::ParseError);
    CHECK_THROWS_WITH_AS(
        geo::parse_pings(tmp.file("badlon.csv",
                                  "user_id,timestamp_iso8601,utc_offset_minutes,lat,lon\n"
                                  "u1,2020-03-01T00:00:00Z,,0,-181.0\n")),
        doctest::Contains("longitude out of range"), io::ParseError);
}

TEST_CASE("load_zips sorts by ZIP and rejects duplicates") {
    TempDir tmp;
    const auto zips = tiny_zip_table(tmp);
    REQUIRE(zips.size() == 3);
    CHECK(zips.zips == std::vector<std::string>{"10001", "20002", "60601"});
    CHECK(zips.fips == std::vector<std::string>{"36061", "11001", "17031"});
    CHECK(zips.lat[0] == doctest::Approx(40.75));
    REQUIRE(zips.find("20002").has_value());
    CHECK(*zips.find("20002") == 1);
    CHECK_FALSE(zips.find("99999").has_value());

    // Unit vectors have unit norm.
    for (std::size_t i = 0; i < zips.size(); ++i) {
        const double norm2 = zips.ux[i] * zips.ux[i] + zips.uy[i] * zips.uy[i] +
                             zips.uz[i] * zips.uz[i];
        CHECK(norm2 == doctest::Approx(1.0).epsilon(1e-12));
    }

    CHECK_THROWS_WITH_AS(geo::load_zips(tmp.file("dup.csv",
                                                 "zip,centroid_lat,centroid_lon,fips\n"
                                                 "10001,1,1,a\n10001,2,2,b\n")),
                         doctest::Contains("duplicate zip"), io::ParseError);
}

TEST_CASE("haversine_km matches reference great-circle distances") {
    // One degree of longitude along the equator.
    CHECK(geo::haversine_km(0, 0, 0, 1) ==
          doctest::Approx(6371.0 * std::numbers::pi / 180.0).epsilon(1e-12));
    // Antipodal poles: half the circumference.
    CHECK(geo::haversine_km(90, 0, -90, 0) ==
          doctest::Approx(6371.0 * std::numbers::pi).epsilon(1e-12));
    CHECK(geo::haversine_km(40.75, -74.0, 40.75, -74.0) == 0.0);
    // Symmetry.
    CHECK(geo::haversine_km(40.75, -74.0, 41.88, -87.62) ==
          doctest::Approx(geo::haversine_km(41.88, -87.62, 40.75, -74.0)).epsilon(1e-14));
}

TEST_CASE("reverse_geocode agrees with a haversine argmin scan") {
    TempDir tmp;
    std::mt19937_64 rng(424242);
    std::uniform_real_distribution<double> ulat(-60.0, 60.0), ulon(-179.0, 179.0);

    std::string csv = "zip,centroid_lat,centroid_lon,fips\n";
    std::vector<double> zlat, zlon;
    for (int i = 0; i < 25; ++i) {
        zlat.push_back(ulat(rng));
        zlon.push_back(ulon(rng));
        char row[128];
        std::snprintf(row, sizeof row, "%05d,%.6f,%.6f,f%02d\n", 10000 + i * 73,
                      zlat.back(), zlon.back(), i);
        csv += row;
    }
    const auto zips = geo::load_zips(tmp.file("rand.csv", csv));

    for (int q = 0; q < 60; ++q) {
        const double lat = ulat(rng), lon = ulon(rng);
        double best = 1e18;
        std::string expect;
        for (std::size_t i = 0; i < zips.size(); ++i) {
            const double km = geo::haversine_km(lat, lon, zips.lat[i], zips.lon[i]);
            if (km < best) {
                best = km;
                expect = zips.zips[i];
            }
        }
        const auto got = geo::reverse_geocode(lat, lon, zips, 1e9);
        REQUIRE(got.has_value());
        CHECK(*got == expect);
    }
}

TEST_CASE("reverse_geocode breaks exact ties toward the smaller ZIP") {
    TempDir tmp;
    // Two centroids symmetric about the query point; the larger ZIP comes
    // first in the file to prove sorting, not file order, decides.
    const auto zips = geo::load_zips(tmp.file("tie.csv",
                                              "zip,centroid_lat,centroid_lon,fips\n"
                                              "99999,0,-1,b\n"
                                              "11111,0,1,a\n"));
    const auto got = geo::reverse_geocode(0.0, 0.0, zips, 1e9);
    REQUIRE(got.has_value());
    CHECK(*got == "11111");
}

TEST_CASE("reverse_geocode honors the distance cutoff") {
    TempDir tmp;
    const auto zips = geo::load_zips(tmp.file("one.csv",
                                              "zip,centroid_lat,centroid_lon,fips\n"
                                              "00001,0,0,f\n"));
    // (1, 0) is ~111.195 km from the centroid.
    CHECK_FALSE(geo::reverse_geocode(1.0, 0.0, zips, 100.0).has_value());
    const auto got = geo::reverse_geocode(1.0, 0.0, zips, 112.0);
    REQUIRE(got.has_value());
    CHECK(*got == "00001");

    const geo::ZipTable empty;
    CHECK_THROWS_AS(geo::reverse_geocode(0, 0, empty, 1e9), std::runtime_error);
}

TEST_CASE("is_night is half-open on [start, end) in local time") {
    const geo::NightWindow w;  // 22:00 .. 06:00, default offset 0

    CHECK(geo::is_night(at(kMidnight + 22 * 3600, "z"), w));          // 22:00:00
    CHECK_FALSE(geo::is_night(at(kMidnight + 22 * 3600 - 1, "z"), w));  // 21:59:59
    CHECK(geo::is_night(at(kMidnight + 6 * 3600 - 1, "z"), w));       // 05:59:59
    CHECK_FALSE(geo::is_night(at(kMidnight + 6 * 3600, "z"), w));     // 06:00:00
    CHECK(geo::is_night(at(kMidnight, "z"), w));                      // midnight

    // A per-ping offset shifts the local clock.
    CHECK_FALSE(geo::is_night(at(kMidnight + 23 * 3600, "z", -120), w));  // 21:00 local
    CHECK(geo::is_night(at(kMidnight + 23 * 3600, "z", -60), w));        // 22:00 local

    // Pings without an offset fall back to the window's default.
    geo::NightWindow west = w;
    west.default_offset_minutes = -60;
    CHECK_FALSE(geo::is_night(at(kMidnight + 22 * 3600 + 1800, "z"), west));  // 21:30
    CHECK(geo::is_night(at(kMidnight + 22 * 3600 + 1800, "z"), w));           // 22:30

    // Non-wrapping windows work too.
    geo::NightWindow small;
    small.start_hour = 1;
    small.end_hour = 5;
    CHECK(geo::is_night(at(kMidnight + 3 * 3600, "z"), small));
    CHECK_FALSE(geo::is_night(at(kMidnight + 22 * 3600, "z"), small));
}

TEST_CASE("plurality_zips returns every maximal ZIP, sorted") {
    std::vector<geo::GeocodedPing> pings;
    for (int i = 0; i < 3; ++i) pings.push_back(at(kMidnight + i, "B"));
    for (int i = 0; i < 3; ++i) pings.push_back(at(kMidnight + i, "A"));
    pings.push_back(at(kMidnight, "C"));

    CHECK(geo::plurality_zips(pings) == std::vector<std::string>{"A", "B"});
    CHECK(geo::plurality_zips({}).empty());
}

TEST_CASE("night_plurality_zips counts only the night subset") {
    const geo::NightWindow w;
    std::vector<geo::GeocodedPing> pings;
    // Five daytime pings in A, two night pings in B.
    for (int i = 0; i < 5; ++i) pings.push_back(at(kMidnight + 12 * 3600 + i, "A"));
    for (int i = 0; i < 2; ++i) pings.push_back(at(kMidnight + 23 * 3600 + i, "B"));

    CHECK(geo::plurality_zips(pings) == std::vector<std::string>{"A"});
    CHECK(geo::night_plurality_zips(pings, w) == std::vector<std::string>{"B"});

    // All-daytime input leaves the night set empty.
    std::vector<geo::GeocodedPing> day = {at(kMidnight + 12 * 3600, "A")};
    CHECK(geo::night_plurality_zips(day, w).empty());
}

TEST_CASE("n_days_zips span mode measures first-to-last elapsed time") {
    std::vector<geo::GeocodedPing> pings = {
        at(kMidnight, "A"), at(kMidnight + 10 * 86400, "A"),          // exactly 10 days
        at(kMidnight, "B"), at(kMidnight + 10 * 86400 - 1, "B"),      // a hair under
    };
    CHECK(geo::n_days_zips(pings, 10.0) == std::vector<std::string>{"A"});
    CHECK(geo::n_days_zips(pings, 9.0) == std::vector<std::string>{"A", "B"});
    // A lone ping spans zero days.
    std::vector<geo::GeocodedPing> lone = {at(kMidnight, "C")};
    CHECK(geo::n_days_zips(lone, 0.0) == std::vector<std::string>{"C"});
    CHECK(geo::n_days_zips(lone, 0.5).empty());
}

TEST_CASE("n_days_zips distinct mode counts unique UTC dates") {
    std::vector<geo::GeocodedPing> pings;
    // Ten pings on five distinct dates (two per date) in A; ten pings on ten
    // distinct dates in B.
    for (int d = 0; d < 5; ++d) {
        pings.push_back(at(kMidnight + d * 86400, "A"));
        pings.push_back(at(kMidnight + d * 86400 + 3600, "A"));
    }
    for (int d = 0; d < 10; ++d) pings.push_back(at(kMidnight + d * 86400, "B"));

    CHECK(geo::n_days_zips(pings, 10.0, true) == std::vector<std::string>{"B"});
    CHECK(geo::n_days_zips(pings, 5.0, true) == std::vector<std::string>{"A", "B"});

    // Pre-epoch stamps floor toward earlier dates rather than toward zero.
    std::vector<geo::GeocodedPing> old = {at(-1, "Z"), at(-86400, "Z"), at(0, "Z")};
    CHECK(geo::n_days_zips(old, 2.0, true) == std::vector<std::string>{"Z"});
    CHECK(geo::n_days_zips(old, 3.0, true).empty());
}

TEST_CASE("resolve_home resolves a clear-cut commuter") {
    TempDir tmp;
    const auto zips = tiny_zip_table(tmp);
    geo::HomePolicy policy;

    std::vector<geo::GeocodedPing> pings;
    // 12 night pings at home across 12 days, 3 daytime pings elsewhere.
    for (int d = 0; d < 12; ++d) pings.push_back(at(kMidnight + d * 86400 + 23 * 3600, "10001"));
    for (int d = 0; d < 3; ++d) pings.push_back(at(kMidnight + d * 86400 + 12 * 3600, "20002"));

    const auto home = geo::resolve_home("u1", pings, zips, policy);
    CHECK(home.resolved);
    CHECK(home.user_id == "u1");
    REQUIRE(home.zip.has_value());
    CHECK(*home.zip == "10001");
    REQUIRE(home.fips.has_value());
    CHECK(*home.fips == "36061");
    CHECK(home.reason.empty());
    CHECK(home.plurality_set == std::vector<std::string>{"10001"});
    CHECK(home.night_set == std::vector<std::string>{"10001"});
    CHECK(home.ndays_set == std::vector<std::string>{"10001"});
}

TEST_CASE("resolve_home flags users with too few pings") {
    TempDir tmp;
    const auto zips = tiny_zip_table(tmp);
    geo::HomePolicy policy;

    std::vector<geo::GeocodedPing> pings;
    for (int d = 0; d < 9; ++d) pings.push_back(at(kMidnight + d * 86400, "10001"));
    const auto home = geo::resolve_home("u2", pings, zips, policy);
    CHECK_FALSE(home.resolved);
    CHECK(home.reason == "too-few-pings");
    CHECK_FALSE(home.zip.has_value());

    // The candidate sets are still reported for diagnostics.
    CHECK(home.plurality_set == std::vector<std::string>{"10001"});
}

TEST_CASE("resolve_home reports an empty intersection") {
    TempDir tmp;
    const auto zips = tiny_zip_table(tmp);
    geo::HomePolicy policy;

    // Plurality says 20002 (8 daytime pings in one day); night says 10001
    // (4 night pings); nothing spans 10 days.
    std::vector<geo::GeocodedPing> pings;
    for (int i = 0; i < 8; ++i) pings.push_back(at(kMidnight + 10 * 3600 + i * 600, "20002"));
    for (int i = 0; i < 4; ++i) pings.push_back(at(kMidnight + 23 * 3600 + i * 600, "10001"));

    const auto home = geo::resolve_home("u3", pings, zips, policy);
    CHECK_FALSE(home.resolved);
    CHECK(home.reason == "empty-intersection");
    CHECK(home.plurality_set == std::vector<std::string>{"20002"});
    CHECK(home.night_set == std::vector<std::string>{"10001"});
    CHECK(home.ndays_set.empty());
}

TEST_CASE("resolve_home breaks symmetric ties toward the smaller ZIP") {
    TempDir tmp;
    const auto zips = tiny_zip_table(tmp);
    geo::HomePolicy policy;

    // Perfectly symmetric history across two ZIPs: 6 night pings each,
    // spanning 11 days each.
    std::vector<geo::GeocodedPing> pings;
    for (int d = 0; d < 6; ++d) {
        pings.push_back(at(kMidnight + 2 * d * 86400 + 23 * 3600, "20002"));
        pings.push_back(at(kMidnight + 2 * d * 86400 + 23 * 3600 + 60, "10001"));
    }

    const auto home = geo::resolve_home("u4", pings, zips, policy);
    CHECK(home.resolved);
    REQUIRE(home.zip.has_value());
    CHECK(*home.zip == "10001");
    CHECK(home.reason == "tie-break");
}

TEST_CASE("load_census validates shares and exposes labeled race columns") {
    TempDir tmp;
    const std::string header =
        "zip,median_household_income,pct_bachelor,p_white,p_black,p_native,p_asian,"
        "p_hispanic,p_pacific,p_two_or_more,p_other\n";
    const auto census = geo::load_census(
        tmp.file("census.csv",
                 header + "10001,85000,0.45,0.6,0.2,0.01,0.09,0.06,0.01,0.02,0.01\n"));
    REQUIRE(census.count("10001") == 1);
    const auto& rec = census.at("10001");
    CHECK(rec.median_household_income == doctest::Approx(85000.0));
    CHECK(rec.pct_bachelor == doctest::Approx(0.45));
    CHECK(rec.p_white() == doctest::Approx(0.6));
    CHECK(geo::CensusRecord::labels()[0] == "p_white");
    CHECK(geo::CensusRecord::labels()[7] == "p_other");

    CHECK_THROWS_WITH_AS(
        geo::load_census(tmp.file(
            "badsum.csv",
            header + "10001,85000,0.45,0.5,0.2,0.01,0.09,0.06,0.01,0.02,0.01\n")),
        doctest::Contains("race proportions sum"), io::ParseError);
    CHECK_THROWS_WITH_AS(
        geo::load_census(tmp.file(
            "badpct.csv",
            header + "10001,85000,1.45,0.6,0.2,0.01,0.09,0.06,0.01,0.02,0.01\n")),
        doctest::Contains("pct_bachelor"), io::ParseError);
    CHECK_THROWS_WITH_AS(
        geo::load_census(tmp.file(
            "badrace.csv",
            header + "10001,85000,0.45,1.6,-0.8,0.01,0.09,0.06,0.01,0.02,0.01\n")),
        doctest::Contains("p_white out of [0,1]"), io::ParseError);
}

TEST_CASE("load_urbanness accepts codes 1..6 only") {
    TempDir tmp;
    const auto urb = geo::load_urbanness(
        tmp.file("urbanness.csv", "fips,urbanness\n36061,1\n17031,3\n"));
    REQUIRE(urb.size() == 2);
    CHECK(urb.at("36061") == 1);
    CHECK(urb.at("17031") == 3);

    CHECK_THROWS_WITH_AS(
        geo::load_urbanness(tmp.file("zero.csv", "fips,urbanness\n36061,0\n")),
        doctest::Contains("out of 1..6"), io::ParseError);
    CHECK_THROWS_WITH_AS(
        geo::load_urbanness(tmp.file("seven.csv", "fips,urbanness\n36061,7\n")),
        doctest::Contains("out of 1..6"), io::ParseError);
    CHECK_THROWS_WITH_AS(
        geo::load_urbanness(tmp.file("dup.csv", "fips,urbanness\n36061,1\n36061,2\n")),
        doctest::Contains("duplicate fips"), io::ParseError);
}

TEST_CASE("racial diversity indices match hand-worked values") {
    const std::vector<double> shares = {0.6, 0.2, 0.1, 0.1};
    // 1 - (0.36 + 0.04 + 0.01 + 0.01) = 0.58
    CHECK(geo::racial_diversity_index(shares) == doctest::Approx(0.58).epsilon(1e-12));

    const std::vector<double> mono = {1.0, 0.0, 0.0};
    CHECK(geo::racial_diversity_index(mono) == doctest::Approx(0.0));

    const std::vector<double> bad_sum = {0.5, 0.1};
    CHECK_THROWS_AS(geo::racial_diversity_index(bad_sum), std::domain_error);
    const std::vector<double> bad_range = {1.5, -0.5};
    CHECK_THROWS_AS(geo::racial_diversity_index(bad_range), std::domain_error);

    CHECK(geo::simple_racial_diversity(0.6) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(geo::simple_racial_diversity(1.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS(geo::simple_racial_diversity(1.2), std::domain_error);
}

TEST_CASE("join_census reports precise failure reasons") {
    geo::CensusTable census;
    geo::CensusRecord rec;
    rec.zip = "10001";
    rec.median_household_income = 85000.0;
    rec.pct_bachelor = 0.45;
    rec.race = {0.6, 0.2, 0.01, 0.09, 0.06, 0.01, 0.02, 0.01};
    census["10001"] = rec;
    const std::map<std::string, int> urbanness = {{"36061", 1}};

    geo::HomeLocation home;
    home.user_id = "u1";
    home.zip = "10001";
    home.fips = "36061";
    home.resolved = true;

    const auto [demo, reason] = geo::join_census(home, census, urbanness);
    REQUIRE(demo.has_value());
    CHECK(reason.empty());
    CHECK(demo->median_household_income == doctest::Approx(85000.0));
    CHECK(demo->pct_bachelor == doctest::Approx(0.45));
    CHECK(demo->racial_diversity ==
          doctest::Approx(geo::racial_diversity_index(rec.race)).epsilon(1e-14));
    CHECK(demo->simple_racial_diversity == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(demo->urbanness == 1);

    geo::HomeLocation unresolved;
    unresolved.user_id = "u2";
    CHECK(geo::join_census(unresolved, census, urbanness).second == "no-home");

    geo::HomeLocation stranger = home;
    stranger.zip = "99999";
    CHECK(geo::join_census(stranger, census, urbanness).second == "zip-not-in-census");

    geo::HomeLocation lost = home;
    lost.fips = "00000";
    CHECK(geo::join_census(lost, census, urbanness).second == "fips-not-in-urbanness");
}

TEST_SUITE_END();
