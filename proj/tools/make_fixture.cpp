// Generates the bundled demo corpus: a 100-user listening history with a
// two-level category hierarchy, plus the location, census, interest, and
// rating side tables the full pipeline consumes. Output is deterministic for
// a given seed so the checked-in fixture can be regenerated.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "tastediv/divcore.hpp"
#include "tastediv/ingest.hpp"

namespace fs = std::filesystem;
using tastediv::divcore::cosine_distance_matrix;
using tastediv::divcore::diversity_batch;
using namespace tastediv::ingest;

namespace {

struct GenreSpec {
    const char* name;
    std::array<const char*, 3> variants;
};

constexpr std::array<GenreSpec, 12> kGenres = {{
    {"rock", {"garage", "psych", "indie"}},
    {"jazz", {"bebop", "swing", "fusion"}},
    {"blues", {"delta", "chicago", "boogie"}},
    {"metal", {"doom", "speed", "sludge"}},
    {"pop", {"synth", "dream", "dance"}},
    {"hiphop", {"boombap", "trap", "abstract"}},
    {"electronic", {"house", "techno", "ambient"}},
    {"classical", {"baroque", "romantic", "minimal"}},
    {"country", {"honkytonk", "bluegrass", "outlaw"}},
    {"folk", {"revival", "ballad", "roots"}},
    {"reggae", {"dub", "ska", "dancehall"}},
    {"salsa", {"dura", "romantica", "timba"}},
}};

constexpr std::array<const char*, 16> kAdjectives = {
    "Velvet", "Neon",   "Crimson", "Silver",  "Electric", "Midnight",
    "Golden", "Rusty",  "Paper",   "Wild",    "Quiet",    "Broken",
    "Lunar",  "Scarlet", "Hollow",  "Prairie"};
constexpr std::array<const char*, 16> kNouns = {
    "Arcade", "Harbor", "Foxes",  "Parade", "Mirror",   "Canyon",
    "Lantern", "Echo",  "Orchard", "Static", "Pilots",   "Meadow",
    "Signal", "Corsair", "Attic",  "Riviera"};

struct ZipInfo {
    const char* zip;
    double lat, lon;
    const char* fips;
    int urbanness;
    bool in_census;
    bool in_urbanness;
};

// Two deliberate gaps: 87501's county is absent from the urbanness table and
// 59715 is absent from the census table, so the feature join has real
// exclusions to report.
constexpr std::array<ZipInfo, 16> kZips = {{
    {"10001", 40.750, -73.997, "36061", 1, true, true},
    {"11201", 40.695, -73.990, "36047", 1, true, true},
    {"60601", 41.885, -87.620, "17031", 1, true, true},
    {"60614", 41.922, -87.650, "17031", 1, true, true},
    {"94103", 37.770, -122.410, "06075", 1, true, true},
    {"90012", 34.060, -118.240, "06037", 1, true, true},
    {"98101", 47.610, -122.330, "53033", 1, true, true},
    {"73301", 30.260, -97.740, "48453", 2, true, true},
    {"33101", 25.770, -80.190, "12086", 1, true, true},
    {"80202", 39.750, -104.990, "08031", 2, true, true},
    {"02108", 42.357, -71.060, "25025", 1, true, true},
    {"19103", 39.950, -75.170, "42101", 1, true, true},
    {"48226", 42.330, -83.040, "26163", 2, true, true},
    {"30303", 33.750, -84.390, "13121", 2, true, true},
    {"87501", 35.690, -105.930, "35049", 4, true, false},
    {"59715", 45.680, -111.040, "30031", 5, false, true},
}};

constexpr std::array<const char*, 5> kMusicTopics = {
    "Music", "live music", "musicians", "music production", "vinyl collecting"};
constexpr std::array<const char*, 12> kOtherTopics = {
    "travel", "food",   "film",   "sports", "news",   "technology",
    "art",    "fitness", "books", "gaming", "hiking", "photography"};

std::string pad3(int v) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%03d", v);
    return buf;
}

std::string two(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

std::string stamp(int day, int hour, int minute) {
    return "2021-06-" + two(day) + "T" + two(hour) + ":" + two(minute) + ":00Z";
}

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    // Uniform integer in [lo, hi].
    int between(int lo, int hi) {
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double unit() { return std::ldexp(static_cast<double>(eng_() >> 11), -53); }
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[eng_() % i]);
    }

  private:
    std::mt19937_64 eng_;
};

struct ArtistGen {
    std::string id;
    std::string name;
    std::vector<std::string> genres;     // as indices into kGenres? keep labels
    std::vector<std::string> subgenres;
    int primary_genre = 0;
};

struct UserPlays {
    std::string user_id;
    std::vector<std::pair<std::string, long long>> plays;  // artist -> count
};

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "make_fixture: cannot write %s\n", (dir / name).c_str());
        std::exit(1);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2 || argc > 3) {
        std::fprintf(stderr, "usage: make_fixture <out_dir> [seed]\n");
        return 2;
    }
    const fs::path out_dir = argv[1];
    const std::uint64_t seed = argc == 3 ? std::stoull(argv[2]) : 7;
    fs::create_directories(out_dir);
    Rng rng(seed);

    // ---------------------------------------------------------------- catalog
    std::vector<ArtistGen> artists;
    for (int g = 0; g < 12; ++g) {
        for (int i = 0; i < 12; ++i) {
            ArtistGen a;
            a.id = "a" + pad3(static_cast<int>(artists.size()));
            a.name = std::string(kAdjectives[rng.between(0, 15)]) + " " +
                     kNouns[rng.between(0, 15)];
            a.primary_genre = g;
            a.genres.push_back(kGenres[g].name);
            if (rng.unit() < 0.15) {
                int other = rng.between(0, 11);
                if (other == g) other = (other + 1) % 12;
                a.genres.push_back(kGenres[other].name);
            }
            // One or two subgenres drawn from the artist's genres.
            const int n_sub = rng.unit() < 0.3 ? 2 : 1;
            std::set<std::string> subs;
            while (static_cast<int>(subs.size()) < n_sub) {
                const std::string& genre =
                    a.genres[static_cast<std::size_t>(rng.between(
                        0, static_cast<int>(a.genres.size()) - 1))];
                int gi = 0;
                for (int k = 0; k < 12; ++k)
                    if (genre == kGenres[k].name) gi = k;
                subs.insert(genre + "_" + kGenres[gi].variants[rng.between(0, 2)]);
            }
            a.subgenres.assign(subs.begin(), subs.end());
            artists.push_back(std::move(a));
        }
    }
    // Two unclassified artists exercise the drop path.
    for (int i = 0; i < 2; ++i) {
        ArtistGen a;
        a.id = "a" + pad3(static_cast<int>(artists.size()));
        a.name = std::string(kAdjectives[rng.between(0, 15)]) + " " +
                 kNouns[rng.between(0, 15)];
        artists.push_back(std::move(a));
    }

    {
        auto out = open_out(out_dir, "catalog.jsonl");
        for (const ArtistGen& a : artists) {
            out << R"({"artist_id":")" << a.id << R"(","name":")" << a.name
                << R"(","genres":[)";
            for (std::size_t i = 0; i < a.genres.size(); ++i)
                out << (i ? "," : "") << '"' << a.genres[i] << '"';
            out << R"(],"subgenres":[)";
            for (std::size_t i = 0; i < a.subgenres.size(); ++i)
                out << (i ? "," : "") << '"' << a.subgenres[i] << '"';
            out << "]}\n";
        }
    }

    // ------------------------------------------------------------------ plays
    // Users u000..u099 qualify; u100..u102 are designed dropouts.
    std::vector<std::vector<int>> artists_by_genre(12);
    for (std::size_t i = 0; i < artists.size(); ++i)
        if (!artists[i].genres.empty())
            for (const std::string& g : artists[i].genres)
                for (int k = 0; k < 12; ++k)
                    if (g == kGenres[k].name)
                        artists_by_genre[k].push_back(static_cast<int>(i));

    std::vector<UserPlays> users;
    for (int u = 0; u < 100; ++u) {
        UserPlays up;
        up.user_id = "u" + pad3(u);
        const double omnivory = static_cast<double>(u) / 99.0;
        const int n_genres = 1 + static_cast<int>(std::floor(omnivory * 5.001));

        std::vector<int> order(12);
        for (int g = 0; g < 12; ++g) order[g] = g;
        rng.shuffle(order);
        const std::vector<int> preferred(order.begin(), order.begin() + n_genres);

        std::vector<int> pool;
        for (int g : preferred)
            for (int a : artists_by_genre[g]) pool.push_back(a);
        std::sort(pool.begin(), pool.end());
        pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
        rng.shuffle(pool);

        const int picks = std::min<int>(12, static_cast<int>(pool.size()));
        for (int i = 0; i < picks; ++i) {
            const ArtistGen& a = artists[static_cast<std::size_t>(pool[i])];
            const bool core = a.primary_genre == preferred.front();
            const long long count = core ? 400 + rng.between(0, 1600)
                                         : 100 + rng.between(0, 400);
            up.plays.emplace_back(a.id, count);
        }
        // A couple of under-threshold strays for texture.
        for (int i = picks; i < picks + 2 && i < static_cast<int>(pool.size()); ++i)
            up.plays.emplace_back(artists[static_cast<std::size_t>(pool[i])].id,
                                  rng.between(5, 99));
        users.push_back(std::move(up));
    }
    {
        // u100: nothing over the play threshold.
        UserPlays up;
        up.user_id = "u100";
        for (int i = 0; i < 8; ++i)
            up.plays.emplace_back(artists[static_cast<std::size_t>(i * 7)].id,
                                  rng.between(5, 99));
        users.push_back(std::move(up));
    }
    {
        // u101: heavy plays, but only on the unclassified artists.
        UserPlays up;
        up.user_id = "u101";
        up.plays.emplace_back(artists[artists.size() - 2].id, 900);
        up.plays.emplace_back(artists[artists.size() - 1].id, 700);
        users.push_back(std::move(up));
    }
    {
        // u102: five qualifying artists — short of the top-10 policy.
        UserPlays up;
        up.user_id = "u102";
        for (int i = 0; i < 5; ++i)
            up.plays.emplace_back(artists[static_cast<std::size_t>(i)].id,
                                  200 + rng.between(0, 300));
        users.push_back(std::move(up));
    }

    {
        auto out = open_out(out_dir, "plays.csv");
        out << "user_id,artist_id,play_count\n";
        for (const UserPlays& up : users)
            for (const auto& [artist, count] : up.plays)
                out << up.user_id << ',' << artist << ',' << count << '\n';
    }

    // ------------------------------------------------------------------- zips
    {
        auto out = open_out(out_dir, "zips.csv");
        out << "zip,centroid_lat,centroid_lon,fips\n";
        for (const ZipInfo& z : kZips) {
            char row[96];
            std::snprintf(row, sizeof row, "%s,%.3f,%.3f,%s\n", z.zip, z.lat, z.lon,
                          z.fips);
            out << row;
        }
    }

    // ------------------------------------------------------------------ pings
    // Most users get a clear night-plurality home; a handful are designed to
    // stay unresolved, and u054 sends no pings at all.
    std::map<std::string, int> home_zip;  // user -> index into kZips
    {
        auto out = open_out(out_dir, "pings.csv");
        out << "user_id,timestamp_iso8601,utc_offset_minutes,lat,lon\n";
        for (int u = 0; u < 100; ++u) {
            const std::string id = "u" + pad3(u);
            if (u == 54) continue;  // no pings at all

            int home = rng.between(0, 13);
            if (u == 40 || u == 41) home = 15;  // 59715: zip not in census
            if (u == 42 || u == 43) home = 14;  // 87501: county not in urbanness
            home_zip[id] = home;
            const ZipInfo& hz = kZips[static_cast<std::size_t>(home)];
            char coords[40];
            std::snprintf(coords, sizeof coords, ",,%.3f,%.3f\n", hz.lat, hz.lon);

            if (u == 50 || u == 51) {
                // Too few pings to call a home.
                const int n = rng.between(4, 8);
                for (int i = 0; i < n; ++i)
                    out << id << ',' << stamp(1 + 2 * i, 23, 15) << coords;
                continue;
            }
            if (u == 52 || u == 53) {
                // Daytime-only history: the night set stays empty.
                for (int i = 0; i < 14; ++i)
                    out << id << ',' << stamp(1 + i, 13, 30) << coords;
                continue;
            }
            if (u == 55) {
                // Symmetric split between two ZIPs: resolved by tie-break.
                const ZipInfo& other = kZips[static_cast<std::size_t>((home + 3) % 14)];
                char alt[40];
                std::snprintf(alt, sizeof alt, ",,%.3f,%.3f\n", other.lat, other.lon);
                for (int i = 0; i < 8; ++i) {
                    out << id << ',' << stamp(1 + 2 * i, 23, 0) << coords;
                    out << id << ',' << stamp(1 + 2 * i, 23, 30) << alt;
                }
                continue;
            }

            // The regular case: nights at home across 2+ weeks, the odd
            // daytime errand elsewhere.
            const int nights = rng.between(11, 16);
            const int span = rng.between(14, 24);
            for (int i = 0; i < nights; ++i) {
                const int day = 1 + (i * span) / nights;
                out << id << ',' << stamp(day, 23, rng.between(0, 59)) << coords;
            }
            const int errands = rng.between(0, 3);
            for (int i = 0; i < errands; ++i) {
                const ZipInfo& z = kZips[static_cast<std::size_t>(rng.between(0, 13))];
                char alt[40];
                std::snprintf(alt, sizeof alt, ",,%.3f,%.3f\n", z.lat, z.lon);
                out << id << ',' << stamp(rng.between(2, 26), 12, rng.between(0, 59))
                    << alt;
            }
        }
    }

    // ----------------------------------------------------------------- census
    {
        auto out = open_out(out_dir, "census.csv");
        out << "zip,median_household_income,pct_bachelor,p_white,p_black,p_native,"
               "p_asian,p_hispanic,p_pacific,p_two_or_more,p_other\n";
        for (const ZipInfo& z : kZips) {
            if (!z.in_census) continue;
            const int income = 35000 + rng.between(0, 85) * 1000;
            const double bachelor = 0.12 + rng.between(0, 45) * 0.01;
            std::array<double, 8> race{};
            double total = 0.0;
            for (double& r : race) total += (r = 0.05 + rng.unit());
            for (double& r : race) r /= total;
            char row[200];
            std::snprintf(row, sizeof row,
                          "%s,%d,%.2f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f,%.4f\n",
                          z.zip, income, bachelor, race[0], race[1], race[2], race[3],
                          race[4], race[5], race[6], race[7]);
            out << row;
        }
    }

    // -------------------------------------------------------------- urbanness
    {
        auto out = open_out(out_dir, "urbanness.csv");
        out << "fips,urbanness\n";
        std::set<std::string> seen;
        for (const ZipInfo& z : kZips) {
            if (!z.in_urbanness) continue;
            if (!seen.insert(z.fips).second) continue;
            out << z.fips << ',' << z.urbanness << '\n';
        }
    }

    // -------------------------------------------------------------- interests
    {
        auto out = open_out(out_dir, "interests.jsonl");
        for (int u = 0; u < 100; ++u) {
            if (u == 60) continue;  // no interest profile at all
            const std::string id = "u" + pad3(u);
            std::vector<std::string> topics;
            std::vector<int> weights;
            // At least one music-flavored topic for half the base, randomly
            // for the rest, so the music share spans a wide range.
            const int n_music = u < 50 ? rng.between(1, 2) : rng.between(0, 2);
            std::vector<int> midx = {0, 1, 2, 3, 4};
            rng.shuffle(midx);
            for (int i = 0; i < n_music; ++i) {
                topics.push_back(kMusicTopics[static_cast<std::size_t>(midx[i])]);
                weights.push_back(rng.between(2, 10));
            }
            std::vector<int> oidx(12);
            for (int i = 0; i < 12; ++i) oidx[i] = i;
            rng.shuffle(oidx);
            const int n_other = rng.between(3, 6);
            for (int i = 0; i < n_other; ++i) {
                topics.push_back(kOtherTopics[static_cast<std::size_t>(oidx[i])]);
                weights.push_back(rng.between(1, 8));
            }
            out << R"({"user_id":")" << id << R"(","topics":[)";
            for (std::size_t i = 0; i < topics.size(); ++i) {
                out << (i ? "," : "") << R"({"label":")" << topics[i]
                    << R"(","weight":)" << weights[i] << '}';
            }
            out << "]}\n";
        }
    }

    // ---------------------------------------------------------------- ratings
    // Three raters score 25 subjects; scores track genre-level diversity with
    // rater-specific noise so the agreement report has signal to find.
    {
        Catalog catalog = parse_catalog(out_dir / "catalog.jsonl");
        const std::vector<PlayRecord> plays = parse_plays(out_dir / "plays.csv");
        FilterPolicy policy;
        policy.top_k = 10;
        policy.min_plays_per_artist = 100;
        const Selection sel = select_top_artists(plays, policy, catalog);
        const ConsumptionMatrix cm =
            build_consumption_matrix(sel, catalog, CategoryLevel::Genre);
        const auto reports = diversity_batch(cm, cosine_distance_matrix(cm));

        std::map<std::string, double> rao;
        double max_rao = 1e-9;
        for (const auto& r : reports) {
            rao[r.user_id] = r.rao_stirling;
            max_rao = std::max(max_rao, r.rao_stirling);
        }

        auto out = open_out(out_dir, "ratings.csv");
        out << "subject_id,alice,bob,carol\n";
        for (int u = 0; u < 25; ++u) {
            const std::string id = "u" + pad3(u);
            const double base = 5.0 * rao.at(id) / max_rao;
            out << id;
            for (int r = 0; r < 3; ++r) {
                const int noise = rng.between(-1, 1);
                const int score =
                    std::clamp(static_cast<int>(std::lround(base)) + noise, 0, 5);
                out << ',' << score;
            }
            out << '\n';
        }
    }

    // ----------------------------------------------------------------- config
    {
        auto out = open_out(out_dir, "config.ini");
        out << "plays = plays.csv\n"
               "catalog = catalog.jsonl\n"
               "interests = interests.jsonl\n"
               "pings = pings.csv\n"
               "zips = zips.csv\n"
               "census = census.csv\n"
               "urbanness = urbanness.csv\n"
               "ratings = ratings.csv\n"
               "level = both\n"
               "top-k = 10\n"
               "min-plays = 100\n"
               "max-km = 30\n";
    }

    std::printf("fixture written to %s (%zu artists, %zu users)\n",
                out_dir.string().c_str(), artists.size(), users.size());
    return 0;
}
