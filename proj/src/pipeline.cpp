#include "tastediv/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <set>
#include <stdexcept>
#include <tuple>

#include <json.hpp>

#include "tastediv/textio.hpp"

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace tastediv::pipeline {

namespace {

// ---------------------------------------------------------------------------
// Staged output: every file is written to <name>.part and renamed into place
// only when the whole command has succeeded, so failures leave nothing torn.
// ---------------------------------------------------------------------------

class OutputStage {
  public:
    explicit OutputStage(const std::string& dir) : dir_(dir) {
        fs::create_directories(dir_);
    }

    OutputStage(const OutputStage&) = delete;
    OutputStage& operator=(const OutputStage&) = delete;

    ~OutputStage() {
        if (committed_) return;
        for (Entry& e : entries_) {
            if (e.out->is_open()) e.out->close();
            std::error_code ec;
            fs::remove(e.part, ec);
        }
    }

    std::ostream& create(const std::string& name) {
        Entry e;
        e.final = dir_ / name;
        e.part = dir_ / (name + ".part");
        e.out = std::make_unique<std::ofstream>(e.part, std::ios::binary);
        if (!*e.out)
            throw std::runtime_error("cannot open output file: " + e.part.string());
        entries_.push_back(std::move(e));
        return *entries_.back().out;
    }

    void commit() {
        for (Entry& e : entries_) {
            e.out->flush();
            if (!*e.out) throw std::runtime_error("write failed: " + e.part.string());
            e.out->close();
        }
        for (Entry& e : entries_) fs::rename(e.part, e.final);
        committed_ = true;
    }

  private:
    struct Entry {
        fs::path final;
        fs::path part;
        std::unique_ptr<std::ofstream> out;
    };

    fs::path dir_;
    std::vector<Entry> entries_;
    bool committed_ = false;
};

std::string join_set(const std::vector<std::string>& items) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ';';
        out += items[i];
    }
    return out;
}

std::vector<std::string> split_set(const std::string& joined) {
    std::vector<std::string> out;
    if (joined.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const std::size_t semi = joined.find(';', start);
        out.push_back(joined.substr(start, semi - start));
        if (semi == std::string::npos) break;
        start = semi + 1;
    }
    return out;
}

fs::path out_path(const PipelineConfig& cfg, const std::string& name) {
    return fs::path(cfg.out_dir) / name;
}

// JSON value for a real that may be non-finite: NaN maps to null, infinities
// to the strings "inf"/"-inf" (JSON numbers cannot carry them).
ordered_json json_real(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

// ---------------------------------------------------------------------------
// Writers
// ---------------------------------------------------------------------------

void write_distances(std::ostream& out, const divcore::DistanceMatrix& d) {
    out << "category";
    for (const std::string& c : d.categories) out << ',' << c;
    out << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << d.categories[i];
        for (std::size_t j = 0; j < d.size(); ++j) out << ',' << io::fmt6(d.at(i, j));
        out << '\n';
    }
}

void write_diversity(std::ostream& out, const std::vector<divcore::DiversityReport>& reports) {
    out << "user_id,rao_stirling,entropy,volume\n";
    for (const divcore::DiversityReport& r : reports)
        out << r.user_id << ',' << io::fmt6(r.rao_stirling) << ',' << io::fmt6(r.entropy) << ','
            << r.volume << '\n';
}

void write_mds(std::ostream& out, const divcore::MdsEmbedding& mds) {
    out << "category,x,y\n";
    for (std::size_t i = 0; i < mds.categories.size(); ++i)
        out << mds.categories[i] << ',' << io::fmt6(mds.coords[i * 2]) << ','
            << io::fmt6(mds.coords[i * 2 + 1]) << '\n';
}

std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", v);
    return buf;
}

// Minimal static scatter of the embedding, one labeled point per category.
void write_scatter_svg(std::ostream& out, const divcore::MdsEmbedding& mds) {
    constexpr double kSize = 640.0;
    constexpr double kMargin = 60.0;
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    for (std::size_t i = 0; i < mds.categories.size(); ++i) {
        xmin = std::min(xmin, mds.coords[i * 2]);
        xmax = std::max(xmax, mds.coords[i * 2]);
        ymin = std::min(ymin, mds.coords[i * 2 + 1]);
        ymax = std::max(ymax, mds.coords[i * 2 + 1]);
    }
    const double xspan = xmax - xmin > 0 ? xmax - xmin : 1.0;
    const double yspan = ymax - ymin > 0 ? ymax - ymin : 1.0;
    const auto sx = [&](double x) {
        return kMargin + (x - xmin) / xspan * (kSize - 2 * kMargin);
    };
    const auto sy = [&](double y) {
        return kSize - kMargin - (y - ymin) / yspan * (kSize - 2 * kMargin);
    };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"640\" "
           "viewBox=\"0 0 640 640\">\n";
    out << "  <rect width=\"640\" height=\"640\" fill=\"white\"/>\n";
    out << "  <rect x=\"40\" y=\"40\" width=\"560\" height=\"560\" fill=\"none\" "
           "stroke=\"#cccccc\"/>\n";
    for (std::size_t i = 0; i < mds.categories.size(); ++i) {
        const std::string cx = svg_num(sx(mds.coords[i * 2]));
        const std::string cy = svg_num(sy(mds.coords[i * 2 + 1]));
        out << "  <circle cx=\"" << cx << "\" cy=\"" << cy
            << "\" r=\"4\" fill=\"#3b6ea5\"/>\n";
        out << "  <text x=\"" << svg_num(sx(mds.coords[i * 2]) + 6.0) << "\" y=\""
            << svg_num(sy(mds.coords[i * 2 + 1]) - 6.0)
            << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">"
            << escape_xml(mds.categories[i]) << "</text>\n";
    }
    out << "</svg>\n";
}

void write_homes(std::ostream& out, const std::map<std::string, geo::HomeLocation>& homes) {
    out << "user_id,zip,fips,resolved,reason,plurality_set,night_set,ndays_set\n";
    for (const auto& [user, h] : homes) {
        out << user << ',' << h.zip.value_or("") << ',' << h.fips.value_or("") << ','
            << (h.resolved ? "true" : "false") << ',' << h.reason << ','
            << join_set(h.plurality_set) << ',' << join_set(h.night_set) << ','
            << join_set(h.ndays_set) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Shared computation helpers
// ---------------------------------------------------------------------------

struct LevelData {
    ingest::ConsumptionMatrix cm;
    divcore::DistanceMatrix d;
    std::vector<divcore::DiversityReport> reports;
};

LevelData compute_level(const ingest::Selection& selection, const ingest::Catalog& catalog,
                        ingest::CategoryLevel level, std::vector<ingest::DroppedUser>* drops) {
    LevelData data;
    data.cm = ingest::build_consumption_matrix(selection, catalog, level, drops);
    data.d = divcore::cosine_distance_matrix(data.cm);
    data.reports = divcore::diversity_batch(data.cm, data.d);
    return data;
}

struct Corpus {
    ingest::Catalog catalog;
    ingest::Selection selection;
};

Corpus load_corpus(const PipelineConfig& cfg) {
    Corpus corpus;
    corpus.catalog = ingest::parse_catalog(cfg.catalog);
    const std::vector<ingest::PlayRecord> plays = ingest::parse_plays(cfg.plays);
    corpus.selection = ingest::select_top_artists(plays, cfg.filter, corpus.catalog);
    return corpus;
}

std::map<std::string, geo::HomeLocation> compute_homes(const PipelineConfig& cfg) {
    const std::vector<geo::Ping> pings = geo::parse_pings(cfg.pings);
    const geo::ZipTable zips = geo::load_zips(cfg.zips);

    std::set<std::string> users;
    std::map<std::string, std::vector<geo::GeocodedPing>> geocoded;
    for (const geo::Ping& p : pings) {
        users.insert(p.user_id);
        const auto zip = geo::reverse_geocode(p.lat, p.lon, zips, cfg.max_km);
        if (zip) geocoded[p.user_id].push_back({p.timestamp, p.utc_offset_minutes, *zip});
    }

    std::map<std::string, geo::HomeLocation> homes;
    static const std::vector<geo::GeocodedPing> kNone;
    for (const std::string& user : users) {
        const auto it = geocoded.find(user);
        const auto& gp = it == geocoded.end() ? kNone : it->second;
        homes.emplace(user, geo::resolve_home(user, gp, zips, cfg.home));
    }
    return homes;
}

// Diversity reports per level: reuse the files an earlier command committed,
// otherwise recompute from the raw corpus (pipeline composability).
std::vector<divcore::DiversityReport> diversity_for_level(const PipelineConfig& cfg,
                                                          ingest::CategoryLevel level,
                                                          std::unique_ptr<Corpus>& corpus) {
    const fs::path path = out_path(cfg, "diversity" + level_suffix(cfg, level) + ".csv");
    if (fs::exists(path)) return load_diversity(path.string());
    if (!corpus) corpus = std::make_unique<Corpus>(load_corpus(cfg));
    return compute_level(corpus->selection, corpus->catalog, level, nullptr).reports;
}

struct InterestFeatures {
    std::map<std::string, double> music_share;
    std::map<std::string, double> diversity;
};

InterestFeatures compute_interest_features(const std::string& path) {
    const std::vector<ingest::UserInterests> interests = ingest::parse_interests(path);
    InterestFeatures out;
    for (const ingest::UserInterests& ui : interests) {
        double total = 0.0;
        for (const ingest::InterestTopic& t : ui.topics) total += t.weight;
        if (total <= 0.0) continue;  // reported by build_interest_matrix
        out.music_share[ui.user_id] = ingest::music_interest_share(ui.topics);
    }
    const ingest::ConsumptionMatrix im = ingest::build_interest_matrix(interests, nullptr);
    if (im.n_users() == 0) return out;
    if (im.n_categories() < 2) {
        // A single shared topic carries no disparity to spread over.
        for (const std::string& user : im.users) out.diversity[user] = 0.0;
        return out;
    }
    const divcore::DistanceMatrix d = divcore::cosine_distance_matrix(im);
    for (const divcore::DiversityReport& r : divcore::diversity_batch(im, d))
        out.diversity[r.user_id] = r.rao_stirling;
    return out;
}

// ---------------------------------------------------------------------------
// Feature-table file round trip
// ---------------------------------------------------------------------------

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

stats::FeatureTable load_features(const fs::path& csv_path, const fs::path& schema_path) {
    std::map<std::string, stats::ColumnKind> kinds;
    if (fs::exists(schema_path)) {
        io::CsvReader reader(schema_path.string());
        reader.expect_header({"column", "kind"});
        std::vector<std::string> f;
        while (reader.next(f)) {
            if (f.size() != 2) reader.fail("expected 2 fields");
            if (f[1] == "continuous") {
                kinds[f[0]] = stats::ColumnKind::Continuous;
            } else if (f[1] == "factor") {
                kinds[f[0]] = stats::ColumnKind::Factor;
            } else {
                reader.fail("unknown column kind: " + f[1]);
            }
        }
    }

    io::CsvReader reader(csv_path.string());
    const std::vector<std::string> header = reader.read_header();
    if (header.empty() || header[0] != "user_id")
        throw io::ParseError(csv_path.string(), 1, "first column must be user_id");

    stats::FeatureTable table;
    table.columns.assign(header.begin() + 1, header.end());
    for (const std::string& col : table.columns) {
        const auto it = kinds.find(col);
        table.kinds.push_back(it == kinds.end() ? stats::ColumnKind::Continuous : it->second);
    }

    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != header.size())
            reader.fail("expected " + std::to_string(header.size()) + " fields, got " +
                        std::to_string(f.size()));
        table.row_ids.push_back(f[0]);
        for (std::size_t c = 1; c < f.size(); ++c)
            table.values.push_back(f[c].empty() ? kMissing
                                                : io::parse_real(f[c], reader, header[c]));
    }
    return table;
}

void write_features(std::ostream& out, const stats::FeatureTable& table) {
    out << "user_id";
    for (const std::string& col : table.columns) out << ',' << col;
    out << '\n';
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        out << table.row_ids[r];
        for (std::size_t c = 0; c < table.n_cols(); ++c) {
            const double v = table.at(r, c);
            out << ',';
            if (!std::isnan(v)) out << io::fmt6(v);
        }
        out << '\n';
    }
}

void write_features_schema(std::ostream& out, const stats::FeatureTable& table) {
    out << "column,kind\n";
    for (std::size_t c = 0; c < table.n_cols(); ++c)
        out << table.columns[c] << ','
            << (table.kinds[c] == stats::ColumnKind::Factor ? "factor" : "continuous") << '\n';
}

ordered_json regression_to_json(const stats::RegressionReport& rep) {
    ordered_json predictors = ordered_json::array();
    for (const stats::PredictorStats& ps : rep.predictors) {
        ordered_json p;
        p["name"] = ps.name;
        p["coef"] = json_real(ps.coef);
        p["se"] = json_real(ps.se);
        p["t"] = json_real(ps.t);
        p["p"] = json_real(ps.p);
        p["stars"] = ps.stars;
        p["vif"] = json_real(ps.vif);
        predictors.push_back(std::move(p));
    }
    ordered_json model;
    model["r2"] = json_real(rep.r2);
    model["adj_r2"] = json_real(rep.adj_r2);
    model["rse"] = json_real(rep.rse);
    model["f"] = json_real(rep.f_stat);
    model["df1"] = rep.df1;
    model["df2"] = rep.df2;
    model["n"] = rep.n;
    if (rep.degenerate_response) model["degenerate_response"] = true;

    ordered_json out;
    out["predictors"] = std::move(predictors);
    out["model"] = std::move(model);
    return out;
}

}  // namespace

std::vector<ingest::CategoryLevel> run_levels(const PipelineConfig& cfg) {
    switch (cfg.level) {
        case Level::Genre: return {ingest::CategoryLevel::Genre};
        case Level::Subgenre: return {ingest::CategoryLevel::Subgenre};
        case Level::Both:
            return {ingest::CategoryLevel::Genre, ingest::CategoryLevel::Subgenre};
    }
    return {};
}

std::string level_suffix(const PipelineConfig& cfg, ingest::CategoryLevel level) {
    if (cfg.level != Level::Both) return "";
    return std::string("_") + ingest::level_name(level);
}

divcore::DistanceMatrix load_distances(const std::string& path) {
    io::CsvReader reader(path);
    const std::vector<std::string> header = reader.read_header();
    if (header.size() < 2 || header[0] != "category")
        throw io::ParseError(path, 1, "expected 'category' plus at least one label");

    divcore::DistanceMatrix d;
    d.categories.assign(header.begin() + 1, header.end());
    const std::size_t n = d.categories.size();
    d.d.assign(n * n, 0.0);
    std::vector<std::string> f;
    std::size_t row = 0;
    while (reader.next(f)) {
        if (row >= n) reader.fail("more rows than categories");
        if (f.size() != n + 1) reader.fail("expected " + std::to_string(n + 1) + " fields");
        if (f[0] != d.categories[row])
            reader.fail("row label '" + f[0] + "' does not match column order");
        for (std::size_t j = 0; j < n; ++j)
            d.d[row * n + j] = io::parse_real(f[j + 1], reader, d.categories[j]);
        ++row;
    }
    if (row != n)
        throw io::ParseError(path, reader.line(), "expected " + std::to_string(n) + " rows");
    return d;
}

std::vector<divcore::DiversityReport> load_diversity(const std::string& path) {
    io::CsvReader reader(path);
    reader.expect_header({"user_id", "rao_stirling", "entropy", "volume"});
    std::vector<divcore::DiversityReport> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 4) reader.fail("expected 4 fields");
        divcore::DiversityReport r;
        r.user_id = f[0];
        r.rao_stirling = io::parse_real(f[1], reader, "rao_stirling");
        r.entropy = io::parse_real(f[2], reader, "entropy");
        r.volume = io::parse_int(f[3], reader, "volume");
        out.push_back(std::move(r));
    }
    return out;
}

std::map<std::string, geo::HomeLocation> load_homes(const std::string& path) {
    io::CsvReader reader(path);
    reader.expect_header({"user_id", "zip", "fips", "resolved", "reason", "plurality_set",
                          "night_set", "ndays_set"});
    std::map<std::string, geo::HomeLocation> out;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != 8) reader.fail("expected 8 fields");
        geo::HomeLocation h;
        h.user_id = f[0];
        if (!f[1].empty()) h.zip = f[1];
        if (!f[2].empty()) h.fips = f[2];
        if (f[3] != "true" && f[3] != "false") reader.fail("resolved must be true or false");
        h.resolved = f[3] == "true";
        h.reason = f[4];
        h.plurality_set = split_set(f[5]);
        h.night_set = split_set(f[6]);
        h.ndays_set = split_set(f[7]);
        if (!out.emplace(h.user_id, std::move(h)).second)
            reader.fail("duplicate user_id: " + f[0]);
    }
    return out;
}

RatingSet parse_ratings(const std::string& path) {
    io::CsvReader reader(path);
    const std::vector<std::string> header = reader.read_header();
    if (header.size() < 3 || header[0] != "subject_id")
        throw io::ParseError(path, 1, "expected subject_id plus at least two rater columns");

    RatingSet out;
    out.raters.assign(header.begin() + 1, header.end());
    std::set<std::string> seen;
    std::vector<std::string> f;
    while (reader.next(f)) {
        if (f.size() != header.size())
            reader.fail("expected " + std::to_string(header.size()) + " fields");
        if (!seen.insert(f[0]).second) reader.fail("duplicate subject_id: " + f[0]);
        out.subjects.push_back(f[0]);
        std::vector<int> row;
        for (std::size_t c = 1; c < f.size(); ++c) {
            const long long v = io::parse_int(f[c], reader, header[c]);
            if (v < 0 || v > 5) reader.fail("rating out of the 0..5 scale: " + f[c]);
            row.push_back(static_cast<int>(v));
        }
        out.grid.push_back(std::move(row));
    }
    return out;
}

void cmd_diversity(const PipelineConfig& cfg) {
    Corpus corpus = load_corpus(cfg);
    std::vector<ingest::DroppedUser> dropped = corpus.selection.dropped;

    OutputStage stage(cfg.out_dir);
    for (ingest::CategoryLevel level : run_levels(cfg)) {
        const LevelData data = compute_level(corpus.selection, corpus.catalog, level, &dropped);
        const std::string sfx = level_suffix(cfg, level);
        write_distances(stage.create("distances" + sfx + ".csv"), data.d);
        write_diversity(stage.create("diversity" + sfx + ".csv"), data.reports);
    }

    std::sort(dropped.begin(), dropped.end(), [](const auto& a, const auto& b) {
        return std::tie(a.user_id, a.reason) < std::tie(b.user_id, b.reason);
    });
    dropped.erase(std::unique(dropped.begin(), dropped.end(),
                              [](const auto& a, const auto& b) {
                                  return a.user_id == b.user_id && a.reason == b.reason;
                              }),
                  dropped.end());
    std::ostream& drop_out = stage.create("dropped_users.csv");
    drop_out << "user_id,reason\n";
    for (const ingest::DroppedUser& d : dropped) drop_out << d.user_id << ',' << d.reason << '\n';

    stage.commit();
}

void cmd_map(const PipelineConfig& cfg) {
    std::unique_ptr<Corpus> corpus;
    OutputStage stage(cfg.out_dir);
    for (ingest::CategoryLevel level : run_levels(cfg)) {
        const std::string sfx = level_suffix(cfg, level);
        const fs::path dist_path = out_path(cfg, "distances" + sfx + ".csv");
        divcore::DistanceMatrix d;
        if (fs::exists(dist_path)) {
            d = load_distances(dist_path.string());
        } else {
            if (!corpus) corpus = std::make_unique<Corpus>(load_corpus(cfg));
            d = compute_level(corpus->selection, corpus->catalog, level, nullptr).d;
        }
        const divcore::MdsEmbedding mds = divcore::classical_mds(d, 2);
        write_mds(stage.create("mds" + sfx + ".csv"), mds);
        write_scatter_svg(stage.create("map" + sfx + ".svg"), mds);
    }
    stage.commit();
}

void cmd_homeloc(const PipelineConfig& cfg) {
    const std::map<std::string, geo::HomeLocation> homes = compute_homes(cfg);
    OutputStage stage(cfg.out_dir);
    write_homes(stage.create("homes.csv"), homes);
    stage.commit();
}

void cmd_features(const PipelineConfig& cfg) {
    std::unique_ptr<Corpus> corpus;
    const std::vector<ingest::CategoryLevel> levels = run_levels(cfg);

    std::vector<std::vector<divcore::DiversityReport>> reports;
    for (ingest::CategoryLevel level : levels)
        reports.push_back(diversity_for_level(cfg, level, corpus));
    for (std::size_t l = 1; l < reports.size(); ++l) {
        if (reports[l].size() != reports[0].size())
            throw std::runtime_error("features: per-level diversity tables disagree on users");
        for (std::size_t i = 0; i < reports[l].size(); ++i)
            if (reports[l][i].user_id != reports[0][i].user_id)
                throw std::runtime_error("features: per-level diversity tables disagree on users");
    }

    const fs::path homes_path = out_path(cfg, "homes.csv");
    const std::map<std::string, geo::HomeLocation> homes =
        fs::exists(homes_path) ? load_homes(homes_path.string()) : compute_homes(cfg);
    const geo::CensusTable census = geo::load_census(cfg.census);
    const std::map<std::string, int> urbanness = geo::load_urbanness(cfg.urbanness);
    const InterestFeatures interest = compute_interest_features(cfg.interests);

    stats::FeatureTable table;
    for (ingest::CategoryLevel level : levels) {
        const std::string name = ingest::level_name(level);
        table.columns.push_back("rao_stirling_" + name);
        table.columns.push_back("entropy_" + name);
        table.columns.push_back("volume_" + name);
    }
    const std::vector<std::string> demographic_cols = {
        "median_household_income", "pct_bachelor", "racial_diversity",
        "urbanness",               "interest_in_music", "interest_diversity"};
    table.columns.insert(table.columns.end(), demographic_cols.begin(), demographic_cols.end());
    table.kinds.assign(table.columns.size(), stats::ColumnKind::Continuous);

    std::vector<std::pair<std::string, std::string>> excluded;
    for (std::size_t i = 0; i < reports[0].size(); ++i) {
        const std::string& user = reports[0][i].user_id;

        const auto home_it = homes.find(user);
        if (home_it == homes.end()) {
            excluded.emplace_back(user, "no-pings");
            continue;
        }
        const auto [demo, why] = geo::join_census(home_it->second, census, urbanness);
        if (!demo) {
            excluded.emplace_back(user, why);
            continue;
        }
        const auto share_it = interest.music_share.find(user);
        const auto idiv_it = interest.diversity.find(user);
        if (share_it == interest.music_share.end() || idiv_it == interest.diversity.end()) {
            excluded.emplace_back(user, "no-interests");
            continue;
        }

        table.row_ids.push_back(user);
        for (std::size_t l = 0; l < levels.size(); ++l) {
            table.values.push_back(reports[l][i].rao_stirling);
            table.values.push_back(reports[l][i].entropy);
            table.values.push_back(static_cast<double>(reports[l][i].volume));
        }
        table.values.push_back(demo->median_household_income);
        table.values.push_back(demo->pct_bachelor);
        table.values.push_back(demo->simple_racial_diversity);
        table.values.push_back(static_cast<double>(demo->urbanness));
        table.values.push_back(share_it->second);
        table.values.push_back(idiv_it->second);
    }

    OutputStage stage(cfg.out_dir);
    write_features(stage.create("features.csv"), table);
    write_features_schema(stage.create("features_schema.csv"), table);
    std::ostream& excl = stage.create("features_excluded.csv");
    excl << "user_id,reason\n";
    for (const auto& [user, why] : excluded) excl << user << ',' << why << '\n';
    stage.commit();
}

void cmd_regress(const PipelineConfig& cfg) {
    const fs::path features_path = out_path(cfg, "features.csv");
    if (!fs::exists(features_path))
        throw std::runtime_error("regress: " + features_path.string() +
                                 " not found (run the features command first)");
    stats::FeatureTable table =
        load_features(features_path, out_path(cfg, "features_schema.csv"));

    stats::ImputeOptions impute_opt;
    impute_opt.max_missing_frac = cfg.max_missing_frac;
    impute_opt.add_noise = cfg.impute_noise;
    impute_opt.seed = cfg.seed;
    table = stats::impute_missing(table, impute_opt);

    // Predictors are every column outside the diversity-score family.
    std::vector<std::size_t> predictor_cols;
    for (std::size_t c = 0; c < table.n_cols(); ++c) {
        const std::string& name = table.columns[c];
        if (name.starts_with("rao_stirling") || name.starts_with("entropy") ||
            name.starts_with("volume"))
            continue;
        predictor_cols.push_back(c);
    }
    if (predictor_cols.empty()) throw std::runtime_error("regress: no predictor columns");

    ordered_json report;
    for (ingest::CategoryLevel level : run_levels(cfg)) {
        const std::string name = ingest::level_name(level);
        const std::string response = "rao_stirling_" + std::string(name);

        stats::FeatureTable sub;
        sub.row_ids = table.row_ids;
        sub.columns.push_back(response);
        sub.kinds.push_back(stats::ColumnKind::Continuous);
        const std::size_t resp_col = table.col_index(response);
        for (std::size_t c : predictor_cols) {
            sub.columns.push_back(table.columns[c]);
            sub.kinds.push_back(table.kinds[c]);
        }
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            sub.values.push_back(table.at(r, resp_col));
            for (std::size_t c : predictor_cols) sub.values.push_back(table.at(r, c));
        }
        sub = stats::standardize(sub);

        std::vector<double> y(sub.n_rows());
        stats::Design design;
        design.n = sub.n_rows();
        design.k = predictor_cols.size();
        design.names.assign(sub.columns.begin() + 1, sub.columns.end());
        design.x.resize(design.n * design.k);
        for (std::size_t r = 0; r < design.n; ++r) {
            y[r] = sub.at(r, 0);
            for (std::size_t c = 0; c < design.k; ++c) design.x[r * design.k + c] =
                sub.at(r, c + 1);
        }
        report[name] = regression_to_json(stats::ols_regress(y, design));
    }

    OutputStage stage(cfg.out_dir);
    stage.create("regression_report.json") << report.dump(2) << '\n';
    stage.commit();
}

void cmd_agreement(const PipelineConfig& cfg) {
    const RatingSet ratings = parse_ratings(cfg.ratings);
    const stats::KappaResult fleiss = stats::fleiss_kappa(ratings.grid);
    const stats::KappaResult cohen = stats::cohen_kappa_avg(ratings.grid);

    std::vector<double> rater_mean(ratings.subjects.size());
    for (std::size_t i = 0; i < ratings.subjects.size(); ++i) {
        double sum = 0.0;
        for (int v : ratings.grid[i]) sum += v;
        rater_mean[i] = sum / static_cast<double>(ratings.raters.size());
    }

    ordered_json report;
    report["n_subjects"] = ratings.subjects.size();
    report["n_raters"] = ratings.raters.size();
    report["fleiss_kappa"] = json_real(fleiss.kappa);
    report["fleiss_degenerate"] = fleiss.degenerate;
    report["cohen_kappa_avg"] = json_real(cohen.kappa);
    report["cohen_degenerate"] = cohen.degenerate;

    std::unique_ptr<Corpus> corpus;
    ordered_json pearson_block;
    for (ingest::CategoryLevel level : run_levels(cfg)) {
        const std::vector<divcore::DiversityReport> reports =
            diversity_for_level(cfg, level, corpus);
        std::map<std::string, const divcore::DiversityReport*> by_user;
        for (const divcore::DiversityReport& r : reports) by_user[r.user_id] = &r;

        std::vector<double> rao, entropy, volume;
        for (const std::string& subject : ratings.subjects) {
            const auto it = by_user.find(subject);
            if (it == by_user.end())
                throw std::runtime_error("agreement: subject '" + subject +
                                         "' has no computed diversity scores");
            rao.push_back(it->second->rao_stirling);
            entropy.push_back(it->second->entropy);
            volume.push_back(static_cast<double>(it->second->volume));
        }

        const auto pearson_json = [&](const std::vector<double>& xs) {
            const stats::PearsonResult pr = stats::pearson(rater_mean, xs);
            ordered_json j;
            j["r"] = json_real(pr.r);
            j["t"] = json_real(pr.t);
            j["p"] = json_real(pr.p);
            return j;
        };
        ordered_json level_block;
        level_block["rao_stirling"] = pearson_json(rao);
        level_block["entropy"] = pearson_json(entropy);
        level_block["volume"] = pearson_json(volume);
        pearson_block[ingest::level_name(level)] = std::move(level_block);
    }
    report["pearson"] = std::move(pearson_block);

    OutputStage stage(cfg.out_dir);
    stage.create("agreement_report.json") << report.dump(2) << '\n';
    stage.commit();
}

void cmd_all(const PipelineConfig& cfg) {
    cmd_diversity(cfg);
    cmd_map(cfg);
    cmd_homeloc(cfg);
    cmd_features(cfg);
    cmd_regress(cfg);
    cmd_agreement(cfg);
}

}  // namespace tastediv::pipeline
