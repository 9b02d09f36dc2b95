#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "tastediv/pipeline.hpp"

namespace fs = std::filesystem;
using tastediv::pipeline::Level;
using tastediv::pipeline::PipelineConfig;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitComputation = 1;
constexpr int kExitUsage = 2;

// Validates that a command's required input paths were given and exist.
// Returns false (after printing a usage-style message) otherwise.
bool require_inputs(const std::vector<std::pair<std::string, const std::string*>>& needed) {
    for (const auto& [flag, path] : needed) {
        if (path->empty()) {
            std::fprintf(stderr, "tastediv: %s is required for this command (see --help)\n",
                         flag.c_str());
            return false;
        }
        if (!fs::exists(*path)) {
            std::fprintf(stderr, "tastediv: input file not found: %s\n", path->c_str());
            return false;
        }
    }
    return true;
}

bool missing_any_level_file(const PipelineConfig& cfg, const std::string& stem) {
    for (tastediv::ingest::CategoryLevel level : tastediv::pipeline::run_levels(cfg)) {
        const fs::path p =
            fs::path(cfg.out_dir) / (stem + tastediv::pipeline::level_suffix(cfg, level) + ".csv");
        if (!fs::exists(p)) return true;
    }
    return false;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Music-taste diversity analysis pipeline"};
    app.require_subcommand(1);

    PipelineConfig cfg;
    std::string level_str = "both";

    app.set_config("--config", "", "Flat key=value configuration file (flags win over it)");
    app.add_option("--out", cfg.out_dir, "Output directory")->capture_default_str();
    app.add_option("--level", level_str, "Category level: genre, subgenre or both")
        ->check(CLI::IsMember({"genre", "subgenre", "both"}))
        ->capture_default_str();
    app.add_option("--seed", cfg.seed, "Seed for the optional randomized modes")
        ->capture_default_str();

    app.add_option("--plays", cfg.plays, "Play-count log (user_id,artist_id,play_count)");
    app.add_option("--catalog", cfg.catalog, "Artist catalog (JSON lines)");
    app.add_option("--interests", cfg.interests, "Per-user interest topics (JSON lines)");
    app.add_option("--pings", cfg.pings, "Geotagged pings CSV");
    app.add_option("--zips", cfg.zips, "ZIP centroid table CSV");
    app.add_option("--census", cfg.census, "Per-ZIP census table CSV");
    app.add_option("--urbanness", cfg.urbanness, "Per-FIPS urbanness codes CSV");
    app.add_option("--ratings", cfg.ratings, "Human diversity ratings CSV");

    app.add_option("--top-k", cfg.filter.top_k, "Artists kept per user")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--min-plays", cfg.filter.min_plays_per_artist,
                   "Play-count threshold for a qualifying artist")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_flag("--keep-incomplete-users",
                 [&cfg](std::int64_t) { cfg.filter.drop_incomplete_users = false; },
                 "Retain users with fewer than top-k qualifying artists");

    app.add_option("--max-km", cfg.max_km, "Reverse-geocoding distance cutoff in km")
        ->capture_default_str();
    app.add_option("--min-days", cfg.home.min_days, "Ping span (days) a home ZIP must cover")
        ->capture_default_str();
    app.add_flag("--distinct-days", cfg.home.distinct_days,
                 "Count distinct active days instead of the first-to-last span");
    app.add_option("--min-pings", cfg.home.min_pings,
                   "Geocoded pings required before resolving a home")
        ->capture_default_str();
    app.add_option("--night-start", cfg.home.night.start_hour,
                   "Night window start hour (local, inclusive)")
        ->check(CLI::Range(0, 23))
        ->capture_default_str();
    app.add_option("--night-end", cfg.home.night.end_hour,
                   "Night window end hour (local, exclusive)")
        ->check(CLI::Range(0, 23))
        ->capture_default_str();
    app.add_option("--default-utc-offset", cfg.home.night.default_offset_minutes,
                   "UTC offset (minutes) for pings that carry none")
        ->capture_default_str();

    app.add_option("--max-missing-frac", cfg.max_missing_frac,
                   "Missing-value fraction at which imputation refuses a column")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    app.add_flag("--impute-noise", cfg.impute_noise,
                 "Add seeded residual-scaled noise to imputed values");

    CLI::App* diversity = app.add_subcommand(
        "diversity", "Write category distance matrices and per-user diversity scores");
    CLI::App* map_cmd =
        app.add_subcommand("map", "Embed the category distances in 2-D and plot them");
    CLI::App* homeloc =
        app.add_subcommand("homeloc", "Infer per-user home ZIP codes from geotagged pings");
    CLI::App* features = app.add_subcommand(
        "features", "Join diversity scores with demographic and interest variables");
    CLI::App* regress = app.add_subcommand(
        "regress", "Impute, standardize and fit one regression per diversity level");
    CLI::App* agreement = app.add_subcommand(
        "agreement", "Score inter-rater reliability and rater-vs-measure correlation");
    CLI::App* all_cmd = app.add_subcommand("all", "Run the whole pipeline in order");
    for (CLI::App* sub :
         {diversity, map_cmd, homeloc, features, regress, agreement, all_cmd})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    if (level_str == "genre") {
        cfg.level = Level::Genre;
    } else if (level_str == "subgenre") {
        cfg.level = Level::Subgenre;
    } else {
        cfg.level = Level::Both;
    }

    const bool needs_corpus_for_diversity = missing_any_level_file(cfg, "diversity");
    const bool needs_corpus_for_distances = missing_any_level_file(cfg, "distances");
    const bool needs_homes = !fs::exists(fs::path(cfg.out_dir) / "homes.csv");

    std::vector<std::pair<std::string, const std::string*>> needed;
    if (diversity->parsed() || all_cmd->parsed()) {
        needed.push_back({"--plays", &cfg.plays});
        needed.push_back({"--catalog", &cfg.catalog});
    }
    if (map_cmd->parsed() && needs_corpus_for_distances) {
        needed.push_back({"--plays", &cfg.plays});
        needed.push_back({"--catalog", &cfg.catalog});
    }
    if (homeloc->parsed() || all_cmd->parsed()) {
        needed.push_back({"--pings", &cfg.pings});
        needed.push_back({"--zips", &cfg.zips});
    }
    if (features->parsed() || all_cmd->parsed()) {
        if (features->parsed() && needs_corpus_for_diversity) {
            needed.push_back({"--plays", &cfg.plays});
            needed.push_back({"--catalog", &cfg.catalog});
        }
        if (features->parsed() && needs_homes) {
            needed.push_back({"--pings", &cfg.pings});
            needed.push_back({"--zips", &cfg.zips});
        }
        needed.push_back({"--census", &cfg.census});
        needed.push_back({"--urbanness", &cfg.urbanness});
        needed.push_back({"--interests", &cfg.interests});
    }
    if (agreement->parsed() || all_cmd->parsed()) {
        if (agreement->parsed() && needs_corpus_for_diversity) {
            needed.push_back({"--plays", &cfg.plays});
            needed.push_back({"--catalog", &cfg.catalog});
        }
        needed.push_back({"--ratings", &cfg.ratings});
    }
    if (!require_inputs(needed)) return kExitUsage;

    try {
        if (diversity->parsed()) tastediv::pipeline::cmd_diversity(cfg);
        if (map_cmd->parsed()) tastediv::pipeline::cmd_map(cfg);
        if (homeloc->parsed()) tastediv::pipeline::cmd_homeloc(cfg);
        if (features->parsed()) tastediv::pipeline::cmd_features(cfg);
        if (regress->parsed()) tastediv::pipeline::cmd_regress(cfg);
        if (agreement->parsed()) tastediv::pipeline::cmd_agreement(cfg);
        if (all_cmd->parsed()) tastediv::pipeline::cmd_all(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "tastediv: error: %s\n", e.what());
        return kExitComputation;
    }
    return kExitOk;
}
