#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tastediv/divcore.hpp"
#include "tastediv/geo.hpp"
#include "tastediv/ingest.hpp"
#include "tastediv/stats.hpp"

namespace tastediv::pipeline {

enum class Level { Genre, Subgenre, Both };

struct PipelineConfig {
    // Input files; commands validate the ones they need.
    std::string plays;
    std::string catalog;
    std::string interests;
    std::string pings;
    std::string zips;
    std::string census;
    std::string urbanness;
    std::string ratings;

    std::string out_dir = "out";
    Level level = Level::Both;

    ingest::FilterPolicy filter;

    double max_km = 30.0;
    geo::HomePolicy home;

    double max_missing_frac = 0.10;
    bool impute_noise = false;
    std::uint64_t seed = 0;
};

// Category levels a run covers, in fixed genre-before-subgenre order.
std::vector<ingest::CategoryLevel> run_levels(const PipelineConfig& cfg);

// "_genre" / "_subgenre" when the run covers both levels, "" otherwise
// (single-level runs keep the plain file names).
std::string level_suffix(const PipelineConfig& cfg, ingest::CategoryLevel level);

// Commands throw on failure; the executable maps exceptions to exit codes.
// Output files are staged and renamed into place only after a command
// finishes, so failed runs leave no partial outputs.
void cmd_diversity(const PipelineConfig& cfg);
void cmd_map(const PipelineConfig& cfg);
void cmd_homeloc(const PipelineConfig& cfg);
void cmd_features(const PipelineConfig& cfg);
void cmd_regress(const PipelineConfig& cfg);
void cmd_agreement(const PipelineConfig& cfg);
void cmd_all(const PipelineConfig& cfg);

// Output-file readers, shared by downstream commands and tests.
divcore::DistanceMatrix load_distances(const std::string& path);
std::vector<divcore::DiversityReport> load_diversity(const std::string& path);
std::map<std::string, geo::HomeLocation> load_homes(const std::string& path);

struct RatingSet {
    std::vector<std::string> subjects;
    std::vector<std::string> raters;
    std::vector<std::vector<int>> grid;  // subjects x raters, codes 0..5
};

// ratings.csv: header subject_id,<rater1>,<rater2>,...
RatingSet parse_ratings(const std::string& path);

}  // namespace tastediv::pipeline
