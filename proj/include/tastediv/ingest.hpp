#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace tastediv::ingest {

struct PlayRecord {
    std::string user_id;
    std::string artist_id;
    long long play_count = 0;
};

struct ArtistEntry {
    std::string artist_id;
    std::string name;
    std::vector<std::string> genres;
    std::vector<std::string> subgenres;
};

enum class CategoryLevel { Genre, Subgenre };
const char* level_name(CategoryLevel level);

struct FilterPolicy {
    int top_k = 50;
    long long min_plays_per_artist = 100;
    bool drop_incomplete_users = true;
};

struct DroppedUser {
    std::string user_id;
    std::string reason;
};

// Row-stochastic user x category proportion grid. Rows follow first
// appearance in the input; categories are sorted lexicographically.
struct ConsumptionMatrix {
    std::vector<std::string> users;
    std::vector<std::string> categories;
    std::vector<double> proportions;  // row-major, users.size() x categories.size()

    std::size_t n_users() const { return users.size(); }
    std::size_t n_categories() const { return categories.size(); }
    std::span<const double> row(std::size_t u) const {
        return {proportions.data() + u * categories.size(), categories.size()};
    }
    double at(std::size_t u, std::size_t c) const {
        return proportions[u * categories.size() + c];
    }
};

using Catalog = std::map<std::string, ArtistEntry>;

std::vector<PlayRecord> parse_plays(const std::filesystem::path& path);
Catalog parse_catalog(const std::filesystem::path& path);

struct SelectedUser {
    std::string user_id;
    // Descending play_count, ascending artist_id within ties.
    std::vector<PlayRecord> artists;
};

struct Selection {
    std::vector<SelectedUser> users;
    std::vector<DroppedUser> dropped;
};

// Keeps, per user, the top_k qualifying artists. An artist qualifies when it
// is classified (has categories at both levels) and reaches the play
// threshold. Users short of top_k are dropped when the policy says so; users
// with no qualifying artist are always dropped.
Selection select_top_artists(std::span<const PlayRecord> plays,
                             const FilterPolicy& policy, const Catalog& catalog);

// Splits each artist's play weight equally over its categories at the given
// level, then normalizes per user. Users unclassified at this level are
// dropped into `dropped` (when given) rather than failing the build.
ConsumptionMatrix build_consumption_matrix(const Selection& selected,
                                           const Catalog& catalog,
                                           CategoryLevel level,
                                           std::vector<DroppedUser>* dropped = nullptr);

struct InterestTopic {
    std::string label;
    double weight = 0.0;
};

struct UserInterests {
    std::string user_id;
    std::vector<InterestTopic> topics;
};

std::vector<UserInterests> parse_interests(const std::filesystem::path& path);

// Weighted share of topics whose label contains the substring "music",
// case-insensitively. Throws std::domain_error when all weights are zero.
double music_interest_share(std::span<const InterestTopic> topics);

// User x topic proportion matrix for interest-diversity scoring. Users whose
// weights are all zero are dropped and reported.
ConsumptionMatrix build_interest_matrix(std::span<const UserInterests> interests,
                                        std::vector<DroppedUser>* dropped = nullptr);

}  // namespace tastediv::ingest
