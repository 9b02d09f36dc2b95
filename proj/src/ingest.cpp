#include "tastediv/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "tastediv/textio.hpp"

namespace tastediv::ingest {

using io::CsvReader;
using io::ParseError;
using json = nlohmann::json;

const char* level_name(CategoryLevel level) {
    return level == CategoryLevel::Genre ? "genre" : "subgenre";
}

std::vector<PlayRecord> parse_plays(const std::filesystem::path& path) {
    CsvReader csv(path);
    csv.expect_header({"user_id", "artist_id", "play_count"});
    std::vector<PlayRecord> out;
    std::unordered_set<std::string> seen;
    std::vector<std::string> f;
    while (csv.next(f)) {
        if (f.size() != 3) csv.fail("expected 3 fields, got " + std::to_string(f.size()));
        if (f[0].empty()) csv.fail("empty user_id");
        if (f[1].empty()) csv.fail("empty artist_id");
        const long long count = io::parse_int(f[2], csv, "play_count");
        if (count < 0) csv.fail("negative play_count");
        if (!seen.insert(f[0] + '\x1f' + f[1]).second)
            csv.fail("duplicate (user_id, artist_id) pair: " + f[0] + ", " + f[1]);
        out.push_back({std::move(f[0]), std::move(f[1]), count});
    }
    return out;
}

namespace {

std::vector<std::string> string_array(const json& j, const char* key,
                                      const std::filesystem::path& path, std::size_t line) {
    if (!j.contains(key) || !j[key].is_array())
        throw ParseError(path, line, std::string("missing or non-array '") + key + "'");
    std::vector<std::string> out;
    std::unordered_set<std::string> seen;
    for (const auto& v : j[key]) {
        if (!v.is_string())
            throw ParseError(path, line, std::string("non-string label in '") + key + "'");
        std::string label = v.get<std::string>();
        if (label.empty())
            throw ParseError(path, line, std::string("empty label in '") + key + "'");
        if (!seen.insert(label).second)
            throw ParseError(path, line, "duplicate label '" + label + "' in '" + key + "'");
        out.push_back(std::move(label));
    }
    return out;
}

std::string string_field(const json& j, const char* key,
                         const std::filesystem::path& path, std::size_t line) {
    if (!j.contains(key) || !j[key].is_string())
        throw ParseError(path, line, std::string("missing or non-string '") + key + "'");
    return j[key].get<std::string>();
}

}  // namespace

Catalog parse_catalog(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    Catalog out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
        ArtistEntry entry;
        entry.artist_id = string_field(j, "artist_id", path, lineno);
        if (entry.artist_id.empty()) throw ParseError(path, lineno, "empty artist_id");
        entry.name = string_field(j, "name", path, lineno);
        entry.genres = string_array(j, "genres", path, lineno);
        entry.subgenres = string_array(j, "subgenres", path, lineno);
        const std::string id = entry.artist_id;
        if (!out.emplace(id, std::move(entry)).second)
            throw ParseError(path, lineno, "duplicate artist_id: " + id);
    }
    return out;
}

namespace {

bool classified(const ArtistEntry& e) {
    return !e.genres.empty() && !e.subgenres.empty();
}

}  // namespace

Selection select_top_artists(std::span<const PlayRecord> plays,
                             const FilterPolicy& policy, const Catalog& catalog) {
    if (policy.top_k < 1) throw std::invalid_argument("FilterPolicy.top_k must be >= 1");

    std::vector<std::string> user_order;
    std::unordered_map<std::string, std::vector<PlayRecord>> by_user;
    for (const auto& p : plays) {
        auto [it, inserted] = by_user.try_emplace(p.user_id);
        if (inserted) user_order.push_back(p.user_id);
        it->second.push_back(p);
    }

    Selection sel;
    for (const auto& user : user_order) {
        auto& candidates = by_user[user];
        std::vector<PlayRecord> qualifying;
        for (auto& p : candidates) {
            if (p.play_count < policy.min_plays_per_artist) continue;
            const auto it = catalog.find(p.artist_id);
            if (it == catalog.end() || !classified(it->second)) continue;
            qualifying.push_back(std::move(p));
        }
        std::sort(qualifying.begin(), qualifying.end(),
                  [](const PlayRecord& a, const PlayRecord& b) {
                      if (a.play_count != b.play_count) return a.play_count > b.play_count;
                      return a.artist_id < b.artist_id;
                  });
        if (qualifying.size() > static_cast<std::size_t>(policy.top_k))
            qualifying.resize(static_cast<std::size_t>(policy.top_k));

        if (qualifying.empty()) {
            sel.dropped.push_back({user, "no-qualifying-artists"});
            continue;
        }
        if (qualifying.size() < static_cast<std::size_t>(policy.top_k) &&
            policy.drop_incomplete_users) {
            sel.dropped.push_back({user, "too-few-qualifying-artists"});
            continue;
        }
        sel.users.push_back({user, std::move(qualifying)});
    }
    return sel;
}

ConsumptionMatrix build_consumption_matrix(const Selection& selected,
                                           const Catalog& catalog,
                                           CategoryLevel level,
                                           std::vector<DroppedUser>* dropped) {
    struct UserMass {
        const std::string* user;
        std::unordered_map<std::string, double> weights;
        double total = 0.0;
    };
    std::vector<UserMass> masses;
    std::unordered_set<std::string> category_set;

    for (const auto& su : selected.users) {
        UserMass mass{&su.user_id, {}, 0.0};
        for (const auto& p : su.artists) {
            const auto it = catalog.find(p.artist_id);
            if (it == catalog.end())
                throw std::runtime_error("artist not in catalog: " + p.artist_id);
            const auto& cats = level == CategoryLevel::Genre ? it->second.genres
                                                             : it->second.subgenres;
            if (cats.empty()) continue;  // unclassified at this level
            const double share = static_cast<double>(p.play_count) /
                                 static_cast<double>(cats.size());
            for (const auto& c : cats) mass.weights[c] += share;
            mass.total += static_cast<double>(p.play_count);
        }
        if (mass.total <= 0.0) {
            if (dropped)
                dropped->push_back({su.user_id, std::string("unclassified-at-") +
                                                    level_name(level)});
            continue;
        }
        for (const auto& [c, w] : mass.weights)
            if (w > 0.0) category_set.insert(c);
        masses.push_back(std::move(mass));
    }

    ConsumptionMatrix cm;
    cm.categories.assign(category_set.begin(), category_set.end());
    std::sort(cm.categories.begin(), cm.categories.end());
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < cm.categories.size(); ++i) col[cm.categories[i]] = i;

    cm.proportions.assign(masses.size() * cm.categories.size(), 0.0);
    cm.users.reserve(masses.size());
    for (std::size_t u = 0; u < masses.size(); ++u) {
        cm.users.push_back(*masses[u].user);
        double* row = cm.proportions.data() + u * cm.categories.size();
        for (const auto& [c, w] : masses[u].weights)
            row[col.at(c)] = w / masses[u].total;
    }
    return cm;
}

std::vector<UserInterests> parse_interests(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path.string());
    std::vector<UserInterests> out;
    std::unordered_set<std::string> seen_users;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw ParseError(path, lineno, e.what());
        }
        UserInterests ui;
        ui.user_id = string_field(j, "user_id", path, lineno);
        if (!seen_users.insert(ui.user_id).second)
            throw ParseError(path, lineno, "duplicate user_id: " + ui.user_id);
        if (!j.contains("topics") || !j["topics"].is_array())
            throw ParseError(path, lineno, "missing or non-array 'topics'");
        std::unordered_set<std::string> labels;
        for (const auto& t : j["topics"]) {
            InterestTopic topic;
            topic.label = string_field(t, "label", path, lineno);
            if (topic.label.empty()) throw ParseError(path, lineno, "empty topic label");
            if (!labels.insert(topic.label).second)
                throw ParseError(path, lineno, "duplicate topic label: " + topic.label);
            if (!t.contains("weight") || !t["weight"].is_number())
                throw ParseError(path, lineno, "missing or non-numeric 'weight'");
            topic.weight = t["weight"].get<double>();
            if (topic.weight < 0.0)
                throw ParseError(path, lineno, "negative weight for topic: " + topic.label);
            ui.topics.push_back(std::move(topic));
        }
        out.push_back(std::move(ui));
    }
    return out;
}

namespace {

bool contains_music(const std::string& label) {
    static constexpr char needle[] = "music";
    if (label.size() < 5) return false;
    for (std::size_t i = 0; i + 5 <= label.size(); ++i) {
        bool hit = true;
        for (std::size_t k = 0; k < 5; ++k) {
            if (std::tolower(static_cast<unsigned char>(label[i + k])) != needle[k]) {
                hit = false;
                break;
            }
        }
        if (hit) return true;
    }
    return false;
}

}  // namespace

double music_interest_share(std::span<const InterestTopic> topics) {
    double total = 0.0;
    double music = 0.0;
    for (const auto& t : topics) {
        total += t.weight;
        if (contains_music(t.label)) music += t.weight;
    }
    if (total <= 0.0)
        throw std::domain_error("music_interest_share: all interest weights are zero");
    return music / total;
}

ConsumptionMatrix build_interest_matrix(std::span<const UserInterests> interests,
                                        std::vector<DroppedUser>* dropped) {
    struct Row {
        const UserInterests* ui;
        double total;
    };
    std::vector<Row> rows;
    std::unordered_set<std::string> topic_set;
    for (const auto& ui : interests) {
        double total = 0.0;
        for (const auto& t : ui.topics) total += t.weight;
        if (total <= 0.0) {
            if (dropped) dropped->push_back({ui.user_id, "zero-interest-weights"});
            continue;
        }
        for (const auto& t : ui.topics)
            if (t.weight > 0.0) topic_set.insert(t.label);
        rows.push_back({&ui, total});
    }

    ConsumptionMatrix cm;
    cm.categories.assign(topic_set.begin(), topic_set.end());
    std::sort(cm.categories.begin(), cm.categories.end());
    std::unordered_map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < cm.categories.size(); ++i) col[cm.categories[i]] = i;

    cm.proportions.assign(rows.size() * cm.categories.size(), 0.0);
    cm.users.reserve(rows.size());
    for (std::size_t u = 0; u < rows.size(); ++u) {
        cm.users.push_back(rows[u].ui->user_id);
        double* row = cm.proportions.data() + u * cm.categories.size();
        for (const auto& t : rows[u].ui->topics)
            if (t.weight > 0.0) row[col.at(t.label)] += t.weight / rows[u].total;
    }
    return cm;
}

}  // namespace tastediv::ingest
