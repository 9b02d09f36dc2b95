#include "tastediv/textio.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace tastediv::io {

CsvReader::CsvReader(const std::filesystem::path& path) : path_(path), in_(path) {
    if (!in_) throw ParseError("cannot open " + path.string());
}

std::vector<std::string> CsvReader::read_header() {
    std::vector<std::string> fields;
    if (!next(fields)) fail("missing header row");
    return fields;
}

void CsvReader::expect_header(const std::vector<std::string>& names) {
    const auto got = read_header();
    if (got != names) {
        std::string want;
        for (const auto& n : names) {
            if (!want.empty()) want += ',';
            want += n;
        }
        fail("unexpected header, want \"" + want + "\"");
    }
}

bool CsvReader::next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        fields = split_csv(line);
        return true;
    }
    return false;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

long long parse_int(const std::string& s, const CsvReader& ctx, const std::string& field) {
    long long v = 0;
    const char* begin = s.data();
    const char* end = begin + s.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end)
        ctx.fail("field '" + field + "': not an integer: \"" + s + "\"");
    return v;
}

double parse_real(const std::string& s, const CsvReader& ctx, const std::string& field) {
    if (s.empty()) ctx.fail("field '" + field + "': empty");
    errno = 0;
    char* endp = nullptr;
    const double v = std::strtod(s.c_str(), &endp);
    if (errno != 0 || endp != s.c_str() + s.size())
        ctx.fail("field '" + field + "': not a number: \"" + s + "\"");
    return v;
}

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (Howard Hinnant's
// days_from_civil).
std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

int two_digits(const std::string& s, std::size_t at) {
    if (at + 1 >= s.size() || s[at] < '0' || s[at] > '9' || s[at + 1] < '0' || s[at + 1] > '9')
        throw ParseError("bad timestamp: \"" + s + "\"");
    return (s[at] - '0') * 10 + (s[at + 1] - '0');
}

}  // namespace

std::int64_t parse_iso8601(const std::string& s) {
    // YYYY-MM-DDTHH:MM:SS(Z|+HH:MM|-HH:MM)
    if (s.size() < 20 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':')
        throw ParseError("bad timestamp: \"" + s + "\"");
    for (int i = 0; i < 4; ++i)
        if (s[i] < '0' || s[i] > '9') throw ParseError("bad timestamp: \"" + s + "\"");
    const int year = std::stoi(s.substr(0, 4));
    const int month = two_digits(s, 5);
    const int day = two_digits(s, 8);
    const int hour = two_digits(s, 11);
    const int minute = two_digits(s, 14);
    const int second = two_digits(s, 17);
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60)
        throw ParseError("bad timestamp: \"" + s + "\"");

    std::int64_t offset_sec = 0;
    const char tz = s[19];
    if (tz == 'Z') {
        if (s.size() != 20) throw ParseError("bad timestamp: \"" + s + "\"");
    } else if (tz == '+' || tz == '-') {
        if (s.size() != 25 || s[22] != ':') throw ParseError("bad timestamp: \"" + s + "\"");
        const int oh = two_digits(s, 20);
        const int om = two_digits(s, 23);
        offset_sec = (oh * 60 + om) * 60;
        if (tz == '-') offset_sec = -offset_sec;
    } else {
        throw ParseError("bad timestamp: \"" + s + "\"");
    }

    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                              static_cast<unsigned>(day));
    return days * 86400 + hour * 3600 + minute * 60 + second - offset_sec;
}

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace tastediv::io
