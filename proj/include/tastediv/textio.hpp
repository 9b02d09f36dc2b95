#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tastediv::io {

// Error raised by any input parser; carries file and 1-based line context.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::filesystem::path& path, std::size_t line,
               const std::string& what)
        : std::runtime_error(path.string() + ":" + std::to_string(line) + ": " + what) {}
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// Line-oriented reader for the pipeline's simple comma-separated files.
// Fields are split on ',' verbatim (no quoting); a trailing '\r' is stripped.
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path);

    // Reads and validates the header row against the expected field names.
    void expect_header(const std::vector<std::string>& names);
    // Reads the header row without validating its content.
    std::vector<std::string> read_header();

    // Next data row, split into fields. Returns false at end of input.
    // Blank lines are skipped.
    bool next(std::vector<std::string>& fields);

    std::size_t line() const { return line_; }
    const std::filesystem::path& path() const { return path_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path_, line_, what);
    }

private:
    std::filesystem::path path_;
    std::ifstream in_;
    std::size_t line_ = 0;
};

std::vector<std::string> split_csv(const std::string& line);

// Number parsing with full-token validation.
long long parse_int(const std::string& s, const CsvReader& ctx, const std::string& field);
double parse_real(const std::string& s, const CsvReader& ctx, const std::string& field);

// "YYYY-MM-DDTHH:MM:SS" followed by "Z" or "+HH:MM"/"-HH:MM"; result is
// seconds since the Unix epoch (UTC).
std::int64_t parse_iso8601(const std::string& s);

// Fixed 6-decimal formatting used by all numeric CSV outputs.
std::string fmt6(double v);

std::string read_file(const std::filesystem::path& path);

}  // namespace tastediv::io
