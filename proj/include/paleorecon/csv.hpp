#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "paleorecon/timeseries.hpp"

namespace paleo::csv {

/// One parsed CSV row with its 1-based source line number.
struct Row {
    std::size_t line = 0;
    std::vector<std::string> fields;
};

/// Splits every non-blank line on commas and trims whitespace. Quoting is not supported.
std::vector<Row> read_rows(std::istream& in);
std::vector<Row> read_rows(const std::filesystem::path& path);

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string_view trim(std::string_view s);

/// Strict numeric parsing; throws FormatError naming `line` on failure.
double parse_double(std::string_view field, std::size_t line);
int parse_int(std::string_view field, std::size_t line);

/// Shortest round-trip decimal representation; empty string for NaN.
std::string format_double(double v);

/// Writes `content` to a temporary sibling and renames it over `path`.
void write_atomic(const std::filesystem::path& path, const std::string& content);

/// `year,value` with blank fields for missing entries. Gaps in the year column become missing.
TimeSeries read_timeseries(std::istream& in);
TimeSeries read_timeseries(const std::filesystem::path& path);
std::string format_timeseries(const TimeSeries& s);

}  // namespace paleo::csv
