#include "paleorecon/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "paleorecon/errors.hpp"

namespace paleo::csv {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        out.emplace_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::vector<Row> read_rows(std::istream& in) {
    std::vector<Row> rows;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (trim(line).empty()) continue;
        rows.push_back({n, split(line)});
    }
    return rows;
}

std::vector<Row> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_rows(in);
}

double parse_double(std::string_view field, std::size_t line) {
    double v = 0.0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end || !std::isfinite(v))
        throw FormatError(line, "expected a number, got '" + std::string(field) + "'");
    return v;
}

int parse_int(std::string_view field, std::size_t line) {
    int v = 0;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end)
        throw FormatError(line, "expected an integer, got '" + std::string(field) + "'");
    return v;
}

std::string format_double(double v) {
    if (std::isnan(v)) return {};
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write '" + tmp.string() + "'");
        out << content;
        if (!out) throw InputError("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

TimeSeries read_timeseries(std::istream& in) {
    const auto rows = read_rows(in);
    if (rows.empty()) throw FormatError(1, "empty time series file");
    const auto& header = rows.front();
    if (header.fields.size() != 2 || header.fields[0] != "year" || header.fields[1] != "value")
        throw FormatError(header.line, "expected header 'year,value'");
    if (rows.size() < 2) throw FormatError(header.line, "time series has no data rows");

    const int first = parse_int(rows[1].fields[0], rows[1].line);
    std::vector<double> values;
    int prev = first - 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 2) throw FormatError(row.line, "expected 2 fields");
        const int year = parse_int(row.fields[0], row.line);
        if (year <= prev) throw FormatError(row.line, "years must be strictly ascending");
        for (int y = prev + 1; y < year; ++y) values.push_back(kMissing);
        values.push_back(row.fields[1].empty() ? kMissing : parse_double(row.fields[1], row.line));
        prev = year;
    }
    return TimeSeries(first, std::move(values));
}

TimeSeries read_timeseries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open '" + path.string() + "'");
    return read_timeseries(in);
}

std::string format_timeseries(const TimeSeries& s) {
    std::ostringstream out;
    out << "year,value\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        out << s.start_year() + static_cast<int>(i) << ',' << format_double(s[i]) << '\n';
    return out.str();
}

}  // namespace paleo::csv
