#include "paleorecon/proxy.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include "paleorecon/csv.hpp"
#include "paleorecon/errors.hpp"

namespace paleo {

namespace {

constexpr std::array<std::pair<ProxyKind, std::string_view>, 6> kKinds{{
    {ProxyKind::tree_ring, "tree_ring"},
    {ProxyKind::lake_sediment, "lake_sediment"},
    {ProxyKind::ice_core, "ice_core"},
    {ProxyKind::coral, "coral"},
    {ProxyKind::documentary, "documentary"},
    {ProxyKind::other, "other"},
}};

struct Metadata {
    std::string id;
    ProxyKind kind;
    std::optional<int> core_count;
    std::set<std::string> flags;
    Resolution resolution;
};

std::vector<Metadata> parse_metadata(std::istream& in) {
    const auto rows = csv::read_rows(in);
    if (rows.empty()) throw FormatError(1, "empty metadata file");
    const std::vector<std::string> header{"id", "kind", "core_count", "flags", "resolution"};
    if (rows.front().fields != header)
        throw FormatError(rows.front().line, "expected header 'id,kind,core_count,flags,resolution'");

    std::vector<Metadata> out;
    std::set<std::string> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != 5) throw FormatError(row.line, "expected 5 fields");
        Metadata m;
        m.id = row.fields[0];
        if (m.id.empty()) throw FormatError(row.line, "empty record id");
        if (!seen.insert(m.id).second) throw DuplicateId(m.id);
        const auto kind = parse_kind(row.fields[1]);
        if (!kind) throw FormatError(row.line, "unknown proxy kind '" + row.fields[1] + "'");
        m.kind = *kind;
        if (!row.fields[2].empty()) {
            const int cores = csv::parse_int(row.fields[2], row.line);
            if (cores < 0) throw FormatError(row.line, "negative core count");
            if (m.kind != ProxyKind::tree_ring)
                throw FormatError(row.line, "core_count given for non-tree-ring record '" + m.id + "'");
            m.core_count = cores;
        }
        for (auto& f : csv::split(row.fields[3], ';'))
            if (!f.empty()) m.flags.insert(std::move(f));
        const auto res = parse_resolution(row.fields[4]);
        if (!res) throw FormatError(row.line, "unknown resolution '" + row.fields[4] + "'");
        m.resolution = *res;
        out.push_back(std::move(m));
    }
    return out;
}

bool decadal_pattern_ok(const TimeSeries& s) {
    std::map<int, int> per_block;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.present(i)) continue;
        const int year = s.start_year() + static_cast<int>(i);
        if (++per_block[decade_block_start(year, kDefaultDecadeAnchor)] > 1) return false;
    }
    return true;
}

}  // namespace

std::string_view to_string(ProxyKind kind) {
    for (const auto& [k, name] : kKinds)
        if (k == kind) return name;
    return "other";
}

std::string_view to_string(Resolution resolution) {
    return resolution == Resolution::annual ? "annual" : "decadal";
}

std::optional<ProxyKind> parse_kind(std::string_view s) {
    for (const auto& [k, name] : kKinds)
        if (name == s) return k;
    return std::nullopt;
}

std::optional<Resolution> parse_resolution(std::string_view s) {
    if (s == "annual") return Resolution::annual;
    if (s == "decadal") return Resolution::decadal;
    return std::nullopt;
}

std::vector<std::string> ProxyNetwork::ids() const {
    std::vector<std::string> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(r.id);
    return out;
}

const ProxyRecord* ProxyNetwork::find(std::string_view id) const {
    for (const auto& r : records)
        if (r.id == id) return &r;
    return nullptr;
}

LoadResult parse_network(std::istream& metadata_in, std::istream& values_in, int frozen_at) {
    const auto meta = parse_metadata(metadata_in);

    const auto rows = csv::read_rows(values_in);
    if (rows.empty()) throw FormatError(1, "empty values file");
    const auto& header = rows.front();
    if (header.fields.empty() || header.fields[0] != "year")
        throw FormatError(header.line, "values header must start with 'year'");
    const std::size_t ncols = header.fields.size() - 1;
    std::map<std::string, std::size_t> column_of;
    for (std::size_t c = 0; c < ncols; ++c) {
        const auto& id = header.fields[c + 1];
        if (!column_of.emplace(id, c).second) throw DuplicateId(id);
    }
    for (const auto& m : meta)
        if (!column_of.contains(m.id)) throw FormatError(header.line, "no values column for record '" + m.id + "'");
    if (column_of.size() != meta.size())
        throw FormatError(header.line, "values table has columns without metadata");
    if (rows.size() < 2) throw FormatError(header.line, "values table has no data rows");

    const int first_year = csv::parse_int(rows[1].fields[0], rows[1].line);
    std::vector<std::vector<double>> columns(ncols);
    int prev = first_year - 1;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != ncols + 1)
            throw FormatError(row.line, "expected " + std::to_string(ncols + 1) + " fields");
        const int year = csv::parse_int(row.fields[0], row.line);
        if (year <= prev) throw FormatError(row.line, "years must be strictly ascending");
        for (int y = prev + 1; y < year; ++y)
            for (auto& col : columns) col.push_back(kMissing);
        for (std::size_t c = 0; c < ncols; ++c) {
            const auto& f = row.fields[c + 1];
            columns[c].push_back(f.empty() ? kMissing : csv::parse_double(f, row.line));
        }
        prev = year;
    }

    LoadResult result;
    result.network.frozen_at = frozen_at;
    for (const auto& m : meta) {
        TimeSeries series(first_year, columns[column_of.at(m.id)]);
        const auto present = series.present_span();
        // Decadal values sit at block ends, so a decadal record may start up to 9 years late.
        const int slack = m.resolution == Resolution::decadal ? 9 : 0;
        if (!present) {
            result.rejections.push_back({m.id, "no_data"});
        } else if (present->first > frozen_at + slack) {
            result.rejections.push_back({m.id, "starts_after_" + std::to_string(frozen_at)});
        } else if (m.resolution == Resolution::decadal && !decadal_pattern_ok(series)) {
            result.rejections.push_back({m.id, "multiple_values_per_decade"});
        } else {
            result.network.records.push_back(
                ProxyRecord{m.id, std::move(series), m.kind, m.core_count, m.flags, m.resolution});
        }
    }
    return result;
}

LoadResult load_network(const std::filesystem::path& metadata, const std::filesystem::path& values, int frozen_at) {
    std::ifstream meta_in(metadata);
    if (!meta_in) throw InputError("cannot open '" + metadata.string() + "'");
    std::ifstream values_in(values);
    if (!values_in) throw InputError("cannot open '" + values.string() + "'");
    return parse_network(meta_in, values_in, frozen_at);
}

ProxyNetwork screen_replication(const ProxyNetwork& net, int min_cores) {
    if (min_cores < 1) throw InputError("min_cores must be at least 1");
    ProxyNetwork out{{}, net.frozen_at};
    for (const auto& r : net.records) {
        if (r.kind == ProxyKind::tree_ring && (!r.core_count || *r.core_count < min_cores)) continue;
        out.records.push_back(r);
    }
    return out;
}

ProxyNetwork exclude_flagged(const ProxyNetwork& net, std::string_view flag) {
    ProxyNetwork out{{}, net.frozen_at};
    for (const auto& r : net.records)
        if (!r.has_flag(flag)) out.records.push_back(r);
    return out;
}

std::vector<std::string> removed_ids(const ProxyNetwork& before, const ProxyNetwork& after) {
    std::vector<std::string> out;
    for (const auto& r : before.records)
        if (!after.find(r.id)) out.push_back(r.id);
    return out;
}

TimeSeries NetworkMatrix::column(Eigen::Index j) const {
    std::vector<double> v(static_cast<std::size_t>(rows()));
    for (Eigen::Index i = 0; i < rows(); ++i) v[static_cast<std::size_t>(i)] = values(i, j);
    return TimeSeries(first_year, std::move(v));
}

NetworkMatrix NetworkMatrix::select_columns(const std::vector<Eigen::Index>& cols) const {
    NetworkMatrix out;
    out.first_year = first_year;
    out.values.resize(rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) {
        out.values.col(static_cast<Eigen::Index>(k)) = values.col(cols[k]);
        out.ids.push_back(ids[static_cast<std::size_t>(cols[k])]);
        out.resolution.push_back(resolution[static_cast<std::size_t>(cols[k])]);
    }
    return out;
}

NetworkMatrix network_matrix(const ProxyNetwork& net, int start, int end) {
    if (start > end) throw InputError("network_matrix: start after end");
    NetworkMatrix m;
    m.first_year = start;
    m.values.resize(end - start + 1, static_cast<Eigen::Index>(net.size()));
    for (std::size_t j = 0; j < net.size(); ++j) {
        const auto& rec = net.records[j];
        for (int y = start; y <= end; ++y) m.values(y - start, static_cast<Eigen::Index>(j)) = rec.series.at_year(y);
        m.ids.push_back(rec.id);
        m.resolution.push_back(rec.resolution);
    }
    return m;
}

NetworkMatrix fill_decadal(const NetworkMatrix& m) {
    NetworkMatrix out = m;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (m.resolution[static_cast<std::size_t>(j)] != Resolution::decadal) continue;
        const TimeSeries filled = interpolate_linear(m.column(j));
        const auto span = filled.present_span();
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            const int year = m.first_year + static_cast<int>(i);
            const bool head = span && year < span->first && year > span->first - 10;
            out.values(i, j) = head ? filled.at_year(span->first) : filled[static_cast<std::size_t>(i)];
        }
    }
    return out;
}

std::string format_metadata(const ProxyNetwork& net) {
    std::ostringstream out;
    out << "id,kind,core_count,flags,resolution\n";
    for (const auto& r : net.records) {
        out << r.id << ',' << to_string(r.kind) << ',';
        if (r.core_count) out << *r.core_count;
        out << ',';
        bool first = true;
        for (const auto& f : r.flags) {
            out << (first ? "" : ";") << f;
            first = false;
        }
        out << ',' << to_string(r.resolution) << '\n';
    }
    return out.str();
}

std::string format_values(const ProxyNetwork& net) {
    std::ostringstream out;
    out << "year";
    for (const auto& r : net.records) out << ',' << r.id;
    out << '\n';
    if (net.records.empty()) return out.str();
    int first = net.records.front().series.start_year();
    int last = net.records.front().series.end_year();
    for (const auto& r : net.records) {
        first = std::min(first, r.series.start_year());
        last = std::max(last, r.series.end_year());
    }
    for (int y = first; y <= last; ++y) {
        out << y;
        for (const auto& r : net.records) out << ',' << csv::format_double(r.series.at_year(y));
        out << '\n';
    }
    return out.str();
}

std::string format_rejections(const std::vector<Rejection>& rejections) {
    std::ostringstream out;
    out << "id,reason\n";
    for (const auto& r : rejections) out << r.id << ',' << r.reason << '\n';
    return out.str();
}

void write_network(const ProxyNetwork& net, const std::filesystem::path& metadata, const std::filesystem::path& values) {
    csv::write_atomic(metadata, format_metadata(net));
    csv::write_atomic(values, format_values(net));
}

}  // namespace paleo
