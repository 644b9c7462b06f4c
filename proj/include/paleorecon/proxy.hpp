#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "paleorecon/timeseries.hpp"

namespace paleo {

enum class ProxyKind { tree_ring, lake_sediment, ice_core, coral, documentary, other };
enum class Resolution { annual, decadal };

std::string_view to_string(ProxyKind kind);
std::string_view to_string(Resolution resolution);
std::optional<ProxyKind> parse_kind(std::string_view s);
std::optional<Resolution> parse_resolution(std::string_view s);

struct ProxyRecord {
    std::string id;
    TimeSeries series;
    ProxyKind kind = ProxyKind::other;
    std::optional<int> core_count;  // tree_ring only
    std::set<std::string> flags;
    Resolution resolution = Resolution::annual;

    bool has_flag(std::string_view flag) const { return flags.contains(std::string(flag)); }
};

/// A frozen set of records that all extend back to `frozen_at`.
struct ProxyNetwork {
    std::vector<ProxyRecord> records;
    int frozen_at = 1000;

    std::size_t size() const noexcept { return records.size(); }
    std::vector<std::string> ids() const;
    const ProxyRecord* find(std::string_view id) const;
};

struct Rejection {
    std::string id;
    std::string reason;
};

struct LoadResult {
    ProxyNetwork network;
    std::vector<Rejection> rejections;
};

/// Reads the metadata table (`id,kind,core_count,flags,resolution`) and the wide
/// values table (`year,<id>...`). Records whose data start after `frozen_at` are
/// rejected rather than loaded.
LoadResult load_network(const std::filesystem::path& metadata, const std::filesystem::path& values, int frozen_at);
LoadResult parse_network(std::istream& metadata, std::istream& values, int frozen_at);

/// Drops tree-ring records with fewer than `min_cores` cores, or with unknown core count.
ProxyNetwork screen_replication(const ProxyNetwork& net, int min_cores);

/// Drops every record carrying `flag`.
ProxyNetwork exclude_flagged(const ProxyNetwork& net, std::string_view flag);

/// Ids present in `before` but not in `after`, in `before` order.
std::vector<std::string> removed_ids(const ProxyNetwork& before, const ProxyNetwork& after);

/// Year-by-record predictor matrix; NaN marks missing entries.
struct NetworkMatrix {
    int first_year = 0;
    Eigen::MatrixXd values;
    std::vector<std::string> ids;
    std::vector<Resolution> resolution;

    Eigen::Index rows() const noexcept { return values.rows(); }
    Eigen::Index cols() const noexcept { return values.cols(); }
    YearRange years() const { return {first_year, first_year + static_cast<int>(values.rows()) - 1}; }
    Eigen::Index row_of(int year) const { return year - first_year; }
    TimeSeries column(Eigen::Index j) const;
    NetworkMatrix select_columns(const std::vector<Eigen::Index>& cols) const;
};

NetworkMatrix network_matrix(const ProxyNetwork& net, int start, int end);

/// Decadal columns resampled to annual: linear interpolation between values, and
/// the first value (a block mean) also covers the earlier years of its own block.
/// Annual columns are returned unchanged.
NetworkMatrix fill_decadal(const NetworkMatrix& m);

/// Inverse of load_network for a network (no rejection log).
void write_network(const ProxyNetwork& net, const std::filesystem::path& metadata, const std::filesystem::path& values);
std::string format_metadata(const ProxyNetwork& net);
std::string format_values(const ProxyNetwork& net);
std::string format_rejections(const std::vector<Rejection>& rejections);

}  // namespace paleo
