#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace paleo {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

/// Closed interval of calendar years [first, last].
struct YearRange {
    int first = 0;
    int last = 0;

    int length() const noexcept { return last - first + 1; }
    bool contains(int year) const noexcept { return year >= first && year <= last; }
    bool contains(YearRange other) const noexcept { return other.first >= first && other.last <= last; }
    friend bool operator==(YearRange, YearRange) = default;
};

std::optional<YearRange> intersect(YearRange a, YearRange b);

/// Default calibration interval of the instrumental overlap.
inline constexpr YearRange kDefaultCalibration{1856, 1980};

/// Annual series on a contiguous year axis. Missing entries are masked and hold NaN.
class TimeSeries {
public:
    /// NaN entries in `values` are treated as missing.
    TimeSeries(int start_year, std::vector<double> values);
    TimeSeries(int start_year, std::vector<double> values, const std::vector<bool>& present);

    int start_year() const noexcept { return start_year_; }
    int end_year() const noexcept { return start_year_ + static_cast<int>(values_.size()) - 1; }
    YearRange span() const noexcept { return {start_year(), end_year()}; }
    std::size_t size() const noexcept { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    bool present(std::size_t i) const { return mask_[i]; }
    bool present_at(int year) const;
    /// Value at `year`, NaN when missing or outside the span.
    double at_year(int year) const;
    std::size_t index_of(int year) const { return static_cast<std::size_t>(year - start_year_); }

    const std::vector<double>& values() const noexcept { return values_; }
    const std::vector<bool>& mask() const noexcept { return mask_; }

    std::size_t count_present() const;
    bool complete() const { return count_present() == size(); }

    /// Restriction to `range`, which must lie inside the span.
    TimeSeries slice(YearRange range) const;
    /// Copy with every year in `range` marked missing.
    TimeSeries masked(YearRange range) const;
    /// First and last present years, if any.
    std::optional<YearRange> present_span() const;

    friend bool operator==(const TimeSeries& a, const TimeSeries& b);

private:
    int start_year_;
    std::vector<double> values_;
    std::vector<bool> mask_;
};

/// Complementary low/high frequency split of a series.
struct BandPair {
    TimeSeries low;
    TimeSeries high;
};

/// Means of consecutive 10-year blocks.
struct DecadalSeries {
    int first_block_start = 0;
    std::vector<double> means;
    std::vector<bool> present;

    std::size_t size() const noexcept { return means.size(); }
    YearRange block(std::size_t i) const {
        const int start = first_block_start + 10 * static_cast<int>(i);
        return {start, start + 9};
    }
    /// Index of the block that exactly matches `decade`, if any.
    std::optional<std::size_t> find(YearRange decade) const;
    /// Step-function expansion back onto the annual axis.
    TimeSeries to_annual() const;
};

/// Block end year that places 1997-2006 on a block boundary.
inline constexpr int kDefaultDecadeAnchor = 2006;

std::pair<TimeSeries, TimeSeries> align(const TimeSeries& a, const TimeSeries& b);

/// Subtracts the mean of the present entries inside [base_start, base_end].
TimeSeries to_anomaly(const TimeSeries& s, int base_start, int base_end);

/// Averages complete 10-year blocks whose end years are congruent to
/// `decade_anchor` modulo 10. Blocks with fewer than 5 present entries are masked.
DecadalSeries decadal_average(const TimeSeries& s, int decade_anchor = kDefaultDecadeAnchor);

/// Block-start year for the block containing `year` under a given anchor.
int decade_block_start(int year, int decade_anchor);

/// Zero-phase low-pass with cutoff 1/split_period_years cycles per year; the high
/// band is the residual. Fails on missing values.
BandPair split_bands(const TimeSeries& s, double split_period_years);

/// Zero-phase second-order Butterworth low-pass (forward-backward, odd reflection padding).
std::vector<double> lowpass_zero_phase(std::span<const double> x, double cutoff_cycles_per_year);

/// Local linear regression with tricube weights over the nearest span*n present points.
TimeSeries loess_smooth(const TimeSeries& s, double span);

/// Fills interior gaps by linear interpolation; leading and trailing gaps stay missing.
TimeSeries interpolate_linear(const TimeSeries& s);

double mean_present(const TimeSeries& s, YearRange window);

}  // namespace paleo
