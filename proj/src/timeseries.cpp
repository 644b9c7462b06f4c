#include "paleorecon/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "paleorecon/errors.hpp"

namespace paleo {

std::optional<YearRange> intersect(YearRange a, YearRange b) {
    const YearRange r{std::max(a.first, b.first), std::min(a.last, b.last)};
    if (r.first > r.last) return std::nullopt;
    return r;
}

TimeSeries::TimeSeries(int start_year, std::vector<double> values)
    : start_year_(start_year), values_(std::move(values)), mask_(values_.size()) {
    if (values_.empty()) throw InputError("time series must have at least one entry");
    for (std::size_t i = 0; i < values_.size(); ++i) mask_[i] = !std::isnan(values_[i]);
}

TimeSeries::TimeSeries(int start_year, std::vector<double> values, const std::vector<bool>& present)
    : start_year_(start_year), values_(std::move(values)), mask_(present) {
    if (values_.empty()) throw InputError("time series must have at least one entry");
    if (mask_.size() != values_.size()) throw InputError("values and mask lengths differ");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!mask_[i] || std::isnan(values_[i])) {
            mask_[i] = false;
            values_[i] = kMissing;
        }
    }
}

bool TimeSeries::present_at(int year) const {
    return span().contains(year) && mask_[index_of(year)];
}

double TimeSeries::at_year(int year) const {
    return present_at(year) ? values_[index_of(year)] : kMissing;
}

std::size_t TimeSeries::count_present() const {
    return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), true));
}

TimeSeries TimeSeries::slice(YearRange range) const {
    if (range.first > range.last || !span().contains(range))
        throw InputError("slice [" + std::to_string(range.first) + ", " + std::to_string(range.last) +
                         "] outside series span");
    const auto b = static_cast<std::ptrdiff_t>(index_of(range.first));
    const auto e = static_cast<std::ptrdiff_t>(index_of(range.last)) + 1;
    return TimeSeries(range.first, std::vector<double>(values_.begin() + b, values_.begin() + e),
                      std::vector<bool>(mask_.begin() + b, mask_.begin() + e));
}

TimeSeries TimeSeries::masked(YearRange range) const {
    TimeSeries out = *this;
    for (int y = std::max(range.first, start_year()); y <= std::min(range.last, end_year()); ++y) {
        out.mask_[out.index_of(y)] = false;
        out.values_[out.index_of(y)] = kMissing;
    }
    return out;
}

std::optional<YearRange> TimeSeries::present_span() const {
    auto first = std::find(mask_.begin(), mask_.end(), true);
    if (first == mask_.end()) return std::nullopt;
    auto last = std::find(mask_.rbegin(), mask_.rend(), true);
    return YearRange{start_year_ + static_cast<int>(first - mask_.begin()),
                     end_year() - static_cast<int>(last - mask_.rbegin())};
}

bool operator==(const TimeSeries& a, const TimeSeries& b) {
    if (a.start_year_ != b.start_year_ || a.mask_ != b.mask_) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.mask_[i] && a.values_[i] != b.values_[i]) return false;
    return true;
}

std::optional<std::size_t> DecadalSeries::find(YearRange decade) const {
    if (decade.length() != 10) return std::nullopt;
    const int offset = decade.first - first_block_start;
    if (offset < 0 || offset % 10 != 0) return std::nullopt;
    const auto i = static_cast<std::size_t>(offset / 10);
    if (i >= size()) return std::nullopt;
    return i;
}

TimeSeries DecadalSeries::to_annual() const {
    std::vector<double> v;
    std::vector<bool> m;
    v.reserve(10 * size());
    m.reserve(10 * size());
    for (std::size_t i = 0; i < size(); ++i) {
        for (int k = 0; k < 10; ++k) {
            v.push_back(present[i] ? means[i] : kMissing);
            m.push_back(present[i]);
        }
    }
    return TimeSeries(first_block_start, std::move(v), m);
}

std::pair<TimeSeries, TimeSeries> align(const TimeSeries& a, const TimeSeries& b) {
    const auto common = intersect(a.span(), b.span());
    if (!common) throw NoOverlap();
    return {a.slice(*common), b.slice(*common)};
}

double mean_present(const TimeSeries& s, YearRange window) {
    double sum = 0.0;
    std::size_t n = 0;
    for (int y = window.first; y <= window.last; ++y) {
        if (s.present_at(y)) {
            sum += s.at_year(y);
            ++n;
        }
    }
    return n ? sum / static_cast<double>(n) : kMissing;
}

TimeSeries to_anomaly(const TimeSeries& s, int base_start, int base_end) {
    std::size_t n = 0;
    for (int y = base_start; y <= base_end; ++y) n += s.present_at(y) ? 1 : 0;
    if (n < 2)
        throw DegenerateBaseline("base window " + std::to_string(base_start) + "-" + std::to_string(base_end) +
                                 " has " + std::to_string(n) + " present entries (need 2)");
    const double mu = mean_present(s, {base_start, base_end});
    std::vector<double> v = s.values();
    for (double& x : v) x -= mu;  // NaN stays NaN
    return TimeSeries(s.start_year(), std::move(v), s.mask());
}

int decade_block_start(int year, int decade_anchor) {
    const int first_of_block = decade_anchor + 1;
    const int offset = ((year - first_of_block) % 10 + 10) % 10;
    return year - offset;
}

DecadalSeries decadal_average(const TimeSeries& s, int decade_anchor) {
    int start = decade_block_start(s.start_year(), decade_anchor);
    if (start < s.start_year()) start += 10;
    if (start + 9 > s.end_year())
        throw NoCompleteBlock("series " + std::to_string(s.start_year()) + "-" + std::to_string(s.end_year()) +
                              " contains no complete decade block");
    DecadalSeries out;
    out.first_block_start = start;
    for (int b = start; b + 9 <= s.end_year(); b += 10) {
        double sum = 0.0;
        int n = 0;
        for (int y = b; y <= b + 9; ++y) {
            if (s.present_at(y)) {
                sum += s.at_year(y);
                ++n;
            }
        }
        out.present.push_back(n >= 5);
        out.means.push_back(n >= 5 ? sum / n : kMissing);
    }
    return out;
}

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;

    // Direct form II transposed, state initialised to the steady state for a constant input x0.
    void run(std::vector<double>& x) const {
        if (x.empty()) return;
        double z2 = (b2 - a2) * x.front();
        double z1 = (b1 - a1) * x.front() + z2;
        for (double& v : x) {
            const double in = v;
            const double out = b0 * in + z1;
            z1 = b1 * in - a1 * out + z2;
            z2 = b2 * in - a2 * out;
            v = out;
        }
    }
};

Biquad butterworth_lowpass(double cutoff) {
    const double k = std::tan(std::numbers::pi * cutoff);
    const double k2 = k * k;
    const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
    Biquad f{};
    f.b0 = k2 * norm;
    f.b1 = 2.0 * f.b0;
    f.b2 = f.b0;
    f.a1 = 2.0 * (k2 - 1.0) * norm;
    f.a2 = (1.0 - std::numbers::sqrt2 * k + k2) * norm;
    return f;
}

}  // namespace

std::vector<double> lowpass_zero_phase(std::span<const double> x, double cutoff) {
    const std::size_t n = x.size();
    if (n == 0) return {};
    const Biquad filter = butterworth_lowpass(cutoff);
    const auto pad = std::min<std::size_t>(
        n - 1, std::max<std::size_t>(9, static_cast<std::size_t>(std::ceil(3.0 / cutoff))));

    // Odd reflection about each end point keeps affine trends intact across the boundary.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

    filter.run(ext);
    std::reverse(ext.begin(), ext.end());
    filter.run(ext);
    std::reverse(ext.begin(), ext.end());
    return {ext.begin() + static_cast<std::ptrdiff_t>(pad), ext.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

BandPair split_bands(const TimeSeries& s, double split_period_years) {
    if (!(split_period_years > 2.0)) throw InputError("split period must exceed 2 years");
    if (!s.complete())
        throw MissingDataError("band split needs a gap-free series (" +
                               std::to_string(s.size() - s.count_present()) + " missing)");
    std::vector<double> low = lowpass_zero_phase(s.values(), 1.0 / split_period_years);
    std::vector<double> high(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) high[i] = s[i] - low[i];
    return {TimeSeries(s.start_year(), std::move(low)), TimeSeries(s.start_year(), std::move(high))};
}

TimeSeries loess_smooth(const TimeSeries& s, double span) {
    if (!(span > 0.0 && span <= 1.0)) throw InputError("loess span must lie in (0, 1]");
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.present(i)) {
            xs.push_back(static_cast<double>(i));
            ys.push_back(s[i]);
        }
    }
    const std::size_t n = xs.size();
    const auto q = static_cast<std::size_t>(std::floor(span * static_cast<double>(n) + 1e-9));

    std::vector<double> out(s.size(), kMissing);
    std::vector<bool> mask(s.size(), false);
    if (q < 4) return TimeSeries(s.start_year(), std::move(out), mask);

    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.present(i)) continue;
        const double x0 = static_cast<double>(i);
        // Grow the window [lo, hi) from the nearest present point until it holds q points.
        auto pos = static_cast<std::size_t>(std::lower_bound(xs.begin(), xs.end(), x0) - xs.begin());
        std::size_t lo = pos, hi = pos;
        while (hi - lo < q) {
            if (lo == 0) ++hi;
            else if (hi == n) --lo;
            else if (x0 - xs[lo - 1] <= xs[hi] - x0) --lo;
            else ++hi;
        }
        const double h = std::max(x0 - xs[lo], xs[hi - 1] - x0);
        while (lo > 0 && x0 - xs[lo - 1] <= h) --lo;
        while (hi < n && xs[hi] - x0 <= h) ++hi;

        double sw = 0, swx = 0, swy = 0, swxx = 0, swxy = 0;
        std::size_t positive = 0;
        for (std::size_t j = lo; j < hi; ++j) {
            const double d = h > 0 ? std::abs(xs[j] - x0) / h : 0.0;
            const double t = 1.0 - d * d * d;
            const double w = d < 1.0 ? t * t * t : 0.0;
            if (w <= 0.0) continue;
            ++positive;
            const double dx = xs[j] - x0;
            sw += w;
            swx += w * dx;
            swy += w * ys[j];
            swxx += w * dx * dx;
            swxy += w * dx * ys[j];
        }
        if (positive < 2) continue;
        // Local line centred on x0: the fitted value is the intercept.
        const double det = sw * swxx - swx * swx;
        const double value = det > 1e-12 * sw * swxx ? (swxx * swy - swx * swxy) / det : swy / sw;
        out[i] = value;
        mask[i] = true;
    }
    return TimeSeries(s.start_year(), std::move(out), mask);
}

TimeSeries interpolate_linear(const TimeSeries& s) {
    std::vector<double> v = s.values();
    std::vector<bool> m = s.mask();
    std::optional<std::size_t> prev;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!m[i]) continue;
        if (prev && i - *prev > 1) {
            const double a = v[*prev];
            const double b = v[i];
            const double len = static_cast<double>(i - *prev);
            for (std::size_t k = *prev + 1; k < i; ++k) {
                v[k] = a + (b - a) * static_cast<double>(k - *prev) / len;
                m[k] = true;
            }
        }
        prev = i;
    }
    return TimeSeries(s.start_year(), std::move(v), m);
}

}  // namespace paleo
