#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paleorecon/methods.hpp"
#include "paleorecon/proxy.hpp"
#include "paleorecon/skill.hpp"
#include "paleorecon/timeseries.hpp"

namespace paleo {

struct Site {
    std::string id;
    double lat = 0.0;
    double lon = 0.0;
};

/// Gridded "true" climate: one gap-free annual series per site plus the
/// cos(latitude)-weighted hemispheric mean.
struct TruthField {
    std::vector<Site> sites;
    int first_year = 0;
    Eigen::MatrixXd series;  // years x sites
    TimeSeries hemisphere_mean{0, {0.0}};

    YearRange years() const { return {first_year, first_year + static_cast<int>(series.rows()) - 1}; }
    TimeSeries site_series(std::size_t j) const;
};

TimeSeries area_weighted_mean(const std::vector<Site>& sites, const Eigen::MatrixXd& series, int first_year);

/// Parameters of the synthetic truth generator.
struct SignalConfig {
    double forced_sd = 0.25;        // marginal sd of the slow common signal (deg C)
    double forced_rho = 0.97;       // lag-1 autocorrelation of the slow common signal
    int ramp_start = 1850;          // start of the late warming ramp
    double ramp_amplitude = 0.8;    // ramp height at the final year (deg C)
    double site_noise_sd = 0.4;     // marginal sd of local weather noise
    double site_noise_rho = 0.3;    // lag-1 autocorrelation of local weather noise
    double correlation_length_km = 1500.0;
};

/// Sites on a Northern Hemisphere Fibonacci lattice (area-uniform, deterministic).
std::vector<Site> hemisphere_grid(int n_sites);

/// Common forced signal (mean-reverting red walk plus a linear ramp from
/// ramp_start) added to spatially correlated AR(1) weather noise at each site.
TruthField generate_truth(int n_sites, YearRange years, const SignalConfig& config, std::uint64_t seed);

/// External field: metadata `site_id,lat,lon` and wide values `year,<site...>` without gaps.
TruthField load_field(const std::filesystem::path& metadata, const std::filesystem::path& values);

/// Stationary AR(1): x_t = rho x_{t-1} + e_t with Var(e) = sigma^2 (1 - rho^2), x_0 drawn
/// from the stationary distribution.
TimeSeries ar1_noise(std::size_t n, double rho, double sigma, std::uint64_t seed, int start_year = 0);

struct PseudoproxySpec {
    int n_sites = 59;
    double rho = 0.32;
    double snr = 0.4;  // signal/noise standard-deviation ratio; infinity = noise free
    std::uint64_t seed = 0;
    YearRange calibration = kDefaultCalibration;
};

struct PseudoproxySet {
    ProxyNetwork network;
    std::vector<std::size_t> sites;  // field column of each pseudoproxy
    Eigen::MatrixXd noise;           // years x proxies
};

/// Samples n_sites sites without replacement and adds AR(1) noise whose marginal
/// sd is the site's full-period signal sd divided by snr.
PseudoproxySet make_pseudoproxies(const TruthField& field, const PseudoproxySpec& spec);

struct BenchmarkEntry {
    std::string method;
    int replicate = 0;
    std::optional<SkillReport> skill;
    std::string error;
};

struct BenchmarkResult {
    std::vector<std::string> methods;
    std::vector<BenchmarkEntry> entries;
    YearRange verification;

    /// Median of a statistic over successful replicates of `method`; NaN if none.
    double median(const std::string& method, double SkillReport::*stat) const;
    std::vector<SkillReport> reports(const std::string& method) const;
};

/// Pseudoproxy benchmark: per replicate, fresh sites and noise from a seed derived
/// from (base_seed, replicate); every method is fit over the calibration interval
/// against the true hemispheric mean and scored over the pre-calibration years.
/// Fit errors are recorded per entry. Replicates run on up to `threads` threads with
/// identical results to a serial run.
BenchmarkResult run_benchmark(const TruthField& field, const PseudoproxySpec& spec,
                              const std::vector<MethodConfig>& methods, int replicates, std::uint64_t base_seed,
                              int threads = 1);

/// Per-replicate rows `method,replicate,rmse,re,ce,r2,var_ratio`, then one `median` row per method.
std::string format_benchmark(const BenchmarkResult& result);

}  // namespace paleo
