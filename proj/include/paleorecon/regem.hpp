#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "paleorecon/model.hpp"
#include "paleorecon/proxy.hpp"

namespace paleo {

struct RegemConfig {
    /// Ridge parameter relative to the diagonal of the predictor covariance.
    /// Unset: chosen per missingness pattern and iteration by generalized cross-validation.
    std::optional<double> ridge;
    /// Fraction of the observed rows that GCV counts as independent samples
    /// (below 1 for serially dependent data such as a low-pass band).
    double sample_fraction = 1.0;
    double tolerance = 1e-6;  // relative change of the imputed values
    int max_iterations = 200;
};

struct RegemResult {
    Eigen::MatrixXd completed;
    Eigen::VectorXd mean;
    Eigen::MatrixXd covariance;
    int iterations = 0;
    std::vector<double> changes;  // relative change of imputed values, per iteration
    std::vector<double> ridges;   // ridge used for the last pattern of each iteration
};

/// Regularized EM imputation of the NaN entries of `data` (rows = observations).
/// E-step: ridge regression of each row's missing variables on its available ones
/// under the current mean and covariance. M-step: mean and covariance of the
/// completed matrix plus the conditional residual covariance. Throws
/// ConvergenceError when the iteration cap is reached.
RegemResult fit_regem(const Eigen::MatrixXd& data, const RegemConfig& config = {});

/// Ridge regression weights of variable block `missing` on `available` under the
/// moments (mean, cov), standardizing the available block by its diagonal.
struct RidgeRegression {
    Eigen::MatrixXd weights;    // |available| x |missing|, raw units
    Eigen::MatrixXd residual;   // |missing| x |missing| conditional residual covariance
    double ridge = 0.0;
};

RidgeRegression ridge_regression(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& available,
                                 const std::vector<Eigen::Index>& missing, std::optional<double> ridge, double n_obs);

/// E-step regression used by fit_regem. The ridge is chosen (or given) for the
/// rows in which the whole `missing` block is observed, standardizing by their
/// variances, with GCV counting |observed_rows| * sample_fraction samples; it is
/// applied to `cov` (normalized over `cov_rows` rows) as a penalty
/// scaled by |observed_rows| / cov_rows. With fewer than 3 such rows, falls back
/// to ridge_regression on `cov`.
RidgeRegression em_regression(const Eigen::MatrixXd& completed, const Eigen::MatrixXd& cov, double cov_rows,
                              const std::vector<Eigen::Index>& observed_rows,
                              const std::vector<Eigen::Index>& available, const std::vector<Eigen::Index>& missing,
                              std::optional<double> ridge, double sample_fraction = 1.0);

/// Joint proxies-plus-target RegEM reconstruction: the target column is missing
/// outside its present calibration years. Decadal records are first linearly
/// interpolated between their values. EM runs over the years up to the end of
/// calibration; the returned series holds the imputed target before calibration, the
/// final regression estimate over it, and that regression applied to fully present
/// proxy rows after it (missing otherwise).
Reconstruction reconstruct_regem(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                                 const RegemConfig& config = {});

struct HybridReconstruction {
    Reconstruction combined;
    TimeSeries low;
    TimeSeries high;
};

/// Hybrid frequency-band RegEM: the target and annual proxies are split at
/// `split_period` years; each band is reconstructed separately and the results
/// summed. Decadal-resolution records enter the low band only. Over each
/// contiguous run of present target years in calibration, proxies are band-split on
/// that run so both sides of the calibration regression see identical filtering;
/// elsewhere proxies are split over their own present span.
HybridReconstruction reconstruct_hybrid(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                                        double split_period = 20.0, const RegemConfig& config = {});

}  // namespace paleo
