#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "paleorecon/model.hpp"
#include "paleorecon/pca.hpp"
#include "paleorecon/proxy.hpp"

namespace paleo {

/// Calibration design: rows of the first K scores (no intercept column) for years in
/// `calibration` where both the target and every score are present.
struct OlsDesign {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    std::vector<int> years;
};

OlsDesign ols_design(const PCABasis& basis, const TimeSeries& target, int K, YearRange calibration);

/// OLS of the target on the first K scores plus intercept. residual_variance = SSE/(n-K-1).
ReconModel fit_ols_pc(const PCABasis& basis, const TimeSeries& target, int K, YearRange calibration);

/// Least squares with intercept for an arbitrary design; coefficient 0 is the intercept.
/// Throws SingularFit when [1 X] is rank deficient.
Eigen::VectorXd ols_with_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

inline double soft_threshold(double z, double gamma) {
    return z > gamma ? z - gamma : (z < -gamma ? z + gamma : 0.0);
}

struct LassoOptions {
    double tolerance = 1e-8;   // max absolute coefficient change per sweep
    int max_sweeps = 100000;
};

/// Coordinate descent for 0.5*||y - X b||^2 + lambda*||b||_1 on centred y and
/// columns of X that are already centred. Returns the coefficients.
Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                         const LassoOptions& options = {},
                                         const Eigen::VectorXd* warm_start = nullptr);

/// Lasso of the target on the standardized proxies (calibration-window mean and
/// standard deviation), intercept unpenalized.
ReconModel fit_lasso(const NetworkMatrix& m, const TimeSeries& target, double lambda, YearRange calibration,
                     const LassoOptions& options = {});

/// Smallest lambda that zeroes every coefficient: max |X^T (y - mean y)| on the standardized design.
double lasso_lambda_max(const NetworkMatrix& m, const TimeSeries& target, YearRange calibration);

/// Lambda from a log grid of `grid_size` values spanning [1e-3, 1] * lambda_max, picked by
/// leave-one-decade-out CV with the one-standard-error rule toward larger lambda.
double select_lambda(const NetworkMatrix& m, const TimeSeries& target, YearRange calibration, int grid_size = 30);

}  // namespace paleo
