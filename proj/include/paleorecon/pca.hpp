#pragma once

#include <vector>

#include <Eigen/Dense>

#include "paleorecon/proxy.hpp"
#include "paleorecon/timeseries.hpp"

namespace paleo {

struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
};

/// Principal components of the column-standardized proxy matrix.
struct PCABasis {
    Eigen::MatrixXd loadings;            // records x components, orthonormal columns
    Eigen::MatrixXd scores;              // matrix years x components, NaN where a proxy is missing
    Eigen::VectorXd explained_variance;  // non-increasing fractions
    Eigen::VectorXd singular_values;
    Standardization standardization;     // over the fit window
    int first_year = 0;
    YearRange fit_window;
    std::vector<std::string> ids;

    Eigen::Index components() const noexcept { return loadings.cols(); }
    YearRange years() const { return {first_year, first_year + static_cast<int>(scores.rows()) - 1}; }
    /// Scores for an arbitrary matrix with the same records, using the stored standardization.
    Eigen::MatrixXd project(const Eigen::MatrixXd& raw) const;
};

/// Decadal columns resampled with fill_decadal, linear interpolation of interior
/// gaps in every column, then removal of columns that still have missing entries
/// inside `window`.
NetworkMatrix prepare_for_pca(const NetworkMatrix& m, YearRange window);

/// SVD-based PCA over `fit_window`, which must be gap-free. Throws DegenerateColumn
/// for a zero-variance record.
PCABasis fit_pca(const NetworkMatrix& m, YearRange fit_window);

enum class KRule { cross_validation, broken_stick };

/// Leave-one-decade-out cross-validated RMSE of OLS on the first K scores, for K = 1..max_K.
/// `fold_errors[K-1][b]` is the mean squared error on block b.
struct CvCurve {
    std::vector<double> rmse;
    std::vector<std::vector<double>> fold_errors;
    int n_years = 0;
};

CvCurve cv_curve(const PCABasis& basis, const TimeSeries& target, int max_K, YearRange calibration);

/// Number of retained components. With cross_validation, the smallest K whose CV
/// error is within one paired standard error of the minimum (ties go to smaller K).
/// With broken_stick, the count of leading components whose explained variance
/// beats the broken-stick expectation, clamped to [1, max_K].
int select_K(const PCABasis& basis, const TimeSeries& target, int max_K, YearRange calibration,
             KRule rule = KRule::cross_validation);

}  // namespace paleo
