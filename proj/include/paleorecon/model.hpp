#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "paleorecon/timeseries.hpp"

namespace paleo {

enum class Method { ols_pc, lasso, regem, regem_hybrid };

std::string_view to_string(Method method);
std::optional<Method> parse_method(std::string_view s);

/// A fitted reconstruction method.
///
/// For `ols_pc` the predictors are the first K principal-component scores. For
/// `lasso` they are the raw proxies, standardized with `predictor_mean` and
/// `predictor_scale` before the coefficients apply. For the RegEM variants the
/// coefficients are the final ridge regression of the target on the completed
/// proxies in raw units (the hybrid stores low-band then high-band weights).
struct ReconModel {
    Method method = Method::ols_pc;
    std::optional<int> K;
    std::optional<double> lambda;
    std::optional<double> ridge;
    std::optional<double> split_period;
    YearRange calibration = kDefaultCalibration;
    Eigen::VectorXd coefficients;
    double intercept = 0.0;
    double residual_variance = 0.0;
    int n_calibration = 0;
    Eigen::VectorXd predictor_mean;
    Eigen::VectorXd predictor_scale;
};

struct Reconstruction {
    TimeSeries series;
    ReconModel model;
    std::string label;
};

/// Intercept plus coefficient dot product for each year of `years`. Years whose
/// predictor row has a missing entry, or that fall outside the matrix, are masked.
/// `predictors` rows start at `first_year`; columns must match the model.
Reconstruction predict(const ReconModel& model, const Eigen::MatrixXd& predictors, int first_year, YearRange years,
                       std::string label = {});

/// `year,value,label` rows.
std::string format_reconstruction(const Reconstruction& r);
std::string format_reconstruction(const TimeSeries& series, std::string_view label);

/// Key-value text dump of the model.
std::string format_model(const ReconModel& m);

}  // namespace paleo
