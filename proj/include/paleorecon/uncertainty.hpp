#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "paleorecon/model.hpp"
#include "paleorecon/timeseries.hpp"

namespace paleo {

/// Posterior draws of (intercept, coefficients) and the error variance.
struct CoefficientDraws {
    Eigen::MatrixXd beta;    // n_draws x (1 + K); column 0 is the intercept
    Eigen::VectorXd sigma2;  // n_draws
};

/// Exact draws from the normal-inverse-gamma posterior of an OLS-PC model under the
/// Jeffreys prior p(beta, sigma^2) ~ 1/sigma^2:
///   sigma^2 ~ (n-p) s^2 / chi^2_{n-p},  beta | sigma^2 ~ N(beta_hat, sigma^2 (A^T A)^-1),
/// with A = [1 design], p = K + 1 and s^2 the model's residual variance. Draw i uses
/// its own substream derived from (seed, i).
CoefficientDraws sample_coefficients(const ReconModel& model, const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                     int n_draws, std::uint64_t seed);

enum class EnsembleNoise { coefficients_only, plus_residual_noise };

struct Ensemble {
    Eigen::MatrixXd draws;  // n_draws x years
    int first_year = 0;
    std::string label;
    std::uint64_t seed = 0;

    YearRange years() const { return {first_year, first_year + static_cast<int>(draws.cols()) - 1}; }
    Eigen::Index n_draws() const noexcept { return draws.rows(); }
};

/// One reconstruction per coefficient draw over the rows of `scores` (years x K,
/// first row = `first_year`). With plus_residual_noise each draw also gets
/// independent N(0, sigma2_i) noise per year.
Ensemble build_ensemble(const CoefficientDraws& draws, const Eigen::MatrixXd& scores, int first_year,
                        EnsembleNoise noise, std::uint64_t seed, std::string label = {});

/// Replaces every draw's values with the observed target for years >= `from_year`
/// where the target is present.
Ensemble splice_observed(Ensemble e, const TimeSeries& target, int from_year);

/// Fraction of draws in which the mean over `decade` strictly exceeds the mean of
/// every other complete decade block (blocks anchored on the decade's end year).
double prob_warmest_decade(const Ensemble& e, YearRange decade);

struct EnsembleSummary {
    int first_year = 0;
    std::vector<double> mean, q05, q50, q95;
};

EnsembleSummary summarize(const Ensemble& e);

/// Linear-interpolation sample quantile (type 7) of unsorted values.
double quantile(std::vector<double> values, double p);

std::string format_ensemble(const Ensemble& e);          // draw,year,value
std::string format_summary(const EnsembleSummary& s);    // year,mean,q05,q50,q95

}  // namespace paleo
