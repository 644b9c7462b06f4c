#include <algorithm>
#include <cmath>
#include <string>

#include "paleorecon/cv.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/regression.hpp"

namespace paleo {

namespace {

struct Standardized {
    Eigen::MatrixXd X;
    Eigen::VectorXd y;
    Eigen::VectorXd mean;
    Eigen::VectorXd scale;
    double y_mean = 0.0;
};

// Calibration rows with the target and every proxy present.
std::vector<Eigen::Index> usable_rows(const NetworkMatrix& m, const TimeSeries& target, YearRange calibration) {
    std::vector<Eigen::Index> rows;
    for (int y = calibration.first; y <= calibration.last; ++y) {
        const Eigen::Index r = m.row_of(y);
        if (r < 0 || r >= m.rows() || !target.present_at(y)) continue;
        if (!m.values.row(r).allFinite()) continue;
        rows.push_back(r);
    }
    return rows;
}

Standardized standardize(const NetworkMatrix& m, const TimeSeries& target, const std::vector<Eigen::Index>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    Standardized s;
    s.X.resize(n, m.cols());
    s.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index r = rows[static_cast<std::size_t>(i)];
        s.X.row(i) = m.values.row(r);
        s.y(i) = target.at_year(m.first_year + static_cast<int>(r));
    }
    s.mean = s.X.colwise().mean().transpose();
    s.X.rowwise() -= s.mean.transpose();
    s.scale = (s.X.colwise().squaredNorm() / static_cast<double>(n)).cwiseSqrt().transpose();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        if (!(s.scale(j) > 1e-12 * std::max(1.0, std::abs(s.mean(j)))))
            throw DegenerateColumn(m.ids[static_cast<std::size_t>(j)]);
        s.X.col(j) /= s.scale(j);
    }
    s.y_mean = s.y.mean();
    s.y.array() -= s.y_mean;
    return s;
}

}  // namespace

Eigen::VectorXd lasso_coordinate_descent(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                                         const LassoOptions& options, const Eigen::VectorXd* warm_start) {
    if (lambda < 0) throw InputError("lasso lambda must be non-negative");
    const Eigen::Index p = X.cols();
    Eigen::VectorXd beta = warm_start ? *warm_start : Eigen::VectorXd::Zero(p);
    const Eigen::VectorXd xx = X.colwise().squaredNorm().transpose();
    Eigen::VectorXd resid = y - X * beta;

    double max_change = 0.0;
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
        max_change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            if (xx(j) <= 0.0) continue;
            const double old = beta(j);
            const double rho = X.col(j).dot(resid) + xx(j) * old;
            const double updated = soft_threshold(rho, lambda) / xx(j);
            if (updated != old) {
                resid -= X.col(j) * (updated - old);
                beta(j) = updated;
                max_change = std::max(max_change, std::abs(updated - old));
            }
        }
        if (max_change < options.tolerance) return beta;
    }
    throw ConvergenceError("lasso coordinate descent hit " + std::to_string(options.max_sweeps) + " sweeps",
                           max_change);
}

ReconModel fit_lasso(const NetworkMatrix& m, const TimeSeries& target, double lambda, YearRange calibration,
                     const LassoOptions& options) {
    const auto rows = usable_rows(m, target, calibration);
    if (rows.size() < 3) throw InsufficientCalibration("lasso needs at least 3 calibration years");
    const Standardized s = standardize(m, target, rows);
    const Eigen::VectorXd beta = lasso_coordinate_descent(s.X, s.y, lambda, options);

    ReconModel model;
    model.method = Method::lasso;
    model.lambda = lambda;
    model.calibration = calibration;
    model.coefficients = beta;
    model.intercept = s.y_mean;
    model.predictor_mean = s.mean;
    model.predictor_scale = s.scale;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const Eigen::Index nonzero = (beta.array() != 0.0).count();
    model.residual_variance = (s.y - s.X * beta).squaredNorm() / static_cast<double>(std::max<Eigen::Index>(1, n - nonzero - 1));
    model.n_calibration = static_cast<int>(n);
    return model;
}

double lasso_lambda_max(const NetworkMatrix& m, const TimeSeries& target, YearRange calibration) {
    const auto rows = usable_rows(m, target, calibration);
    if (rows.size() < 3) throw InsufficientCalibration("lasso needs at least 3 calibration years");
    const Standardized s = standardize(m, target, rows);
    // Column dot products, exactly as the solver's first sweep evaluates them.
    double lmax = 0.0;
    for (Eigen::Index j = 0; j < s.X.cols(); ++j) lmax = std::max(lmax, std::abs(s.X.col(j).dot(s.y)));
    return lmax;
}

double select_lambda(const NetworkMatrix& m, const TimeSeries& target, YearRange calibration, int grid_size) {
    if (grid_size < 2) throw InputError("lambda grid needs at least 2 points");
    const auto rows = usable_rows(m, target, calibration);
    const auto blocks = cv::decade_blocks(rows);
    if (blocks.size() < 3)
        throw InsufficientCalibration("cross-validation needs at least 3 decade blocks, have " +
                                      std::to_string(blocks.size()));
    const double lambda_max = lasso_lambda_max(m, target, calibration);
    if (lambda_max <= 0.0) return 0.0;

    std::vector<double> grid(static_cast<std::size_t>(grid_size));
    for (int i = 0; i < grid_size; ++i)
        grid[static_cast<std::size_t>(i)] = lambda_max * std::pow(10.0, -3.0 * i / (grid_size - 1));

    // errors[candidate][fold], candidates from the largest lambda (sparsest model) down.
    std::vector<std::vector<double>> errors(grid.size(), std::vector<double>(blocks.size()));
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        std::vector<Eigen::Index> train;
        for (std::size_t o = 0; o < blocks.size(); ++o)
            if (o != b) train.insert(train.end(), blocks[o].begin(), blocks[o].end());
        const Standardized s = standardize(m, target, train);
        // The training-fold lambda_max differs from the full one; the shared grid keeps folds comparable.
        Eigen::VectorXd beta = Eigen::VectorXd::Zero(m.cols());
        for (std::size_t c = 0; c < grid.size(); ++c) {
            beta = lasso_coordinate_descent(s.X, s.y, grid[c], {}, &beta);
            double sse = 0.0;
            for (Eigen::Index r : blocks[b]) {
                const Eigen::VectorXd x =
                    ((m.values.row(r).transpose() - s.mean).array() / s.scale.array()).matrix();
                const double e = target.at_year(m.first_year + static_cast<int>(r)) - (s.y_mean + x.dot(beta));
                sse += e * e;
            }
            errors[c][b] = sse / static_cast<double>(blocks[b].size());
        }
    }
    return grid[cv::one_se_choice(errors)];
}

}  // namespace paleo
