#include "paleorecon/pca.hpp"

#include <cmath>
#include <numeric>

#include "paleorecon/cv.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/regression.hpp"

namespace paleo {

Eigen::MatrixXd PCABasis::project(const Eigen::MatrixXd& raw) const {
    Eigen::MatrixXd z = raw.rowwise() - standardization.mean.transpose();
    z = z.array().rowwise() / standardization.scale.transpose().array();
    return z * loadings;  // NaN rows stay NaN
}

NetworkMatrix prepare_for_pca(const NetworkMatrix& raw, YearRange window) {
    const NetworkMatrix m = fill_decadal(raw);
    NetworkMatrix filled = m;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const TimeSeries col = interpolate_linear(m.column(j));
        bool complete = true;
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            filled.values(i, j) = col[static_cast<std::size_t>(i)];
            const int year = m.first_year + static_cast<int>(i);
            if (window.contains(year) && !col.present(static_cast<std::size_t>(i))) complete = false;
        }
        if (complete) keep.push_back(j);
    }
    return filled.select_columns(keep);
}

PCABasis fit_pca(const NetworkMatrix& m, YearRange fit_window) {
    if (!m.years().contains(fit_window)) throw InputError("PCA fit window outside the proxy matrix");
    if (m.cols() < 2) throw InputError("PCA needs at least 2 records");
    const Eigen::Index r0 = m.row_of(fit_window.first);
    const Eigen::Index n = fit_window.length();
    if (n < 2) throw InputError("PCA fit window needs at least 2 years");
    const Eigen::MatrixXd X = m.values.middleRows(r0, n);
    if (!X.allFinite()) throw MissingDataError("PCA fit window contains missing proxy values");

    PCABasis basis;
    basis.first_year = m.first_year;
    basis.fit_window = fit_window;
    basis.ids = m.ids;
    basis.standardization.mean = X.colwise().mean().transpose();
    basis.standardization.scale.resize(m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double mu = basis.standardization.mean(j);
        const double var = (X.col(j).array() - mu).square().sum() / static_cast<double>(n - 1);
        const double sd = std::sqrt(var);
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mu)))) throw DegenerateColumn(m.ids[static_cast<std::size_t>(j)]);
        basis.standardization.scale(j) = sd;
    }

    Eigen::MatrixXd Z = X.rowwise() - basis.standardization.mean.transpose();
    Z = Z.array().rowwise() / basis.standardization.scale.transpose().array();
    Eigen::BDCSVD<Eigen::MatrixXd> svd(Z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    basis.loadings = svd.matrixV();
    basis.singular_values = svd.singularValues();
    // Sign convention: each component's loadings sum to a non-negative value.
    for (Eigen::Index k = 0; k < basis.loadings.cols(); ++k)
        if (basis.loadings.col(k).sum() < 0) basis.loadings.col(k) *= -1.0;

    const double total = basis.singular_values.squaredNorm();
    basis.explained_variance = basis.singular_values.array().square() / total;
    basis.scores = basis.project(m.values);
    return basis;
}

CvCurve cv_curve(const PCABasis& basis, const TimeSeries& target, int max_K, YearRange calibration) {
    if (max_K < 1 || max_K > basis.components())
        throw InputError("max_K must lie in [1, " + std::to_string(basis.components()) + "]");
    std::vector<Eigen::Index> rows;
    for (int y = calibration.first; y <= calibration.last; ++y) {
        const Eigen::Index r = y - basis.first_year;
        if (r < 0 || r >= basis.scores.rows() || !target.present_at(y)) continue;
        if (!basis.scores.row(r).head(max_K).allFinite()) continue;
        rows.push_back(r);
    }
    const auto blocks = cv::decade_blocks(rows);
    if (blocks.size() < 3)
        throw InsufficientCalibration("cross-validation needs at least 3 decade blocks, have " +
                                      std::to_string(blocks.size()));

    CvCurve curve;
    curve.n_years = static_cast<int>(rows.size());
    for (int K = 1; K <= max_K; ++K) {
        std::vector<double> fold_mse;
        double sse_total = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            std::vector<Eigen::Index> train;
            for (std::size_t o = 0; o < blocks.size(); ++o)
                if (o != b) train.insert(train.end(), blocks[o].begin(), blocks[o].end());
            if (static_cast<int>(train.size()) < K + 2)
                throw InsufficientCalibration("too few calibration years for K=" + std::to_string(K));
            Eigen::MatrixXd X(static_cast<Eigen::Index>(train.size()), K);
            Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
            for (std::size_t i = 0; i < train.size(); ++i) {
                X.row(static_cast<Eigen::Index>(i)) = basis.scores.row(train[i]).head(K);
                y(static_cast<Eigen::Index>(i)) = target.at_year(basis.first_year + static_cast<int>(train[i]));
            }
            const Eigen::VectorXd beta = ols_with_intercept(X, y);
            double sse = 0.0;
            for (Eigen::Index r : blocks[b]) {
                const double pred = beta(0) + basis.scores.row(r).head(K).dot(beta.tail(K));
                const double e = target.at_year(basis.first_year + static_cast<int>(r)) - pred;
                sse += e * e;
            }
            sse_total += sse;
            fold_mse.push_back(sse / static_cast<double>(blocks[b].size()));
        }
        curve.rmse.push_back(std::sqrt(sse_total / static_cast<double>(rows.size())));
        curve.fold_errors.push_back(std::move(fold_mse));
    }
    return curve;
}

int select_K(const PCABasis& basis, const TimeSeries& target, int max_K, YearRange calibration, KRule rule) {
    if (max_K < 1 || max_K > basis.components())
        throw InputError("max_K must lie in [1, " + std::to_string(basis.components()) + "]");
    if (rule == KRule::broken_stick) {
        const auto p = static_cast<Eigen::Index>(basis.ids.size());
        int K = 0;
        for (Eigen::Index k = 0; k < std::min<Eigen::Index>(max_K, basis.components()); ++k) {
            double expected = 0.0;
            for (Eigen::Index i = k + 1; i <= p; ++i) expected += 1.0 / static_cast<double>(i);
            expected /= static_cast<double>(p);
            if (basis.explained_variance(k) <= expected) break;
            ++K;
        }
        return std::max(K, 1);
    }

    const CvCurve curve = cv_curve(basis, target, max_K, calibration);
    double mean = 0.0, var = 0.0;
    int n = 0;
    for (int y = calibration.first; y <= calibration.last; ++y) {
        if (!target.present_at(y)) continue;
        ++n;
        const double d = target.at_year(y) - mean;
        mean += d / n;
        var += d * (target.at_year(y) - mean);
    }
    var = n > 1 ? var / (n - 1) : 0.0;
    return static_cast<int>(cv::one_se_choice(curve.fold_errors, 1e-12 * var)) + 1;
}

}  // namespace paleo
