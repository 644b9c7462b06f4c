#include <string>

#include "paleorecon/errors.hpp"
#include "paleorecon/regression.hpp"

namespace paleo {

Eigen::VectorXd ols_with_intercept(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    Eigen::MatrixXd A(X.rows(), X.cols() + 1);
    A.col(0).setOnes();
    A.rightCols(X.cols()) = X;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < A.cols())
        throw SingularFit("design matrix has rank " + std::to_string(qr.rank()) + " < " + std::to_string(A.cols()));
    return qr.solve(y);
}

OlsDesign ols_design(const PCABasis& basis, const TimeSeries& target, int K, YearRange calibration) {
    if (K < 1 || K > basis.components())
        throw InputError("K must lie in [1, " + std::to_string(basis.components()) + "]");
    OlsDesign d;
    for (int y = calibration.first; y <= calibration.last; ++y) {
        const Eigen::Index r = y - basis.first_year;
        if (r < 0 || r >= basis.scores.rows() || !target.present_at(y)) continue;
        if (!basis.scores.row(r).head(K).allFinite()) continue;
        d.years.push_back(y);
    }
    const auto n = static_cast<Eigen::Index>(d.years.size());
    d.X.resize(n, K);
    d.y.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int year = d.years[static_cast<std::size_t>(i)];
        d.X.row(i) = basis.scores.row(year - basis.first_year).head(K);
        d.y(i) = target.at_year(year);
    }
    return d;
}

ReconModel fit_ols_pc(const PCABasis& basis, const TimeSeries& target, int K, YearRange calibration) {
    const OlsDesign d = ols_design(basis, target, K, calibration);
    const auto n = static_cast<int>(d.y.size());
    if (n < K + 2)
        throw InsufficientCalibration("OLS with K=" + std::to_string(K) + " needs at least " + std::to_string(K + 2) +
                                      " calibration years, have " + std::to_string(n));
    const Eigen::VectorXd beta = ols_with_intercept(d.X, d.y);

    ReconModel m;
    m.method = Method::ols_pc;
    m.K = K;
    m.calibration = calibration;
    m.intercept = beta(0);
    m.coefficients = beta.tail(K);
    const Eigen::VectorXd resid = (d.y - d.X * m.coefficients).array() - m.intercept;
    m.residual_variance = resid.squaredNorm() / static_cast<double>(n - K - 1);
    m.n_calibration = n;
    return m;
}

}  // namespace paleo
