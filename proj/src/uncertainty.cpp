#include "paleorecon/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "paleorecon/csv.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/random.hpp"

namespace paleo {

CoefficientDraws sample_coefficients(const ReconModel& model, const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                                     int n_draws, std::uint64_t seed) {
    if (model.method != Method::ols_pc) throw InputError("coefficient sampling needs an ols_pc model");
    if (n_draws < 1) throw InputError("n_draws must be at least 1");
    const Eigen::Index n = design.rows();
    const Eigen::Index k = design.cols();
    if (k != model.coefficients.size() || y.size() != n) throw InputError("design does not match the model");
    const Eigen::Index p = k + 1;
    if (n <= p) throw InsufficientCalibration("posterior needs more calibration years than coefficients");

    Eigen::MatrixXd A(n, p);
    A.col(0).setOnes();
    A.rightCols(k) = design;
    const Eigen::MatrixXd gram = A.transpose() * A;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw SingularFit("A^T A is not positive definite");
    // Cov = (A^T A)^-1 = L^-T L^-1, so L^-T z has the required covariance.
    const Eigen::MatrixXd Lt = llt.matrixU();

    Eigen::VectorXd beta_hat(p);
    beta_hat << model.intercept, model.coefficients;
    const double s2 = model.residual_variance;
    const double dof = static_cast<double>(n - p);

    CoefficientDraws out;
    out.beta.resize(n_draws, p);
    out.sigma2.resize(n_draws);
    for (int i = 0; i < n_draws; ++i) {
        Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        std::chi_squared_distribution<double> chi2(dof);
        std::normal_distribution<double> normal;
        const double sigma2 = s2 > 0.0 ? dof * s2 / chi2(rng) : 0.0;
        Eigen::VectorXd z(p);
        for (Eigen::Index j = 0; j < p; ++j) z(j) = normal(rng);
        const Eigen::VectorXd offset = Lt.triangularView<Eigen::Upper>().solve(z);
        out.beta.row(i) = (beta_hat + std::sqrt(sigma2) * offset).transpose();
        out.sigma2(i) = sigma2;
    }
    return out;
}

Ensemble build_ensemble(const CoefficientDraws& draws, const Eigen::MatrixXd& scores, int first_year,
                        EnsembleNoise noise, std::uint64_t seed, std::string label) {
    const Eigen::Index k = draws.beta.cols() - 1;
    if (scores.cols() < k) throw InputError("score matrix has fewer columns than the coefficient draws");
    const Eigen::MatrixXd X = scores.leftCols(k);
    if (!X.allFinite()) throw MissingDataError("ensemble scores contain missing values");

    Ensemble e;
    e.first_year = first_year;
    e.label = std::move(label);
    e.seed = seed;
    e.draws.resize(draws.beta.rows(), X.rows());
    for (Eigen::Index i = 0; i < draws.beta.rows(); ++i) {
        const Eigen::VectorXd b = draws.beta.row(i).tail(k).transpose();
        e.draws.row(i) = ((X * b).array() + draws.beta(i, 0)).transpose();
        if (noise == EnsembleNoise::plus_residual_noise) {
            Rng rng = make_rng(derive_seed(derive_seed(seed, "residual_noise"), static_cast<std::uint64_t>(i)));
            std::normal_distribution<double> normal(0.0, std::sqrt(draws.sigma2(i)));
            for (Eigen::Index t = 0; t < X.rows(); ++t) e.draws(i, t) += normal(rng);
        }
    }
    return e;
}

Ensemble splice_observed(Ensemble e, const TimeSeries& target, int from_year) {
    for (Eigen::Index t = 0; t < e.draws.cols(); ++t) {
        const int year = e.first_year + static_cast<int>(t);
        if (year >= from_year && target.present_at(year)) e.draws.col(t).setConstant(target.at_year(year));
    }
    return e;
}

double prob_warmest_decade(const Ensemble& e, YearRange decade) {
    if (e.n_draws() < 1) throw InputError("empty ensemble");
    if (decade.length() != 10 || !e.years().contains(decade))
        throw BlockMismatch("decade " + std::to_string(decade.first) + "-" + std::to_string(decade.last) +
                            " is not a complete 10-year block inside the ensemble");
    int first = decade_block_start(e.first_year, decade.last);
    if (first < e.first_year) first += 10;
    const int n_blocks = (e.years().last - first + 1) / 10;
    const int target_block = (decade.first - first) / 10;

    Eigen::Index wins = 0;
    for (Eigen::Index i = 0; i < e.n_draws(); ++i) {
        std::vector<double> means(static_cast<std::size_t>(n_blocks));
        for (int b = 0; b < n_blocks; ++b)
            means[static_cast<std::size_t>(b)] = e.draws.row(i).segment(first + 10 * b - e.first_year, 10).mean();
        const double mine = means[static_cast<std::size_t>(target_block)];
        bool warmest = true;
        for (int b = 0; b < n_blocks && warmest; ++b)
            if (b != target_block && !(mine > means[static_cast<std::size_t>(b)])) warmest = false;
        wins += warmest ? 1 : 0;
    }
    return static_cast<double>(wins) / static_cast<double>(e.n_draws());
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) return kMissing;
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

EnsembleSummary summarize(const Ensemble& e) {
    EnsembleSummary s;
    s.first_year = e.first_year;
    for (Eigen::Index t = 0; t < e.draws.cols(); ++t) {
        std::vector<double> col(e.draws.col(t).data(), e.draws.col(t).data() + e.draws.rows());
        s.mean.push_back(e.draws.col(t).mean());
        s.q05.push_back(quantile(col, 0.05));
        s.q50.push_back(quantile(col, 0.50));
        s.q95.push_back(quantile(col, 0.95));
    }
    return s;
}

std::string format_ensemble(const Ensemble& e) {
    std::ostringstream out;
    out << "draw,year,value\n";
    for (Eigen::Index i = 0; i < e.n_draws(); ++i)
        for (Eigen::Index t = 0; t < e.draws.cols(); ++t)
            out << i << ',' << e.first_year + static_cast<int>(t) << ',' << csv::format_double(e.draws(i, t)) << '\n';
    return out.str();
}

std::string format_summary(const EnsembleSummary& s) {
    std::ostringstream out;
    out << "year,mean,q05,q50,q95\n";
    for (std::size_t t = 0; t < s.mean.size(); ++t)
        out << s.first_year + static_cast<int>(t) << ',' << csv::format_double(s.mean[t]) << ','
            << csv::format_double(s.q05[t]) << ',' << csv::format_double(s.q50[t]) << ','
            << csv::format_double(s.q95[t]) << '\n';
    return out.str();
}

}  // namespace paleo
