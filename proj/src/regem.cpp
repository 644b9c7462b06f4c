#include "paleorecon/regem.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "paleorecon/errors.hpp"

namespace paleo {

namespace {

Eigen::MatrixXd submatrix(const Eigen::MatrixXd& m, const std::vector<Eigen::Index>& rows,
                          const std::vector<Eigen::Index>& cols) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m(rows[i], cols[j]);
    return out;
}

// Ridge weights in the eigenbasis of the available-block correlation matrix.
struct EigenRidge {
    Eigen::VectorXd lambda;   // eigenvalues, clipped at zero
    Eigen::MatrixXd V;        // eigenvectors
    Eigen::MatrixXd F;        // V^T R_am
    Eigen::VectorXd f_norm2;  // squared row norms of F
    double trace_mm = 0.0;

    double mse(double h2) const {
        double t = trace_mm;
        for (Eigen::Index k = 0; k < lambda.size(); ++k) {
            const double d = lambda(k) + h2;
            t -= f_norm2(k) * (2.0 / d - lambda(k) / (d * d));
        }
        return std::max(t, 0.0);
    }
    double dof(double h2) const { return (lambda.array() / (lambda.array() + h2)).sum(); }
};

double gcv(const EigenRidge& er, double h2, double n_obs) {
    const double denom = 1.0 - er.dof(h2) / n_obs;
    if (denom <= 0.0) return std::numeric_limits<double>::infinity();
    return er.mse(h2) / (denom * denom);
}

double gcv_ridge(const EigenRidge& er, double n_obs) {
    // Log-spaced scan of h^2, then golden-section refinement around the best grid point.
    constexpr double lo_exp = -8.0, hi_exp = 4.0, step = 0.125;
    double best_exp = lo_exp;
    double best = std::numeric_limits<double>::infinity();
    for (double e = lo_exp; e <= hi_exp + 1e-12; e += step) {
        const double g = gcv(er, std::pow(10.0, e), n_obs);
        if (g < best) {
            best = g;
            best_exp = e;
        }
    }
    double a = std::max(lo_exp, best_exp - step), b = std::min(hi_exp, best_exp + step);
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double gc = gcv(er, std::pow(10.0, c), n_obs), gd = gcv(er, std::pow(10.0, d), n_obs);
    for (int it = 0; it < 40; ++it) {
        if (gc < gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - phi * (b - a);
            gc = gcv(er, std::pow(10.0, c), n_obs);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + phi * (b - a);
            gd = gcv(er, std::pow(10.0, d), n_obs);
        }
    }
    const double refined = 0.5 * (a + b);
    return gcv(er, std::pow(10.0, refined), n_obs) <= best ? std::pow(10.0, refined) : std::pow(10.0, best_exp);
}

}  // namespace

RidgeRegression ridge_regression(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& available,
                                 const std::vector<Eigen::Index>& missing, std::optional<double> ridge, double n_obs) {
    const Eigen::MatrixXd Caa = submatrix(cov, available, available);
    const Eigen::MatrixXd Cam = submatrix(cov, available, missing);
    const Eigen::MatrixXd Cmm = submatrix(cov, missing, missing);

    Eigen::VectorXd d = Caa.diagonal().cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < d.size(); ++i)
        if (!(d(i) > 0.0)) d(i) = 1.0;
    const Eigen::VectorXd dinv = d.cwiseInverse();
    const Eigen::MatrixXd Raa = dinv.asDiagonal() * Caa * dinv.asDiagonal();
    const Eigen::MatrixXd Ram = dinv.asDiagonal() * Cam;

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(Raa);
    EigenRidge er;
    er.lambda = eig.eigenvalues().cwiseMax(0.0);
    er.V = eig.eigenvectors();
    er.F = er.V.transpose() * Ram;
    er.f_norm2 = er.F.rowwise().squaredNorm();
    er.trace_mm = Cmm.trace();

    const double h2 = ridge ? *ridge : gcv_ridge(er, std::max(n_obs, 1.0));
    if (h2 < 0) throw InputError("ridge parameter must be non-negative");
    Eigen::VectorXd inv(er.lambda.size()), resid_w(er.lambda.size());
    for (Eigen::Index k = 0; k < er.lambda.size(); ++k) {
        const double den = er.lambda(k) + h2;
        inv(k) = den > 0 ? 1.0 / den : 0.0;  // null directions carry no weight
        resid_w(k) = den > 0 ? 2.0 / den - er.lambda(k) / (den * den) : 0.0;
    }

    RidgeRegression out;
    out.ridge = h2;
    out.weights = dinv.asDiagonal() * (er.V * (inv.asDiagonal() * er.F));
    out.residual = Cmm - er.F.transpose() * resid_w.asDiagonal() * er.F;
    out.residual = 0.5 * (out.residual + out.residual.transpose());
    return out;
}

namespace {

// Regression of `missing` on `available` under `cov` with an explicit diagonal penalty.
RidgeRegression penalized_regression(const Eigen::MatrixXd& cov, const std::vector<Eigen::Index>& available,
                                     const std::vector<Eigen::Index>& missing, const Eigen::VectorXd& penalty) {
    const Eigen::MatrixXd Caa = submatrix(cov, available, available);
    const Eigen::MatrixXd Cam = submatrix(cov, available, missing);
    const Eigen::MatrixXd Cmm = submatrix(cov, missing, missing);
    Eigen::MatrixXd A = Caa;
    A.diagonal() += penalty;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(A);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 1e-300) * 1e-12 * static_cast<double>(ev.size());
    Eigen::VectorXd inv(ev.size());
    for (Eigen::Index k = 0; k < ev.size(); ++k) inv(k) = ev(k) > cutoff ? 1.0 / ev(k) : 0.0;
    RidgeRegression out;
    out.weights = eig.eigenvectors() * (inv.asDiagonal() * (eig.eigenvectors().transpose() * Cam));
    const Eigen::MatrixXd cross = Cam.transpose() * out.weights;
    out.residual = Cmm - cross - cross.transpose() + out.weights.transpose() * Caa * out.weights;
    out.residual = 0.5 * (out.residual + out.residual.transpose());
    return out;
}

}  // namespace

RidgeRegression em_regression(const Eigen::MatrixXd& completed, const Eigen::MatrixXd& cov, double cov_rows,
                              const std::vector<Eigen::Index>& observed_rows,
                              const std::vector<Eigen::Index>& available, const std::vector<Eigen::Index>& missing,
                              std::optional<double> ridge, double sample_fraction) {
    const auto n_obs = static_cast<Eigen::Index>(observed_rows.size());
    if (n_obs < 3) {
        // Nothing to cross-validate against: fall back to the moments themselves.
        return ridge_regression(cov, available, missing, ridge, cov_rows * sample_fraction);
    }
    Eigen::MatrixXd obs(n_obs, completed.cols());
    for (Eigen::Index i = 0; i < n_obs; ++i) obs.row(i) = completed.row(observed_rows[static_cast<std::size_t>(i)]);
    const Eigen::MatrixXd centred = obs.rowwise() - obs.colwise().mean();
    const Eigen::MatrixXd cov_obs = centred.transpose() * centred / static_cast<double>(n_obs);
    const double h2 =
        ridge_regression(cov_obs, available, missing, ridge, static_cast<double>(n_obs) * sample_fraction).ridge;

    // The penalty is stated per observed record: a block seen in n_obs of the
    // cov_rows rows is penalized by h2 * n_obs / cov_rows, so the fixed point does
    // not shrink harder just because most rows are imputed.
    Eigen::VectorXd penalty(static_cast<Eigen::Index>(available.size()));
    for (std::size_t a = 0; a < available.size(); ++a)
        penalty(static_cast<Eigen::Index>(a)) =
            h2 * static_cast<double>(n_obs) / cov_rows * cov_obs(available[a], available[a]);
    RidgeRegression out = penalized_regression(cov, available, missing, penalty);
    out.ridge = h2;
    return out;
}

RegemResult fit_regem(const Eigen::MatrixXd& data, const RegemConfig& config) {
    const Eigen::Index n = data.rows();
    const Eigen::Index p = data.cols();
    RegemResult result;
    result.completed = data;

    const auto missing_mask = data.array().isNaN();
    const Eigen::Index n_missing = missing_mask.count();
    auto moments = [&](const Eigen::MatrixXd& X, const Eigen::MatrixXd& extra) {
        result.mean = X.colwise().mean().transpose();
        const Eigen::MatrixXd centred = X.rowwise() - result.mean.transpose();
        result.covariance = (centred.transpose() * centred + extra) / static_cast<double>(n);
    };
    if (n_missing == 0) {
        moments(data, Eigen::MatrixXd::Zero(p, p));
        return result;
    }

    // Missing entries start at the available column means.
    Eigen::MatrixXd X = data;
    double observed_ss = 0.0;
    Eigen::Index observed = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        double sum = 0.0;
        Eigen::Index cnt = 0;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!missing_mask(i, j)) {
                sum += data(i, j);
                observed_ss += data(i, j) * data(i, j);
                ++cnt;
            }
        }
        if (cnt == 0) throw InputError("RegEM column " + std::to_string(j) + " has no observed values");
        for (Eigen::Index i = 0; i < n; ++i)
            if (missing_mask(i, j)) X(i, j) = sum / static_cast<double>(cnt);
        observed += cnt;
    }

    // The first E-step uses the complete rows' moments when there are enough of them.
    std::vector<Eigen::Index> complete_rows;
    for (Eigen::Index i = 0; i < n; ++i)
        if (!missing_mask.row(i).any()) complete_rows.push_back(i);
    double cov_rows = static_cast<double>(n);
    if (complete_rows.size() >= 3) {
        const auto nc = static_cast<Eigen::Index>(complete_rows.size());
        Eigen::MatrixXd C(nc, p);
        for (Eigen::Index i = 0; i < nc; ++i) C.row(i) = data.row(complete_rows[static_cast<std::size_t>(i)]);
        result.mean = C.colwise().mean().transpose();
        const Eigen::MatrixXd centred = C.rowwise() - result.mean.transpose();
        result.covariance = centred.transpose() * centred / static_cast<double>(nc);
        cov_rows = static_cast<double>(nc);
    } else {
        moments(X, Eigen::MatrixXd::Zero(p, p));
    }

    // Rows grouped by missingness pattern; std::map keeps the processing order deterministic.
    struct Pattern {
        std::vector<Eigen::Index> rows, available, missing, observed_rows;
    };
    std::map<std::vector<bool>, Pattern> patterns;
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<bool> key(static_cast<std::size_t>(p));
        bool any = false;
        for (Eigen::Index j = 0; j < p; ++j) {
            key[static_cast<std::size_t>(j)] = missing_mask(i, j);
            any = any || missing_mask(i, j);
        }
        if (any) patterns[key].rows.push_back(i);
    }
    for (auto& [key, pat] : patterns) {
        for (Eigen::Index j = 0; j < p; ++j)
            (key[static_cast<std::size_t>(j)] ? pat.missing : pat.available).push_back(j);
        for (Eigen::Index i = 0; i < n; ++i) {
            bool all = true;
            for (Eigen::Index j : pat.missing) all = all && !missing_mask(i, j);
            if (all) pat.observed_rows.push_back(i);
        }
    }

    // Changes are measured on mean-centred imputations; the floor guards a start at the mean.
    const double floor = 1e-10 * std::sqrt(observed_ss / static_cast<double>(observed)) *
                         std::sqrt(static_cast<double>(n_missing));
    double change = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= config.max_iterations; ++it) {
        Eigen::MatrixXd extra = Eigen::MatrixXd::Zero(p, p);
        Eigen::MatrixXd next = X;
        double diff2 = 0.0, old2 = 0.0;
        double last_ridge = 0.0;
        for (const auto& [key, pat] : patterns) {
            Eigen::MatrixXd weights;
            Eigen::MatrixXd residual;
            if (pat.available.empty()) {
                residual = submatrix(result.covariance, pat.missing, pat.missing);
            } else {
                auto rr = em_regression(X, result.covariance, cov_rows, pat.observed_rows, pat.available,
                                        pat.missing, config.ridge, config.sample_fraction);
                weights = std::move(rr.weights);
                residual = std::move(rr.residual);
                last_ridge = rr.ridge;
            }
            for (Eigen::Index r : pat.rows) {
                for (std::size_t k = 0; k < pat.missing.size(); ++k) {
                    const Eigen::Index j = pat.missing[k];
                    double v = result.mean(j);
                    for (std::size_t a = 0; a < pat.available.size(); ++a) {
                        const Eigen::Index ja = pat.available[a];
                        v += (X(r, ja) - result.mean(ja)) * weights(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(k));
                    }
                    diff2 += (v - X(r, j)) * (v - X(r, j));
                    old2 += (X(r, j) - result.mean(j)) * (X(r, j) - result.mean(j));
                    next(r, j) = v;
                }
            }
            const auto count = static_cast<double>(pat.rows.size());
            for (std::size_t a = 0; a < pat.missing.size(); ++a)
                for (std::size_t b = 0; b < pat.missing.size(); ++b)
                    extra(pat.missing[a], pat.missing[b]) +=
                        count * residual(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        }
        X = std::move(next);
        change = std::sqrt(diff2) / std::max(std::sqrt(old2), floor);
        result.changes.push_back(change);
        result.ridges.push_back(last_ridge);
        moments(X, extra);
        cov_rows = static_cast<double>(n);
        if (change < config.tolerance) {
            result.iterations = it;
            result.completed = std::move(X);
            return result;
        }
    }
    throw ConvergenceError("RegEM did not converge in " + std::to_string(config.max_iterations) + " iterations",
                           change);
}

Reconstruction reconstruct_regem(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                                 const RegemConfig& config) {
    const Eigen::Index n = proxies.rows();
    const Eigen::Index p = proxies.cols();
    if (p < 1) throw InputError("RegEM reconstruction needs at least one proxy");
    // Decadal records are a coarser sampling, not missing data.
    Eigen::MatrixXd joint(n, p + 1);
    joint.leftCols(p) = fill_decadal(proxies).values;
    int n_cal = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const int year = proxies.first_year + static_cast<int>(i);
        const bool use = calibration.contains(year) && target.present_at(year);
        joint(i, p) = use ? target.at_year(year) : kMissing;
        n_cal += use ? 1 : 0;
    }
    if (n_cal < 3) throw InsufficientCalibration("RegEM needs at least 3 calibration years, have " + std::to_string(n_cal));

    // EM sees the years up to the end of calibration; later years only receive the
    // final regression where every proxy is present.
    const Eigen::Index n_fit = std::min<Eigen::Index>(n, calibration.last - proxies.first_year + 1);
    const RegemResult em = fit_regem(joint.topRows(n_fit), config);
    std::vector<Eigen::Index> available(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j) available[static_cast<std::size_t>(j)] = j;
    std::vector<Eigen::Index> calibration_rows;
    for (Eigen::Index i = 0; i < n_fit; ++i)
        if (!std::isnan(joint(i, p))) calibration_rows.push_back(i);
    const RidgeRegression rr = em_regression(em.completed, em.covariance, static_cast<double>(n_fit),
                                             calibration_rows, available, {p}, config.ridge, config.sample_fraction);

    ReconModel model;
    model.method = Method::regem;
    model.ridge = rr.ridge;
    model.calibration = calibration;
    model.coefficients = rr.weights.col(0);
    model.intercept = em.mean(p) - em.mean.head(p).dot(model.coefficients);
    model.residual_variance = std::max(rr.residual(0, 0), 0.0);
    model.n_calibration = n_cal;

    std::vector<double> out(static_cast<std::size_t>(n), kMissing);
    for (Eigen::Index i = 0; i < n; ++i) {
        double& v = out[static_cast<std::size_t>(i)];
        if (i >= n_fit) {
            const auto row = joint.row(i).head(p);
            if (!row.array().isNaN().any()) v = model.intercept + row.dot(model.coefficients);
        } else if (std::isnan(joint(i, p))) {
            v = em.completed(i, p);
        } else {
            v = model.intercept + em.completed.row(i).head(p).dot(model.coefficients);
        }
    }
    return Reconstruction{TimeSeries(proxies.first_year, std::move(out)), model, "regem"};
}

namespace {

std::vector<YearRange> present_runs(const TimeSeries& target, YearRange window) {
    std::vector<YearRange> runs;
    std::optional<int> start;
    for (int y = window.first; y <= window.last + 1; ++y) {
        const bool here = y <= window.last && target.present_at(y);
        if (here && !start) start = y;
        if (!here && start) {
            runs.push_back({*start, y - 1});
            start.reset();
        }
    }
    return runs;
}

void write_rows(Eigen::MatrixXd& m, Eigen::Index col, int first_year, const TimeSeries& s) {
    for (std::size_t i = 0; i < s.size(); ++i) m(s.start_year() + static_cast<int>(i) - first_year, col) = s[i];
}

}  // namespace

HybridReconstruction reconstruct_hybrid(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                                        double split_period, const RegemConfig& config) {
    const Eigen::Index n = proxies.rows();
    const auto cal = intersect(calibration, proxies.years());
    if (!cal) throw InsufficientCalibration("calibration window outside the proxy matrix");
    const auto runs = present_runs(target, *cal);
    if (runs.empty()) throw InsufficientCalibration("no target values inside the calibration window");

    std::vector<Eigen::Index> annual, decadal;
    for (Eigen::Index j = 0; j < proxies.cols(); ++j)
        (proxies.resolution[static_cast<std::size_t>(j)] == Resolution::annual ? annual : decadal).push_back(j);

    NetworkMatrix low;
    low.first_year = proxies.first_year;
    low.values = Eigen::MatrixXd::Constant(n, static_cast<Eigen::Index>(annual.size() + decadal.size()), kMissing);
    NetworkMatrix high;
    high.first_year = proxies.first_year;
    high.values = Eigen::MatrixXd::Constant(n, static_cast<Eigen::Index>(annual.size()), kMissing);

    for (std::size_t k = 0; k < annual.size(); ++k) {
        const Eigen::Index j = annual[k];
        const auto col = static_cast<Eigen::Index>(k);
        const TimeSeries series = proxies.column(j);
        const auto span = series.present_span();
        if (!span) throw MissingDataError("proxy '" + proxies.ids[static_cast<std::size_t>(j)] + "' has no data");
        const BandPair full = split_bands(series.slice(*span), split_period);
        write_rows(low.values, col, low.first_year, full.low);
        write_rows(high.values, col, high.first_year, full.high);
        for (const YearRange& run : runs) {
            const BandPair part = split_bands(series.slice(run), split_period);
            write_rows(low.values, col, low.first_year, part.low);
            write_rows(high.values, col, high.first_year, part.high);
        }
        low.ids.push_back(proxies.ids[static_cast<std::size_t>(j)]);
        low.resolution.push_back(Resolution::annual);
        high.ids.push_back(proxies.ids[static_cast<std::size_t>(j)]);
        high.resolution.push_back(Resolution::annual);
    }
    for (std::size_t k = 0; k < decadal.size(); ++k) {
        const Eigen::Index col = static_cast<Eigen::Index>(annual.size() + k);
        low.values.col(col) = proxies.values.col(decadal[k]);
        low.ids.push_back(proxies.ids[static_cast<std::size_t>(decadal[k])]);
        low.resolution.push_back(Resolution::decadal);
    }

    std::vector<double> target_low(static_cast<std::size_t>(n), kMissing), target_high(static_cast<std::size_t>(n), kMissing);
    for (const YearRange& run : runs) {
        const BandPair part = split_bands(target.slice(run), split_period);
        for (int y = run.first; y <= run.last; ++y) {
            const auto i = static_cast<std::size_t>(y - proxies.first_year);
            target_low[i] = part.low.at_year(y);
            target_high[i] = part.high.at_year(y);
        }
    }
    const TimeSeries tl(proxies.first_year, std::move(target_low));
    const TimeSeries th(proxies.first_year, std::move(target_high));

    // A band below 1/split_period cycles per year carries about 2 / split_period
    // independent values per year; GCV should not count the rest as evidence.
    RegemConfig low_config = config;
    low_config.sample_fraction = std::min(config.sample_fraction, 2.0 / split_period);
    Reconstruction low_rec = reconstruct_regem(low, tl, calibration, low_config);
    TimeSeries high_series(proxies.first_year, std::vector<double>(static_cast<std::size_t>(n), 0.0));
    ReconModel high_model;
    if (high.cols() > 0) {
        Reconstruction high_rec = reconstruct_regem(high, th, calibration, config);
        high_series = high_rec.series;
        high_model = high_rec.model;
    }

    std::vector<double> sum(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] = low_rec.series[i] + high_series[i];

    ReconModel model = low_rec.model;
    model.method = Method::regem_hybrid;
    model.split_period = split_period;
    model.coefficients.resize(low_rec.model.coefficients.size() + high_model.coefficients.size());
    model.coefficients << low_rec.model.coefficients, high_model.coefficients;
    model.intercept = low_rec.model.intercept + high_model.intercept;
    model.residual_variance = low_rec.model.residual_variance + high_model.residual_variance;

    HybridReconstruction out{
        Reconstruction{TimeSeries(proxies.first_year, std::move(sum)), model, "regem_hybrid"},
        low_rec.series, high_series};
    return out;
}

}  // namespace paleo
