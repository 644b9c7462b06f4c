#include "paleorecon/model.hpp"

#include <cmath>
#include <sstream>

#include "paleorecon/csv.hpp"
#include "paleorecon/errors.hpp"

namespace paleo {

std::string_view to_string(Method method) {
    switch (method) {
        case Method::ols_pc: return "ols_pc";
        case Method::lasso: return "lasso";
        case Method::regem: return "regem";
        case Method::regem_hybrid: return "regem_hybrid";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view s) {
    for (Method m : {Method::ols_pc, Method::lasso, Method::regem, Method::regem_hybrid})
        if (to_string(m) == s) return m;
    return std::nullopt;
}

Reconstruction predict(const ReconModel& model, const Eigen::MatrixXd& predictors, int first_year, YearRange years,
                       std::string label) {
    const Eigen::Index k = model.coefficients.size();
    if (predictors.cols() < k) throw InputError("predictor matrix has fewer columns than the model");
    const bool standardize = model.predictor_mean.size() > 0;
    if (standardize && (model.predictor_mean.size() != k || model.predictor_scale.size() != k))
        throw InputError("model standardization does not match its coefficients");

    std::vector<double> out(static_cast<std::size_t>(years.length()), kMissing);
    for (int y = years.first; y <= years.last; ++y) {
        const Eigen::Index r = y - first_year;
        if (r < 0 || r >= predictors.rows()) continue;
        Eigen::VectorXd x = predictors.row(r).head(k).transpose();
        if (!x.allFinite()) continue;
        if (standardize) x = ((x - model.predictor_mean).array() / model.predictor_scale.array()).matrix();
        out[static_cast<std::size_t>(y - years.first)] = model.intercept + x.dot(model.coefficients);
    }
    return Reconstruction{TimeSeries(years.first, std::move(out)), model,
                          label.empty() ? std::string(to_string(model.method)) : std::move(label)};
}

std::string format_reconstruction(const TimeSeries& series, std::string_view label) {
    std::ostringstream out;
    out << "year,value,label\n";
    for (std::size_t i = 0; i < series.size(); ++i)
        out << series.start_year() + static_cast<int>(i) << ',' << csv::format_double(series[i]) << ',' << label
            << '\n';
    return out.str();
}

std::string format_reconstruction(const Reconstruction& r) { return format_reconstruction(r.series, r.label); }

std::string format_model(const ReconModel& m) {
    std::ostringstream out;
    out << "method=" << to_string(m.method) << '\n';
    out << "K=" << (m.K ? std::to_string(*m.K) : "") << '\n';
    out << "lambda=" << (m.lambda ? csv::format_double(*m.lambda) : "") << '\n';
    out << "ridge=" << (m.ridge ? csv::format_double(*m.ridge) : "") << '\n';
    out << "split_period=" << (m.split_period ? csv::format_double(*m.split_period) : "") << '\n';
    out << "calibration=" << m.calibration.first << '-' << m.calibration.last << '\n';
    out << "n_calibration=" << m.n_calibration << '\n';
    out << "intercept=" << csv::format_double(m.intercept) << '\n';
    out << "residual_variance=" << csv::format_double(m.residual_variance) << '\n';
    out << "coefficients=";
    for (Eigen::Index i = 0; i < m.coefficients.size(); ++i)
        out << (i ? "," : "") << csv::format_double(m.coefficients(i));
    out << '\n';
    return out.str();
}

}  // namespace paleo
