#include "paleorecon/methods.hpp"

#include <algorithm>

#include "paleorecon/errors.hpp"
#include "paleorecon/regression.hpp"

namespace paleo {

Method method_of(const MethodConfig& config) {
    return std::visit(
        [](const auto& c) {
            using T = std::decay_t<decltype(c)>;
            if constexpr (std::is_same_v<T, OlsPcConfig>) return Method::ols_pc;
            else if constexpr (std::is_same_v<T, LassoConfig>) return Method::lasso;
            else if constexpr (std::is_same_v<T, RegemMethodConfig>) return Method::regem;
            else return Method::regem_hybrid;
        },
        config);
}

std::string method_label(const MethodConfig& config) {
    if (const auto* ols = std::get_if<OlsPcConfig>(&config); ols && ols->K)
        return "ols_pc" + std::to_string(*ols->K);
    return std::string(to_string(method_of(config)));
}

MethodConfig default_config(Method method) {
    switch (method) {
        case Method::ols_pc: return OlsPcConfig{};
        case Method::lasso: return LassoConfig{};
        case Method::regem: return RegemMethodConfig{};
        case Method::regem_hybrid: return HybridConfig{};
    }
    return OlsPcConfig{};
}

PcRegression reconstruct_ols_pc(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                                const OlsPcConfig& config) {
    const auto window = intersect(calibration, proxies.years());
    if (!window) throw InsufficientCalibration("calibration window outside the proxy matrix");
    const NetworkMatrix filled = prepare_for_pca(proxies, *window);
    PCABasis basis = fit_pca(filled, *window);
    const int max_K = std::min<int>(config.max_K, static_cast<int>(basis.components()));
    const int K = config.K ? *config.K : select_K(basis, target, max_K, *window, config.rule);
    ReconModel model = fit_ols_pc(basis, target, K, *window);
    model.calibration = calibration;
    Reconstruction rec = predict(model, basis.scores, basis.first_year, proxies.years(), "ols_pc" + std::to_string(K));
    return {std::move(basis), std::move(model), std::move(rec)};
}

Reconstruction reconstruct(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                           const MethodConfig& config) {
    if (const auto* c = std::get_if<OlsPcConfig>(&config)) {
        return reconstruct_ols_pc(proxies, target, calibration, *c).reconstruction;
    }
    if (const auto* c = std::get_if<LassoConfig>(&config)) {
        const auto window = intersect(calibration, proxies.years());
        if (!window) throw InsufficientCalibration("calibration window outside the proxy matrix");
        const NetworkMatrix filled = prepare_for_pca(proxies, *window);
        const double lambda = c->lambda ? *c->lambda : select_lambda(filled, target, *window);
        ReconModel model = fit_lasso(filled, target, lambda, *window);
        model.calibration = calibration;
        return predict(model, filled.values, filled.first_year, proxies.years(), "lasso");
    }
    if (const auto* c = std::get_if<RegemMethodConfig>(&config)) {
        return reconstruct_regem(proxies, target, calibration, c->regem);
    }
    const auto& h = std::get<HybridConfig>(config);
    return reconstruct_hybrid(proxies, target, calibration, h.split_period, h.regem).combined;
}

}  // namespace paleo
