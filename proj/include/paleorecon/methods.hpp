#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "paleorecon/model.hpp"
#include "paleorecon/pca.hpp"
#include "paleorecon/proxy.hpp"
#include "paleorecon/regem.hpp"

namespace paleo {

struct OlsPcConfig {
    std::optional<int> K;  // unset: select_K
    int max_K = 10;
    KRule rule = KRule::cross_validation;
};

struct LassoConfig {
    std::optional<double> lambda;  // unset: select_lambda
};

struct RegemMethodConfig {
    RegemConfig regem;
};

struct HybridConfig {
    RegemConfig regem;
    double split_period = 20.0;
};

using MethodConfig = std::variant<OlsPcConfig, LassoConfig, RegemMethodConfig, HybridConfig>;

Method method_of(const MethodConfig& config);
std::string method_label(const MethodConfig& config);

/// Default configuration for a method name (`ols_pc`, `lasso`, `regem`, `regem_hybrid`).
MethodConfig default_config(Method method);

/// Fits `config` over `calibration` (target years outside it, or missing, are not
/// used) and reconstructs every year of the proxy matrix.
Reconstruction reconstruct(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                           const MethodConfig& config);

/// OLS on proxy PCs with everything needed downstream (ensembles reuse the basis).
struct PcRegression {
    PCABasis basis;
    ReconModel model;
    Reconstruction reconstruction;
};

PcRegression reconstruct_ols_pc(const NetworkMatrix& proxies, const TimeSeries& target, YearRange calibration,
                                const OlsPcConfig& config);

}  // namespace paleo
