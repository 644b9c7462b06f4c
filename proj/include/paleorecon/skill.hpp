#pragma once

#include <string>
#include <vector>

#include "paleorecon/methods.hpp"
#include "paleorecon/proxy.hpp"
#include "paleorecon/timeseries.hpp"

namespace paleo {

/// Verification statistics over a window.
///   RE  = 1 - SSE / sum (truth - calibration_mean)^2
///   CE  = 1 - SSE / sum (truth - mean(truth over window))^2
///   r2  = squared Pearson correlation
///   var_ratio = var(recon) / var(truth)
struct SkillReport {
    double re = 0.0;
    double ce = 0.0;
    double rmse = 0.0;
    double r2 = 0.0;
    double var_ratio = 0.0;
    YearRange window;
    int n = 0;
};

/// Scores the years of `window` where both series are present (at least 5 needed).
SkillReport score(const TimeSeries& recon, const TimeSeries& truth, double calibration_mean, YearRange window);

enum class HoldoutMode { early, late, sliding };

struct HoldoutResult {
    YearRange block;
    SkillReport skill;
};

/// For each hold-out block inside `instrumental`, masks the target over the block,
/// fits on the remaining instrumental years and scores the block. Sliding blocks
/// advance by `step` years. Fit errors propagate.
std::vector<HoldoutResult> holdout_validate(const NetworkMatrix& proxies, const TimeSeries& target,
                                            YearRange instrumental, const MethodConfig& method, int block_length,
                                            HoldoutMode mode, int step = 10);

/// Hold-out blocks that holdout_validate would score.
std::vector<YearRange> holdout_blocks(YearRange instrumental, int block_length, HoldoutMode mode, int step = 10);

std::string format_validation(const std::vector<HoldoutResult>& results);

}  // namespace paleo
