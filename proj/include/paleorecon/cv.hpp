#pragma once

#include <vector>

#include <Eigen/Dense>

namespace paleo::cv {

/// Splits an ordered list of usable rows into consecutive 10-row blocks; the final
/// block absorbs any remainder.
std::vector<std::vector<Eigen::Index>> decade_blocks(const std::vector<Eigen::Index>& rows);

/// `errors[c][b]` is candidate c's error on fold b, candidates ordered from simplest.
/// Returns the first candidate whose mean error is within one standard error of the
/// paired (per-fold) difference to the best candidate, or within `abs_tol` of it.
std::size_t one_se_choice(const std::vector<std::vector<double>>& errors, double abs_tol = 0.0);

}  // namespace paleo::cv
