#include "paleorecon/cv.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace paleo::cv {

std::vector<std::vector<Eigen::Index>> decade_blocks(const std::vector<Eigen::Index>& rows) {
    std::vector<std::vector<Eigen::Index>> blocks;
    const std::size_t nblocks = rows.size() / 10;
    for (std::size_t b = 0; b < nblocks; ++b) {
        const auto begin = rows.begin() + static_cast<std::ptrdiff_t>(10 * b);
        const auto end = b + 1 == nblocks ? rows.end() : begin + 10;
        blocks.emplace_back(begin, end);
    }
    return blocks;
}

std::size_t one_se_choice(const std::vector<std::vector<double>>& errors, double abs_tol) {
    if (errors.empty()) return 0;
    auto mean = [](const std::vector<double>& v) {
        return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    std::size_t best = 0;
    for (std::size_t c = 1; c < errors.size(); ++c)
        if (mean(errors[c]) < mean(errors[best])) best = c;

    const std::size_t nb = errors[best].size();
    for (std::size_t c = 0; c < best; ++c) {
        std::vector<double> d(nb);
        for (std::size_t b = 0; b < nb; ++b) d[b] = errors[c][b] - errors[best][b];
        const double md = mean(d);
        double ss = 0.0;
        for (double x : d) ss += (x - md) * (x - md);
        const double se = nb > 1 ? std::sqrt(ss / static_cast<double>(nb - 1) / static_cast<double>(nb)) : 0.0;
        if (md <= se + abs_tol) return c;
    }
    return best;
}

}  // namespace paleo::cv
