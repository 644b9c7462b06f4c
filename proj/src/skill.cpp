#include "paleorecon/skill.hpp"

#include <cmath>
#include <sstream>

#include "paleorecon/csv.hpp"
#include "paleorecon/errors.hpp"

namespace paleo {

SkillReport score(const TimeSeries& recon, const TimeSeries& truth, double calibration_mean, YearRange window) {
    std::vector<double> r, t;
    for (int y = window.first; y <= window.last; ++y) {
        if (recon.present_at(y) && truth.present_at(y)) {
            r.push_back(recon.at_year(y));
            t.push_back(truth.at_year(y));
        }
    }
    const auto n = static_cast<double>(r.size());
    if (r.size() < 5)
        throw InputError("skill scoring needs at least 5 overlapping years, have " + std::to_string(r.size()));

    double mr = 0.0, mt = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        mr += r[i];
        mt += t[i];
    }
    mr /= n;
    mt /= n;
    double sse = 0.0, ss_cal = 0.0, ss_ver = 0.0, srr = 0.0, srt = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        sse += (r[i] - t[i]) * (r[i] - t[i]);
        ss_cal += (t[i] - calibration_mean) * (t[i] - calibration_mean);
        ss_ver += (t[i] - mt) * (t[i] - mt);
        srr += (r[i] - mr) * (r[i] - mr);
        srt += (r[i] - mr) * (t[i] - mt);
    }
    if (!(ss_ver > 0.0)) throw DegenerateTruth("truth has zero variance over the verification window");

    SkillReport s;
    s.window = window;
    s.n = static_cast<int>(r.size());
    s.re = 1.0 - sse / ss_cal;
    s.ce = 1.0 - sse / ss_ver;
    s.rmse = std::sqrt(sse / n);
    s.r2 = srr > 0.0 ? (srt * srt) / (srr * ss_ver) : 0.0;
    s.var_ratio = srr / ss_ver;
    return s;
}

std::vector<YearRange> holdout_blocks(YearRange instrumental, int block_length, HoldoutMode mode, int step) {
    if (block_length < 1 || block_length >= instrumental.length())
        throw InputError("hold-out block must be shorter than the instrumental overlap");
    if (instrumental.length() - block_length < 30)
        throw InputError("hold-out leaves fewer than 30 calibration years");
    switch (mode) {
        case HoldoutMode::early: return {{instrumental.first, instrumental.first + block_length - 1}};
        case HoldoutMode::late: return {{instrumental.last - block_length + 1, instrumental.last}};
        case HoldoutMode::sliding: {
            if (step < 1) throw InputError("sliding step must be positive");
            std::vector<YearRange> out;
            for (int s = instrumental.first; s + block_length - 1 <= instrumental.last; s += step)
                out.push_back({s, s + block_length - 1});
            return out;
        }
    }
    return {};
}

std::vector<HoldoutResult> holdout_validate(const NetworkMatrix& proxies, const TimeSeries& target,
                                            YearRange instrumental, const MethodConfig& method, int block_length,
                                            HoldoutMode mode, int step) {
    std::vector<HoldoutResult> results;
    for (const YearRange& block : holdout_blocks(instrumental, block_length, mode, step)) {
        const TimeSeries fit_target = target.masked(block);
        const Reconstruction rec = reconstruct(proxies, fit_target, instrumental, method);
        const double cal_mean = mean_present(fit_target, instrumental);
        results.push_back({block, score(rec.series, target, cal_mean, block)});
    }
    return results;
}

std::string format_validation(const std::vector<HoldoutResult>& results) {
    std::ostringstream out;
    out << "block_start,block_end,re,ce,rmse,r2,var_ratio\n";
    for (const auto& r : results)
        out << r.block.first << ',' << r.block.last << ',' << csv::format_double(r.skill.re) << ','
            << csv::format_double(r.skill.ce) << ',' << csv::format_double(r.skill.rmse) << ','
            << csv::format_double(r.skill.r2) << ',' << csv::format_double(r.skill.var_ratio) << '\n';
    return out.str();
}

}  // namespace paleo
