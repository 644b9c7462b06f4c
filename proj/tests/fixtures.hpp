#pragma once

// Deterministic on-disk fixtures shared by the unit, CLI and acceptance tests.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "paleorecon/csv.hpp"
#include "paleorecon/pca.hpp"
#include "paleorecon/proxy.hpp"
#include "paleorecon/pseudoproxy.hpp"
#include "paleorecon/random.hpp"

namespace fixtures {

namespace fs = std::filesystem;

/// Fresh, empty scratch directory under the system temp dir.
inline fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("paleorecon_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

inline void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_text(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct NetworkFiles {
    fs::path metadata, values, target;
};

/// 95 records starting in 1000: 36 tree rings with fewer than 8 cores, 4 lake
/// records flagged "tiljander", 43 adequately replicated tree rings, 10 ice cores
/// and 2 decadal lake records. Proxies are site temperature plus AR(1) noise at
/// SNR 1 and end in 1995; the target is the hemispheric mean for 1850-2006.
inline NetworkFiles write_screening_network(const fs::path& dir, std::uint64_t seed = 11) {
    const paleo::TruthField field = paleo::generate_truth(120, {1000, 2006}, paleo::SignalConfig{}, seed);
    paleo::ProxyNetwork net;
    net.frozen_at = 1000;
    const int n_years = 1995 - 1000 + 1;
    for (int k = 0; k < 95; ++k) {
        const auto site = static_cast<Eigen::Index>(k);
        const paleo::TimeSeries noise = paleo::ar1_noise(static_cast<std::size_t>(n_years), 0.32,
                                                         0.5, paleo::derive_seed(seed, static_cast<std::uint64_t>(k)), 1000);
        std::vector<double> v(static_cast<std::size_t>(n_years));
        for (int i = 0; i < n_years; ++i) v[static_cast<std::size_t>(i)] = field.series(i, site) + noise[static_cast<std::size_t>(i)];

        paleo::ProxyRecord rec{"P" + std::to_string(100 + k), paleo::TimeSeries(1000, v), paleo::ProxyKind::other,
                               std::nullopt, {}, paleo::Resolution::annual};
        if (k < 36) {
            rec.kind = paleo::ProxyKind::tree_ring;
            rec.core_count = 1 + k % 7;
        } else if (k < 40) {
            rec.kind = paleo::ProxyKind::lake_sediment;
            rec.flags = {"tiljander"};
        } else if (k < 83) {
            rec.kind = paleo::ProxyKind::tree_ring;
            rec.core_count = 8 + k % 13;
        } else if (k < 93) {
            rec.kind = paleo::ProxyKind::ice_core;
        } else {
            // One value per decade, at the block end, equal to the block mean.
            rec.kind = paleo::ProxyKind::lake_sediment;
            rec.resolution = paleo::Resolution::decadal;
            std::vector<double> d(static_cast<std::size_t>(n_years), paleo::kMissing);
            for (int end = 1006; end <= 1995; end += 10) {
                double s = 0.0;
                for (int y = end - 9; y <= end; ++y) s += y >= 1000 ? v[static_cast<std::size_t>(y - 1000)] : v[0];
                d[static_cast<std::size_t>(end - 1000)] = s / 10.0;
            }
            rec.series = paleo::TimeSeries(1000, d);
        }
        net.records.push_back(std::move(rec));
    }

    NetworkFiles files{dir / "metadata.csv", dir / "values.csv", dir / "target.csv"};
    paleo::write_network(net, files.metadata, files.values);
    paleo::csv::write_atomic(files.target, paleo::csv::format_timeseries(field.hemisphere_mean.slice({1850, 2006})));
    return files;
}

/// Annual NetworkMatrix over `values` (rows = years from `first_year`).
inline paleo::NetworkMatrix matrix_of(const Eigen::MatrixXd& values, int first_year) {
    paleo::NetworkMatrix m;
    m.first_year = first_year;
    m.values = values;
    for (Eigen::Index j = 0; j < values.cols(); ++j) m.ids.push_back("r" + std::to_string(j));
    m.resolution.assign(static_cast<std::size_t>(values.cols()), paleo::Resolution::annual);
    return m;
}

inline Eigen::MatrixXd gaussian(Eigen::Index rows, Eigen::Index cols, paleo::Rng& rng) {
    std::normal_distribution<double> z;
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = z(rng);
    return m;
}

/// 20 records over 1000-1980 driven by six latent factors of decreasing strength,
/// with PCA fitted on 1856-1980 and a target equal to the sum of the first four
/// standardized PC scores plus white noise of equal standard deviation (SNR 1).
struct FourPcProblem {
    paleo::PCABasis basis;
    paleo::TimeSeries target{0, {0.0}};
    paleo::YearRange calibration{1856, 1980};
};

inline FourPcProblem four_pc_problem(std::uint64_t seed) {
    paleo::Rng rng = paleo::make_rng(seed);
    const int first = 1000;
    const Eigen::Index n = 981, p = 20, factors = 6;
    const Eigen::MatrixXd f = gaussian(n, factors, rng);
    const Eigen::MatrixXd mix = gaussian(factors, p, rng);
    Eigen::VectorXd strength(factors);
    strength << 5.0, 4.0, 3.2, 2.5, 1.5, 1.0;
    const Eigen::MatrixXd x = f * strength.asDiagonal() * mix + 0.3 * gaussian(n, p, rng);

    FourPcProblem out;
    out.basis = paleo::fit_pca(matrix_of(x, first), out.calibration);
    const Eigen::Index r0 = out.calibration.first - first;
    const Eigen::Index nc = out.calibration.length();
    Eigen::VectorXd signal = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < 4; ++k) {
        const Eigen::VectorXd s = out.basis.scores.col(k);
        const double sd = std::sqrt((s.segment(r0, nc).array() - s.segment(r0, nc).mean()).square().sum() /
                                    static_cast<double>(nc - 1));
        signal += s / sd;
    }
    const Eigen::VectorXd cal = signal.segment(r0, nc);
    const double signal_sd = std::sqrt((cal.array() - cal.mean()).square().sum() / static_cast<double>(nc - 1));
    std::normal_distribution<double> z(0.0, signal_sd);
    std::vector<double> y(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = signal(i) + z(rng);
    out.target = paleo::TimeSeries(first, y);
    return out;
}

}  // namespace fixtures
