// Acceptance report: one PASS/FAIL/SKIP line per criterion. The exit status is 0
// unless --strict is given, in which case any FAIL makes it 1.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include "cli_helpers.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/regem.hpp"
#include "paleorecon/regression.hpp"
#include "paleorecon/skill.hpp"
#include "paleorecon/uncertainty.hpp"

using namespace paleo;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict;
    std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Verdict::pass : Verdict::fail, std::move(detail)}; }

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - mean) * (x - mean);
    return s / static_cast<double>(v.size() - 1);
}

std::size_t data_lines(const fs::path& p) {
    std::istringstream in(fixtures::read_text(p));
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) n += line.empty() ? 0 : 1;
    return n == 0 ? 0 : n - 1;
}

int hardware_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

// The synthetic field and replicate seeds used by `paleorecon benchmark` with its defaults.
TruthField default_benchmark_field(YearRange years = {1000, 1980}) {
    return generate_truth(500, years, SignalConfig{}, derive_seed(1, "field"));
}
const std::uint64_t kReplicateBase = derive_seed(1, "replicates");

// ---------------------------------------------------------------------------

Outcome screening_counts() {
    const fs::path dir = fixtures::scratch("acceptance_screen");
    const auto files = fixtures::write_screening_network(dir);
    const auto r = fixtures::run_cli({"screen", "--metadata", files.metadata.string(), "--values",
                                      files.values.string(), "-o", (dir / "out").string()});
    const std::size_t replicated = data_lines(dir / "out" / "replicated_metadata.csv");
    const std::size_t screened = data_lines(dir / "out" / "screened_metadata.csv");
    return pass_if(r.code == 0 && replicated == 59 && screened == 55,
                   "exit " + std::to_string(r.code) + ", 95 -> " + std::to_string(replicated) + " -> " +
                       std::to_string(screened));
}

Outcome ar1_fidelity() {
    const TimeSeries x = ar1_noise(100000, 0.32, 1.0, 1);
    const std::vector<double>& v = x.values();
    double mean = 0.0;
    for (double a : v) mean += a;
    mean /= static_cast<double>(v.size());
    double num = 0.0, den = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) {
        den += (v[t] - mean) * (v[t] - mean);
        if (t > 0) num += (v[t] - mean) * (v[t - 1] - mean);
    }
    const double r1 = num / den;
    const double var = den / static_cast<double>(v.size() - 1);
    return pass_if(r1 >= 0.31 && r1 <= 0.33 && std::abs(var - 1.0) <= 0.03,
                   "lag-1 r = " + fmt(r1) + ", variance / target = " + fmt(var));
}

Outcome snr_calibration() {
    // First replicate of the default benchmark protocol, on a 1000-year field.
    const TruthField field = default_benchmark_field({1000, 1999});
    PseudoproxySpec spec;
    spec.seed = derive_seed(derive_seed(kReplicateBase, spec.seed), 0);
    const PseudoproxySet pp = make_pseudoproxies(field, spec);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    int inside = 0;
    for (std::size_t k = 0; k < pp.sites.size(); ++k) {
        const Eigen::VectorXd noise = pp.noise.col(static_cast<Eigen::Index>(k));
        const Eigen::VectorXd signal = field.series.col(static_cast<Eigen::Index>(pp.sites[k]));
        const auto var = [](const Eigen::VectorXd& a) {
            return (a.array() - a.mean()).square().sum() / static_cast<double>(a.size() - 1);
        };
        const double ratio = std::sqrt(var(noise) / var(signal));
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        inside += (ratio >= 2.35 && ratio <= 2.65) ? 1 : 0;
    }
    return pass_if(inside == static_cast<int>(pp.sites.size()),
                   std::to_string(inside) + "/" + std::to_string(pp.sites.size()) + " proxies in [2.35, 2.65], range " +
                       fmt(lo) + ".." + fmt(hi));
}

Outcome ols_oracles() {
    double worst_ols = 0.0, worst_lasso = 0.0;
    bool zero_at_max = true;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng rng = make_rng(derive_seed(seed, "ols"));
        const Eigen::MatrixXd x = fixtures::gaussian(300, 8, rng);
        const Eigen::VectorXd y = fixtures::gaussian(300, 1, rng).col(0) + 0.5 * x.col(0);
        const TimeSeries target(1700, std::vector<double>(y.data(), y.data() + y.size()));
        const NetworkMatrix m = fixtures::matrix_of(x, 1700);
        const YearRange cal{1850, 1999};

        const PCABasis basis = fit_pca(m, cal);
        const int K = 1 + static_cast<int>(seed % 8);
        const ReconModel fit = fit_ols_pc(basis, target, K, cal);
        Eigen::MatrixXd A(150, K + 1);
        A.col(0).setOnes();
        A.rightCols(K) = basis.scores.block(150, 0, 150, K);
        const Eigen::VectorXd oracle = (A.transpose() * A).ldlt().solve(A.transpose() * y.segment(150, 150));
        worst_ols = std::max({worst_ols, std::abs(fit.intercept - oracle(0)),
                              (fit.coefficients - oracle.tail(K)).cwiseAbs().maxCoeff()});

        const ReconModel lasso = fit_lasso(m, target, 0.0, cal);
        const Eigen::VectorXd raw = lasso.coefficients.cwiseQuotient(lasso.predictor_scale);
        const Eigen::VectorXd ols = ols_with_intercept(x.middleRows(150, 150), y.segment(150, 150));
        worst_lasso = std::max({worst_lasso, std::abs(lasso.intercept - lasso.predictor_mean.dot(raw) - ols(0)),
                                (raw - ols.tail(8)).cwiseAbs().maxCoeff()});

        const double lmax = lasso_lambda_max(m, target, cal);
        zero_at_max = zero_at_max && fit_lasso(m, target, lmax, cal).coefficients.isZero(0.0) &&
                      fit_lasso(m, target, 1.5 * lmax, cal).coefficients.isZero(0.0);
    }
    return pass_if(worst_ols < 1e-8 && worst_lasso < 1e-6 && zero_at_max,
                   "max |OLS - normal equations| = " + fmt(worst_ols, 3) + ", max |lasso(0) - OLS| = " +
                       fmt(worst_lasso, 3) + ", lasso at lambda_max all zero: " + (zero_at_max ? "yes" : "no"));
}

Outcome regem_oracles() {
    Rng rng = make_rng(5);
    Eigen::MatrixXd x = fixtures::gaussian(300, 2, rng);
    x.col(1) += 0.8 * x.col(0);
    const RegemResult complete = fit_regem(x);
    const bool identity = complete.iterations == 0 && complete.completed == x;

    const double x0 = x(0, 0);
    Eigen::MatrixXd gap = x;
    gap(0, 1) = kMissing;
    RegemConfig config;
    config.ridge = 1e-12;
    const RegemResult r = fit_regem(gap, config);
    // Maximum-likelihood conditional mean with one missing value: the least-squares
    // line through the complete rows.
    const Eigen::VectorXd line = ols_with_intercept(x.bottomRows(299).col(0), x.bottomRows(299).col(1));
    const double err = std::abs(r.completed(0, 1) - (line(0) + line(1) * x0));
    return pass_if(identity && err < 1e-4, std::string("complete-data identity: ") + (identity ? "exact" : "broken") +
                                               ", |imputed - conditional mean| = " + fmt(err, 3));
}

Outcome hybrid_consistency() {
    double worst_split = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng = make_rng(seed);
        const Eigen::VectorXd v = fixtures::gaussian(1000, 1, rng).col(0);
        const TimeSeries s(1000, std::vector<double>(v.data(), v.data() + v.size()));
        const BandPair b = split_bands(s, 20.0);
        for (std::size_t i = 0; i < s.size(); ++i) worst_split = std::max(worst_split, std::abs(b.low[i] + b.high[i] - s[i]));
    }

    const TimeSeries truth = generate_truth(30, {1000, 1980}, SignalConfig{}, 5).hemisphere_mean;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(truth.size()), 6);
    for (int j = 0; j < 6; ++j)
        for (std::size_t i = 0; i < truth.size(); ++i) x(static_cast<Eigen::Index>(i), j) = (0.5 + 0.3 * j) * truth[i] + 0.1 * j;
    const NetworkMatrix proxies = fixtures::matrix_of(x, 1000);
    const TimeSeries target = truth.slice({1856, 1980});
    const Reconstruction plain = reconstruct_regem(proxies, target, {1856, 1980});
    const HybridReconstruction hybrid = reconstruct_hybrid(proxies, target, {1856, 1980}, 20.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) worst = std::max(worst, std::abs(plain.series[i] - hybrid.combined.series[i]));
    return pass_if(worst_split < 1e-10 && worst < 1e-6,
                   "max |low + high - input| = " + fmt(worst_split, 3) + ", max |hybrid - non-hybrid| = " + fmt(worst, 3));
}

Outcome bias_ordering() {
    const TruthField field = default_benchmark_field();
    const std::vector<MethodConfig> methods{LassoConfig{}, OlsPcConfig{}, RegemMethodConfig{}, HybridConfig{}};
    PseudoproxySpec spec;
    spec.n_sites = 59;
    const BenchmarkResult small = run_benchmark(field, spec, methods, 20, kReplicateBase, hardware_threads());
    spec.n_sites = 104;
    const BenchmarkResult large =
        run_benchmark(field, spec, {HybridConfig{}}, 20, kReplicateBase, hardware_threads());

    const double lasso = small.median("lasso", &SkillReport::var_ratio);
    const double ols = small.median("ols_pc", &SkillReport::var_ratio);
    const double regem = small.median("regem", &SkillReport::var_ratio);
    const double hybrid59 = small.median("regem_hybrid", &SkillReport::var_ratio);
    const double hybrid104 = large.median("regem_hybrid", &SkillReport::var_ratio);
    const bool ordered = lasso < ols && ols < hybrid59;
    const bool shrinks = std::abs(1.0 - hybrid104) < std::abs(1.0 - hybrid59);
    return pass_if(ordered && shrinks, "median var_ratio at 59 sites: lasso " + fmt(lasso) + ", ols_pc " + fmt(ols) +
                                           ", regem " + fmt(regem) + ", regem_hybrid " + fmt(hybrid59) +
                                           "; regem_hybrid at 104 sites " + fmt(hybrid104) + " (ordering " +
                                           (ordered ? "holds" : "does not hold") + ", |1 - var_ratio| " +
                                           (shrinks ? "shrinks" : "does not shrink") + ")");
}

Outcome k_selection() {
    int hits = 0;
    std::ostringstream picks;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto problem = fixtures::four_pc_problem(seed);
        const int K = select_K(problem.basis, problem.target, 10, problem.calibration);
        hits += K == 4 ? 1 : 0;
        picks << (seed > 1 ? "," : "") << K;
    }
    return pass_if(hits >= 18, std::to_string(hits) + "/20 seeds select K = 4 (" + picks.str() + ")");
}

Outcome probability_operator() {
    const auto ensemble = [](Eigen::MatrixXd d) {
        Ensemble e;
        e.first_year = 1987;
        e.draws = std::move(d);
        return e;
    };
    Eigen::MatrixXd all(3, 20);
    all.leftCols(10).setZero();
    all.rightCols(10).setOnes();
    const double p_all = prob_warmest_decade(ensemble(all), {1997, 2006});
    Eigen::MatrixXd two(2, 20);
    two.row(0) << Eigen::RowVectorXd::Zero(10), Eigen::RowVectorXd::Ones(10);
    two.row(1) << Eigen::RowVectorXd::Ones(10), Eigen::RowVectorXd::Zero(10);
    const double p_two = prob_warmest_decade(ensemble(two), {1997, 2006});

    Rng rng = make_rng(9);
    Ensemble noisy;
    noisy.first_year = 1947;
    noisy.draws = fixtures::gaussian(999, 60, rng);
    const double p = prob_warmest_decade(noisy, {1997, 2006});
    const bool exact = p * 999.0 == std::round(p * 999.0);
    bool monotone = true;
    double previous = p;
    for (double delta : {0.05, 0.2, 0.5, 1.0, 2.0}) {
        Ensemble shifted = noisy;
        shifted.draws.rightCols(10).array() += delta;
        const double q = prob_warmest_decade(shifted, {1997, 2006});
        monotone = monotone && q >= previous;
        previous = q;
    }
    return pass_if(p_all == 1.0 && p_two == 0.5 && exact && monotone,
                   "all-warmest " + fmt(p_all) + ", two-draw " + fmt(p_two) + ", exact fraction " +
                       (exact ? "yes" : "no") + ", monotone under shift " + (monotone ? "yes" : "no"));
}

Outcome holdout_degradation() {
    const TruthField field = default_benchmark_field();
    const YearRange instrumental{1856, 1980};
    const TimeSeries target = field.hemisphere_mean.slice(instrumental);
    std::vector<double> var30, var46;
    for (int r = 0; r < 20; ++r) {
        PseudoproxySpec spec;
        spec.seed = derive_seed(derive_seed(kReplicateBase, spec.seed), static_cast<std::uint64_t>(r));
        const PseudoproxySet pp = make_pseudoproxies(field, spec);
        const NetworkMatrix m = network_matrix(pp.network, field.first_year, field.years().last);
        for (int length : {30, 46}) {
            std::vector<double> re;
            for (const auto& h : holdout_validate(m, target, instrumental, OlsPcConfig{}, length, HoldoutMode::sliding))
                re.push_back(h.skill.re);
            (length == 30 ? var30 : var46).push_back(sample_variance(re));
        }
    }
    const double m30 = median(var30), m46 = median(var46);
    return pass_if(m30 > m46, "median variance of sliding-block RE: 30-year " + fmt(m30) + ", 46-year " + fmt(m46));
}

Outcome cli_determinism() {
    const fs::path dir = fixtures::scratch("acceptance_determinism");
    const auto files = fixtures::write_screening_network(dir);
    const auto data = [&](const fs::path& metadata, const fs::path& values) {
        return std::vector<std::string>{"--metadata", metadata.string(), "--values", values.string(), "--target",
                                        files.target.string()};
    };
    const fs::path sm = dir / "screen_a" / "screened_metadata.csv", sv = dir / "screen_a" / "screened_values.csv";
    struct Run {
        std::string name;
        std::vector<std::string> args;
    };
    const auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    const std::vector<Run> runs{
        {"screen", {"--metadata", files.metadata.string(), "--values", files.values.string()}},
        {"reconstruct", data(sm, sv)},
        {"reconstruct", with(data(sm, sv), {"--method", "regem_hybrid"})},
        {"ensemble", with(data(sm, sv), {"--noise", "plus_residual_noise", "--n-draws", "300"})},
        {"validate", data(sm, sv)},
        {"smooth", {"--input", files.target.string()}},
        {"benchmark", {"--grid-sites", "120", "--n-sites", "30", "--replicates", "2"}},
    };
    std::vector<std::string> broken;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const fs::path a = i == 0 ? dir / "screen_a" : dir / (runs[i].name + std::to_string(i) + "_a");
        const fs::path b = dir / (runs[i].name + std::to_string(i) + "_b");
        std::vector<std::string> args{runs[i].name};
        args.insert(args.end(), runs[i].args.begin(), runs[i].args.end());
        args.insert(args.end(), {"-o", a.string()});
        const auto r = fixtures::run_cli(args);
        if (r.code != 0 || !fixtures::replays_identically(runs[i].name, a, b)) broken.push_back(runs[i].name);
    }
    std::string detail = std::to_string(runs.size() - broken.size()) + "/" + std::to_string(runs.size()) +
                         " runs replay byte-identically from resolved.ini";
    for (const auto& name : broken) detail += "; mismatch: " + name;
    return pass_if(broken.empty(), detail);
}

// Optional criteria need a real screened network and instrumental target.
Outcome real_data_probability(int K, const std::function<bool(double)>& accept, const std::string& expectation) {
    const char* metadata = std::getenv("PALEORECON_REAL_METADATA");
    const char* values = std::getenv("PALEORECON_REAL_VALUES");
    const char* target = std::getenv("PALEORECON_REAL_TARGET");
    if (!metadata || !values || !target)
        return {Verdict::skip,
                "set PALEORECON_REAL_METADATA, PALEORECON_REAL_VALUES and PALEORECON_REAL_TARGET to run"};
    const fs::path out = fixtures::scratch("acceptance_real_K" + std::to_string(K));
    const auto r = fixtures::run_cli({"ensemble", "--metadata", metadata, "--values", values, "--target", target, "-K",
                                      std::to_string(K), "-o", out.string()});
    if (r.code != 0) return {Verdict::fail, "ensemble exited " + std::to_string(r.code) + ": " + r.err};
    std::istringstream in(fixtures::read_text(out / "probability.txt"));
    std::string line;
    double p = -1.0;
    while (std::getline(in, line))
        if (line.rfind("prob_warmest_decade=", 0) == 0) p = std::stod(line.substr(20));
    return pass_if(accept(p), "prob_warmest_decade(1997-2006) = " + fmt(p) + " (" + expectation + ")");
}

}  // namespace

int main(int argc, char** argv) {
    const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
    struct Criterion {
        int id;
        std::string name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {1, "screening counts", screening_counts},
        {2, "AR(1) fidelity", ar1_fidelity},
        {3, "SNR calibration", snr_calibration},
        {4, "OLS oracle equivalence", ols_oracles},
        {5, "RegEM fixed point and oracle", regem_oracles},
        {6, "hybrid consistency", hybrid_consistency},
        {7, "bias ordering", bias_ordering},
        {8, "K selection", k_selection},
        {9, "probability operator", probability_operator},
        {10, "hold-out degradation", holdout_degradation},
        {11, "CLI determinism", cli_determinism},
        {12, "real network, OLS PC10 probability",
         [] { return real_data_probability(10, [](double p) { return std::abs(p - 0.86) <= 0.04; }, "expected 0.86 +- 0.04"); }},
        {13, "real network, OLS PC4 probability",
         [] { return real_data_probability(4, [](double p) { return p >= 0.95; }, "expected >= 0.95"); }},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const char* label = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::fail ? "FAIL" : "SKIP";
        failures += o.verdict == Verdict::fail ? 1 : 0;
        std::cout << "criterion " << std::setw(2) << c.id << ": " << label << "  " << c.name << " -- " << o.detail
                  << " [" << std::fixed << std::setprecision(1) << seconds << "s]" << std::defaultfloat << std::endl;
    }
    return strict && failures > 0 ? 1 : 0;
}
