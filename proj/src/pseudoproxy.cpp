#include "paleorecon/pseudoproxy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <thread>

#include "paleorecon/csv.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/random.hpp"

namespace paleo {

namespace {

double sample_sd(const Eigen::VectorXd& v) {
    const double mu = v.mean();
    return std::sqrt((v.array() - mu).square().sum() / static_cast<double>(v.size() - 1));
}

double great_circle_km(const Site& a, const Site& b) {
    constexpr double kEarthRadiusKm = 6371.0;
    const double deg = std::numbers::pi / 180.0;
    const double p1 = a.lat * deg, p2 = b.lat * deg;
    const double dl = (b.lon - a.lon) * deg;
    const double c = std::sin(p1) * std::sin(p2) + std::cos(p1) * std::cos(p2) * std::cos(dl);
    return kEarthRadiusKm * std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

TimeSeries TruthField::site_series(std::size_t j) const {
    const Eigen::VectorXd col = series.col(static_cast<Eigen::Index>(j));
    return TimeSeries(first_year, std::vector<double>(col.data(), col.data() + col.size()));
}

TimeSeries area_weighted_mean(const std::vector<Site>& sites, const Eigen::MatrixXd& series, int first_year) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(sites.size()));
    for (std::size_t j = 0; j < sites.size(); ++j)
        w(static_cast<Eigen::Index>(j)) = std::cos(sites[j].lat * std::numbers::pi / 180.0);
    if (!(w.sum() > 0.0)) throw InputError("site weights sum to zero");
    const Eigen::VectorXd mean = series * w / w.sum();
    return TimeSeries(first_year, std::vector<double>(mean.data(), mean.data() + mean.size()));
}

std::vector<Site> hemisphere_grid(int n_sites) {
    if (n_sites < 1) throw SpecError("grid needs at least one site");
    const double golden_angle = 180.0 * (3.0 - std::sqrt(5.0));
    std::vector<Site> sites;
    for (int i = 0; i < n_sites; ++i) {
        const double z = (i + 0.5) / n_sites;  // sin(latitude), uniform in area
        const double lon = std::fmod(i * golden_angle, 360.0) - 180.0;
        char id[16];
        std::snprintf(id, sizeof id, "S%04d", i);
        sites.push_back({id, std::asin(z) * 180.0 / std::numbers::pi, lon});
    }
    return sites;
}

TimeSeries ar1_noise(std::size_t n, double rho, double sigma, std::uint64_t seed, int start_year) {
    if (!(std::abs(rho) < 1.0)) throw SpecError("AR(1) coefficient must satisfy |rho| < 1");
    if (!(sigma > 0.0)) throw SpecError("AR(1) sigma must be positive");
    if (n == 0) throw SpecError("AR(1) series needs at least one value");
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal;
    const double innovation_sd = sigma * std::sqrt(1.0 - rho * rho);
    std::vector<double> x(n);
    x[0] = sigma * normal(rng);
    for (std::size_t t = 1; t < n; ++t) x[t] = rho * x[t - 1] + innovation_sd * normal(rng);
    return TimeSeries(start_year, std::move(x));
}

TruthField generate_truth(int n_sites, YearRange years, const SignalConfig& config, std::uint64_t seed) {
    if (years.length() < 200) throw SpecError("truth field needs at least 200 years");
    TruthField field;
    field.sites = hemisphere_grid(n_sites);
    field.first_year = years.first;
    const auto n = static_cast<Eigen::Index>(years.length());
    const auto p = static_cast<Eigen::Index>(n_sites);

    Eigen::VectorXd forced = Eigen::VectorXd::Zero(n);
    if (config.forced_sd > 0.0) {
        const TimeSeries walk = ar1_noise(static_cast<std::size_t>(n), config.forced_rho, config.forced_sd,
                                          derive_seed(seed, "forced"), years.first);
        for (Eigen::Index t = 0; t < n; ++t) forced(t) = walk[static_cast<std::size_t>(t)];
    }
    if (config.ramp_amplitude != 0.0 && years.last > config.ramp_start) {
        for (int y = std::max(config.ramp_start, years.first); y <= years.last; ++y)
            forced(y - years.first) += config.ramp_amplitude * (y - config.ramp_start) /
                                       static_cast<double>(years.last - config.ramp_start);
    }

    field.series = forced.replicate(1, p);
    if (config.site_noise_sd > 0.0) {
        Eigen::MatrixXd corr(p, p);
        for (Eigen::Index a = 0; a < p; ++a)
            for (Eigen::Index b = 0; b < p; ++b)
                corr(a, b) = std::exp(-great_circle_km(field.sites[static_cast<std::size_t>(a)],
                                                       field.sites[static_cast<std::size_t>(b)]) /
                                      config.correlation_length_km);
        corr.diagonal().array() += 1e-10;
        Eigen::LLT<Eigen::MatrixXd> llt(corr);
        if (llt.info() != Eigen::Success) throw NumericalError("site correlation matrix is not positive definite");

        Rng rng = make_rng(derive_seed(seed, "weather"));
        std::normal_distribution<double> normal;
        Eigen::MatrixXd z(n, p);
        for (Eigen::Index t = 0; t < n; ++t)
            for (Eigen::Index j = 0; j < p; ++j) z(t, j) = normal(rng);
        const Eigen::MatrixXd innov = z * llt.matrixL().transpose();  // rows ~ N(0, corr)

        const double rho = config.site_noise_rho;
        const double sd = config.site_noise_sd;
        const double innov_sd = sd * std::sqrt(1.0 - rho * rho);
        Eigen::RowVectorXd w = sd * innov.row(0);
        field.series.row(0) += w;
        for (Eigen::Index t = 1; t < n; ++t) {
            w = rho * w + innov_sd * innov.row(t);
            field.series.row(t) += w;
        }
    }
    field.hemisphere_mean = area_weighted_mean(field.sites, field.series, field.first_year);
    return field;
}

TruthField load_field(const std::filesystem::path& metadata, const std::filesystem::path& values) {
    const auto meta = csv::read_rows(metadata);
    if (meta.empty()) throw FormatError(1, "empty field metadata");
    if (meta.front().fields != std::vector<std::string>{"site_id", "lat", "lon"})
        throw FormatError(meta.front().line, "expected header 'site_id,lat,lon'");
    TruthField field;
    std::map<std::string, std::size_t> index;
    for (std::size_t r = 1; r < meta.size(); ++r) {
        const auto& row = meta[r];
        if (row.fields.size() != 3) throw FormatError(row.line, "expected 3 fields");
        if (!index.emplace(row.fields[0], field.sites.size()).second) throw DuplicateId(row.fields[0]);
        field.sites.push_back({row.fields[0], csv::parse_double(row.fields[1], row.line),
                               csv::parse_double(row.fields[2], row.line)});
    }
    if (field.sites.empty()) throw FormatError(meta.front().line, "field has no sites");

    const auto rows = csv::read_rows(values);
    if (rows.size() < 2) throw FormatError(1, "field values table is empty");
    const auto& header = rows.front();
    if (header.fields.empty() || header.fields[0] != "year")
        throw FormatError(header.line, "values header must start with 'year'");
    if (header.fields.size() != field.sites.size() + 1)
        throw FormatError(header.line, "values columns do not match the site metadata");
    std::vector<std::size_t> column_site;
    for (std::size_t c = 1; c < header.fields.size(); ++c) {
        const auto it = index.find(header.fields[c]);
        if (it == index.end()) throw FormatError(header.line, "unknown site '" + header.fields[c] + "'");
        column_site.push_back(it->second);
    }

    field.first_year = csv::parse_int(rows[1].fields[0], rows[1].line);
    field.series.resize(static_cast<Eigen::Index>(rows.size() - 1), static_cast<Eigen::Index>(field.sites.size()));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.fields.size()) throw FormatError(row.line, "wrong number of fields");
        if (csv::parse_int(row.fields[0], row.line) != field.first_year + static_cast<int>(r) - 1)
            throw FormatError(row.line, "field years must be contiguous and ascending");
        for (std::size_t c = 1; c < row.fields.size(); ++c) {
            if (row.fields[c].empty()) throw FormatError(row.line, "field values may not be missing");
            field.series(static_cast<Eigen::Index>(r - 1), static_cast<Eigen::Index>(column_site[c - 1])) =
                csv::parse_double(row.fields[c], row.line);
        }
    }
    field.hemisphere_mean = area_weighted_mean(field.sites, field.series, field.first_year);
    return field;
}

PseudoproxySet make_pseudoproxies(const TruthField& field, const PseudoproxySpec& spec) {
    const auto grid = static_cast<int>(field.sites.size());
    if (spec.n_sites < 1 || spec.n_sites > grid)
        throw SpecError("n_sites=" + std::to_string(spec.n_sites) + " outside [1, " + std::to_string(grid) + "]");
    if (!(spec.snr > 0.0)) throw SpecError("snr must be positive");
    if (!(spec.rho >= 0.0 && spec.rho < 1.0)) throw SpecError("rho must lie in [0, 1)");

    // Partial Fisher-Yates: the first n_sites entries are a uniform sample without replacement.
    std::vector<std::size_t> order(static_cast<std::size_t>(grid));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = make_rng(derive_seed(spec.seed, "sites"));
    for (std::size_t i = 0; i < static_cast<std::size_t>(spec.n_sites); ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, order.size() - 1);
        std::swap(order[i], order[pick(rng)]);
    }

    PseudoproxySet out;
    out.network.frozen_at = field.first_year;
    const Eigen::Index n = field.series.rows();
    out.noise = Eigen::MatrixXd::Zero(n, spec.n_sites);
    for (int k = 0; k < spec.n_sites; ++k) {
        const std::size_t site = order[static_cast<std::size_t>(k)];
        out.sites.push_back(site);
        const Eigen::VectorXd signal = field.series.col(static_cast<Eigen::Index>(site));
        if (std::isfinite(spec.snr)) {
            const TimeSeries raw = ar1_noise(static_cast<std::size_t>(n), spec.rho, sample_sd(signal) / spec.snr,
                                             derive_seed(derive_seed(spec.seed, "noise"), site), field.first_year);
            out.noise.col(k) = Eigen::Map<const Eigen::VectorXd>(raw.values().data(), n);
        }
        const Eigen::VectorXd proxy = signal + out.noise.col(k);
        ProxyRecord rec{field.sites[site].id,
                        TimeSeries(field.first_year, std::vector<double>(proxy.data(), proxy.data() + n)),
                        ProxyKind::other,
                        std::nullopt,
                        {},
                        Resolution::annual};
        out.network.records.push_back(std::move(rec));
    }
    return out;
}

double BenchmarkResult::median(const std::string& method, double SkillReport::*stat) const {
    std::vector<double> v;
    for (const auto& e : entries)
        if (e.method == method && e.skill) v.push_back((*e.skill).*stat);
    if (v.empty()) return kMissing;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::vector<SkillReport> BenchmarkResult::reports(const std::string& method) const {
    std::vector<SkillReport> out;
    for (const auto& e : entries)
        if (e.method == method && e.skill) out.push_back(*e.skill);
    return out;
}

BenchmarkResult run_benchmark(const TruthField& field, const PseudoproxySpec& spec,
                              const std::vector<MethodConfig>& methods, int replicates, std::uint64_t base_seed,
                              int threads) {
    if (replicates < 1) throw SpecError("replicates must be at least 1");
    if (!field.years().contains(spec.calibration) || spec.calibration.first <= field.first_year + 4)
        throw SpecError("calibration must lie inside the field years and leave a verification period");

    BenchmarkResult result;
    for (const auto& m : methods) result.methods.push_back(method_label(m));
    result.verification = {field.first_year, spec.calibration.first - 1};
    const double cal_mean = mean_present(field.hemisphere_mean, spec.calibration);
    const std::uint64_t run_seed = derive_seed(base_seed, spec.seed);

    std::vector<std::vector<BenchmarkEntry>> per_replicate(static_cast<std::size_t>(replicates));
    auto run_one = [&](int r) {
        PseudoproxySpec rs = spec;
        rs.seed = derive_seed(run_seed, static_cast<std::uint64_t>(r));
        const PseudoproxySet pp = make_pseudoproxies(field, rs);
        const NetworkMatrix matrix = network_matrix(pp.network, field.years().first, field.years().last);
        auto& out = per_replicate[static_cast<std::size_t>(r)];
        for (std::size_t k = 0; k < methods.size(); ++k) {
            BenchmarkEntry entry{result.methods[k], r, std::nullopt, {}};
            try {
                const Reconstruction rec = reconstruct(matrix, field.hemisphere_mean, spec.calibration, methods[k]);
                entry.skill = score(rec.series, field.hemisphere_mean, cal_mean, result.verification);
            } catch (const Error& e) {
                entry.error = e.what();
            }
            out.push_back(std::move(entry));
        }
    };

    const int workers = std::clamp(threads, 1, replicates);
    if (workers == 1) {
        for (int r = 0; r < replicates; ++r) run_one(r);
    } else {
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int r = next++; r < replicates; r = next++) run_one(r);
            });
        for (auto& t : pool) t.join();
    }
    for (auto& rows : per_replicate)
        for (auto& e : rows) result.entries.push_back(std::move(e));
    return result;
}

std::string format_benchmark(const BenchmarkResult& result) {
    std::ostringstream out;
    out << "method,replicate,rmse,re,ce,r2,var_ratio\n";
    for (const auto& e : result.entries) {
        out << e.method << ',' << e.replicate;
        if (e.skill)
            out << ',' << csv::format_double(e.skill->rmse) << ',' << csv::format_double(e.skill->re) << ','
                << csv::format_double(e.skill->ce) << ',' << csv::format_double(e.skill->r2) << ','
                << csv::format_double(e.skill->var_ratio);
        else
            out << ",,,,,";
        out << '\n';
    }
    for (const auto& m : result.methods) {
        out << m << ",median," << csv::format_double(result.median(m, &SkillReport::rmse)) << ','
            << csv::format_double(result.median(m, &SkillReport::re)) << ','
            << csv::format_double(result.median(m, &SkillReport::ce)) << ','
            << csv::format_double(result.median(m, &SkillReport::r2)) << ','
            << csv::format_double(result.median(m, &SkillReport::var_ratio)) << '\n';
    }
    return out.str();
}

}  // namespace paleo
