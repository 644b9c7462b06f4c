#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "paleorecon/csv.hpp"
#include "paleorecon/errors.hpp"
#include "paleorecon/methods.hpp"
#include "paleorecon/pseudoproxy.hpp"
#include "paleorecon/random.hpp"
#include "paleorecon/regression.hpp"
#include "paleorecon/skill.hpp"
#include "paleorecon/uncertainty.hpp"

namespace fs = std::filesystem;

namespace paleo::cli {

namespace {

// Key-value record of every setting a run actually used, written as a config
// section that --config reads back.
class Resolved {
public:
    void set(const std::string& key, const std::string& value, bool quote = false) {
        entries_[key] = quote ? '"' + value + '"' : value;
    }
    void set(const std::string& key, double value) { set(key, number(value)); }
    void set(const std::string& key, int value) { set(key, std::to_string(value)); }
    void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

    std::string render(const std::string& section) const {
        std::string out = "[" + section + "]\n";
        for (const auto& [k, v] : entries_) out += k + "=" + v + "\n";
        return out;
    }

    static std::string number(double v) {
        if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
        return csv::format_double(v);
    }

private:
    std::map<std::string, std::string> entries_;
};

struct DataOptions {
    std::string metadata, values, target;
    int frozen_at = 1000;
    int calibration_start = kDefaultCalibration.first;
    int calibration_end = kDefaultCalibration.last;
    std::string output_dir = "out";

    YearRange calibration() const { return {calibration_start, calibration_end}; }
};

struct MethodOptions {
    std::string method = "ols_pc";
    std::string K = "auto";
    int max_K = 10;
    std::string k_rule = "cv";
    std::string lambda = "cv";
    std::string ridge = "gcv";
    double split_period = 20.0;
};

void add_network_options(CLI::App* sub, DataOptions& d, bool with_target) {
    sub->add_option("--metadata", d.metadata, "Proxy metadata CSV (id,kind,core_count,flags,resolution)")->required();
    sub->add_option("--values", d.values, "Proxy values CSV (year,<id>...)")->required();
    sub->add_option("--frozen-at", d.frozen_at, "Records must extend back to this year")->capture_default_str();
    if (with_target) {
        sub->add_option("--target", d.target, "Instrumental target CSV (year,value)")->required();
        sub->add_option("--calibration-start", d.calibration_start)->capture_default_str();
        sub->add_option("--calibration-end", d.calibration_end)->capture_default_str();
    }
    sub->add_option("-o,--output-dir", d.output_dir)->capture_default_str();
}

void add_method_options(CLI::App* sub, MethodOptions& m, bool with_method) {
    if (with_method)
        sub->add_option("--method", m.method, "ols_pc | lasso | regem | regem_hybrid")->capture_default_str();
    sub->add_option("-K,--K", m.K, "Retained PCs for ols_pc, or 'auto'")->capture_default_str();
    sub->add_option("--max-K", m.max_K)->capture_default_str();
    sub->add_option("--k-rule", m.k_rule, "cv | broken_stick")->capture_default_str();
    sub->add_option("--lambda", m.lambda, "Lasso penalty, or 'cv'")->capture_default_str();
    sub->add_option("--ridge", m.ridge, "RegEM ridge, or 'gcv'")->capture_default_str();
    sub->add_option("--split-period", m.split_period, "Hybrid band split (years)")->capture_default_str();
}

double parse_real(const std::string& what, const std::string& s) {
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    try {
        return csv::parse_double(s, 0);
    } catch (const FormatError&) {
        throw SpecError(what + ": '" + s + "' is not a number");
    }
}

std::optional<int> parse_auto_int(const std::string& what, const std::string& s, const std::string& auto_word) {
    if (s == auto_word) return std::nullopt;
    try {
        return csv::parse_int(s, 0);
    } catch (const FormatError&) {
        throw SpecError(what + ": expected an integer or '" + auto_word + "', got '" + s + "'");
    }
}

std::optional<double> parse_auto_real(const std::string& what, const std::string& s, const std::string& auto_word) {
    if (s == auto_word) return std::nullopt;
    const double v = parse_real(what, s);
    if (!(v >= 0.0) || std::isinf(v)) throw SpecError(what + " must be a finite non-negative number");
    return v;
}

Method parse_method_or_throw(const std::string& s) {
    const auto m = parse_method(s);
    if (!m) throw SpecError("unknown method '" + s + "'");
    return *m;
}

KRule parse_k_rule(const std::string& s) {
    if (s == "cv") return KRule::cross_validation;
    if (s == "broken_stick") return KRule::broken_stick;
    throw SpecError("unknown K rule '" + s + "'");
}

MethodConfig method_config(Method method, const MethodOptions& m) {
    RegemConfig regem;
    regem.ridge = parse_auto_real("ridge", m.ridge, "gcv");
    switch (method) {
        case Method::ols_pc: {
            OlsPcConfig c;
            c.K = parse_auto_int("K", m.K, "auto");
            if (c.K && *c.K < 1) throw SpecError("K must be at least 1");
            if (m.max_K < 1) throw SpecError("max-K must be at least 1");
            c.max_K = m.max_K;
            c.rule = parse_k_rule(m.k_rule);
            return c;
        }
        case Method::lasso: return LassoConfig{parse_auto_real("lambda", m.lambda, "cv")};
        case Method::regem: return RegemMethodConfig{regem};
        case Method::regem_hybrid: {
            if (!(m.split_period > 2.0)) throw SpecError("split-period must exceed 2 years");
            return HybridConfig{regem, m.split_period};
        }
    }
    return OlsPcConfig{};
}

void record_method(Resolved& r, const MethodOptions& m) {
    r.set("K", m.K);
    r.set("max-K", m.max_K);
    r.set("k-rule", m.k_rule);
    r.set("lambda", m.lambda);
    r.set("ridge", m.ridge);
    r.set("split-period", m.split_period);
}

void record_data(Resolved& r, const DataOptions& d, bool with_target) {
    r.set("metadata", d.metadata, true);
    r.set("values", d.values, true);
    r.set("frozen-at", d.frozen_at);
    if (with_target) {
        r.set("target", d.target, true);
        r.set("calibration-start", d.calibration_start);
        r.set("calibration-end", d.calibration_end);
    }
    r.set("output-dir", d.output_dir, true);
}

fs::path prepare_output(const std::string& dir) {
    const fs::path p(dir);
    fs::create_directories(p);
    return p;
}

ProxyNetwork load_checked(const DataOptions& d, std::vector<Rejection>* rejections = nullptr) {
    LoadResult loaded = load_network(d.metadata, d.values, d.frozen_at);
    if (rejections) *rejections = std::move(loaded.rejections);
    if (loaded.network.size() == 0) throw InputError("no proxy records survive loading");
    return std::move(loaded.network);
}

int last_proxy_year(const ProxyNetwork& net) {
    int last = net.frozen_at;
    for (const auto& r : net.records)
        if (const auto span = r.series.present_span()) last = std::max(last, span->last);
    return last;
}

// ---------------------------------------------------------------------------

struct ScreenOptions {
    DataOptions data;
    int min_cores = 8;
    std::string flag = "tiljander";
};

int cmd_screen(const ScreenOptions& o) {
    if (o.min_cores < 1) throw SpecError("min-cores must be at least 1");
    std::vector<Rejection> log;
    const ProxyNetwork loaded = load_checked(o.data, &log);
    for (auto& r : log) r.reason = "load:" + r.reason;

    const ProxyNetwork replicated = screen_replication(loaded, o.min_cores);
    for (const auto& id : removed_ids(loaded, replicated)) {
        const ProxyRecord* rec = loaded.find(id);
        log.push_back({id, rec->core_count ? "replication:core_count=" + std::to_string(*rec->core_count)
                                           : std::string("replication:core_count=unknown")});
    }
    const ProxyNetwork final_net = exclude_flagged(replicated, o.flag);
    for (const auto& id : removed_ids(replicated, final_net)) log.push_back({id, "flag:" + o.flag});

    const fs::path out = prepare_output(o.data.output_dir);
    write_network(replicated, out / "replicated_metadata.csv", out / "replicated_values.csv");
    write_network(final_net, out / "screened_metadata.csv", out / "screened_values.csv");
    csv::write_atomic(out / "rejections.csv", format_rejections(log));

    Resolved r;
    record_data(r, o.data, false);
    r.set("min-cores", o.min_cores);
    r.set("flag", o.flag, true);
    csv::write_atomic(out / "resolved.ini", r.render("screen"));
    return kOk;
}

// ---------------------------------------------------------------------------

struct ReconstructOptions {
    DataOptions data;
    MethodOptions method;
    double span = 0.05;
};

int cmd_reconstruct(ReconstructOptions o) {
    const Method method = parse_method_or_throw(o.method.method);
    MethodConfig config = method_config(method, o.method);
    if (!(o.span > 0.0 && o.span <= 1.0)) throw SpecError("span must lie in (0, 1]");
    const ProxyNetwork net = load_checked(o.data);
    const TimeSeries target = csv::read_timeseries(o.data.target);
    const NetworkMatrix matrix = network_matrix(net, net.frozen_at, last_proxy_year(net));

    Reconstruction rec = [&] {
        try {
            if (method == Method::ols_pc) {
                PcRegression pr = reconstruct_ols_pc(matrix, target, o.data.calibration(), std::get<OlsPcConfig>(config));
                return std::move(pr.reconstruction);
            }
            return reconstruct(matrix, target, o.data.calibration(), config);
        } catch (const NumericalError& e) {
            throw NumericalError("reconstruct (method=" + o.method.method + "): " + e.what());
        }
    }();
    // Selections made by the fit are echoed so the resolved config replays them.
    if (method == Method::ols_pc && rec.model.K) o.method.K = std::to_string(*rec.model.K);
    if (method == Method::lasso && rec.model.lambda) o.method.lambda = Resolved::number(*rec.model.lambda);

    const fs::path out = prepare_output(o.data.output_dir);
    csv::write_atomic(out / "reconstruction.csv", format_reconstruction(rec));
    csv::write_atomic(out / "smoothed.csv",
                      format_reconstruction(loess_smooth(rec.series, o.span), rec.label + "_loess"));
    csv::write_atomic(out / "model.txt", format_model(rec.model));

    Resolved r;
    record_data(r, o.data, true);
    r.set("method", o.method.method);
    record_method(r, o.method);
    r.set("span", o.span);
    csv::write_atomic(out / "resolved.ini", r.render("reconstruct"));
    return kOk;
}

// ---------------------------------------------------------------------------

struct EnsembleOptions {
    DataOptions data;
    MethodOptions method;
    int n_draws = 1000;
    std::string noise = "coefficients_only";
    int decade_start = 1997;
    int decade_end = 2006;
    std::string decade_source = "observed";
    std::uint64_t seed = 1;
};

// Drops trailing years with no value in any draw; any other gap is an error.
Ensemble trim_complete(const Ensemble& e) {
    Eigen::Index last = e.draws.cols() - 1;
    while (last >= 0 && e.draws.col(last).array().isNaN().all()) --last;
    if (last < 0) throw MissingDataError("ensemble has no complete year");
    Ensemble out = e;
    out.draws = e.draws.leftCols(last + 1);
    if (out.draws.array().isNaN().any())
        throw MissingDataError("ensemble has years without proxy scores or observed values; "
                               "check proxy coverage or the decade source");
    return out;
}

int cmd_ensemble(EnsembleOptions o) {
    if (o.n_draws < 1) throw SpecError("n-draws must be at least 1");
    EnsembleNoise noise;
    if (o.noise == "coefficients_only") noise = EnsembleNoise::coefficients_only;
    else if (o.noise == "plus_residual_noise") noise = EnsembleNoise::plus_residual_noise;
    else throw SpecError("unknown noise mode '" + o.noise + "'");
    if (o.decade_source != "observed" && o.decade_source != "reconstructed")
        throw SpecError("decade-source must be 'observed' or 'reconstructed'");
    const YearRange decade{o.decade_start, o.decade_end};
    if (decade.length() != 10) throw BlockMismatch("decade must span exactly 10 years");
    const auto config = std::get<OlsPcConfig>(method_config(Method::ols_pc, o.method));

    const ProxyNetwork net = load_checked(o.data);
    const TimeSeries target = csv::read_timeseries(o.data.target);
    int end = std::max(last_proxy_year(net), decade.last);
    if (const auto span = target.present_span()) end = std::max(end, span->last);
    const NetworkMatrix matrix = network_matrix(net, net.frozen_at, end);

    const YearRange calibration = o.data.calibration();
    PcRegression pr = [&] {
        try {
            return reconstruct_ols_pc(matrix, target, calibration, config);
        } catch (const NumericalError& e) {
            throw NumericalError(std::string("ensemble (method=ols_pc): ") + e.what());
        }
    }();
    const int K = *pr.model.K;
    o.method.K = std::to_string(K);
    const OlsDesign design = ols_design(pr.basis, target, K, *intersect(calibration, matrix.years()));
    const CoefficientDraws draws =
        sample_coefficients(pr.model, design.X, design.y, o.n_draws, derive_seed(o.seed, "coefficients"));
    // Draws cover the leading run of years with complete scores; later years are
    // left missing until the observed target is spliced in.
    const Eigen::MatrixXd scores = pr.basis.scores.leftCols(K);
    Eigen::Index begin = 0;
    while (begin < scores.rows() && scores.row(begin).array().isNaN().any()) ++begin;
    Eigen::Index stop = begin;
    while (stop < scores.rows() && !scores.row(stop).array().isNaN().any()) ++stop;
    if (stop == begin) throw MissingDataError("no year has a complete set of proxy scores");
    Ensemble ens = build_ensemble(draws, scores.middleRows(begin, stop - begin),
                                  pr.basis.first_year + static_cast<int>(begin), noise,
                                  derive_seed(o.seed, "residual_noise"), "ols_pc" + std::to_string(K));
    const Eigen::Index width = end - ens.first_year + 1;
    if (width > ens.draws.cols()) {
        Eigen::MatrixXd padded = Eigen::MatrixXd::Constant(ens.draws.rows(), width, kMissing);
        padded.leftCols(ens.draws.cols()) = ens.draws;
        ens.draws = std::move(padded);
    }
    if (o.decade_source == "observed") ens = splice_observed(std::move(ens), target, calibration.last + 1);
    ens = trim_complete(ens);
    const double p = prob_warmest_decade(ens, decade);

    const fs::path out = prepare_output(o.data.output_dir);
    csv::write_atomic(out / "ensemble.csv", format_ensemble(ens));
    csv::write_atomic(out / "summary.csv", format_summary(summarize(ens)));
    std::ostringstream report;
    report << "label=" << ens.label << "\ndecade=" << decade.first << "-" << decade.last
           << "\nn_draws=" << ens.n_draws() << "\nwarmest_draws=" << std::llround(p * static_cast<double>(ens.n_draws()))
           << "\nprob_warmest_decade=" << csv::format_double(p) << "\n";
    csv::write_atomic(out / "probability.txt", report.str());

    Resolved r;
    record_data(r, o.data, true);
    record_method(r, o.method);
    r.set("n-draws", o.n_draws);
    r.set("noise", o.noise);
    r.set("decade-start", o.decade_start);
    r.set("decade-end", o.decade_end);
    r.set("decade-source", o.decade_source);
    r.set("seed", o.seed);
    csv::write_atomic(out / "resolved.ini", r.render("ensemble"));
    return kOk;
}

// ---------------------------------------------------------------------------

struct BenchmarkOptions {
    MethodOptions method;
    std::string methods = "lasso,ols_pc,regem,regem_hybrid";
    std::string field_metadata, field_values;
    int grid_sites = 500;
    int field_start = 1000;
    int field_end = 1980;
    int n_sites = 59;
    double rho = 0.32;
    std::string snr = "0.4";
    int replicates = 20;
    std::uint64_t seed = 1;
    int threads = 0;
    int calibration_start = kDefaultCalibration.first;
    int calibration_end = kDefaultCalibration.last;
    std::string output_dir = "out";
};

int cmd_benchmark(const BenchmarkOptions& o) {
    std::vector<MethodConfig> methods;
    for (const auto& name : csv::split(o.methods)) {
        const std::string trimmed(csv::trim(name));
        if (!trimmed.empty()) methods.push_back(method_config(parse_method_or_throw(trimmed), o.method));
    }
    if (methods.empty()) throw SpecError("no methods given");
    if (o.replicates < 1) throw SpecError("replicates must be at least 1");

    const bool external = !o.field_metadata.empty() || !o.field_values.empty();
    if (external && (o.field_metadata.empty() || o.field_values.empty()))
        throw SpecError("field-metadata and field-values must be given together");
    if (!external && o.field_end - o.field_start + 1 < 200) throw SpecError("synthetic field needs at least 200 years");
    const TruthField field = external ? load_field(o.field_metadata, o.field_values)
                                      : generate_truth(o.grid_sites, {o.field_start, o.field_end}, SignalConfig{},
                                                       derive_seed(o.seed, "field"));

    PseudoproxySpec spec;
    spec.n_sites = o.n_sites;
    spec.rho = o.rho;
    spec.snr = parse_real("snr", o.snr);
    spec.calibration = {o.calibration_start, o.calibration_end};
    const int threads = o.threads > 0 ? o.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    const BenchmarkResult result =
        run_benchmark(field, spec, methods, o.replicates, derive_seed(o.seed, "replicates"), threads);

    const fs::path out = prepare_output(o.output_dir);
    csv::write_atomic(out / "benchmark.csv", format_benchmark(result));
    std::string errors = "method,replicate,error\n";
    for (const auto& e : result.entries)
        if (!e.error.empty()) errors += e.method + "," + std::to_string(e.replicate) + ",\"" + e.error + "\"\n";
    csv::write_atomic(out / "benchmark_errors.csv", errors);

    Resolved r;
    record_method(r, o.method);
    r.set("methods", o.methods, true);
    if (external) {
        r.set("field-metadata", o.field_metadata, true);
        r.set("field-values", o.field_values, true);
    } else {
        r.set("grid-sites", o.grid_sites);
        r.set("field-start", o.field_start);
        r.set("field-end", o.field_end);
    }
    r.set("n-sites", o.n_sites);
    r.set("rho", o.rho);
    r.set("snr", Resolved::number(spec.snr));
    r.set("replicates", o.replicates);
    r.set("seed", o.seed);
    r.set("calibration-start", o.calibration_start);
    r.set("calibration-end", o.calibration_end);
    r.set("output-dir", o.output_dir, true);
    csv::write_atomic(out / "resolved.ini", r.render("benchmark"));
    return kOk;
}

// ---------------------------------------------------------------------------

struct ValidateOptions {
    DataOptions data;
    MethodOptions method;
    int block_length = 30;
    std::string mode = "sliding";
    int step = 10;
};

int cmd_validate(const ValidateOptions& o) {
    const Method method = parse_method_or_throw(o.method.method);
    const MethodConfig config = method_config(method, o.method);
    HoldoutMode mode;
    if (o.mode == "early") mode = HoldoutMode::early;
    else if (o.mode == "late") mode = HoldoutMode::late;
    else if (o.mode == "sliding") mode = HoldoutMode::sliding;
    else throw SpecError("unknown hold-out mode '" + o.mode + "'");

    const ProxyNetwork net = load_checked(o.data);
    const TimeSeries target = csv::read_timeseries(o.data.target);
    const NetworkMatrix matrix = network_matrix(net, net.frozen_at, last_proxy_year(net));
    const auto results = [&] {
        try {
            return holdout_validate(matrix, target, o.data.calibration(), config, o.block_length, mode, o.step);
        } catch (const NumericalError& e) {
            throw NumericalError("validate (method=" + o.method.method + "): " + e.what());
        }
    }();

    const fs::path out = prepare_output(o.data.output_dir);
    csv::write_atomic(out / "validation.csv", format_validation(results));

    Resolved r;
    record_data(r, o.data, true);
    r.set("method", o.method.method);
    record_method(r, o.method);
    r.set("block-length", o.block_length);
    r.set("mode", o.mode);
    r.set("step", o.step);
    csv::write_atomic(out / "resolved.ini", r.render("validate"));
    return kOk;
}

// ---------------------------------------------------------------------------

struct SmoothOptions {
    std::string input;
    double span = 0.05;
    std::string label = "loess";
    std::string output_dir = "out";
};

int cmd_smooth(const SmoothOptions& o) {
    if (!(o.span > 0.0 && o.span <= 1.0)) throw SpecError("span must lie in (0, 1]");
    const TimeSeries s = csv::read_timeseries(o.input);
    const fs::path out = prepare_output(o.output_dir);
    csv::write_atomic(out / "smoothed.csv", format_reconstruction(loess_smooth(s, o.span), o.label));

    Resolved r;
    r.set("input", o.input, true);
    r.set("span", o.span);
    r.set("label", o.label, true);
    r.set("output-dir", o.output_dir, true);
    csv::write_atomic(out / "resolved.ini", r.render("smooth"));
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Proxy-based hemispheric temperature reconstruction toolkit"};
    app.name("paleorecon");
    app.set_config("--config", "", "Key-value config file with [subcommand] sections; flags override it");
    app.require_subcommand(1);

    ScreenOptions screen;
    auto* s_screen = app.add_subcommand("screen", "Load a network and apply replication and flag screens");
    add_network_options(s_screen, screen.data, false);
    s_screen->add_option("--min-cores", screen.min_cores)->capture_default_str();
    s_screen->add_option("--flag", screen.flag, "Records carrying this flag are excluded")->capture_default_str();

    ReconstructOptions recon;
    auto* s_recon = app.add_subcommand("reconstruct", "Fit a method and write raw and loess-smoothed reconstructions");
    add_network_options(s_recon, recon.data, true);
    add_method_options(s_recon, recon.method, true);
    s_recon->add_option("--span", recon.span, "Loess span")->capture_default_str();

    EnsembleOptions ens;
    auto* s_ens = app.add_subcommand("ensemble", "OLS-PC posterior ensemble and warmest-decade probability");
    add_network_options(s_ens, ens.data, true);
    add_method_options(s_ens, ens.method, false);
    s_ens->add_option("--n-draws", ens.n_draws)->capture_default_str();
    s_ens->add_option("--noise", ens.noise, "coefficients_only | plus_residual_noise")->capture_default_str();
    s_ens->add_option("--decade-start", ens.decade_start)->capture_default_str();
    s_ens->add_option("--decade-end", ens.decade_end)->capture_default_str();
    s_ens->add_option("--decade-source", ens.decade_source, "observed | reconstructed")->capture_default_str();
    s_ens->add_option("--seed", ens.seed)->capture_default_str();

    BenchmarkOptions bench;
    auto* s_bench = app.add_subcommand("benchmark", "Pseudoproxy benchmark of reconstruction methods");
    add_method_options(s_bench, bench.method, false);
    s_bench->add_option("--methods", bench.methods, "Comma-separated method list")->capture_default_str();
    s_bench->add_option("--field-metadata", bench.field_metadata, "External field metadata (site_id,lat,lon)");
    s_bench->add_option("--field-values", bench.field_values, "External field values (year,<site>...)");
    s_bench->add_option("--grid-sites", bench.grid_sites, "Synthetic field size")->capture_default_str();
    s_bench->add_option("--field-start", bench.field_start)->capture_default_str();
    s_bench->add_option("--field-end", bench.field_end)->capture_default_str();
    s_bench->add_option("--n-sites", bench.n_sites)->capture_default_str();
    s_bench->add_option("--rho", bench.rho)->capture_default_str();
    s_bench->add_option("--snr", bench.snr, "Signal/noise sd ratio, or 'inf'")->capture_default_str();
    s_bench->add_option("--replicates", bench.replicates)->capture_default_str();
    s_bench->add_option("--seed", bench.seed)->capture_default_str();
    s_bench->add_option("--threads", bench.threads, "0 = all cores; results do not depend on it");
    s_bench->add_option("--calibration-start", bench.calibration_start)->capture_default_str();
    s_bench->add_option("--calibration-end", bench.calibration_end)->capture_default_str();
    s_bench->add_option("-o,--output-dir", bench.output_dir)->capture_default_str();

    ValidateOptions val;
    auto* s_val = app.add_subcommand("validate", "Hold-out block validation over the instrumental period");
    add_network_options(s_val, val.data, true);
    add_method_options(s_val, val.method, true);
    s_val->add_option("--block-length", val.block_length)->capture_default_str();
    s_val->add_option("--mode", val.mode, "early | late | sliding")->capture_default_str();
    s_val->add_option("--step", val.step, "Sliding block step (years)")->capture_default_str();

    SmoothOptions smooth;
    auto* s_smooth = app.add_subcommand("smooth", "Loess-smooth a year,value series");
    s_smooth->add_option("--input", smooth.input)->required();
    s_smooth->add_option("--span", smooth.span)->capture_default_str();
    s_smooth->add_option("--label", smooth.label)->capture_default_str();
    s_smooth->add_option("-o,--output-dir", smooth.output_dir)->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (s_screen->parsed()) return cmd_screen(screen);
        if (s_recon->parsed()) return cmd_reconstruct(recon);
        if (s_ens->parsed()) return cmd_ensemble(ens);
        if (s_bench->parsed()) return cmd_benchmark(bench);
        if (s_val->parsed()) return cmd_validate(val);
        if (s_smooth->parsed()) return cmd_smooth(smooth);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const NumericalError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kInternal;
}

}  // namespace paleo::cli
