// Command-line front end: calibrate, detect, simulate, analyze, forecast.
//
// Every run writes its artifacts plus manifest.json into --out-dir. The
// manifest records the argument vector, so `snnot --replay manifest.json`
// reproduces the artifacts byte for byte.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#ifdef SNNOT_HAVE_OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"
#include "snnot/analysis.hpp"
#include "snnot/calibration.hpp"
#include "snnot/errors.hpp"
#include "snnot/forecast.hpp"
#include "snnot/ingest.hpp"
#include "snnot/simulation.hpp"

#ifndef SNNOT_VERSION
#define SNNOT_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace snnot;

namespace {

enum Exit : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kArgument = 3,
    kConfiguration = 4,
    kNotFound = 5,
    kIo = 6,
    kNumerical = 7,
};

struct Common {
    double epsilon = 0.1;
    double delta = 0.02;
    int p = 1;
    int M = 300;
    int B = 1000;
    std::uint64_t seed = 1;
    double level = 0.95;
    std::string out_dir = ".";
    int threads = 0;
    bool serial = false;

    SNConfig cfg() const { return {epsilon, delta, p}; }
    Execution ex() const { return serial ? Execution::serial : Execution::parallel; }
};

struct Input {
    std::string series;
    std::string csv;
    std::vector<std::string> countries;
    std::string measure = "deaths";
    double start_threshold = 20.0;
    std::string end_date;
};

struct NamedSeries {
    std::string name;
    TimeSeries series;
    json meta;
};

void add_trimming(CLI::App* app, Common& c) {
    app->add_option("--epsilon", c.epsilon, "global trimming fraction")->capture_default_str();
    app->add_option("--delta", c.delta, "local trimming fraction")->capture_default_str();
    app->add_option("--p", c.p, "polynomial order of the trend")->capture_default_str();
}

void add_run(CLI::App* app, Common& c) {
    app->add_option("--seed", c.seed, "random seed")->capture_default_str();
    app->add_option("--out-dir", c.out_dir, "directory for artifacts")->capture_default_str();
    app->add_option("--threads", c.threads, "OpenMP worker count (0 = runtime default)");
    app->add_flag("--serial", c.serial, "run the serial reference kernels");
}

void add_detection(CLI::App* app, Common& c) {
    app->add_option("--M", c.M, "number of random intervals")->capture_default_str();
    app->add_option("--B", c.B, "Monte Carlo replicates for the threshold")->capture_default_str();
    app->add_option("--threshold-level", c.level, "quantile level of the threshold")->capture_default_str();
}

void add_input(CLI::App* app, Input& in) {
    auto* s = app->add_option("--input", in.series, "plain series file (one value per line or date,value)");
    auto* c = app->add_option("--csv", in.csv, "CSV with date, location, total_cases, total_deaths");
    s->excludes(c);
    app->add_option("--country", in.countries, "location to extract from --csv");
    app->add_option("--measure", in.measure, "cases or deaths")->check(CLI::IsMember({"cases", "deaths"}));
    app->add_option("--start-threshold", in.start_threshold, "start once the count exceeds this")
        ->capture_default_str();
    app->add_option("--end-date", in.end_date, "last date kept (YYYY-MM-DD)");
}

json config_json(const Common& c) {
    return {{"epsilon", c.epsilon}, {"delta", c.delta}, {"p", c.p}, {"M", c.M}, {"B", c.B},
            {"seed", c.seed},       {"threshold_level", c.level}};
}

std::vector<NamedSeries> load(const Input& in) {
    std::vector<NamedSeries> out;
    if (!in.series.empty()) {
        out.push_back({fs::path(in.series).stem().string(), read_series(fs::path(in.series)), json::object()});
        out.back().meta["source"] = in.series;
        return out;
    }
    if (in.csv.empty()) throw ArgumentError("one of --input or --csv is required");
    if (in.countries.empty()) throw ArgumentError("--csv needs at least one --country");
    IngestOptions o;
    o.measure = parse_measure(in.measure);
    o.threshold = in.start_threshold;
    if (!in.end_date.empty()) o.end_date = parse_date(in.end_date);
    for (const auto& country : in.countries) {
        o.country = country;
        auto a = ingest_csv(fs::path(in.csv), o);
        json meta{{"source", in.csv},
                  {"country", country},
                  {"measure", in.measure},
                  {"start_threshold", in.start_threshold},
                  {"start_date", format_date(a.start_date)},
                  {"carried_forward", a.carried_forward},
                  {"warnings", a.warnings}};
        if (!in.end_date.empty()) meta["end_date"] = in.end_date;
        out.push_back({country, std::move(a.series), std::move(meta)});
    }
    return out;
}

std::string label_of(const TimeSeries& s, int t) {
    return s.has_labels() ? format_date(s.label(t)) : std::to_string(t);
}

DetectOptions detect_options(const Common& c, std::optional<double> zeta) {
    DetectOptions o;
    o.cfg = c.cfg();
    o.M = c.M;
    o.B = c.B;
    o.level = c.level;
    o.seed = c.seed;
    o.zeta = zeta;
    return o;
}

json detection_json(const TimeSeries& s, const DetectRun& run) {
    json tau = json::array(), labels = json::array(), dets = json::array(), segs = json::array();
    for (int t : run.result.tau_hat) {
        tau.push_back(t);
        labels.push_back(label_of(s, t));
    }
    for (const auto& d : run.result.detections) {
        dets.push_back({{"tau", d.tau}, {"s", d.interval.s}, {"e", d.interval.e}, {"statistic", d.statistic}});
    }
    for (const auto& iv : segments_from(run.result.tau_hat, s.length())) {
        segs.push_back({{"start", iv.s}, {"end", iv.e}, {"start_label", label_of(s, iv.s)},
                        {"end_label", label_of(s, iv.e)}});
    }
    return {{"n", s.length()}, {"m_hat", run.result.m_hat}, {"tau_hat", tau}, {"tau_labels", labels},
            {"zeta", run.zeta}, {"detections", dets}, {"segments", segs}};
}

void write_text(const fs::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << body;
    if (!out) throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string fmt(double v) {
    if (!std::isfinite(v)) return "nan";
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------- commands

json run_calibrate(const Common& c, int replications, int grid_n, const std::vector<double>& levels) {
    QuantileRequest req;
    req.epsilon = c.epsilon;
    req.delta = c.delta;
    req.p = c.p;
    req.replications = replications;
    req.grid_n = grid_n;
    req.levels = levels;
    const auto g = null_max_stats(req, c.seed, c.ex());
    json rows = json::array();
    std::string csv = "level,value,standard_error,published\n";
    for (double lv : levels) {
        const double q = sample_quantile(g, lv);
        const double se = quantile_standard_error(g, lv);
        const auto pub = published_quantile(c.epsilon, c.delta, lv);
        rows.push_back({{"level", lv}, {"value", q}, {"standard_error", se},
                        {"published", pub ? json(*pub) : json(nullptr)}});
        csv += fmt(lv) + "," + fmt(q) + "," + fmt(se) + "," + (pub ? fmt(*pub) : std::string()) + "\n";
    }
    json out{{"epsilon", c.epsilon}, {"delta", c.delta}, {"p", c.p},
             {"grid_n", grid_n},     {"replications", replications}, {"seed", c.seed},
             {"quantiles", rows}};
    write_json(fs::path(c.out_dir) / "quantiles.json", out);
    write_text(fs::path(c.out_dir) / "quantiles.csv", csv);
    return out;
}

json run_detect(const Common& c, const Input& in, std::optional<double> zeta) {
    json all = json::array();
    for (const auto& ns : load(in)) {
        const auto run = detect(ns.series, detect_options(c, zeta), c.ex());
        json j = detection_json(ns.series, run);
        j["name"] = ns.name;
        j["input"] = ns.meta;
        all.push_back(std::move(j));
    }
    json out = all.size() == 1 ? all[0] : json{{"series", all}};
    write_json(fs::path(c.out_dir) / "detect.json", out);
    return out;
}

json run_analyze(const Common& c, const Input& in, std::optional<double> zeta, int max_lag) {
    json countries = json::array();
    std::string seg_csv = "name,segment,start,end,start_label,end_label,normalized_slope,degenerate\n";
    std::string plot = "x,y,group\n";
    std::string scatter = "x,y,group\n";
    for (const auto& ns : load(in)) {
        const auto& s = ns.series;
        const auto run = detect(s, detect_options(c, zeta), c.ex());
        const auto fits = fit_segments(s, run.result.tau_hat, c.p);
        const auto resid = pooled_residuals(s, fits);
        const auto sum = country_summary(fits, resid);

        json segs = json::array();
        std::vector<std::string> warnings;
        for (std::size_t i = 0; i < fits.size(); ++i) {
            const auto& f = fits[i];
            segs.push_back({{"start", f.start}, {"end", f.end}, {"start_label", label_of(s, f.start)},
                            {"end_label", label_of(s, f.end)}, {"coefficients", std::vector<double>(
                                f.coefficients.coeffs().begin(), f.coefficients.coeffs().end())},
                            {"normalized_slope", f.normalized_slope}, {"degenerate", f.degenerate}});
            if (f.degenerate) warnings.push_back(f.warning);
            seg_csv += "\"" + ns.name + "\"," + std::to_string(i + 1) + "," + std::to_string(f.start) + "," +
                       std::to_string(f.end) + "," + label_of(s, f.start) + "," + label_of(s, f.end) + "," +
                       fmt(f.normalized_slope) + "," + (f.degenerate ? "1" : "0") + "\n";
            for (int t = f.start; t <= f.end; ++t) {
                plot += std::to_string(t) + "," + fmt(f.coefficients.evaluate(static_cast<double>(t) / s.length())) +
                        ",\"" + ns.name + ":fit\"\n";
            }
        }
        for (int t = 1; t <= s.length(); ++t) {
            plot += std::to_string(t) + "," + fmt(s.at(t)) + ",\"" + ns.name + ":observed\"\n";
        }

        json summary{{"s_first", sum.s_first},
                     {"s_max", sum.s_max},
                     {"s_cur", sum.s_cur},
                     {"ratio", sum.ratio ? json(*sum.ratio) : json(nullptr)},
                     {"ratio_undefined", !sum.ratio.has_value()},
                     {"max_segment", sum.max_segment + 1},
                     {"days_between", sum.days_between},
                     {"rho_hat", sum.rho_hat ? json(*sum.rho_hat) : json(nullptr)}};
        if (!run.result.tau_hat.empty()) summary["first_change_point"] = label_of(s, run.result.tau_hat.front());
        if (sum.ratio) scatter += fmt(sum.days_between) + "," + fmt(*sum.ratio) + ",\"" + ns.name + "\"\n";

        json corr = nullptr;
        const int lag = std::min(max_lag, static_cast<int>(resid.size()) - 1);
        if (lag >= 1) {
            try {
                const auto cg = acf_pacf(resid, lag);
                corr = {{"max_lag", lag}, {"band", 1.96 / std::sqrt(static_cast<double>(resid.size()))},
                        {"acf", cg.acf}, {"pacf", cg.pacf}};
                for (int k = 1; k <= lag; ++k) {
                    plot += std::to_string(k) + "," + fmt(cg.acf[k - 1]) + ",\"" + ns.name + ":acf\"\n";
                    plot += std::to_string(k) + "," + fmt(cg.pacf[k - 1]) + ",\"" + ns.name + ":pacf\"\n";
                }
            } catch (const ArgumentError& e) {
                warnings.emplace_back(e.what());
            }
        }
        json det = detection_json(s, run);
        countries.push_back({{"name", ns.name},
                             {"input", ns.meta},
                             {"detection", det},
                             {"segments", segs},
                             {"summary", summary},
                             {"residual_correlogram", corr},
                             {"warnings", warnings}});
    }
    json out{{"config", config_json(c)}, {"series", countries}};
    write_json(fs::path(c.out_dir) / "analyze.json", out);
    write_text(fs::path(c.out_dir) / "segments.csv", seg_csv);
    write_text(fs::path(c.out_dir) / "plot_data.csv", plot);
    write_text(fs::path(c.out_dir) / "summary_scatter.csv", scatter);
    return out;
}

json run_forecast(const Common& c, const Input& in, const std::string& method_name, int k,
                  const std::string& truth_file, std::optional<double> zeta) {
    const std::map<std::string, Method> methods{
        {"snl", Method::snl}, {"snq", Method::snq}, {"snlg", Method::snlg}, {"logistic", Method::logistic}};
    const Method method = methods.at(method_name);
    auto inputs = load(in);
    if (inputs.size() != 1) throw ArgumentError("forecast takes exactly one series");
    const auto& s = inputs[0].series;
    auto r = forecast_pipeline(s, detect_options(c, zeta), method, k, c.ex());
    if (!truth_file.empty()) {
        const auto truth = read_series(fs::path(truth_file));
        attach_truth(r.forecast, truth.at(1));
    }
    json out{{"family", method_name},
             {"extrapolant", to_string(r.fit.family)},
             {"k", k},
             {"n", s.length()},
             {"y_hat", r.forecast.y_hat},
             {"count_hat", r.forecast.count_hat},
             {"count_rounded", r.forecast.count_rounded},
             {"rounding", "half-up"},
             {"relative_error", r.forecast.relative_error ? json(*r.forecast.relative_error) : json(nullptr)},
             {"fit", {{"window_start", r.fit.window_start},
                      {"window_end", r.fit.window_end},
                      {"parameters", r.fit.parameters},
                      {"converged", r.fit.converged},
                      {"sse", r.fit.sse}}},
             {"fell_back", r.fell_back},
             {"warnings", r.warnings},
             {"input", inputs[0].meta}};
    if (r.detection) out["detection"] = detection_json(s, *r.detection);
    write_json(fs::path(c.out_dir) / "forecast.json", out);
    return out;
}

json run_simulate(const Common& c, const std::string& table, int n, int reps, const std::vector<double>& rhos,
                  const std::vector<double>& alphas, double sigma) {
    std::ostringstream csv;
    json out;
    if (table == "size-power") {
        const auto t = run_size_power(n, rhos, alphas, reps, c.seed, c.ex());
        write_csv(csv, t);
        json cells = json::array();
        for (const auto& cell : t.cells) {
            cells.push_back({{"alpha", cell.alpha}, {"rho", cell.rho}, {"size", cell.size}, {"power", cell.power},
                             {"critical_value", cell.critical_value}, {"null_quantile", cell.null_quantile}});
        }
        out = {{"table", table}, {"n", n}, {"replications", reps}, {"seed", c.seed}, {"cells", cells}};
        write_text(fs::path(c.out_dir) / "size_power.csv", csv.str());
    } else {
        MultiCpOptions o;
        o.cfg = c.cfg();
        o.M = c.M;
        o.B = c.B;
        o.level = c.level;
        o.sigma = sigma;
        const auto t = run_multi_cp(reps, rhos, c.seed, o, c.ex());
        write_csv(csv, t);
        json rows = json::array();
        for (const auto& r : t.rows) {
            rows.push_back({{"rho", r.rho}, {"ari", r.ari}, {"d1", r.d1}, {"d2", r.d2}, {"dH", r.dH},
                            {"m_exact", r.m_exact}, {"m_off_one", r.m_off_one}, {"m_off_more", r.m_off_more}});
        }
        out = {{"table", table}, {"replications", reps}, {"seed", c.seed}, {"mean_zeta", t.mean_zeta}, {"rows", rows}};
        write_text(fs::path(c.out_dir) / "multi_cp.csv", csv.str());
    }
    write_json(fs::path(c.out_dir) / "simulate.json", out);
    return out;
}

// ---------------------------------------------------------------- driver

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ArgumentError*>(&e)) return kArgument;
    if (dynamic_cast<const ConfigurationError*>(&e)) return kConfiguration;
    if (dynamic_cast<const NotFoundError*>(&e)) return kNotFound;
    if (dynamic_cast<const IoError*>(&e)) return kIo;
    if (dynamic_cast<const Error*>(&e)) return kNumerical;
    return kFailure;
}

int run(std::vector<std::string> args) {
    CLI::App app{"Self-normalized change-point detection for piecewise polynomial trends", "snnot"};
    app.set_version_flag("--version", SNNOT_VERSION);
    std::string replay, replay_out;
    app.add_option("--replay", replay, "re-run the command recorded in a manifest");
    app.add_option("--replay-out-dir", replay_out, "write the replayed artifacts here instead")->needs("--replay");

    Common c;
    Input in;
    std::optional<double> zeta;

    auto* cal = app.add_subcommand("calibrate", "simulate null quantiles of the maximal statistic");
    int cal_reps = 10000, grid_n = 1000;
    std::vector<double> levels{0.90, 0.95, 0.99, 0.995, 0.999};
    add_trimming(cal, c);
    add_run(cal, c);
    cal->add_option("--replications", cal_reps, "Monte Carlo replicates")->capture_default_str();
    cal->add_option("--grid-n", grid_n, "length of the null series")->capture_default_str();
    cal->add_option("--levels", levels, "quantile levels")->delimiter(',');

    auto* det = app.add_subcommand("detect", "estimate change-points");
    add_trimming(det, c);
    add_run(det, c);
    add_detection(det, c);
    add_input(det, in);
    det->add_option("--zeta", zeta, "use this threshold instead of calibrating one");

    auto* sim = app.add_subcommand("simulate", "size/power or multiple change-point simulation tables");
    std::string table = "size-power";
    int sim_n = 500, sim_reps = 1000;
    double sigma = 0.15;
    std::vector<double> rhos{-0.5, -0.2, 0.0, 0.2, 0.5}, alphas{0.05};
    add_trimming(sim, c);
    add_run(sim, c);
    add_detection(sim, c);
    sim->add_option("--table", table, "size-power or multi-cp")
        ->check(CLI::IsMember({"size-power", "multi-cp"}))
        ->capture_default_str();
    sim->add_option("--n", sim_n, "series length for size-power")->capture_default_str();
    sim->add_option("--replications", sim_reps, "Monte Carlo replicates")->capture_default_str();
    sim->add_option("--rhos", rhos, "AR(1) coefficients")->delimiter(',');
    sim->add_option("--alphas", alphas, "nominal levels for size-power")->delimiter(',');
    sim->add_option("--sigma", sigma, "marginal error sd for multi-cp")->capture_default_str();

    auto* ana = app.add_subcommand("analyze", "segment fits, growth-rate summary and residual correlogram");
    int max_lag = 30;
    add_trimming(ana, c);
    add_run(ana, c);
    add_detection(ana, c);
    add_input(ana, in);
    ana->add_option("--zeta", zeta, "use this threshold instead of calibrating one");
    ana->add_option("--max-lag", max_lag, "largest residual ACF/PACF lag")->capture_default_str();

    auto* fc = app.add_subcommand("forecast", "two-stage extrapolation forecast");
    std::string family = "snlg", truth;
    int horizon = 5;
    add_trimming(fc, c);
    add_run(fc, c);
    add_detection(fc, c);
    add_input(fc, in);
    fc->add_option("--zeta", zeta, "use this threshold instead of calibrating one");
    fc->add_option("--family", family, "snl, snq, snlg or logistic (whole series)")
        ->check(CLI::IsMember({"snl", "snq", "snlg", "logistic"}))
        ->capture_default_str();
    fc->add_option("--horizon", horizon, "days ahead")->check(CLI::PositiveNumber)->capture_default_str();
    fc->add_option("--truth", truth, "file holding the observed count on day n + k");

    app.require_subcommand(0, 1);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    if (!replay.empty()) {
        if (app.get_subcommands().size() > 0) {
            std::cerr << "--replay takes no subcommand\n";
            return kUsage;
        }
        std::ifstream mf(replay);
        if (!mf) {
            std::cerr << "cannot open " << replay << "\n";
            return kIo;
        }
        const auto manifest = json::parse(mf, nullptr, false);
        if (manifest.is_discarded() || !manifest.contains("argv")) {
            std::cerr << replay << " is not a manifest\n";
            return kUsage;
        }
        auto argv = manifest["argv"].get<std::vector<std::string>>();
        // Keep the recorded arguments; only the output directory may move.
        if (!replay_out.empty()) {
            bool replaced = false;
            for (std::size_t i = 0; i + 1 < argv.size(); ++i) {
                if (argv[i] == "--out-dir") {
                    argv[i + 1] = replay_out;
                    replaced = true;
                }
            }
            if (!replaced) {
                argv.push_back("--out-dir");
                argv.push_back(replay_out);
            }
        }
        return run(argv);
    }
    if (app.get_subcommands().empty()) {
        std::cerr << app.help();
        return kUsage;
    }

    auto* sub = app.get_subcommands().front();
#ifdef SNNOT_HAVE_OPENMP
    if (c.threads > 0) omp_set_num_threads(c.threads);
#endif
    try {
        fs::create_directories(c.out_dir);
        json summary;
        const std::string name = sub->get_name();
        if (name == "calibrate") summary = run_calibrate(c, cal_reps, grid_n, levels);
        if (name == "detect") summary = run_detect(c, in, zeta);
        if (name == "simulate") summary = run_simulate(c, table, sim_n, sim_reps, rhos, alphas, sigma);
        if (name == "analyze") summary = run_analyze(c, in, zeta, max_lag);
        if (name == "forecast") summary = run_forecast(c, in, family, horizon, truth, zeta);

        json manifest{{"tool", "snnot"},
                      {"version", SNNOT_VERSION},
                      {"command", name},
                      {"argv", args},
                      {"config", config_json(c)},
                      {"created_utc", utc_now()}};
        write_json(fs::path(c.out_dir) / "manifest.json", manifest);
        std::cout << summary.dump(2) << "\n";
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(std::move(args));
}
