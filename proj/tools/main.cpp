// hawkesfit command line: simulate Hawkes event streams, build least-squares
// systems, fit and select piecewise-constant intensity models, run the
// Monte Carlo benchmark, and sanity-check spectral quantities.
//
// Exit codes: 0 success, 1 usage error, 2 bad input data, 3 numeric failure
// (partial outputs, if any, are left on disk). Errors go to stderr as a
// single JSON line.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "hawkes/hawkes.hpp"

namespace {

using namespace hawkes;

// --- shared option bundles -------------------------------------------------

struct TruthArgs {
    std::string truth = "f1";
    std::string kernel_csv;
    double nu = 0.001;
    double scale = 1.0;

    GroundTruth resolve() const {
        if (!kernel_csv.empty()) {
            GroundTruth tr;
            tr.nu = nu;
            tr.kernel = load_kernel_csv(kernel_csv).scaled(scale);
            tr.validate();
            return tr;
        }
        return builtin_truth(truth, nu, scale);
    }
};

void add_truth_args(CLI::App* cmd, TruthArgs& t) {
    cmd->add_option("--truth", t.truth, "builtin kernel: f1, f2 or f3")
        ->check(CLI::IsMember({"f1", "f2", "f3"}));
    cmd->add_option("--kernel-csv", t.kernel_csv,
                    "custom step kernel, lines of left,right,value (overrides --truth)");
    cmd->add_option("--nu", t.nu, "baseline rate")->check(CLI::PositiveNumber);
    cmd->add_option("--scale", t.scale, "kernel scale factor c");
}

struct LoadArgs {
    std::string events_path;
    double lower = std::nan("");
    double upper = std::nan("");
    std::string keep_duplicates;  // empty = collapse, "jitter:<eps>" = jitter

    // fallback_lower covers the standard layout where history is observed on
    // [-A, 0): unless --lower is given, the window starts at -A, not at the
    // first event.
    EventSequence load(double fallback_lower = std::nan("")) const {
        LoadOptions opt;
        opt.lower = std::isnan(lower) ? fallback_lower : lower;
        opt.upper = upper;
        if (!keep_duplicates.empty()) {
            if (keep_duplicates.rfind("jitter:", 0) != 0)
                throw DataError("--keep-duplicates: expected jitter:<eps>");
            opt.duplicates = LoadOptions::Duplicates::jitter;
            opt.jitter_eps = std::stod(keep_duplicates.substr(7));
            require(opt.jitter_eps > 0.0, "--keep-duplicates: eps must be > 0");
        }
        LoadResult res = load_events(events_path, opt);
        if (res.n_duplicates > 0)
            std::fprintf(stderr, "{\"warning\":\"%ld duplicate timestamps %s\"}\n",
                         res.n_duplicates,
                         opt.duplicates == LoadOptions::Duplicates::collapse ? "collapsed"
                                                                             : "jittered");
        return res.events;
    }
};

void add_load_args(CLI::App* cmd, LoadArgs& l) {
    cmd->add_option("--events", l.events_path, "event timestamp file, one per line")->required();
    cmd->add_option("--lower", l.lower, "observation window start (default: first event)");
    cmd->add_option("--upper", l.upper, "observation window end (default: last event)");
    cmd->add_option("--keep-duplicates", l.keep_duplicates,
                    "duplicate policy jitter:<eps> (default: collapse)");
}

std::pair<double, double> parse_pair(const std::string& s, const char* flag) {
    const auto colon = s.find(':');
    if (colon == std::string::npos)
        throw DataError(std::string(flag) + ": expected <lo>:<hi>");
    try {
        return {std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1))};
    } catch (const std::exception&) {
        throw DataError(std::string(flag) + ": bad number in '" + s + "'");
    }
}

ClipBounds parse_clip(const std::string& s) {
    const auto c1 = s.find(':');
    const auto c2 = s.find(':', c1 == std::string::npos ? s.size() : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
        throw DataError("--clip: expected <rho>:<eta>:<H>");
    ClipBounds cb;
    try {
        cb.rho = std::stod(s.substr(0, c1));
        cb.eta = std::stod(s.substr(c1 + 1, c2 - c1 - 1));
        cb.H = std::stod(s.substr(c2 + 1));
    } catch (const std::exception&) {
        throw DataError("--clip: bad number in '" + s + "'");
    }
    cb.validate();
    return cb;
}

void emit(const json& j, const std::string& out_path) {
    if (out_path.empty() || out_path == "-")
        std::cout << j.dump(2) << "\n";
    else
        write_text_file(out_path, j.dump(2) + "\n");
}

// --- subcommands -------------------------------------------------------------

struct SimulateCmd {
    TruthArgs truth;
    double T = 100000.0;
    double burn_in = -1.0;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;
    std::string method = "auto";
    std::string out;

    int run() const {
        GroundTruth tr = truth.resolve();
        SimConfig cfg;
        cfg.horizon = T;
        cfg.burn_in = burn_in;
        cfg.seed = seed;
        cfg.stream = stream;
        cfg.method = method == "cluster"    ? SimConfig::Method::cluster
                     : method == "thinning" ? SimConfig::Method::thinning
                                            : SimConfig::Method::auto_select;
        EventSequence ev = simulate(tr, cfg);
        if (!out.empty()) save_events(out, ev);
        json j;
        j["n_events"] = static_cast<long>(ev.size());
        j["expected_events"] = tr.branching() < 1.0 ? expected_count(tr, T) : std::nan("");
        j["window"] = {{"lower", ev.lower()}, {"upper", ev.upper()}};
        j["seed"] = seed;
        j["stream"] = stream;
        if (!out.empty()) j["out"] = out;
        std::cout << j.dump(2) << "\n";
        return 0;
    }
};

struct GramCmd {
    LoadArgs load;
    double A = 1000.0;
    int gamma_size = 15;
    std::string window;  // "start:end", empty = maximal
    std::string format = "json";
    std::string out;

    int run() const {
        EventSequence ev = load.load(-A);
        auto cells = regular_cells(A, gamma_size);
        FitWindow w{ev.lower() + A, ev.upper(), 0.0};
        if (!window.empty()) std::tie(w.start, w.end) = parse_pair(window, "--window");
        w.norm = w.end - w.start;
        GramSystem gs = build_gram(ev, cells, w);
        if (format == "csv") {
            const std::string base = out.empty() ? "gram" : out;
            write_text_file(base + "_X.csv", gram_matrix_csv(gs));
            write_text_file(base + "_b.csv", gram_vector_csv(gs));
            json j;
            j["X"] = base + "_X.csv";
            j["b"] = base + "_b.csv";
            j["n_window"] = gs.n_window;
            std::cout << j.dump(2) << "\n";
        } else {
            emit(gram_to_json(gs), out);
        }
        return 0;
    }
};

struct FitCmd {
    LoadArgs load;
    double A = 1000.0;
    int gamma_size = 15;
    std::string out;

    int run() const {
        EventSequence ev = load.load(-A);
        auto cells = regular_cells(A, gamma_size);
        FitWindow w{ev.lower() + A, ev.upper(), ev.upper() - (ev.lower() + A)};
        GramSystem gs = build_gram(ev, cells, w);
        Estimator est = fit_model(reduce_to_model(gs, full_model(cells)));
        emit(estimator_to_json(est), out);
        return 0;
    }
};

struct SelectCmd {
    LoadArgs load;
    double A = 1000.0;
    int method = 1;
    int gamma_size = 15;
    int regular_size = -1;
    double T = -1.0;
    std::string regression_range;
    bool through_origin = false;
    double kappa = 0.0;
    double Q = 0.0;
    bool force_large = false;
    bool holdout_normalize_window = false;
    int threads = 1;
    std::string clip;
    std::string out;
    std::string curve_out;

    int run() const {
        EventSequence ev = load.load(-A);
        MethodOptions opt;
        opt.gamma_size = gamma_size;
        opt.regular_size = regular_size;
        opt.T = T;
        if (!regression_range.empty()) {
            auto [lo, hi] = parse_pair(regression_range, "--regression-range");
            opt.regression_range = {static_cast<int>(lo), static_cast<int>(hi)};
        }
        opt.through_origin = through_origin;
        opt.kappa = kappa;
        opt.Q = Q;
        opt.force_large = force_large;
        opt.holdout_normalize_window = holdout_normalize_window;
        opt.threads = threads;
        if (!clip.empty()) opt.clip = parse_clip(clip);
        SelectionReport rep = run_method(method, ev, A, opt);
        for (const std::string& wmsg : rep.warnings)
            std::fprintf(stderr, "{\"warning\":\"%s\"}\n", wmsg.c_str());
        if (!curve_out.empty()) write_text_file(curve_out, curve_to_csv(rep));
        emit(selection_report_to_json(rep), out);
        return 0;
    }
};

struct BenchCmd {
    std::string config;
    std::string out_dir = ".";
    int threads = 0;  // 0 = take from config

    int run() const {
        ScenarioGrid grid = parse_scenario_config(config);
        require(!grid.scenarios.empty(), "bench: no scenarios in config");
        std::filesystem::create_directories(out_dir);
        json reports = json::array();
        std::string curves_csv =
            "scenario,method,dimension,contrast,penalty,penalized\n";
        std::string hist_csv = "scenario,method,dimension,count\n";
        const std::string report_path = out_dir + "/risk_report.json";
        const std::string curves_path = out_dir + "/contrast_curves.csv";
        const std::string hist_path = out_dir + "/dimension_histogram.csv";
        auto flush = [&] {
            write_text_file(report_path, reports.dump(2) + "\n");
            write_text_file(curves_path, curves_csv);
            write_text_file(hist_path, hist_csv);
        };
        for (Scenario sc : grid.scenarios) {
            if (threads > 0) sc.threads = threads;
            if (sc.id.empty()) sc.id = sc.make_id();
            std::fprintf(stderr, "{\"scenario\":\"%s\",\"status\":\"running\"}\n", sc.id.c_str());
            try {
                RiskReport rep = run_scenario(sc);
                reports.push_back(risk_report_to_json(rep));
                char buf[256];
                for (const CurveRow& row : rep.first_replicate_curves) {
                    std::snprintf(buf, sizeof(buf), "%s,%d,%d,%.17g,%.17g,%.17g\n", sc.id.c_str(),
                                  row.method, row.dim, row.contrast, row.penalty, row.penalized);
                    curves_csv += buf;
                }
                for (const MethodSummary& ms : rep.methods) {
                    for (const auto& [dim, count] : ms.dim_histogram) {
                        std::snprintf(buf, sizeof(buf), "%s,%d,%d,%ld\n", sc.id.c_str(),
                                      ms.method, dim, count);
                        hist_csv += buf;
                    }
                }
                flush();
            } catch (...) {
                flush();  // keep everything finished so far
                throw;
            }
        }
        json done;
        done["scenarios"] = reports.size();
        done["risk_report"] = report_path;
        done["contrast_curves"] = curves_path;
        done["dimension_histogram"] = hist_path;
        std::cout << done.dump(2) << "\n";
        return 0;
    }
};

struct ValidateCmd {
    TruthArgs truth;
    std::string g_csv;   // candidate kernel for the second-moment check
    double g_mu = 0.0;   // candidate baseline for the Monte Carlo band
    double T = 0.0;      // >0 enables the Monte Carlo check
    int reps = 50;
    std::uint64_t seed = 1;
    std::string out;

    int run() const {
        GroundTruth tr = truth.resolve();
        tr.validate();
        json j;
        j["nu"] = tr.nu;
        j["branching"] = tr.branching();
        j["branching_abs"] = tr.branching_abs();
        j["mean_intensity"] = mean_intensity(tr);
        j["expected_events_per_unit_time"] = mean_intensity(tr);
        if (kernel_nonneg(tr.kernel) && tr.branching() < 1.0) {
            NormConstants nc = norm_constants(tr);
            j["L2"] = nc.L2;
            j["K2"] = nc.K2;
        }
        if (!g_csv.empty()) {
            StepFunction g = load_kernel_csv(g_csv);
            if (std::holds_alternative<StepFunction>(tr.kernel)) {
                SecondMomentResult sm = second_moment_exact(g, tr);
                j["second_moment"] = {{"value", sm.value},
                                      {"error", sm.error},
                                      {"upper_bound", sm.upper_bound},
                                      {"mean_part", sm.mean_part},
                                      {"cutoff", sm.cutoff}};
            } else {
                j["second_moment"] = nullptr;
                std::fprintf(stderr,
                             "{\"warning\":\"second moment needs a step ground truth; skipped\"}\n");
            }
            if (T > 0.0) {
                Candidate f{g_mu, g};
                DtBandReport band = dt_expectation_check(f, tr, T, reps, seed);
                j["dt_check"] = {{"mc_mean", band.mc_mean},   {"mc_se", band.mc_se},
                                 {"band_lo", band.band_lo},   {"band_hi", band.band_hi},
                                 {"norm_sq", band.norm_sq},   {"reps", band.reps},
                                 {"inside", band.inside}};
            }
        }
        emit(j, out);
        return 0;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hawkesfit: simulation and adaptive least-squares estimation "
                 "of self-exciting point processes"};
    app.require_subcommand(1);

    SimulateCmd sim;
    auto* sim_cmd = app.add_subcommand("simulate", "draw one event stream from a ground truth");
    add_truth_args(sim_cmd, sim.truth);
    sim_cmd->add_option("--T", sim.T, "observation horizon")->check(CLI::PositiveNumber);
    sim_cmd->add_option("--burn-in", sim.burn_in, "warm-up length (-1: automatic)");
    sim_cmd->add_option("--seed", sim.seed, "RNG seed");
    sim_cmd->add_option("--stream", sim.stream, "RNG stream (replicate index)");
    sim_cmd->add_option("--method", sim.method, "cluster, thinning or auto")
        ->check(CLI::IsMember({"auto", "cluster", "thinning"}));
    sim_cmd->add_option("--out", sim.out, "write timestamps to this file");

    GramCmd gram;
    auto* gram_cmd =
        app.add_subcommand("gram", "build the least-squares system on a regular grid");
    add_load_args(gram_cmd, gram.load);
    gram_cmd->add_option("--A", gram.A, "kernel support length")->check(CLI::PositiveNumber);
    gram_cmd->add_option("--gamma-size", gram.gamma_size, "number of grid cells")
        ->check(CLI::PositiveNumber);
    gram_cmd->add_option("--window", gram.window, "fit window <start>:<end> (default: maximal)");
    gram_cmd->add_option("--format", gram.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    gram_cmd->add_option("--out", gram.out, "output file (json) or prefix (csv)");

    FitCmd fit;
    auto* fit_cmd = app.add_subcommand("fit", "least-squares fit on the full regular grid");
    add_load_args(fit_cmd, fit.load);
    fit_cmd->add_option("--A", fit.A, "kernel support length")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--gamma-size", fit.gamma_size, "number of grid cells")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--out", fit.out, "estimator JSON output (default: stdout)");

    SelectCmd sel;
    auto* sel_cmd = app.add_subcommand("select", "adaptive model selection, methods 1-8");
    add_load_args(sel_cmd, sel.load);
    sel_cmd->add_option("--A", sel.A, "kernel support length")->check(CLI::PositiveNumber);
    sel_cmd->add_option("--method", sel.method, "selection method 1-8")
        ->check(CLI::Range(1, 8));
    sel_cmd->add_option("--gamma-size", sel.gamma_size, "base grid size")
        ->check(CLI::PositiveNumber);
    sel_cmd->add_option("--regular-size", sel.regular_size,
                        "grid size for regular-family methods (default: --gamma-size)");
    sel_cmd->add_option("--T", sel.T, "horizon override (default: events upper bound)");
    sel_cmd->add_option("--regression-range", sel.regression_range,
                        "slope-regression dimensions <lo>:<hi>");
    sel_cmd->add_flag("--through-origin", sel.through_origin,
                      "calibrate the minimal penalty without an offset term");
    sel_cmd->add_option("--kappa", sel.kappa, "theoretical penalty constant");
    sel_cmd->add_option("--Q", sel.Q, "theoretical penalty intensity bound");
    sel_cmd->add_flag("--force-large-gamma", sel.force_large,
                      "allow exponential families beyond 26 cells");
    sel_cmd->add_flag("--holdout-normalize-window", sel.holdout_normalize_window,
                      "normalize hold-out halves by their own lengths");
    sel_cmd->add_option("--threads", sel.threads, "worker threads")->check(CLI::PositiveNumber);
    sel_cmd->add_option("--clip", sel.clip, "clamp nu into [rho,eta] and h into [0,H]: <rho>:<eta>:<H>");
    sel_cmd->add_option("--out", sel.out, "selection report JSON (default: stdout)");
    sel_cmd->add_option("--curve-out", sel.curve_out, "contrast curve CSV");

    auto* ho_cmd = app.add_subcommand("holdout", "hold-out selection (alias for methods 6-8)");
    SelectCmd ho;
    ho.method = 6;
    std::string ho_strategy = "regular";
    add_load_args(ho_cmd, ho.load);
    ho_cmd->add_option("--A", ho.A, "kernel support length")->check(CLI::PositiveNumber);
    ho_cmd->add_option("--strategy", ho_strategy, "regular, irregular or islands")
        ->check(CLI::IsMember({"regular", "irregular", "islands"}));
    ho_cmd->add_option("--gamma-size", ho.gamma_size, "base grid size")
        ->check(CLI::PositiveNumber);
    ho_cmd->add_option("--regular-size", ho.regular_size,
                       "grid size when --strategy regular (default: --gamma-size)");
    ho_cmd->add_option("--T", ho.T, "horizon override (default: events upper bound)");
    ho_cmd->add_flag("--force-large-gamma", ho.force_large,
                     "allow exponential families beyond 26 cells");
    ho_cmd->add_flag("--normalize-window", ho.holdout_normalize_window,
                     "normalize hold-out halves by their own lengths");
    ho_cmd->add_option("--threads", ho.threads, "worker threads")->check(CLI::PositiveNumber);
    ho_cmd->add_option("--clip", ho.clip, "clamp nu into [rho,eta] and h into [0,H]: <rho>:<eta>:<H>");
    ho_cmd->add_option("--out", ho.out, "selection report JSON (default: stdout)");
    ho_cmd->add_option("--curve-out", ho.curve_out, "score curve CSV");

    BenchCmd bench;
    auto* bench_cmd = app.add_subcommand("bench", "Monte Carlo risk benchmark over scenarios");
    bench_cmd->add_option("--config", bench.config, "scenario config file (key = value)")
        ->required();
    bench_cmd->add_option("--out-dir", bench.out_dir, "output directory (default: .)");
    bench_cmd->add_option("--threads", bench.threads, "override worker threads");

    ValidateCmd val;
    auto* val_cmd = app.add_subcommand(
        "validate", "report spectral constants and check moment identities");
    add_truth_args(val_cmd, val.truth);
    val_cmd->add_option("--g-csv", val.g_csv, "candidate step kernel for the moment checks");
    val_cmd->add_option("--g-mu", val.g_mu, "candidate baseline for the Monte Carlo band");
    val_cmd->add_option("--T", val.T, "Monte Carlo horizon (0: skip the simulation check)");
    val_cmd->add_option("--reps", val.reps, "Monte Carlo replicates")->check(CLI::PositiveNumber);
    val_cmd->add_option("--seed", val.seed, "RNG seed");
    val_cmd->add_option("--out", val.out, "report JSON (default: stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*sim_cmd) return sim.run();
        if (*gram_cmd) return gram.run();
        if (*fit_cmd) return fit.run();
        if (*sel_cmd) return sel.run();
        if (*ho_cmd) {
            ho.method = ho_strategy == "regular" ? 6 : ho_strategy == "irregular" ? 7 : 8;
            return ho.run();
        }
        if (*bench_cmd) return bench.run();
        if (*val_cmd) return val.run();
    } catch (const hawkes::DataError& e) {
        hawkes::json err;
        err["error"] = e.what();
        err["type"] = "data";
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const hawkes::NumericError& e) {
        hawkes::json err;
        err["error"] = e.what();
        err["type"] = "numeric";
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const std::exception& e) {
        hawkes::json err;
        err["error"] = e.what();
        err["type"] = "internal";
        std::cerr << err.dump() << "\n";
        return 3;
    }
    return 0;
}
