#pragma once

// Serialization: estimator/report JSON (nlohmann), contrast-curve and Gram
// CSV, and the key=value scenario config format used by the bench driver.
// Doubles are emitted by nlohmann's shortest-round-trip writer, so estimator
// JSON reloads bit-exactly.

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <string>

#include "hawkes/bench.hpp"
#include "hawkes/gram.hpp"
#include "hawkes/select.hpp"
#include "hawkes/spectral.hpp"

namespace hawkes {

using nlohmann::json;

inline json estimator_to_json(const Estimator& est, int method = 0,
                              double penalty_constant = 0.0) {
    json j;
    j["nu"] = est.nu_hat;
    j["model"] = json::array();
    for (const Interval& iv : est.model.intervals)
        j["model"].push_back({{"left", iv.left}, {"right", iv.right}});
    j["h"] = json::array();
    const auto& br = est.h_hat.breaks();
    for (std::size_t i = 0; i < est.h_hat.pieces(); ++i)
        j["h"].push_back(
            {{"left", br[i]}, {"right", br[i + 1]}, {"value", est.h_hat.values()[i]}});
    j["contrast"] = est.contrast;
    j["penalty_constant"] = penalty_constant;
    j["method"] = method;
    j["dimension"] = est.dimension();
    if (est.degenerate) j["degenerate"] = true;
    return j;
}

inline Estimator estimator_from_json(const json& j) {
    Estimator est;
    est.nu_hat = j.at("nu").get<double>();
    for (const auto& m : j.at("model"))
        est.model.intervals.push_back({m.at("left").get<double>(), m.at("right").get<double>()});
    std::vector<double> breaks{0.0};
    std::vector<double> values;
    for (const auto& piece : j.at("h")) {
        const double l = piece.at("left").get<double>();
        const double r = piece.at("right").get<double>();
        require(l == breaks.back(), "estimator_from_json: kernel pieces must tile (0, A]");
        breaks.push_back(r);
        values.push_back(piece.at("value").get<double>());
    }
    if (values.empty()) {
        breaks.push_back(1.0);
        values.push_back(0.0);
    }
    est.h_hat = StepFunction(std::move(breaks), std::move(values));
    est.contrast = j.at("contrast").get<double>();
    est.degenerate = j.value("degenerate", false);
    return est;
}

inline json selection_report_to_json(const SelectionReport& rep) {
    json j;
    j["method"] = rep.method;
    j["strategy"] = strategy_name(rep.strategy.kind);
    j["strategy_size"] = rep.strategy.size;
    j["holdout"] = rep.holdout;
    j["dimension"] = rep.dimension();
    if (!rep.holdout) {
        const char* names[] = {"theoretical", "minimal", "angle", "fixed"};
        j["penalty"] = names[static_cast<int>(rep.penalty.type)];
        j["penalty_constant"] = rep.penalty.coefficient;
    }
    j["estimator"] = estimator_to_json(rep.estimator, rep.method,
                                       rep.holdout ? 0.0 : rep.penalty.coefficient);
    j["curve"] = json::array();
    for (int d = 0; d <= rep.curve.max_dim(); ++d) {
        const DimRecord& r = rep.curve.at(d);
        if (!r.filled) continue;
        json row;
        row["dimension"] = d + 1;
        row["contrast"] = r.est.contrast;
        if (rep.holdout) {
            row["score"] = rep.penalized[static_cast<std::size_t>(d)];
        } else {
            row["penalty"] = rep.penalty.coefficient * (d + 1.0);
            row["penalized"] = rep.penalized[static_cast<std::size_t>(d)];
        }
        j["curve"].push_back(row);
    }
    if (rep.nonstandard_pairing) j["nonstandard_pairing"] = true;
    if (!rep.warnings.empty()) j["warnings"] = rep.warnings;
    return j;
}

// Columns pinned: dimension (= |m|+1), contrast, penalty, penalized.
inline std::string curve_to_csv(const SelectionReport& rep) {
    std::ostringstream out;
    out << "dimension,contrast,penalty,penalized\n";
    char buf[160];
    for (int d = 0; d <= rep.curve.max_dim(); ++d) {
        const DimRecord& r = rep.curve.at(d);
        if (!r.filled) continue;
        const double pen = rep.holdout ? 0.0 : rep.penalty.coefficient * (d + 1.0);
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", d + 1, r.est.contrast, pen,
                      rep.penalized[static_cast<std::size_t>(d)]);
        out << buf;
    }
    return out.str();
}

inline std::string gram_matrix_csv(const GramSystem& gs) {
    std::ostringstream out;
    char buf[64];
    for (int i = 0; i < gs.X.rows(); ++i) {
        for (int j = 0; j < gs.X.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), j + 1 < gs.X.cols() ? "%.17g," : "%.17g\n", gs.X(i, j));
            out << buf;
        }
    }
    return out.str();
}

inline std::string gram_vector_csv(const GramSystem& gs) {
    std::ostringstream out;
    char buf[64];
    for (int i = 0; i < gs.b.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", gs.b(i));
        out << buf;
    }
    return out.str();
}

inline json gram_to_json(const GramSystem& gs) {
    json j;
    j["cells"] = json::array();
    for (const Interval& c : gs.cells) j["cells"].push_back({{"left", c.left}, {"right", c.right}});
    j["window"] = {{"start", gs.window.start}, {"end", gs.window.end}, {"norm", gs.window.norm}};
    j["n_window"] = gs.n_window;
    j["X"] = json::array();
    for (int i = 0; i < gs.X.rows(); ++i) {
        json row = json::array();
        for (int jj = 0; jj < gs.X.cols(); ++jj) row.push_back(gs.X(i, jj));
        j["X"].push_back(row);
    }
    j["b"] = json::array();
    for (int i = 0; i < gs.b.size(); ++i) j["b"].push_back(gs.b(i));
    return j;
}

inline json method_summary_to_json(const MethodSummary& ms) {
    json j;
    j["method"] = ms.method;
    j["risk"] = ms.risk;
    j["risk_se"] = ms.risk_se;
    j["oracle_risk"] = ms.oracle_risk;
    j["oracle_ratio"] = ms.oracle_ratio;
    j["rescaled_risk"] = ms.rescaled_risk;
    j["mean_dimension"] = ms.mean_dimension;
    j["modal_dimension"] = ms.modal_dimension;
    j["failures"] = ms.failures;
    json hist = json::object();
    for (const auto& [d, c] : ms.dim_histogram) hist[std::to_string(d)] = c;
    j["dim_histogram"] = hist;
    return j;
}

inline json risk_report_to_json(const RiskReport& rep) {
    json j;
    j["scenario"] = {{"id", rep.scenario.id},
                     {"truth", rep.scenario.truth_id},
                     {"scale", rep.scenario.scale},
                     {"nu", rep.scenario.nu},
                     {"T", rep.scenario.T},
                     {"A", rep.scenario.A},
                     {"gamma_size", rep.scenario.gamma_size},
                     {"regular_size", rep.scenario.regular_size},
                     {"replicates", rep.scenario.replicates},
                     {"seed", rep.scenario.seed}};
    j["replicates_done"] = rep.replicates_done;
    j["failures"] = rep.failures;
    j["methods"] = json::array();
    for (const MethodSummary& ms : rep.methods) j["methods"].push_back(method_summary_to_json(ms));
    return j;
}

inline json spectral_report_to_json(const SpectralReport& sr) {
    json j;
    j["mean_intensity"] = sr.mean_intensity;
    j["L2"] = sr.norms.L2;
    j["K2"] = sr.norms.K2;
    if (sr.has_second_moment) {
        j["second_moment"] = sr.second_moment.value;
        j["second_moment_error"] = sr.second_moment.error;
        j["second_moment_upper_bound"] = sr.second_moment.upper_bound;
        j["cutoff"] = sr.second_moment.cutoff;
    }
    return j;
}

// --- scenario config: `key = value` lines, '#' comments, comma lists.
// Keys: truth, nu, c, T, A, gamma, regular, R, methods, seed, burnin, threads.
// nu/c/T accept lists; the driver runs the cross product.

struct ScenarioGrid {
    std::vector<Scenario> scenarios;
};

namespace detail {

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (!std::isspace(static_cast<unsigned char>(ch))) {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw DataError("scenario config: bad number '" + s + "' for key '" + key + "'");
    }
}

}  // namespace detail

inline ScenarioGrid parse_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("scenario config: cannot open '" + path + "'");
    Scenario base;
    std::vector<double> nus{base.nu}, cs{base.scale}, Ts{base.T};
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            if (line.find_first_not_of(" \t\r\n") != std::string::npos)
                throw DataError("scenario config: expected key=value at line " +
                                std::to_string(lineno));
            continue;
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r\n");
            if (b == std::string::npos) return std::string();
            const auto e = s.find_last_not_of(" \t\r\n");
            return s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        require(!key.empty() && !val.empty(),
                "scenario config: empty key or value at line " + std::to_string(lineno));
        if (key == "truth") {
            base.truth_id = val;
        } else if (key == "nu") {
            nus.clear();
            for (const auto& tok : detail::split_csv(val)) nus.push_back(detail::parse_double(tok, key));
        } else if (key == "c") {
            cs.clear();
            for (const auto& tok : detail::split_csv(val)) cs.push_back(detail::parse_double(tok, key));
        } else if (key == "T") {
            Ts.clear();
            for (const auto& tok : detail::split_csv(val)) Ts.push_back(detail::parse_double(tok, key));
        } else if (key == "A") {
            base.A = detail::parse_double(val, key);
        } else if (key == "gamma") {
            base.gamma_size = static_cast<int>(detail::parse_double(val, key));
        } else if (key == "regular") {
            base.regular_size = static_cast<int>(detail::parse_double(val, key));
        } else if (key == "R") {
            base.replicates = static_cast<int>(detail::parse_double(val, key));
        } else if (key == "methods") {
            base.methods.clear();
            for (const auto& tok : detail::split_csv(val))
                base.methods.push_back(static_cast<int>(detail::parse_double(tok, key)));
        } else if (key == "seed") {
            base.seed = static_cast<std::uint64_t>(detail::parse_double(val, key));
        } else if (key == "burnin") {
            base.burn_in = detail::parse_double(val, key);
        } else if (key == "threads") {
            base.threads = static_cast<int>(detail::parse_double(val, key));
        } else {
            throw DataError("scenario config: unknown key '" + key + "' at line " +
                            std::to_string(lineno));
        }
    }
    ScenarioGrid grid;
    for (double T : Ts)
        for (double nu : nus)
            for (double c : cs) {
                Scenario s = base;
                s.nu = nu;
                s.scale = c;
                s.T = T;
                s.id = s.make_id();
                grid.scenarios.push_back(s);
            }
    return grid;
}

// Step kernel from CSV: one `left,right,value` triple per line, '#' comments.
// Pieces must tile (0, A] starting at 0; zero values are allowed.
inline StepFunction load_kernel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("kernel csv: cannot open '" + path + "'");
    std::vector<double> breaks{0.0};
    std::vector<double> values;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        const auto at = " at line " + std::to_string(lineno);
        auto toks = detail::split_csv(line);
        if (toks.size() != 3) throw DataError("kernel csv: expected left,right,value" + at);
        const double l = detail::parse_double(toks[0], "left");
        const double r = detail::parse_double(toks[1], "right");
        const double v = detail::parse_double(toks[2], "value");
        if (l != breaks.back())
            throw DataError("kernel csv: pieces must tile (0, A] without gaps" + at);
        if (!(r > l)) throw DataError("kernel csv: need right > left" + at);
        breaks.push_back(r);
        values.push_back(v);
    }
    if (values.empty()) throw DataError("kernel csv: no pieces in '" + path + "'");
    return StepFunction(std::move(breaks), std::move(values));
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace hawkes
