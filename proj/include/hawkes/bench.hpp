#pragma once

// Monte Carlo risk benchmark: simulate a scenario R times, run the selected
// methods on every replicate, and report for each method the L2 risk
// E||s - s_tilde||^2, its standard error, the oracle risk
// min_m E||s - s_hat_m||^2 over the whole family (same fit window the method
// uses: full sample for 1-5, first half for 6-8), the oracle ratio, and the
// histogram of selected dimensions (|m_hat| + 1).  Per-replicate failures are
// logged and counted; the batch never aborts.

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/select.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/truth.hpp"

namespace hawkes {

// Benchmark truths on (0, 1000]:
//   f1  0.004 * scale on (200, 400]                      (mass 0.8 * scale)
//   f2  0.003 on (200, 800/3] - 0.003 on (2000/3, 2200/3], times scale
//       (signed; total mass 0; |mass| 0.4 * scale)
//   f3  scale * 0.8 * equal mixture of N(250, 40^2) and N(600, 80^2)
//       truncated to (0, 1000] and renormalised   (mass 0.8 * scale)
inline GroundTruth builtin_truth(const std::string& id, double nu, double scale = 1.0) {
    require(nu > 0.0, "builtin_truth: nu must be positive");
    const double A = 1000.0;
    if (id == "f1")
        return {nu, StepFunction::indicator(200.0, 400.0, A, 0.004 * scale)};
    if (id == "f2") {
        StepFunction f2({0.0, 200.0, 800.0 / 3.0, 2000.0 / 3.0, 2200.0 / 3.0, A},
                        {0.0, 0.003 * scale, 0.0, -0.003 * scale, 0.0});
        return {nu, f2};
    }
    if (id == "f3") {
        const double m1 = 250.0, s1 = 40.0, m2 = 600.0, s2 = 80.0;
        auto Phi = [](double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); };
        const double Z = 0.5 * (Phi((A - m1) / s1) - Phi((0.0 - m1) / s1)) +
                         0.5 * (Phi((A - m2) / s2) - Phi((0.0 - m2) / s2));
        const double amp = 0.8 * scale / Z;
        auto pdf = [=](double t) {
            const double z1 = (t - m1) / s1, z2 = (t - m2) / s2;
            const double g1 = std::exp(-0.5 * z1 * z1) / (s1 * std::sqrt(2.0 * M_PI));
            const double g2 = std::exp(-0.5 * z2 * z2) / (s2 * std::sqrt(2.0 * M_PI));
            return amp * 0.5 * (g1 + g2);
        };
        SmoothKernel k;
        k.f = pdf;
        k.support = A;
        // 0.5*(peak1 + peak2) dominates the mixture everywhere
        k.upper_bound = amp * 0.5 *
                        (1.0 / (s1 * std::sqrt(2.0 * M_PI)) + 1.0 / (s2 * std::sqrt(2.0 * M_PI)));
        k.integral = 0.8 * scale;
        k.integral_abs = 0.8 * scale;
        k.integral_sq = integrate_max_width([&](double t) { return pdf(t) * pdf(t); }, 0.0, A,
                                            A / 1024.0);
        k.nonneg = true;
        return {nu, k};
    }
    throw DataError("builtin_truth: unknown id '" + id + "'");
}

struct Scenario {
    std::string truth_id = "f1";
    double scale = 1.0;   // c
    double nu = 0.001;
    double T = 100000.0;
    double A = 1000.0;
    int gamma_size = 15;
    int regular_size = -1;  // -1: same as gamma_size
    int replicates = 20;
    std::vector<int> methods{1, 2, 4};
    std::uint64_t seed = 1;
    double burn_in = -1.0;
    int threads = 1;
    std::string id;  // filled if empty

    std::string make_id() const {
        char buf[160];
        std::snprintf(buf, sizeof(buf), "%s_c%g_nu%g_T%g", truth_id.c_str(), scale, nu, T);
        return buf;
    }
};

struct CurveRow {
    int method = 0;
    int dim = 0;          // |m| + 1
    double contrast = 0.0;
    double penalty = 0.0;
    double penalized = 0.0;  // contrast + penalty, or the hold-out score
};

struct MethodSummary {
    int method = 0;
    double risk = 0.0;
    double risk_se = 0.0;
    double oracle_risk = 0.0;
    double oracle_ratio = 0.0;
    double rescaled_risk = 0.0;  // risk / scale^2
    double mean_dimension = 0.0;
    int modal_dimension = 0;
    std::map<int, long> dim_histogram;  // (|m_hat| + 1) -> count
    long failures = 0;
};

struct RiskReport {
    Scenario scenario;
    std::vector<MethodSummary> methods;
    std::vector<CurveRow> first_replicate_curves;
    long replicates_done = 0;
    long failures = 0;
};

// ||s - estimator||^2 straight from definitions (quadrature for smooth
// truths); the benchmark's fast per-model pricing is cross-checked against
// this in the tests.
inline double l2_risk(const GroundTruth& truth, const Estimator& est) {
    return l2_distance_sq(truth, est.candidate());
}

namespace detail {

// O(|m|) risk pricing of fitted models against precomputed per-cell kernel
// moments: ||s - s_hat||^2 = (nu - nu_hat)^2 + int h^2
//                            + sum_i (v_i^2 |I_i| - 2 v_i int_{I_i} h).
class RiskPricer {
  public:
    RiskPricer(const GroundTruth& truth, const std::vector<std::vector<Interval>>& bases)
        : nu_(truth.nu) {
        for (const auto& cells : bases) {
            CellMoments cm = kernel_cell_moments(truth.kernel, cells);
            total_sq_ = cm.total_sq;
            std::vector<double> pre(cells.size() + 1, 0.0);
            for (std::size_t c = 0; c < cells.size(); ++c) pre[c + 1] = pre[c] + cm.m1[c];
            m1_prefix_.push_back(std::move(pre));
        }
    }

    double price(const Model& m, const Estimator& est, std::size_t base) const {
        const double dn = nu_ - est.nu_hat;
        double r = dn * dn + total_sq_;
        const auto& pre = m1_prefix_[base];
        for (int i = 0; i < m.size(); ++i) {
            const auto [f, l] = m.cell_ranges[static_cast<std::size_t>(i)];
            const double len = m.intervals[static_cast<std::size_t>(i)].length();
            const double v = est.coefficients(i + 1) / std::sqrt(len);
            const double ih = pre[static_cast<std::size_t>(l) + 1] - pre[static_cast<std::size_t>(f)];
            r += v * v * len - 2.0 * v * ih;
        }
        return r;
    }

  private:
    double nu_ = 0.0;
    double total_sq_ = 0.0;
    std::vector<std::vector<double>> m1_prefix_;
};

struct FamilyKey {
    Strategy::Kind kind;
    int size;
    bool holdout;
    bool operator<(const FamilyKey& o) const {
        return std::tie(kind, size, holdout) < std::tie(o.kind, o.size, o.holdout);
    }
};

inline FamilyKey method_family(int method, int gamma_size, int regular_size) {
    switch (method) {
        case 1: return {Strategy::Kind::regular, regular_size, false};
        case 6: return {Strategy::Kind::regular, regular_size, true};
        case 2: case 3: return {Strategy::Kind::irregular, gamma_size, false};
        case 7: return {Strategy::Kind::irregular, gamma_size, true};
        case 4: case 5: return {Strategy::Kind::islands, gamma_size, false};
        case 8: return {Strategy::Kind::islands, gamma_size, true};
    }
    throw DataError("method_family: method must be in 1..8");
}

// Enumeration index -> moment-base index (regular/nested fit one partition
// per size; shared-grid families always use base 0).
inline std::size_t base_of_index(Strategy::Kind kind, long idx) {
    if (kind == Strategy::Kind::regular || kind == Strategy::Kind::nested)
        return idx == 0 ? 0 : static_cast<std::size_t>(idx - 1);
    return 0;
}

}  // namespace detail

inline RiskReport run_scenario(const Scenario& scn_in) {
    Scenario scn = scn_in;
    if (scn.id.empty()) scn.id = scn.make_id();
    require(scn.replicates >= 1, "run_scenario: need at least one replicate");
    require(!scn.methods.empty(), "run_scenario: no methods requested");
    const int reg = scn.regular_size > 0 ? scn.regular_size : scn.gamma_size;
    const double A = scn.A;
    const double T = scn.T;

    GroundTruth truth = builtin_truth(scn.truth_id, scn.nu, scn.scale);
    require(truth.support() == A, "run_scenario: A must match the builtin support");

    // Families to scan, their strategies, moment bases, and risk accumulators.
    std::set<detail::FamilyKey> keys;
    for (int m : scn.methods) keys.insert(detail::method_family(m, scn.gamma_size, reg));

    struct FamilyCtx {
        detail::FamilyKey key;
        Strategy strategy;
        std::unique_ptr<detail::RiskPricer> pricer;
        long family_size = 0;
        bool track_oracle = false;
    };
    std::vector<FamilyCtx> fams;
    for (const auto& key : keys) {
        FamilyCtx ctx;
        ctx.key = key;
        ctx.strategy = Strategy{key.kind, key.size, false};
        std::vector<std::vector<Interval>> bases;
        if (key.kind == Strategy::Kind::regular)
            for (int s = 1; s <= key.size; ++s) bases.push_back(regular_cells(A, s));
        else
            bases.push_back(regular_cells(A, key.size));
        ctx.pricer = std::make_unique<detail::RiskPricer>(truth, bases);
        ctx.family_size = family_size(ctx.strategy);
        ctx.track_oracle = ctx.family_size <= (1l << 20);  // memory guard
        fams.push_back(std::move(ctx));
    }
    auto fam_index = [&](const detail::FamilyKey& key) {
        for (std::size_t i = 0; i < fams.size(); ++i)
            if (!(fams[i].key < key) && !(key < fams[i].key)) return i;
        throw NumericError("run_scenario: family lookup failed");
    };

    struct ReplicateOut {
        bool ok = false;
        std::string error;
        std::vector<std::vector<double>> fam_risks;       // per family, per model index
        std::map<int, double> method_risk;                // chosen-estimator risk
        std::map<int, int> method_dim;                    // |m_hat| + 1
        std::vector<CurveRow> curves;                     // replicate 0 only
    };
    std::vector<ReplicateOut> outs(static_cast<std::size_t>(scn.replicates));

    auto run_replicate = [&](long r) {
        ReplicateOut& out = outs[static_cast<std::size_t>(r)];
        try {
            SimConfig cfg;
            cfg.horizon = T;
            cfg.burn_in = scn.burn_in;
            cfg.seed = scn.seed;
            cfg.stream = static_cast<std::uint64_t>(r);
            EventSequence ev = simulate(truth, cfg);

            out.fam_risks.resize(fams.size());
            std::map<detail::FamilyKey, ContrastCurve> curves;          // full-window fits
            std::map<detail::FamilyKey, SelectionReport> ho_reports;    // hold-out runs

            for (std::size_t fi = 0; fi < fams.size(); ++fi) {
                const FamilyCtx& fam = fams[fi];
                auto& risks = out.fam_risks[fi];
                if (fam.track_oracle) risks.assign(static_cast<std::size_t>(fam.family_size), 0.0);
                auto visit = [&](long idx, const Model& m, const Estimator& est) {
                    if (fam.track_oracle)
                        risks[static_cast<std::size_t>(idx)] = fam.pricer->price(
                            m, est, detail::base_of_index(fam.key.kind, idx));
                };
                if (!fam.key.holdout) {
                    FamilyScan scan(fam.strategy, A, ev, {0.0, T, T});
                    curves[fam.key] = best_per_dimension(scan, 1, visit);
                } else {
                    HoldoutOptions ho;
                    ho.threads = 1;
                    ho_reports[fam.key] =
                        holdout_select(ev, A, fam.strategy, T, ho, visit);
                }
            }

            for (int method : scn.methods) {
                const auto key = detail::method_family(method, scn.gamma_size, reg);
                SelectionReport rep;
                if (method >= 6) {
                    rep = ho_reports[key];
                } else {
                    PenaltySpec spec;
                    spec.type = (method == 2 || method == 4) ? PenaltySpec::Type::angle
                                                             : PenaltySpec::Type::minimal;
                    rep = penalized_select(curves[key], spec);
                }
                rep.method = method;
                const FamilyCtx& fam = fams[fam_index(key)];
                const double risk = fam.pricer->price(
                    rep.estimator.model, rep.estimator,
                    detail::base_of_index(key.kind, rep.curve.at(rep.chosen_dim).index));
                out.method_risk[method] = risk;
                out.method_dim[method] = rep.dimension();
                if (r == 0) {
                    for (int d = 0; d <= rep.curve.max_dim(); ++d) {
                        const DimRecord& rec = rep.curve.at(d);
                        if (!rec.filled) continue;
                        CurveRow row;
                        row.method = method;
                        row.dim = d + 1;
                        row.contrast = rec.est.contrast;
                        row.penalty = rep.holdout ? 0.0 : rep.penalty.coefficient * (d + 1.0);
                        row.penalized = rep.holdout ? rep.penalized[static_cast<std::size_t>(d)]
                                                    : rec.est.contrast + row.penalty;
                        out.curves.push_back(row);
                    }
                }
            }
            out.ok = true;
        } catch (const std::exception& e) {
            out.ok = false;
            out.error = e.what();
        }
    };

    parallel_for(scn.replicates, scn.threads,
                 [&](long lo, long hi) { for (long r = lo; r < hi; ++r) run_replicate(r); });

    // Deterministic aggregation in replicate order.
    RiskReport report;
    report.scenario = scn;
    std::vector<std::vector<double>> fam_risk_sums(fams.size());
    for (std::size_t fi = 0; fi < fams.size(); ++fi)
        if (fams[fi].track_oracle)
            fam_risk_sums[fi].assign(static_cast<std::size_t>(fams[fi].family_size), 0.0);

    std::map<int, std::vector<double>> method_risks;
    std::map<int, std::vector<int>> method_dims;
    for (long r = 0; r < scn.replicates; ++r) {
        ReplicateOut& out = outs[static_cast<std::size_t>(r)];
        if (!out.ok) {
            ++report.failures;
            std::fprintf(stderr, "run_scenario[%s]: replicate %ld failed: %s\n", scn.id.c_str(),
                         r, out.error.c_str());
            continue;
        }
        ++report.replicates_done;
        for (std::size_t fi = 0; fi < fams.size(); ++fi)
            if (fams[fi].track_oracle)
                for (std::size_t i = 0; i < fam_risk_sums[fi].size(); ++i)
                    fam_risk_sums[fi][i] += out.fam_risks[fi][i];
        for (int m : scn.methods) {
            method_risks[m].push_back(out.method_risk[m]);
            method_dims[m].push_back(out.method_dim[m]);
        }
        if (r == 0) report.first_replicate_curves = out.curves;
    }
    require(report.replicates_done > 0, "run_scenario: every replicate failed");

    for (int m : scn.methods) {
        MethodSummary ms;
        ms.method = m;
        const auto& risks = method_risks[m];
        const auto& dims = method_dims[m];
        const double n = static_cast<double>(risks.size());
        double sum = 0.0, sumsq = 0.0, dsum = 0.0;
        for (double x : risks) { sum += x; sumsq += x * x; }
        for (int d : dims) { dsum += d; ++ms.dim_histogram[d]; }
        ms.risk = sum / n;
        ms.risk_se = n > 1 ? std::sqrt(std::max(0.0, (sumsq - sum * sum / n) / (n - 1.0)) / n)
                           : 0.0;
        ms.rescaled_risk = ms.risk / (scn.scale * scn.scale);
        ms.mean_dimension = dsum / n;
        long best_count = -1;
        for (const auto& [d, c] : ms.dim_histogram)
            if (c > best_count) { best_count = c; ms.modal_dimension = d; }
        ms.failures = report.failures;

        const auto key = detail::method_family(m, scn.gamma_size, reg);
        const FamilyCtx& fam = fams[fam_index(key)];
        if (fam.track_oracle) {
            double best = std::numeric_limits<double>::infinity();
            const auto& sums = fam_risk_sums[fam_index(key)];
            for (double s : sums) best = std::min(best, s / static_cast<double>(report.replicates_done));
            ms.oracle_risk = best;
            ms.oracle_ratio = best > 0.0 ? ms.risk / best : std::numeric_limits<double>::infinity();
        } else {
            ms.oracle_risk = std::nan("");
            ms.oracle_ratio = std::nan("");
        }
        report.methods.push_back(ms);
    }
    return report;
}

}  // namespace hawkes
