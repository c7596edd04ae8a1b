// Penalty calibration and model choice. Synthetic contrast curves give exact
// closed-form oracles for the slope and chord calibrations; the hold-out path
// is re-derived from scratch with independent Gram builds.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "hawkes/select.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;

namespace {

ContrastCurve synthetic_curve(const std::vector<double>& contrasts) {
    ContrastCurve curve;
    curve.strategy = Strategy{Strategy::Kind::islands, static_cast<int>(contrasts.size()) - 1, false};
    curve.A = 1.0;
    curve.records.resize(contrasts.size());
    for (std::size_t d = 0; d < contrasts.size(); ++d) {
        DimRecord& r = curve.records[d];
        r.dim = static_cast<int>(d);
        r.index = static_cast<long>(d);
        r.est.contrast = contrasts[d];
        r.filled = true;
    }
    return curve;
}

}  // namespace

TEST_CASE("theoretical penalty follows its closed form", "[select]") {
    const double T = 1000.0;
    const double logT = std::log(T);
    CHECK(theoretical_penalty(3, 2.0, 0.5, T) ==
          Catch::Approx(2.0 * 0.5 * 4.0 * logT * logT / T).epsilon(1e-15));
    CHECK_THROWS_AS(theoretical_penalty(3, 0.0, 0.5, T), DataError);
    CHECK_THROWS_AS(theoretical_penalty(3, 2.0, 0.5, 0.5), DataError);
}

TEST_CASE("slope calibration recovers an exact linear decay", "[select]") {
    // gamma(d) = 0.001 - k (d+1) on the upper half; lower dims polluted
    const double k = 3.5e-4;
    std::vector<double> g(11);
    for (std::size_t d = 0; d < g.size(); ++d) {
        g[d] = 0.001 - k * (static_cast<double>(d) + 1.0);
        if (d < 5) g[d] -= 0.37 * std::cos(static_cast<double>(d));  // junk outside the range
    }
    Calibration cal = calibrate_minimal(synthetic_curve(g));
    CHECK(cal.range_lo == 5);
    CHECK(cal.range_hi == 10);
    CHECK_FALSE(cal.clamped);
    // the offset term absorbs the constant 0.001 exactly; the through-origin
    // variant leaks level * sum(x)/sum(x^2) into the slope (x = d+1 in 6..11)
    CHECK(cal.k_hat == Catch::Approx(k).epsilon(1e-12));
    Calibration origin = calibrate_minimal(synthetic_curve(g), std::nullopt, true);
    CHECK(origin.k_hat == Catch::Approx(k - 0.001 * 51.0 / 451.0).epsilon(1e-12));
    // with no constant term, both fits recover the slope exactly
    std::vector<double> pure(11);
    for (std::size_t d = 0; d < pure.size(); ++d) pure[d] = -k * (static_cast<double>(d) + 1.0);
    CHECK(calibrate_minimal(synthetic_curve(pure)).k_hat == Catch::Approx(k).epsilon(1e-12));
    CHECK(calibrate_minimal(synthetic_curve(pure), std::nullopt, true).k_hat ==
          Catch::Approx(k).epsilon(1e-14));
}

TEST_CASE("slope calibration honours an explicit range and skips gaps", "[select]") {
    std::vector<double> g(9);
    const double k = 2e-3;
    for (std::size_t d = 0; d < g.size(); ++d) g[d] = -k * (static_cast<double>(d) + 1.0);
    ContrastCurve curve = synthetic_curve(g);
    Calibration cal = calibrate_minimal(curve, std::make_pair(2, 6));
    CHECK(cal.range_lo == 2);
    CHECK(cal.range_hi == 6);
    CHECK(cal.k_hat == Catch::Approx(k).epsilon(1e-14));
    CHECK_THROWS_AS(calibrate_minimal(curve, std::make_pair(6, 6)), DataError);
    CHECK_THROWS_AS(calibrate_minimal(curve, std::make_pair(-1, 4)), DataError);
    CHECK_THROWS_AS(calibrate_minimal(curve, std::make_pair(3, 20)), DataError);
    curve.records[5].filled = curve.records[6].filled = false;  // gaps are skipped
    Calibration gappy = calibrate_minimal(curve, std::make_pair(4, 8));
    CHECK(gappy.k_hat == Catch::Approx(k).epsilon(1e-14));
    for (int d = 5; d <= 8; ++d) curve.records[static_cast<std::size_t>(d)].filled = false;
    CHECK_THROWS_AS(calibrate_minimal(curve, std::make_pair(4, 8)), DataError);  // one point left
}

TEST_CASE("negative fitted slope clamps to zero", "[select]") {
    // positive contrasts in the regression range force a negative slope of
    // (-gamma) on (d+1); the calibration must clamp rather than emit a
    // negative penalty
    std::vector<double> g{-5.0, -4.0, -3.0, 2.0, 3.0, 4.0};
    Calibration cal = calibrate_minimal(synthetic_curve(g));
    CHECK(cal.clamped);
    CHECK(cal.k_hat == 0.0);
}

TEST_CASE("chord calibration uses the endpoints of the curve", "[select]") {
    std::vector<double> g{0.0, -1.0, -1.6, -2.0, -2.2};
    Calibration cal = calibrate_angle(synthetic_curve(g));
    CHECK(cal.k_hat == Catch::Approx((-1.0 + 2.2) / 3.0).epsilon(1e-15));
    CHECK(cal.range_lo == 1);
    CHECK(cal.range_hi == 4);
    std::vector<double> rising{0.0, -1.0, -1.0, -1.0, -2.0};
    CHECK_FALSE(calibrate_angle(synthetic_curve(rising)).clamped);
    std::vector<double> inverted{0.0, -2.0, -1.5, -1.2, -1.0};
    CHECK(calibrate_angle(synthetic_curve(inverted)).clamped);
    CHECK_THROWS_AS(calibrate_angle(synthetic_curve({0.0, -1.0})), DataError);
}

TEST_CASE("both calibrations scale linearly with the data", "[select]") {
    std::vector<double> g{-0.1, -0.9, -1.4, -1.7, -1.9, -2.0, -2.05};
    const double s = 3.7;
    std::vector<double> gs = g;
    for (double& v : gs) v *= s;
    CHECK(calibrate_minimal(synthetic_curve(gs)).k_hat ==
          Catch::Approx(s * calibrate_minimal(synthetic_curve(g)).k_hat).epsilon(1e-14));
    CHECK(calibrate_angle(synthetic_curve(gs)).k_hat ==
          Catch::Approx(s * calibrate_angle(synthetic_curve(g)).k_hat).epsilon(1e-14));
}

TEST_CASE("penalized choice is the argmin with ties to the smaller model", "[select]") {
    std::vector<double> g{0.0, -1.0, -1.5, -1.8, -1.9};
    PenaltySpec spec;
    spec.type = PenaltySpec::Type::fixed;

    spec.coefficient = 0.0;
    CHECK(penalized_select(synthetic_curve(g), spec).chosen_dim == 4);
    spec.coefficient = 1000.0;
    CHECK(penalized_select(synthetic_curve(g), spec).chosen_dim == 0);
    spec.coefficient = 0.4;  // minimizer at d=2: values 0.4, -0.2, -0.3, -0.2, 0.1
    SelectionReport rep = penalized_select(synthetic_curve(g), spec);
    CHECK(rep.chosen_dim == 2);
    CHECK(rep.dimension() == 3);
    REQUIRE(rep.penalized.size() == 5);
    CHECK(rep.penalized[2] == Catch::Approx(-0.3).epsilon(1e-15));

    // exact tie between d=1 and d=2 resolves to d=1
    std::vector<double> tie{0.0, -1.0, -1.5, -1.5};
    spec.coefficient = 0.5;  // penalized: 0.5, 0.0, 0.0, 0.5
    CHECK(penalized_select(synthetic_curve(tie), spec).chosen_dim == 1);
}

TEST_CASE("minimal-penalty selection doubles the calibrated slope", "[select]") {
    std::vector<double> g(13);
    const double k = 1e-3;
    for (std::size_t d = 0; d < g.size(); ++d) g[d] = -k * (static_cast<double>(d) + 1.0);
    g[3] = -k * 7.0;  // a dip the doubled penalty must survive
    PenaltySpec spec;
    spec.type = PenaltySpec::Type::minimal;
    SelectionReport rep = penalized_select(synthetic_curve(g), spec);
    CHECK(rep.penalty.coefficient == Catch::Approx(2.0 * rep.calibration.k_hat).epsilon(1e-15));
    CHECK(rep.calibration.k_hat > 0.0);
    CHECK(rep.warnings.empty());

    std::vector<double> rising{0.0, -1.0, 0.5, 2.0, 3.0, 4.0, 5.0};
    SelectionReport clamped = penalized_select(synthetic_curve(rising), spec);
    CHECK(clamped.calibration.clamped);
    CHECK(clamped.penalty.coefficient == 0.0);
    CHECK_FALSE(clamped.warnings.empty());  // surfaced, not hidden
}

TEST_CASE("hold-out scores reproduce an independent re-derivation", "[select]") {
    GroundTruth tr;
    tr.nu = 0.05;
    tr.kernel = StepFunction::indicator(0.5, 1.5, 2.0, 0.3);
    tr.validate();
    SimConfig cfg;
    cfg.horizon = 40.0;
    cfg.seed = 202;
    cfg.burn_in = 10.0;
    EventSequence ev = simulate(tr, cfg);
    REQUIRE(ev.size() > 4);

    const double A = 2.0, T = 40.0, half = 20.0;
    Strategy st{Strategy::Kind::islands, 4, false};
    SelectionReport rep = holdout_select(ev, A, st, T);

    EventSequence ev1 = ev.restrict(-A, half - A);
    EventSequence ev2 = ev.restrict(half, T);
    auto cells = regular_cells(A, 4);
    GramSystem g1 = build_gram(ev1, cells, {0.0, half - A, T});
    GramSystem g2 = build_gram(ev2, cells, {half + A, T, T});
    std::vector<double> best_score(5, std::nan(""));
    std::vector<long> best_index(5, -1);
    for (long idx = 0; idx < 16; ++idx) {
        Model m = model_from_mask(cells, static_cast<std::uint64_t>(idx));
        Estimator est = fit_model(reduce_to_model(g1, m));
        ReducedSystem r2 = reduce_to_model(g2, m);
        const double score =
            -2.0 * est.coefficients.dot(r2.b) + est.coefficients.dot(r2.X * est.coefficients);
        const auto d = static_cast<std::size_t>(m.size());
        if (best_index[d] < 0 || score < best_score[d]) {
            best_score[d] = score;
            best_index[d] = idx;
        }
    }
    for (std::size_t d = 0; d < 5; ++d) {
        REQUIRE(rep.curve.at(static_cast<int>(d)).filled);
        CHECK(rep.curve.at(static_cast<int>(d)).index == best_index[d]);
        CHECK(rep.penalized[d] == Catch::Approx(best_score[d]).epsilon(1e-12).margin(1e-15));
    }
    int expect_dim = 0;
    for (std::size_t d = 1; d < 5; ++d)
        if (best_score[d] < best_score[static_cast<std::size_t>(expect_dim)])
            expect_dim = static_cast<int>(d);
    CHECK(rep.chosen_dim == expect_dim);
    CHECK(rep.holdout);

    SelectionReport norm = holdout_select(ev, A, st, T, {true, 1});
    CHECK(norm.chosen_dim == rep.chosen_dim);  // argmin invariant to window norm
    CHECK(norm.curve.at(norm.chosen_dim).index == rep.curve.at(rep.chosen_dim).index);

    CHECK_THROWS_AS(holdout_select(ev, 11.0, st, T), DataError);  // needs T > 4A
}

TEST_CASE("method table pairs strategies and penalties as documented", "[select]") {
    GroundTruth tr;
    tr.nu = 0.02;
    tr.kernel = StepFunction::indicator(1.0, 3.0, 5.0, 0.1);
    tr.validate();
    SimConfig cfg;
    cfg.horizon = 4000.0;
    cfg.seed = 7;
    EventSequence ev = simulate(tr, cfg);
    MethodOptions opt;
    opt.gamma_size = 5;

    struct Row {
        int method;
        Strategy::Kind kind;
        bool holdout;
        PenaltySpec::Type type;
    };
    const Row rows[] = {
        {1, Strategy::Kind::regular, false, PenaltySpec::Type::minimal},
        {2, Strategy::Kind::irregular, false, PenaltySpec::Type::angle},
        {3, Strategy::Kind::irregular, false, PenaltySpec::Type::minimal},
        {4, Strategy::Kind::islands, false, PenaltySpec::Type::angle},
        {5, Strategy::Kind::islands, false, PenaltySpec::Type::minimal},
        {6, Strategy::Kind::regular, true, PenaltySpec::Type::minimal},
        {7, Strategy::Kind::irregular, true, PenaltySpec::Type::minimal},
        {8, Strategy::Kind::islands, true, PenaltySpec::Type::minimal},
    };
    for (const Row& row : rows) {
        SelectionReport rep = run_method(row.method, ev, 5.0, opt);
        CAPTURE(row.method);
        CHECK(rep.method == row.method);
        CHECK(rep.strategy.kind == row.kind);
        CHECK(rep.holdout == row.holdout);
        if (!row.holdout) CHECK(rep.penalty.type == row.type);
        CHECK(std::isfinite(rep.estimator.nu_hat));
    }
    CHECK_THROWS_AS(run_method(0, ev, 5.0, opt), DataError);
    CHECK_THROWS_AS(run_method(9, ev, 5.0, opt), DataError);
}

TEST_CASE("clipping projects the estimate into the admissible box", "[select]") {
    Estimator est;
    est.nu_hat = -0.3;
    est.model = model_from_mask(regular_cells(4.0, 2), 0b11);
    est.h_hat = StepFunction({0.0, 2.0, 4.0}, {-1.0, 9.0});
    ClipBounds cb{0.01, 2.0, 0.5};
    Estimator c = clip_estimator(est, cb);
    CHECK(c.nu_hat == 0.01);
    CHECK(c.h_hat(1.0) == 0.0);
    CHECK(c.h_hat(3.0) == 0.5);
    // idempotent
    Estimator cc = clip_estimator(c, cb);
    CHECK(cc.nu_hat == c.nu_hat);
    CHECK(cc.h_hat(3.0) == c.h_hat(3.0));

    est.nu_hat = 5.0;
    CHECK(clip_estimator(est, cb).nu_hat == 2.0);

    MethodOptions opt;
    opt.gamma_size = 4;
    opt.clip = cb;
    GroundTruth tr;
    tr.nu = 0.05;
    tr.kernel = StepFunction::indicator(1.0, 2.0, 4.0, 0.2);
    tr.validate();
    SimConfig cfg;
    cfg.horizon = 2000.0;
    cfg.seed = 15;
    EventSequence ev = simulate(tr, cfg);
    SelectionReport rep = run_method(5, ev, 4.0, opt);
    CHECK(rep.estimator.nu_hat >= 0.01);
    CHECK(rep.estimator.nu_hat <= 2.0);
    CHECK(rep.estimator.h_hat.min_value() >= 0.0);
    CHECK(rep.estimator.h_hat.max_value() <= 0.5);
}
