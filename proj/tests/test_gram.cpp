// Least-squares machinery. The central oracle rebuilds the design matrix and
// response by brute force: integrate the piecewise-constant count products on
// a grid refined with every jump location, and recount the window for every
// event by a direct double loop. The sweep implementation must match to 1e-8
// relative on random instances.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hawkes/gram.hpp"
#include "hawkes/model.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/simulate.hpp"

using namespace hawkes;

namespace {

// #{events u : t - b < u + 0 and u counted} with u in [t-b, t-a)
long direct_count(const std::vector<double>& ts, double t, double a, double b) {
    long n = 0;
    for (double u : ts)
        if (u >= t - b && u < t - a) ++n;
    return n;
}

struct DenseOracle {
    Eigen::MatrixXd X;
    Eigen::VectorXd b;
};

// Exact by construction: between consecutive jump points every count is
// constant, so midpoint evaluation integrates exactly. The extra dense grid
// points are redundant but keep the oracle honest about its own refinement.
DenseOracle brute_force_gram(const EventSequence& ev, const std::vector<Interval>& cells,
                             const FitWindow& w) {
    const int K = static_cast<int>(cells.size());
    const auto& ts = ev.times();
    std::vector<double> cuts{w.start, w.end};
    double min_width = w.end - w.start;
    for (const Interval& c : cells) min_width = std::min(min_width, c.length());
    // The jump augmentation below already makes the integration exact; the
    // dense grid is a safety net, capped so the oracle stays O(10^6) ops.
    const double step = std::max(min_width / 1000.0, (w.end - w.start) / 2000.0);
    for (double g = w.start; g < w.end; g += step) cuts.push_back(g);
    for (double u : ts)
        for (const Interval& c : cells) {
            for (double j : {u + c.left, u + c.right})
                if (j > w.start && j < w.end) cuts.push_back(j);
        }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    DenseOracle out;
    out.X = Eigen::MatrixXd::Zero(K + 1, K + 1);
    out.b = Eigen::VectorXd::Zero(K + 1);
    std::vector<double> counts(static_cast<std::size_t>(K));
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double len = cuts[s + 1] - cuts[s];
        if (len <= 0.0) continue;
        const double mid = 0.5 * (cuts[s] + cuts[s + 1]);
        for (int i = 0; i < K; ++i)
            counts[static_cast<std::size_t>(i)] = static_cast<double>(
                direct_count(ts, mid, cells[static_cast<std::size_t>(i)].left,
                             cells[static_cast<std::size_t>(i)].right));
        out.X(0, 0) += len;
        for (int i = 0; i < K; ++i) {
            out.X(0, i + 1) += len * counts[static_cast<std::size_t>(i)];
            for (int j = 0; j < K; ++j)
                out.X(i + 1, j + 1) +=
                    len * counts[static_cast<std::size_t>(i)] * counts[static_cast<std::size_t>(j)];
        }
    }
    for (int i = 1; i < K + 1; ++i) out.X(i, 0) = out.X(0, i);

    for (double t : ts) {
        if (t < w.start || t > w.end) continue;  // dN integral is closed
        out.b(0) += 1.0;
        for (int i = 0; i < K; ++i)
            out.b(i + 1) += static_cast<double>(
                direct_count(ts, t, cells[static_cast<std::size_t>(i)].left,
                             cells[static_cast<std::size_t>(i)].right));
    }
    out.X /= w.norm;
    out.b /= w.norm;
    return out;
}

EventSequence random_events(Rng& rng, int max_n, double lo, double hi) {
    const int n = static_cast<int>(rng.uniform(0.0, max_n + 0.999));
    std::vector<double> ts;
    for (int i = 0; i < n; ++i) ts.push_back(rng.uniform(lo, hi));
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
    return EventSequence(ts, lo, hi);
}

std::vector<Interval> random_partition(Rng& rng, double A, int max_cells) {
    const int k = 1 + static_cast<int>(rng.uniform(0.0, max_cells - 0.001));
    std::vector<double> edges{0.0, A};
    for (int i = 0; i < k - 1; ++i) edges.push_back(rng.uniform(0.05 * A, 0.95 * A));
    std::sort(edges.begin(), edges.end());
    // keep cells from degenerating: drop edges closer than A/50 to a neighbour
    std::vector<double> kept{edges.front()};
    for (std::size_t i = 1; i + 1 < edges.size(); ++i)
        if (edges[i] - kept.back() >= 0.02 * A) kept.push_back(edges[i]);
    kept.push_back(edges.back());
    return cells_from_edges(kept);
}

}  // namespace

TEST_CASE("sweep-built system matches the brute-force oracle", "[gram]") {
    Rng rng(808);
    for (int trial = 0; trial < 100; ++trial) {
        const double A = rng.uniform(2.0, 10.0);
        EventSequence ev = random_events(rng, 30, -A, 40.0);
        std::vector<Interval> cells = random_partition(rng, A, 10);
        if (trial % 3 == 0) {  // overlapping, non-partition cells exercise the same sweep
            cells.push_back({0.25 * A, 0.75 * A});
            cells.push_back({0.0, A});
        }
        double amax = 0.0;
        for (const Interval& c : cells) amax = std::max(amax, c.right);
        const double w0 = ev.lower() + amax + rng.uniform(0.0, 2.0);
        const double w1 = w0 + rng.uniform(1.0, 40.0 - (w0 - ev.lower()) - 1.0);
        if (!(w1 > w0) || w1 > ev.upper()) continue;
        const FitWindow w{w0, w1, trial % 2 == 0 ? w1 - w0 : 37.0};
        GramSystem gs = build_gram(ev, cells, w);
        DenseOracle oracle = brute_force_gram(ev, cells, w);
        const double scale = std::max(1.0, oracle.X.cwiseAbs().maxCoeff());
        CAPTURE(trial, ev.size(), cells.size(), w0, w1);
        REQUIRE((gs.X - oracle.X).cwiseAbs().maxCoeff() <= 1e-8 * scale);
        REQUIRE((gs.b - oracle.b).cwiseAbs().maxCoeff() <=
                1e-8 * std::max(1.0, oracle.b.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("duration entry and event counter are exact", "[gram]") {
    Rng rng(11);
    EventSequence ev = random_events(rng, 25, -5.0, 30.0);
    auto cells = regular_cells(5.0, 4);
    const FitWindow w{0.0, 30.0, 30.0};
    GramSystem gs = build_gram(ev, cells, w);
    CHECK(gs.X(0, 0) == 1.0);  // (w1 - w0) / norm exactly
    CHECK(gs.n_window == ev.count_in(0.0, 30.0) + ev.count_in(30.0, 31.0));
    CHECK(gs.b(0) * w.norm == static_cast<double>(gs.n_window));
}

TEST_CASE("window bounds are validated against observed history", "[gram]") {
    EventSequence ev({1.0, 2.0}, 0.0, 10.0);
    auto cells = regular_cells(3.0, 3);
    CHECK_THROWS_AS(build_gram(ev, cells, FitWindow{1.0, 10.0, 9.0}), DataError);   // needs start >= 3
    CHECK_THROWS_AS(build_gram(ev, cells, FitWindow{3.0, 11.0, 8.0}), DataError);   // beyond window
    CHECK_THROWS_AS(build_gram(ev, cells, FitWindow{5.0, 4.0, 1.0}), DataError);    // inverted
    CHECK_NOTHROW(build_gram(ev, cells, FitWindow{3.0, 10.0, 7.0}));
}

TEST_CASE("reduction to a model equals a direct build on merged cells", "[gram]") {
    Rng rng(77);
    const double A = 6.0;
    auto cells = regular_cells(A, 6);
    EventSequence ev = random_events(rng, 40, -A, 60.0);
    const FitWindow w{0.0, 60.0, 60.0};
    GramSystem gs = build_gram(ev, cells, w);
    for (std::uint64_t mask : {0b101101ull, 0b000111ull, 0b110000ull, 0b111111ull}) {
        Model m = model_from_mask(cells, mask);
        ReducedSystem rs = reduce_to_model(gs, m);
        GramSystem direct = build_gram(ev, m.intervals, w);
        REQUIRE(rs.X.rows() == m.size() + 1);
        for (int i = 0; i <= m.size(); ++i) {
            const double li = i == 0 ? 1.0 : std::sqrt(m.intervals[static_cast<std::size_t>(i - 1)].length());
            CHECK(rs.b(i) == Catch::Approx(direct.b(i) / li).epsilon(1e-12).margin(1e-15));
            for (int j = 0; j <= m.size(); ++j) {
                const double lj =
                    j == 0 ? 1.0 : std::sqrt(m.intervals[static_cast<std::size_t>(j - 1)].length());
                CHECK(rs.X(i, j) == Catch::Approx(direct.X(i, j) / (li * lj)).epsilon(1e-12).margin(1e-15));
            }
        }
    }
    Model foreign;  // intervals not on the grid must be rejected
    foreign.intervals = {{0.5, 1.5}};
    foreign.cell_ranges = {{0, 1}};
    CHECK_THROWS_AS(reduce_to_model(gs, foreign), DataError);
}

TEST_CASE("fitted coefficients minimize the empirical contrast", "[gram]") {
    GroundTruth tr;
    tr.nu = 0.02;
    tr.kernel = StepFunction::indicator(1.0, 3.0, 6.0, 0.1);
    tr.validate();
    SimConfig cfg;
    cfg.horizon = 3000.0;
    cfg.seed = 21;
    EventSequence ev = simulate(tr, cfg);
    auto cells = regular_cells(6.0, 6);
    const FitWindow w{0.0, 3000.0, 3000.0};
    GramSystem gs = build_gram(ev, cells, w);
    Estimator est = fit_model(reduce_to_model(gs, full_model(cells)));
    REQUIRE_FALSE(est.degenerate);

    // contrast value equals the closed form at the minimizer...
    const double direct = contrast_of(est.candidate(), ev, w);
    CHECK(est.contrast == Catch::Approx(direct).epsilon(1e-10));

    // ...and every perturbed candidate does worse
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        Candidate f = est.candidate();
        f.mu += rng.uniform(-0.01, 0.01);
        std::vector<double> vals = f.g.values();
        for (double& v : vals) v += rng.uniform(-0.05, 0.05);
        f.g = StepFunction(f.g.breaks(), vals);
        CHECK(contrast_of(f, ev, w) >= est.contrast - 1e-12);
    }
}

TEST_CASE("void model fit is the plain event-rate estimator", "[gram]") {
    EventSequence ev({0.5, 1.5, 4.0, 7.0, 9.5}, -2.0, 10.0);
    auto cells = regular_cells(2.0, 2);
    const FitWindow w{0.0, 10.0, 10.0};
    GramSystem gs = build_gram(ev, cells, w);
    Estimator est = fit_model(reduce_to_model(gs, void_model()));
    // minimizing -2 mu N/T + mu^2 gives mu = N / T over the window
    CHECK(est.nu_hat == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(est.h_hat.integral_abs() == 0.0);
    CHECK(est.dimension() == 1);
    CHECK(est.contrast == Catch::Approx(-0.25).epsilon(1e-12));  // -nu^2
}

TEST_CASE("rank-deficient systems fall back to a minimal-norm solution", "[gram]") {
    // both events sit so close to the window end that the lag range (2,4]
    // never counts anything inside (0,40]: column 2 of X is identically zero
    EventSequence ev({38.0, 39.5}, -4.0, 40.0);
    auto cells = regular_cells(4.0, 2);
    const FitWindow w{0.0, 40.0, 40.0};
    GramSystem gs = build_gram(ev, cells, w);
    CHECK(gs.X.col(2).cwiseAbs().maxCoeff() == 0.0);
    Estimator est = fit_model(reduce_to_model(gs, full_model(cells)));
    CHECK(est.degenerate);
    CHECK(std::isfinite(est.nu_hat));
    CHECK(est.h_hat(3.0) == 0.0);  // untouched coordinate pinned at zero
    const double direct = contrast_of(est.candidate(), ev, w);
    CHECK(est.contrast == Catch::Approx(direct).epsilon(1e-10));
}

TEST_CASE("psi evaluation matches the definition", "[gram]") {
    Rng rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        EventSequence ev = random_events(rng, 25, -3.0, 20.0);
        StepFunction g({0.0, 1.0, 2.0, 3.0}, {rng.uniform(-1.0, 1.0), 0.0, rng.uniform(-1.0, 1.0)});
        Candidate f{rng.uniform(0.0, 2.0), g};
        const double t = rng.uniform(0.0, 20.0);
        double expect = f.mu;
        for (double u : ev.times())
            if (u < t) expect += g(t - u);
        CHECK(psi_eval(f, ev, t) == Catch::Approx(expect).epsilon(1e-12).margin(1e-12));
    }
}

TEST_CASE("squared-candidate time average matches its quadratic form", "[gram]") {
    Rng rng(52);
    EventSequence ev = random_events(rng, 30, -3.0, 25.0);
    StepFunction g({0.0, 0.7, 1.9, 3.0}, {0.4, -0.2, 0.9});
    Candidate f{0.3, g};
    const FitWindow w{0.0, 25.0, 25.0};
    // oracle: integrate psi^2 on the jump-refined grid
    std::vector<double> cuts{0.0, 25.0};
    for (double u : ev.times())
        for (double e : g.breaks())
            if (u + e > 0.0 && u + e < 25.0) cuts.push_back(u + e);
    std::sort(cuts.begin(), cuts.end());
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double mid = 0.5 * (cuts[i] + cuts[i + 1]);
        const double v = psi_eval(f, ev, mid);
        acc += v * v * (cuts[i + 1] - cuts[i]);
    }
    CHECK(dt_square(f, ev, w) == Catch::Approx(acc / 25.0).epsilon(1e-9));
}

TEST_CASE("projection of an in-span truth is the truth itself", "[gram]") {
    // f1-shaped truth lives exactly on cells 4..6 of the regular 15-grid, so
    // the X-weighted projection onto the model spanning those cells returns
    // (nu, h) up to solver tolerance whenever X is nonsingular.
    GroundTruth tr;
    tr.nu = 0.001;
    tr.kernel = StepFunction::indicator(200.0, 400.0, 1000.0, 0.002);
    tr.validate();
    SimConfig cfg;
    cfg.horizon = 200000.0;
    cfg.seed = 88;
    EventSequence ev = simulate(tr, cfg);
    auto cells = regular_cells(1000.0, 15);
    Model m = model_from_mask(cells, 0b111000ull);  // cells 3,4,5 = (200, 400]
    const FitWindow w{0.0, 200000.0, 200000.0};
    Estimator proj = project_truth(tr, m, ev, w);
    CHECK(proj.nu_hat == Catch::Approx(0.001).epsilon(1e-8));
    CHECK(proj.h_hat(250.0) == Catch::Approx(0.002).epsilon(1e-8));
    CHECK(proj.h_hat(500.0) == 0.0);
    // contrast of the projected candidate evaluates through the same formula
    CHECK(proj.contrast == Catch::Approx(contrast_of(proj.candidate(), ev, w)).epsilon(1e-10));

    // a model that cannot represent the truth projects to something closer
    // in X-norm but different in values
    Model narrow = model_from_mask(cells, 0b001000ull);  // only cell 3
    Estimator part = project_truth(tr, narrow, ev, w);
    CHECK(part.h_hat(250.0) > 0.0);
    CHECK(part.h_hat(350.0) == 0.0);
}
