#pragma once

// Penalty calibration and model selection.
//
// Penalized selection minimises gamma(m) + pen(|m|) over the best-fit-per-
// dimension curve, with pen(d) = coefficient * (d + 1):
//   theoretical  coefficient = kappa * Q * log(T)^2 / T (kappa is an explicit
//                user input, never defaulted)
//   minimal      affine regression of -gamma_d on (d+1) over the large-
//                dimension range (default upper half); the offset absorbs the
//                curve's constant level and the fitted slope is doubled.  A
//                through-origin variant exists for diagnostics, but on flat-
//                tailed curves it inflates the slope by level/mean(d+1) and
//                underfits badly
//   angle        chord slope between the best 1-interval model and the full
//                family, coefficient = (gamma_1 - gamma_full) / (N - 1)
//
// Hold-out selection fits every model on the first half-window and scores it
// on the second:  H1 = events in [-A, T/2 - A] fitted over (0, T/2 - A],
// H2 = events in [T/2, T] scored over (T/2 + A, T]; both integrals keep the
// 1/T normaliser unless normalize_window is set (scaling never changes the
// argmins; only reported values move).
//
// Numbered methods (the benchmark vocabulary):
//   1 regular+minimal   2 irregular+angle   3 irregular+minimal
//   4 islands+angle     5 islands+minimal   6/7/8 hold-out on
//   regular/irregular/islands.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/events.hpp"
#include "hawkes/families.hpp"
#include "hawkes/gram.hpp"

namespace hawkes {

struct PenaltySpec {
    enum class Type { theoretical, minimal, angle, fixed };
    Type type = Type::minimal;
    double kappa = 0.0;  // theoretical only
    double Q = 0.0;      // theoretical only
    double T = 0.0;      // theoretical only
    std::optional<std::pair<int, int>> regression_range;  // minimal only; dims inclusive
    bool through_origin = false;  // minimal: drop the offset term (diagnostic)
    double coefficient = 0.0;  // resolved pen(d) = coefficient * (d+1); input for `fixed`
};

inline double theoretical_penalty(int model_size, double kappa, double Q, double T) {
    require(T > 1.0, "theoretical_penalty: need T > 1");
    require(Q > 0.0 && kappa > 0.0, "theoretical_penalty: kappa and Q must be positive");
    const double logT = std::log(T);
    return kappa * Q * (model_size + 1) * logT * logT / T;
}

struct Calibration {
    double k_hat = 0.0;
    bool clamped = false;
    int range_lo = 0, range_hi = 0;  // dimensions used (minimal) or endpoints (angle)
};

// Slope of -gamma against (d+1) over dims [lo, hi] (default: upper half of
// the curve).  Affine fit, slope returned; `through_origin` drops the offset.
inline Calibration calibrate_minimal(const ContrastCurve& curve,
                                     std::optional<std::pair<int, int>> range = std::nullopt,
                                     bool through_origin = false) {
    const int dmax = curve.max_dim();
    int lo = (dmax + 1) / 2, hi = dmax;
    if (range) {
        lo = range->first;
        hi = range->second;
    }
    require(0 <= lo && lo < hi && hi <= dmax, "calibrate_minimal: bad regression range");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    long n = 0;
    for (int d = lo; d <= hi; ++d) {
        const DimRecord& r = curve.at(d);
        if (!r.filled) continue;
        const double x = d + 1.0;
        const double y = -r.est.contrast;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    require(n >= 2, "calibrate_minimal: need at least two dimensions in range");
    Calibration cal;
    cal.range_lo = lo;
    cal.range_hi = hi;
    if (through_origin) {
        require(sxx > 0.0, "calibrate_minimal: degenerate regression");
        cal.k_hat = sxy / sxx;
    } else {
        const double denom = n * sxx - sx * sx;
        require(denom > 0.0, "calibrate_minimal: degenerate regression");
        cal.k_hat = (n * sxy - sx * sy) / denom;
    }
    if (cal.k_hat < 0.0) {
        cal.k_hat = 0.0;
        cal.clamped = true;
    }
    return cal;
}

// Chord slope between the best one-interval model and the full family.
inline Calibration calibrate_angle(const ContrastCurve& curve) {
    const int dmax = curve.max_dim();
    require(dmax >= 2, "calibrate_angle: need max dimension >= 2");
    const DimRecord& r1 = curve.at(1);
    const DimRecord& rN = curve.at(dmax);
    require(r1.filled && rN.filled, "calibrate_angle: curve endpoints missing");
    Calibration cal;
    cal.range_lo = 1;
    cal.range_hi = dmax;
    cal.k_hat = (r1.est.contrast - rN.est.contrast) / (dmax - 1);
    if (cal.k_hat < 0.0) {
        cal.k_hat = 0.0;
        cal.clamped = true;
    }
    return cal;
}

struct SelectionReport {
    int method = 0;  // 1..8, or 0 for an explicit strategy/penalty pairing
    Strategy strategy;
    bool holdout = false;
    PenaltySpec penalty;            // resolved coefficient for penalized methods
    Calibration calibration;        // minimal/angle only
    ContrastCurve curve;            // per-dimension best fits (H1 fits for hold-out)
    std::vector<double> penalized;  // per-dimension selection values (scores for hold-out)
    int chosen_dim = 0;             // |m_hat|
    Estimator estimator;
    bool nonstandard_pairing = false;
    std::vector<std::string> warnings;

    int dimension() const { return chosen_dim + 1; }  // |m_hat| + 1, as reported
};

// Resolve the penalty coefficient for a curve (fills spec.coefficient).
inline PenaltySpec resolve_penalty(const ContrastCurve& curve, PenaltySpec spec,
                                   Calibration* cal_out, std::vector<std::string>* warnings) {
    Calibration cal;
    switch (spec.type) {
        case PenaltySpec::Type::theoretical:
            spec.coefficient = theoretical_penalty(0, spec.kappa, spec.Q, spec.T);
            break;
        case PenaltySpec::Type::minimal:
            cal = calibrate_minimal(curve, spec.regression_range, spec.through_origin);
            spec.coefficient = 2.0 * cal.k_hat;
            if (cal.clamped && warnings)
                warnings->push_back("minimal-penalty slope was negative; clamped to zero");
            break;
        case PenaltySpec::Type::angle:
            cal = calibrate_angle(curve);
            spec.coefficient = cal.k_hat;
            if (cal.clamped && warnings)
                warnings->push_back("angle slope was negative; clamped to zero");
            break;
        case PenaltySpec::Type::fixed:
            break;
    }
    if (cal_out) *cal_out = cal;
    return spec;
}

// argmin_d gamma_d + coefficient * (d+1); ties go to the smaller dimension.
inline SelectionReport penalized_select(const ContrastCurve& curve, const PenaltySpec& spec_in) {
    SelectionReport rep;
    rep.strategy = curve.strategy;
    rep.curve = curve;
    rep.penalty = resolve_penalty(curve, spec_in, &rep.calibration, &rep.warnings);

    rep.penalized.assign(curve.records.size(), std::nan(""));
    int best = -1;
    for (int d = 0; d <= curve.max_dim(); ++d) {
        const DimRecord& r = curve.at(d);
        if (!r.filled) continue;
        const double crit = r.est.contrast + rep.penalty.coefficient * (d + 1.0);
        rep.penalized[static_cast<std::size_t>(d)] = crit;
        if (best < 0 || crit < rep.penalized[static_cast<std::size_t>(best)]) best = d;
    }
    require(best >= 0, "penalized_select: empty curve");
    rep.chosen_dim = best;
    rep.estimator = curve.at(best).est;
    return rep;
}

struct HoldoutOptions {
    bool normalize_window = false;  // divide each half's integrals by its own length
    int threads = 1;
};

// Fit on H1, score on H2, keep the global score argmin (ties: enumeration
// index).  The returned curve holds H1 fits; `penalized` holds per-dimension
// best scores.  `visit` receives every H1 fit (possibly concurrently, one
// call per index).
inline SelectionReport holdout_select(
    const EventSequence& ev, double A, const Strategy& st, double T,
    const HoldoutOptions& opt = {},
    const std::function<void(long, const Model&, const Estimator&)>& visit = nullptr) {
    require(T > 4.0 * A, "holdout_select: need T > 4A for disjoint half-windows");
    const double half = T / 2.0;

    EventSequence ev1 = ev.restrict(-A, half - A);
    EventSequence ev2 = ev.restrict(half, T);
    const double norm1 = opt.normalize_window ? (half - A) : T;
    const double norm2 = opt.normalize_window ? (half - A) : T;
    FamilyScan scan1(st, A, ev1, {0.0, half - A, norm1});
    FamilyScan scan2(st, A, ev2, {half + A, T, norm2});

    const long n = scan1.size();
    const int maxd = max_dimension(st);

    struct Slot {
        double score = 0.0;
        long index = -1;
        Estimator est;
        bool filled = false;
    };
    std::vector<std::vector<Slot>> partials;
    std::mutex mu;
    parallel_for(n, opt.threads, [&](long lo, long hi) {
        std::vector<Slot> local(static_cast<std::size_t>(maxd) + 1);
        for (long idx = lo; idx < hi; ++idx) {
            Estimator est = scan1.fit(idx);
            if (visit) visit(idx, est.model, est);
            ReducedSystem rs2 = scan2.reduced(idx);
            const Eigen::VectorXd& th = est.coefficients;
            const double score = -2.0 * th.dot(rs2.b) + th.dot(rs2.X * th);
            Slot& s = local[static_cast<std::size_t>(est.model.size())];
            if (!s.filled || score < s.score || (score == s.score && idx < s.index)) {
                s.score = score;
                s.index = idx;
                s.est = std::move(est);
                s.filled = true;
            }
        }
        std::lock_guard<std::mutex> g(mu);
        partials.push_back(std::move(local));
    });

    std::vector<Slot> best(static_cast<std::size_t>(maxd) + 1);
    for (auto& local : partials)
        for (std::size_t d = 0; d < local.size(); ++d) {
            Slot& cand = local[d];
            if (!cand.filled) continue;
            Slot& s = best[d];
            if (!s.filled || cand.score < s.score || (cand.score == s.score && cand.index < s.index))
                s = std::move(cand);
        }

    SelectionReport rep;
    rep.strategy = st;
    rep.holdout = true;
    rep.curve.strategy = st;
    rep.curve.A = A;
    rep.curve.records.resize(static_cast<std::size_t>(maxd) + 1);
    rep.penalized.assign(static_cast<std::size_t>(maxd) + 1, std::nan(""));
    int best_dim = -1;
    for (int d = 0; d <= maxd; ++d) {
        Slot& s = best[static_cast<std::size_t>(d)];
        if (!s.filled) continue;
        DimRecord& r = rep.curve.records[static_cast<std::size_t>(d)];
        r.dim = d;
        r.index = s.index;
        r.est = s.est;
        r.filled = true;
        rep.penalized[static_cast<std::size_t>(d)] = s.score;
        const double cur = rep.penalized[static_cast<std::size_t>(d)];
        if (best_dim < 0 || cur < rep.penalized[static_cast<std::size_t>(best_dim)] ||
            (cur == rep.penalized[static_cast<std::size_t>(best_dim)] &&
             s.index < best[static_cast<std::size_t>(best_dim)].index))
            best_dim = d;
    }
    require(best_dim >= 0, "holdout_select: no model could be scored");
    rep.chosen_dim = best_dim;
    rep.estimator = best[static_cast<std::size_t>(best_dim)].est;
    return rep;
}

// Clamp the fitted pair into the admissible box; idempotent.
inline Estimator clip_estimator(const Estimator& est, const ClipBounds& cb) {
    cb.validate();
    Estimator out = est;
    out.nu_hat = std::min(cb.eta, std::max(cb.rho, est.nu_hat));
    out.h_hat = est.h_hat.clamped(0.0, cb.H);
    return out;
}

struct MethodOptions {
    int gamma_size = 15;       // base grid for irregular/islands
    int regular_size = -1;     // base size for regular methods; -1 = gamma_size
    double T = -1.0;           // horizon; -1 = events.upper()
    std::optional<std::pair<int, int>> regression_range;  // minimal penalty
    bool through_origin = false;
    double kappa = 0.0, Q = 0.0;  // kept for explicit theoretical runs
    bool force_large = false;
    bool holdout_normalize_window = false;
    int threads = 1;
    std::optional<ClipBounds> clip;
};

inline SelectionReport run_method(int method, const EventSequence& ev, double A,
                                  const MethodOptions& opt = {}) {
    require(method >= 1 && method <= 8, "run_method: method must be in 1..8");
    const double T = opt.T > 0.0 ? opt.T : ev.upper();
    const int reg = opt.regular_size > 0 ? opt.regular_size : opt.gamma_size;

    Strategy st;
    st.force_large = opt.force_large;
    switch (method) {
        case 1: case 6: st.kind = Strategy::Kind::regular; st.size = reg; break;
        case 2: case 3: case 7: st.kind = Strategy::Kind::irregular; st.size = opt.gamma_size; break;
        case 4: case 5: case 8: st.kind = Strategy::Kind::islands; st.size = opt.gamma_size; break;
    }

    SelectionReport rep;
    if (method >= 6) {
        rep = holdout_select(ev, A, st, T,
                             {opt.holdout_normalize_window, opt.threads});
    } else {
        ContrastCurve curve = best_per_dimension(st, A, ev, {0.0, T, T}, opt.threads);
        PenaltySpec spec;
        spec.type = (method == 2 || method == 4) ? PenaltySpec::Type::angle
                                                 : PenaltySpec::Type::minimal;
        spec.regression_range = opt.regression_range;
        spec.through_origin = opt.through_origin;
        rep = penalized_select(curve, spec);
    }
    rep.method = method;
    if (opt.clip) rep.estimator = clip_estimator(rep.estimator, *opt.clip);
    return rep;
}

}  // namespace hawkes
