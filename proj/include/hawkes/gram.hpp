#pragma once

// Least-squares contrast machinery.  For a cell list I_1..I_K inside (0, A]
// write psi_i(t) = #{events u in [t - r_i, t - l_i)} (the count functional of
// cell i) and psi_0 = 1.  Over an integration window (w0, w1] with normaliser
// `norm` the Gram system is
//
//   X[i][j] = (1/norm) int_{w0}^{w1} psi_i psi_j dt,
//   b[i]    = (1/norm) int_{(w0, w1]} psi_i dN   (sum over events in the window),
//
// assembled in one sweep over the O(n K) breakpoints of the count functions.
// X and b are stored on the raw indicator basis; the orthonormal-per-length
// scaling 1/sqrt(|I|) is applied when reducing to a model.  The least-squares
// contrast of a candidate with coordinates theta on that basis is
// gamma = -2 theta.b + theta.X theta.

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/events.hpp"
#include "hawkes/model.hpp"
#include "hawkes/truth.hpp"

namespace hawkes {

struct FitWindow {
    double start = 0.0;   // integrate over (start, end]
    double end = 0.0;
    double norm = 0.0;    // usually the full horizon T, even for sub-windows

    void validate() const {
        require(start < end, "FitWindow: empty window");
        require(norm > 0.0, "FitWindow: normaliser must be positive");
    }
};

struct GramSystem {
    std::vector<Interval> cells;
    FitWindow window;
    double A = 0.0;            // kernel support the cells live in
    Eigen::MatrixXd X;         // (K+1) x (K+1)
    Eigen::VectorXd b;         // K+1
    long n_window = 0;         // events counted into b[0]

    // prefix[i][j] = sum of X(c, c') over c <= i, c' <= j (cell indices,
    // 1-based rows of X); makes contiguous-range reductions O(1) per entry.
    Eigen::MatrixXd prefix;
    Eigen::VectorXd prefix_row0;
    Eigen::VectorXd prefix_b;

    int n_cells() const { return static_cast<int>(cells.size()); }
};

// Sweep-line assembly.  Cells are usually disjoint but only need to be valid
// intervals: each cell's count is tracked independently, so overlapping cell
// lists (used when projecting a truth) are handled by the same code path.
//
// Requires window.start >= events.lower() + max(cell right) so every probe
// instant in the window has a fully observed look-back, and window.end <=
// events.upper().
inline GramSystem build_gram(const EventSequence& ev, const std::vector<Interval>& cells,
                             const FitWindow& window) {
    window.validate();
    require(!cells.empty(), "build_gram: need at least one cell");
    double A = 0.0;
    for (const Interval& c : cells) {
        require(c.left >= 0.0 && c.left < c.right, "build_gram: bad cell");
        A = std::max(A, c.right);
    }
    require(window.start >= ev.lower() + A,
            "build_gram: window starts before history is fully observed");
    require(window.end <= ev.upper(), "build_gram: window ends beyond the observations");

    const int K = static_cast<int>(cells.size());
    const double w0 = window.start, w1 = window.end;
    const auto& times = ev.times();

    // Marks: kind -1 = event hit (accumulate b before any count update at the
    // same instant), otherwise a +/-1 update of one cell's count.
    struct Mark {
        double pos;
        int cell;     // -1 for event hits
        int delta;
    };
    std::vector<Mark> marks;
    marks.reserve(times.size() * (2 * static_cast<std::size_t>(K) + 1) / 2);

    std::vector<int> count(static_cast<std::size_t>(K), 0);
    for (double e : times) {
        if (e > w1) break;
        if (e + A < w0) continue;  // too far in the past to touch the window
        if (e >= w0) marks.push_back({e, -1, 0});
        for (int i = 0; i < K; ++i) {
            const double enter = e + cells[static_cast<std::size_t>(i)].left;
            const double leave = e + cells[static_cast<std::size_t>(i)].right;
            if (leave < w0) continue;   // already gone before the window
            if (enter > w1) continue;
            if (enter < w0) {
                ++count[static_cast<std::size_t>(i)];  // active when the sweep starts
            } else {
                marks.push_back({enter, i, +1});
            }
            if (leave <= w1) marks.push_back({leave, i, -1});
        }
    }
    std::sort(marks.begin(), marks.end(), [](const Mark& a, const Mark& b) {
        if (a.pos != b.pos) return a.pos < b.pos;
        return (a.cell == -1) > (b.cell == -1);  // event hits first at ties
    });

    GramSystem gs;
    gs.cells = cells;
    gs.window = window;
    gs.A = A;
    gs.X = Eigen::MatrixXd::Zero(K + 1, K + 1);
    gs.b = Eigen::VectorXd::Zero(K + 1);

    double prev = w0;
    auto close_segment = [&](double pos) {
        const double len = pos - prev;
        if (len > 0.0) {
            for (int i = 0; i < K; ++i) {
                const double ci = count[static_cast<std::size_t>(i)];
                if (ci == 0.0) continue;
                gs.X(0, i + 1) += len * ci;
                for (int j = i; j < K; ++j) {
                    const double cj = count[static_cast<std::size_t>(j)];
                    if (cj != 0.0) gs.X(i + 1, j + 1) += len * ci * cj;
                }
            }
        }
        prev = pos;
    };

    for (std::size_t m = 0; m < marks.size();) {
        const double pos = marks[m].pos;
        close_segment(pos);
        // events at pos read the counts of the segment that just closed
        while (m < marks.size() && marks[m].pos == pos && marks[m].cell == -1) {
            ++gs.n_window;
            for (int i = 0; i < K; ++i) gs.b(i + 1) += count[static_cast<std::size_t>(i)];
            ++m;
        }
        while (m < marks.size() && marks[m].pos == pos) {
            count[static_cast<std::size_t>(marks[m].cell)] += marks[m].delta;
            ++m;
        }
    }
    close_segment(w1);

    gs.b(0) = static_cast<double>(gs.n_window);
    gs.X(0, 0) = w1 - w0;
    for (int i = 1; i <= K; ++i)
        for (int j = 0; j < i; ++j) gs.X(i, j) = gs.X(j, i);
    gs.X /= window.norm;
    gs.b /= window.norm;

    gs.prefix = Eigen::MatrixXd::Zero(K + 1, K + 1);  // 1-based, row/col 0 zero pad
    gs.prefix_row0 = Eigen::VectorXd::Zero(K + 1);
    gs.prefix_b = Eigen::VectorXd::Zero(K + 1);
    for (int i = 1; i <= K; ++i) {
        gs.prefix_row0(i) = gs.prefix_row0(i - 1) + gs.X(0, i);
        gs.prefix_b(i) = gs.prefix_b(i - 1) + gs.b(i);
        for (int j = 1; j <= K; ++j)
            gs.prefix(i, j) =
                gs.X(i, j) + gs.prefix(i - 1, j) + gs.prefix(i, j - 1) - gs.prefix(i - 1, j - 1);
    }
    return gs;
}

// Model-reduced system on the per-interval orthonormal basis
// (1, 1_{I}/sqrt(|I|)).  Intervals must be unions of contiguous gram cells,
// identified by their cell ranges.
struct ReducedSystem {
    Eigen::MatrixXd X;
    Eigen::VectorXd b;
    Model model;
    double norm = 0.0;
    double A = 0.0;
};

inline ReducedSystem reduce_to_model(const GramSystem& gs, const Model& model) {
    const int D = model.size();
    require(model.cell_ranges.size() == static_cast<std::size_t>(D),
            "reduce_to_model: model lacks cell ranges");
    ReducedSystem rs;
    rs.model = model;
    rs.norm = gs.window.norm;
    rs.A = gs.A;
    rs.X = Eigen::MatrixXd(D + 1, D + 1);
    rs.b = Eigen::VectorXd(D + 1);
    rs.X(0, 0) = gs.X(0, 0);
    rs.b(0) = gs.b(0);

    std::vector<double> inv_sqrt_len(static_cast<std::size_t>(D));
    for (int i = 0; i < D; ++i) {
        const auto [f, l] = model.cell_ranges[static_cast<std::size_t>(i)];
        require(f >= 0 && f <= l && l < gs.n_cells(), "reduce_to_model: bad cell range");
        require(gs.cells[static_cast<std::size_t>(f)].left == model.intervals[static_cast<std::size_t>(i)].left &&
                    gs.cells[static_cast<std::size_t>(l)].right == model.intervals[static_cast<std::size_t>(i)].right,
                "reduce_to_model: interval does not match its cell range");
        inv_sqrt_len[static_cast<std::size_t>(i)] =
            1.0 / std::sqrt(model.intervals[static_cast<std::size_t>(i)].length());
    }

    auto block_sum = [&](int f1, int l1, int f2, int l2) {
        // cell indices are 0-based; prefix is 1-based
        return gs.prefix(l1 + 1, l2 + 1) - gs.prefix(f1, l2 + 1) - gs.prefix(l1 + 1, f2) +
               gs.prefix(f1, f2);
    };
    for (int i = 0; i < D; ++i) {
        const auto [fi, li] = model.cell_ranges[static_cast<std::size_t>(i)];
        const double si = inv_sqrt_len[static_cast<std::size_t>(i)];
        rs.X(0, i + 1) = (gs.prefix_row0(li + 1) - gs.prefix_row0(fi)) * si;
        rs.X(i + 1, 0) = rs.X(0, i + 1);
        rs.b(i + 1) = (gs.prefix_b(li + 1) - gs.prefix_b(fi)) * si;
        for (int j = i; j < D; ++j) {
            const auto [fj, lj] = model.cell_ranges[static_cast<std::size_t>(j)];
            const double v = block_sum(fi, li, fj, lj) * si * inv_sqrt_len[static_cast<std::size_t>(j)];
            rs.X(i + 1, j + 1) = v;
            rs.X(j + 1, i + 1) = v;
        }
    }
    return rs;
}

// Fitted projection estimator.  `coefficients` are on the reduced orthonormal
// basis; h_hat carries the same content as a step function on (0, A].
struct Estimator {
    double nu_hat = 0.0;
    StepFunction h_hat;
    Model model;
    double contrast = 0.0;           // -theta.b at the minimiser
    Eigen::VectorXd coefficients;
    bool degenerate = false;

    int dimension() const { return model.size() + 1; }  // counts the baseline

    Candidate candidate() const { return {nu_hat, h_hat}; }
};

// Minimise the contrast over the model: solve X theta = b.  Fast path LDLT;
// any inconsistency falls back to SVD with singular values below
// 1e-10 * s_max treated as zero (minimal-norm solution, flagged degenerate).
inline Estimator fit_model(const ReducedSystem& rs) {
    const int D = rs.model.size();
    Estimator est;
    est.model = rs.model;

    Eigen::VectorXd theta;
    bool ok = false;
    {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(rs.X);
        // X is positive semidefinite; a (near-)zero pivot means rank
        // deficiency even when the residual happens to vanish, so route those
        // through the SVD to get the minimal-norm solution and an honest flag.
        const double pivot_max = ldlt.vectorD().cwiseAbs().maxCoeff();
        const bool full_rank = ldlt.info() == Eigen::Success &&
                               ldlt.vectorD().minCoeff() > 1e-12 * pivot_max;
        if (full_rank) {
            theta = ldlt.solve(rs.b);
            const double scale =
                rs.b.cwiseAbs().maxCoeff() + rs.X.cwiseAbs().maxCoeff() * theta.cwiseAbs().maxCoeff();
            const double resid = (rs.X * theta - rs.b).cwiseAbs().maxCoeff();
            ok = theta.allFinite() && resid <= 1e-9 * std::max(scale, 1e-300);
        }
    }
    if (!ok) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(rs.X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        theta = svd.solve(rs.b);
        est.degenerate = svd.rank() < D + 1;
        require(theta.allFinite(), "fit_model: solver produced non-finite coefficients");
    }

    est.coefficients = theta;
    est.nu_hat = theta(0);
    est.contrast = -theta.dot(rs.b);
    std::vector<double> values(static_cast<std::size_t>(D));
    for (int i = 0; i < D; ++i)
        values[static_cast<std::size_t>(i)] =
            theta(i + 1) / std::sqrt(rs.model.intervals[static_cast<std::size_t>(i)].length());
    est.h_hat = D == 0 ? StepFunction::constant(rs.A, 0.0)
                       : step_on_model(rs.model, values, rs.A);
    return est;
}

// Direct evaluation of the candidate intensity surrogate
// Psi(t) = mu + sum_{u in [t - A, t)} g(t - u); independent of the sweep.
inline double psi_eval(const Candidate& f, const EventSequence& ev, double t) {
    const double A = f.g.support();
    const auto& times = ev.times();
    auto lo = std::lower_bound(times.begin(), times.end(), t - A);
    double s = f.mu;
    for (; lo != times.end() && *lo < t; ++lo) s += f.g(t - *lo);
    return s;
}

namespace detail {

// Gram system on the candidate's own nonzero pieces; theta holds raw values.
inline std::pair<GramSystem, Eigen::VectorXd> candidate_system(const Candidate& f,
                                                               const EventSequence& ev,
                                                               const FitWindow& window) {
    std::vector<Interval> cells;
    std::vector<double> vals;
    const auto& br = f.g.breaks();
    for (std::size_t i = 0; i < f.g.pieces(); ++i) {
        if (f.g.values()[i] != 0.0) {
            cells.push_back({br[i], br[i + 1]});
            vals.push_back(f.g.values()[i]);
        }
    }
    if (cells.empty()) cells.push_back({0.0, f.g.support()});  // zero candidate
    GramSystem gs = build_gram(ev, cells, window);
    Eigen::VectorXd theta(gs.n_cells() + 1);
    theta(0) = f.mu;
    for (int i = 0; i < gs.n_cells(); ++i)
        theta(i + 1) = i < static_cast<int>(vals.size()) ? vals[static_cast<std::size_t>(i)] : 0.0;
    return {std::move(gs), std::move(theta)};
}

}  // namespace detail

// Empirical squared norm D^2(f) = (1/norm) int Psi_f^2 dt over the window.
inline double dt_square(const Candidate& f, const EventSequence& ev, const FitWindow& window) {
    auto [gs, theta] = detail::candidate_system(f, ev, window);
    return theta.dot(gs.X * theta);
}

// Least-squares contrast of an arbitrary step candidate (exact: the Gram
// system is rebuilt on the candidate's own pieces).
inline double contrast_of(const Candidate& f, const EventSequence& ev, const FitWindow& window) {
    auto [gs, theta] = detail::candidate_system(f, ev, window);
    return -2.0 * theta.dot(gs.b) + theta.dot(gs.X * theta);
}

// Projection of a step-kernel truth onto a model in the empirical D-norm:
// argmin_{f in S_m} D^2(f - s).  Assembled from one Gram system over the
// union of model cells and truth pieces (overlap is fine).
inline Estimator project_truth(const GroundTruth& truth, const Model& model,
                               const EventSequence& ev, const FitWindow& window) {
    require(std::holds_alternative<StepFunction>(truth.kernel),
            "project_truth: step-kernel truths only");
    const StepFunction& h = std::get<StepFunction>(truth.kernel);
    const int D = model.size();

    std::vector<Interval> cells;
    for (const Interval& iv : model.intervals) cells.push_back(iv);
    std::vector<double> hvals;
    const auto& br = h.breaks();
    for (std::size_t i = 0; i < h.pieces(); ++i) {
        if (h.values()[i] != 0.0) {
            cells.push_back({br[i], br[i + 1]});
            hvals.push_back(h.values()[i]);
        }
    }
    FitWindow w = window;
    GramSystem gs = build_gram(ev, cells.empty() ? std::vector<Interval>{{0.0, h.support()}} : cells, w);

    // X restricted to (1, model cells / sqrt len) against theta_s on (1, truth pieces).
    Eigen::MatrixXd Xm(D + 1, D + 1);
    Eigen::VectorXd rhs(D + 1);
    auto midx = [&](int i) { return 1 + i; };             // model cell rows in gs
    auto tidx = [&](int j) { return 1 + D + j; };         // truth piece rows in gs
    const int nh = static_cast<int>(hvals.size());

    Xm(0, 0) = gs.X(0, 0);
    rhs(0) = truth.nu * gs.X(0, 0);
    for (int j = 0; j < nh; ++j) rhs(0) += hvals[static_cast<std::size_t>(j)] * gs.X(0, tidx(j));
    for (int i = 0; i < D; ++i) {
        const double si = 1.0 / std::sqrt(model.intervals[static_cast<std::size_t>(i)].length());
        Xm(0, i + 1) = gs.X(0, midx(i)) * si;
        Xm(i + 1, 0) = Xm(0, i + 1);
        for (int j = i; j < D; ++j) {
            const double sj = 1.0 / std::sqrt(model.intervals[static_cast<std::size_t>(j)].length());
            Xm(i + 1, j + 1) = gs.X(midx(i), midx(j)) * si * sj;
            Xm(j + 1, i + 1) = Xm(i + 1, j + 1);
        }
        double r = truth.nu * gs.X(0, midx(i)) * si;
        for (int j = 0; j < nh; ++j)
            r += hvals[static_cast<std::size_t>(j)] * gs.X(midx(i), tidx(j)) * si;
        rhs(i + 1) = r;
    }

    ReducedSystem rs;
    rs.X = std::move(Xm);
    rs.b = std::move(rhs);
    rs.model = model;
    rs.norm = window.norm;
    rs.A = truth.support();
    Estimator est = fit_model(rs);
    // `contrast` from fit_model is -theta.rhs, which is not the data contrast
    // here; report the projection's actual contrast instead.
    est.contrast = contrast_of(est.candidate(), ev, window);
    return est;
}

}  // namespace hawkes
