#pragma once

// Ground truths and intensity candidates.  A truth is a pair (nu, h) with
// baseline nu > 0 and reproduction kernel h supported in (0, A]; the process
// intensity is max(0, nu + sum_{events u in [t-A, t)} h(t - u)).  Candidates
// (mu, g) live in the same space with g piecewise constant.

#include <cmath>
#include <functional>
#include <variant>

#include "hawkes/common.hpp"
#include "hawkes/model.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/step_function.hpp"

namespace hawkes {

struct SmoothKernel {
    std::function<double(double)> f;   // value on (0, support]; not evaluated outside
    double support = 0.0;
    double upper_bound = 0.0;          // sup over (0, support], must dominate f
    double integral = 0.0;             // signed mass
    double integral_abs = 0.0;
    double integral_sq = 0.0;
    bool nonneg = true;
};

using Kernel = std::variant<StepFunction, SmoothKernel>;

inline double kernel_support(const Kernel& k) {
    if (std::holds_alternative<StepFunction>(k)) return std::get<StepFunction>(k).support();
    return std::get<SmoothKernel>(k).support;
}

inline double kernel_value(const Kernel& k, double t) {
    if (std::holds_alternative<StepFunction>(k)) return std::get<StepFunction>(k)(t);
    const auto& s = std::get<SmoothKernel>(k);
    if (!(t > 0.0) || t > s.support) return 0.0;
    return s.f(t);
}

inline double kernel_integral(const Kernel& k) {
    if (std::holds_alternative<StepFunction>(k)) return std::get<StepFunction>(k).integral();
    return std::get<SmoothKernel>(k).integral;
}

inline double kernel_integral_abs(const Kernel& k) {
    if (std::holds_alternative<StepFunction>(k)) return std::get<StepFunction>(k).integral_abs();
    return std::get<SmoothKernel>(k).integral_abs;
}

inline double kernel_integral_sq(const Kernel& k);  // below (needs quadrature)

inline double kernel_sup(const Kernel& k) {
    if (std::holds_alternative<StepFunction>(k))
        return std::max(0.0, std::get<StepFunction>(k).max_value());
    return std::get<SmoothKernel>(k).upper_bound;
}

inline bool kernel_nonneg(const Kernel& k) {
    if (std::holds_alternative<StepFunction>(k)) return std::get<StepFunction>(k).nonnegative();
    return std::get<SmoothKernel>(k).nonneg;
}

struct GroundTruth {
    double nu = 0.0;
    Kernel kernel = StepFunction();

    double support() const { return kernel_support(kernel); }
    double branching() const { return kernel_integral(kernel); }          // p, signed
    double branching_abs() const { return kernel_integral_abs(kernel); }  // integral of |h|

    void validate() const {
        require(nu > 0.0, "GroundTruth: nu must be positive");
        require(support() > 0.0, "GroundTruth: kernel support must be positive");
    }
};

// Piecewise-constant intensity candidate (mu, g).
struct Candidate {
    double mu = 0.0;
    StepFunction g;
};

// Clamp box for the final estimator: nu into [rho, eta], kernel values into
// [0, H].  Clamping is idempotent.
struct ClipBounds {
    double rho = 0.0;
    double eta = 0.0;
    double H = 0.0;

    void validate() const {
        require(rho > 0.0 && rho <= eta, "ClipBounds: need 0 < rho <= eta");
        require(H > 0.0, "ClipBounds: need H > 0");
    }
};

// --- L2 geometry on candidates/truths: ||f - g||^2 = (mu_f - mu_g)^2 + int (h_f - h_g)^2.

namespace detail {

// Panel width pinned to support/1024 wherever a smooth kernel is involved.
inline double smooth_l2_cross(const Kernel& a, const Kernel& b, double support) {
    auto fa = [&](double t) { return kernel_value(a, t); };
    auto fb = [&](double t) { return kernel_value(b, t); };
    return integrate_max_width(
        [&](double t) {
            const double d = fa(t) - fb(t);
            return d * d;
        },
        0.0, support, support / 1024.0);
}

}  // namespace detail

inline double kernel_l2_distance_sq(const Kernel& a, const Kernel& b) {
    require(kernel_support(a) == kernel_support(b),
            "kernel_l2_distance_sq: mismatched supports");
    if (std::holds_alternative<StepFunction>(a) && std::holds_alternative<StepFunction>(b))
        return l2_distance_sq(std::get<StepFunction>(a), std::get<StepFunction>(b));
    // A smooth kernel is involved: piecewise quadrature on panels split at the
    // step's breakpoints so the integrand is smooth inside every panel.
    const StepFunction* step = nullptr;
    if (std::holds_alternative<StepFunction>(a)) step = &std::get<StepFunction>(a);
    if (std::holds_alternative<StepFunction>(b)) step = &std::get<StepFunction>(b);
    const double support = kernel_support(a);
    if (!step) return detail::smooth_l2_cross(a, b, support);
    double total = 0.0;
    const auto& cuts = step->breaks();
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        auto f = [&](double t) {
            const double d = kernel_value(a, t) - kernel_value(b, t);
            return d * d;
        };
        total += integrate_max_width(f, cuts[i], cuts[i + 1], support / 1024.0);
    }
    return total;
}

inline double kernel_integral_sq(const Kernel& k) {
    if (std::holds_alternative<StepFunction>(k)) return std::get<StepFunction>(k).integral_sq();
    return std::get<SmoothKernel>(k).integral_sq;
}

inline double l2_distance_sq(const GroundTruth& a, const GroundTruth& b) {
    const double d = a.nu - b.nu;
    return d * d + kernel_l2_distance_sq(a.kernel, b.kernel);
}

inline double l2_distance_sq(const GroundTruth& a, const Candidate& b) {
    const double d = a.nu - b.mu;
    return d * d + kernel_l2_distance_sq(a.kernel, Kernel(b.g));
}

inline double l2_distance_sq(const Candidate& a, const Candidate& b) {
    const double d = a.mu - b.mu;
    return d * d + l2_distance_sq(a.g, b.g);
}

// Per-cell moments (int h, int h^2) of a kernel over a list of cells; exact
// for step kernels, Gauss-Legendre (panels split at nothing further; smooth
// integrand) otherwise.  Used to price ||h - hhat||^2 in O(cells) per model.
struct CellMoments {
    std::vector<double> m1;   // int_cell h
    std::vector<double> m2;   // int_cell h^2
    double total_sq = 0.0;    // int over the full support of h^2
};

inline CellMoments kernel_cell_moments(const Kernel& k, const std::vector<Interval>& cells) {
    CellMoments out;
    out.m1.resize(cells.size());
    out.m2.resize(cells.size());
    const double support = kernel_support(k);
    if (std::holds_alternative<StepFunction>(k)) {
        const StepFunction& h = std::get<StepFunction>(k);
        const auto& br = h.breaks();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double s1 = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < h.pieces(); ++i) {
                const double lo = std::max(cells[c].left, br[i]);
                const double hi = std::min(cells[c].right, br[i + 1]);
                if (hi > lo) {
                    s1 += h.values()[i] * (hi - lo);
                    s2 += h.values()[i] * h.values()[i] * (hi - lo);
                }
            }
            out.m1[c] = s1;
            out.m2[c] = s2;
        }
        out.total_sq = h.integral_sq();
        return out;
    }
    auto f = [&](double t) { return kernel_value(k, t); };
    for (std::size_t c = 0; c < cells.size(); ++c) {
        out.m1[c] = integrate_max_width(f, cells[c].left, cells[c].right, support / 1024.0);
        out.m2[c] = integrate_max_width([&](double t) { return f(t) * f(t); }, cells[c].left,
                                        cells[c].right, support / 1024.0);
    }
    out.total_sq = kernel_integral_sq(k);
    return out;
}

}  // namespace hawkes
