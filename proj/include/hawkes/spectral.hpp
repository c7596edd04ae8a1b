#pragma once

// Second-order checks against closed-form stationary theory.
//
// For a stationary process with baseline nu and kernel h (p = int h < 1) the
// Bartlett spectral density is f_N(w) = nu / (2 pi (1-p) |1 - Fh(w)|^2) with
// Fh(w) = int e^{iwt} h(t) dt, and for a step test function g:
//
//   E[(sum_{u in [t-A, t)} g(t-u))^2]
//     = nu^2/(1-p)^2 (int g)^2 + int_R |Fg(-w)|^2 f_N(w) dw
//    <= nu^2/(1-p)^2 (int g)^2 + nu/(1-p)^3 int g^2.
//
// The integral is evaluated by composite Gauss-Legendre on [0, W] (the
// integrand is even), W chosen so the spilled tail — bounded through
// |Fg(w)| <= 2 sum|v_j| / w and f_N <= nu/(2 pi (1-pbar)^3) with pbar =
// int|h| — stays below half the error budget; panel counts are doubled until
// the quadrature stabilises, and the reported error adds both parts.
//
// The empirical-norm band (norm equivalence): for any candidate f = (mu, g),
//   L^2 ||f||^2 <= E D_T^2(f) <= K^2 ||f||^2,  ||f||^2 = mu^2 + int g^2,
//   K^2 = 2 max(1, nu/(1-p)^2 (nu A + 1/(1-p))),
//   L^2 = min(nu/4, (1-p) / (8 A nu + 1))        (nonnegative kernels).

#include <cmath>
#include <complex>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/gram.hpp"
#include "hawkes/quadrature.hpp"
#include "hawkes/simulate.hpp"
#include "hawkes/truth.hpp"

namespace hawkes {

inline double mean_intensity(const GroundTruth& truth) {
    truth.validate();
    const double p = truth.branching();
    require(p < 1.0, "mean_intensity: branching ratio must be < 1");
    return truth.nu / (1.0 - p);
}

struct NormConstants {
    double L2 = 0.0;
    double K2 = 0.0;
};

inline NormConstants norm_constants(const GroundTruth& truth) {
    truth.validate();
    require(kernel_nonneg(truth.kernel), "norm_constants: kernel must be nonnegative");
    const double p = truth.branching();
    require(p < 1.0, "norm_constants: branching ratio must be < 1");
    const double nu = truth.nu;
    const double A = truth.support();
    NormConstants nc;
    nc.K2 = 2.0 * std::max(1.0, nu / ((1.0 - p) * (1.0 - p)) * (nu * A + 1.0 / (1.0 - p)));
    nc.L2 = std::min(nu / 4.0, (1.0 - p) / (8.0 * A * nu + 1.0));
    require(nc.L2 <= nc.K2, "norm_constants: inconsistent constants");
    return nc;
}

namespace detail {

// Fourier transform of a step function: sum_j v_j (e^{iwb} - e^{iwa}) / (iw).
inline std::complex<double> step_fourier(const StepFunction& f, double w) {
    if (w == 0.0) return {f.integral(), 0.0};
    const std::complex<double> iw(0.0, w);
    std::complex<double> s(0.0, 0.0);
    const auto& br = f.breaks();
    for (std::size_t i = 0; i < f.pieces(); ++i) {
        const double v = f.values()[i];
        if (v == 0.0) continue;
        s += v * (std::exp(iw * br[i + 1]) - std::exp(iw * br[i]));
    }
    return s / iw;
}

inline double max_active_break(const StepFunction& f) {
    const auto& br = f.breaks();
    double m = 0.0;
    for (std::size_t i = 0; i < f.pieces(); ++i)
        if (f.values()[i] != 0.0) m = std::max(m, br[i + 1]);
    return m > 0.0 ? m : f.support();
}

inline double abs_coeff_sum(const StepFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += std::abs(v);
    return s;
}

}  // namespace detail

struct SecondMomentResult {
    double value = 0.0;        // the exact stationary second moment
    double error = 0.0;        // quadrature delta + spectral tail bound
    double upper_bound = 0.0;  // closed-form bound, must dominate `value`
    double mean_part = 0.0;    // nu^2/(1-p)^2 (int g)^2
    double cutoff = 0.0;       // W actually used
};

inline SecondMomentResult second_moment_exact(const StepFunction& g, const GroundTruth& truth,
                                              double rel_tol = 1e-6) {
    truth.validate();
    require(std::holds_alternative<StepFunction>(truth.kernel),
            "second_moment_exact: step kernels only");
    const StepFunction& h = std::get<StepFunction>(truth.kernel);
    const double p = truth.branching();
    const double pbar = truth.branching_abs();
    require(pbar < 1.0, "second_moment_exact: need int |h| < 1");
    const double nu = truth.nu;

    SecondMomentResult out;
    const double ig = g.integral();
    out.mean_part = nu * nu / ((1.0 - p) * (1.0 - p)) * ig * ig;
    out.upper_bound = out.mean_part + nu / std::pow(1.0 - pbar, 3) * g.integral_sq();

    const double scale = std::max(out.upper_bound, 1e-300);
    const double tol_abs = rel_tol * scale;

    // Split the spectral integral with Parseval: the flat part of the
    // density, nu / (2 pi (1-p)), integrates |Fg|^2 to 2 pi * int g^2
    // exactly, and only the correction
    //   |Fg(w)|^2 * (2 Re Fh - |Fh|^2) / |1 - Fh|^2
    // needs quadrature.  Its tail decays like 1/w^3 (versus 1/w^2 for
    // the raw integrand), so the cutoff W grows like sqrt(1/tol)
    // instead of 1/tol.  Bounds used: |Fg(w)| <= 2 Sg / w,
    // |Fh(w)| <= 2 Sh / w, |1 - Fh| >= 1 - pbar.
    const double Sg = detail::abs_coeff_sum(g);
    const double Sh = detail::abs_coeff_sum(h);
    const double pref = nu / (2.0 * M_PI * (1.0 - p));
    const double tail_coef2 =
        8.0 * nu * Sg * Sg * Sh / (M_PI * (1.0 - p) * (1.0 - pbar) * (1.0 - pbar));
    const double tail_coef3 = 16.0 * nu * Sg * Sg * Sh * Sh /
                              (3.0 * M_PI * (1.0 - p) * (1.0 - pbar) * (1.0 - pbar));
    double W = std::max(1.0, std::sqrt(2.0 * tail_coef2 / tol_abs));
    const double tail_bound = tail_coef2 / (W * W) + tail_coef3 / (W * W * W);

    auto integrand = [&](double w) {
        const std::complex<double> fg = detail::step_fourier(g, w);
        const std::complex<double> fh = detail::step_fourier(h, w);
        const double denom = std::norm(1.0 - fh);
        const double excess = 2.0 * fh.real() - std::norm(fh);
        return pref * std::norm(fg) * excess / denom;
    };

    // ~8 oscillation periods per 32-node panel.
    const double bmax = std::max(detail::max_active_break(g), detail::max_active_break(h));
    long panels = static_cast<long>(std::ceil(W / (8.0 * 2.0 * M_PI / bmax)));
    panels = std::max<long>(panels, 16);

    double prev = 2.0 * integrate_panels(integrand, 0.0, W, panels);
    double cur = prev;
    double delta = 0.0;
    bool converged = false;
    for (int round = 0; round < 8; ++round) {
        panels *= 2;
        cur = 2.0 * integrate_panels(integrand, 0.0, W, panels);
        delta = std::abs(cur - prev);
        prev = cur;
        if (delta <= tol_abs / 2.0) {
            converged = true;
            break;
        }
    }
    if (!converged) throw NumericError("second_moment_exact: quadrature did not stabilise");

    out.value = out.mean_part + nu / (1.0 - p) * g.integral_sq() + cur;
    out.error = delta + tail_bound;
    out.cutoff = W;
    return out;
}

struct DtBandReport {
    double mc_mean = 0.0;
    double mc_se = 0.0;
    double band_lo = 0.0;   // L^2 ||f||^2
    double band_hi = 0.0;   // K^2 ||f||^2
    double norm_sq = 0.0;   // ||f||^2
    int reps = 0;
    bool inside = false;    // within the band, 4 standard errors of slack
};

// Monte Carlo check that E D_T^2(f) sits in the norm-equivalence band.
inline DtBandReport dt_expectation_check(const Candidate& f, const GroundTruth& truth, double T,
                                         int reps, std::uint64_t seed) {
    require(reps >= 2, "dt_expectation_check: need at least two replicates");
    const NormConstants nc = norm_constants(truth);
    DtBandReport rep;
    rep.reps = reps;
    rep.norm_sq = f.mu * f.mu + f.g.integral_sq();
    rep.band_lo = nc.L2 * rep.norm_sq;
    rep.band_hi = nc.K2 * rep.norm_sq;

    double sum = 0.0, sumsq = 0.0;
    for (int r = 0; r < reps; ++r) {
        SimConfig cfg;
        cfg.horizon = T;
        cfg.seed = seed;
        cfg.stream = static_cast<std::uint64_t>(r);
        EventSequence ev = simulate(truth, cfg);
        const double d2 = dt_square(f, ev, {0.0, T, T});
        sum += d2;
        sumsq += d2 * d2;
    }
    rep.mc_mean = sum / reps;
    const double var = std::max(0.0, (sumsq - sum * sum / reps) / (reps - 1.0));
    rep.mc_se = std::sqrt(var / reps);
    rep.inside = rep.mc_mean >= rep.band_lo - 4.0 * rep.mc_se &&
                 rep.mc_mean <= rep.band_hi + 4.0 * rep.mc_se;
    return rep;
}

struct SpectralReport {
    double mean_intensity = 0.0;
    NormConstants norms;
    bool has_second_moment = false;
    SecondMomentResult second_moment;
};

}  // namespace hawkes
