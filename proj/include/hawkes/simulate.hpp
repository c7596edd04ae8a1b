#pragma once

// Stationary Hawkes samplers.
//
//   cluster   exact branching construction; requires h >= 0 and p = int h < 1.
//             Immigrants are Poisson(nu) on [-burn_in, T]; each point spawns
//             Poisson(p) children at i.i.d. offsets with density h/p.
//   thinning  Ogata rejection against the running bound
//             nu + max(h)+ * N([t-A, t]); handles signed kernels through the
//             clipped intensity max(0, nu + sum h(t-u)); requires int|h| < 1.
//
// Both return the points falling in [-A, T]; the pre-window [-burn_in, -A)
// only serves to damp the missing-ancestor bias at the left edge.

#include <algorithm>
#include <cmath>
#include <deque>
#include <optional>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/events.hpp"
#include "hawkes/rng.hpp"
#include "hawkes/truth.hpp"

namespace hawkes {

struct SimConfig {
    double horizon = 0.0;            // T
    double burn_in = -1.0;           // pre-window length before 0; < 0 means 11*A
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;        // replicate index
    enum class Method { auto_select, cluster, thinning };
    Method method = Method::auto_select;
};

// Stationary mean of N[0, T]: nu * T / (1 - p).
inline double expected_count(const GroundTruth& truth, double T) {
    truth.validate();
    const double p = truth.branching();
    require(p < 1.0, "expected_count: branching ratio must be < 1");
    return truth.nu * T / (1.0 - p);
}

namespace detail {

inline double resolve_burn_in(const GroundTruth& truth, const SimConfig& cfg) {
    const double A = truth.support();
    const double burn = cfg.burn_in < 0.0 ? 11.0 * A : cfg.burn_in;
    require(burn >= A, "simulate: burn-in must cover one kernel support");
    return burn;
}

// Inverse-CDF sampler for offsets with density h/p (step kernels).
class StepOffsetSampler {
  public:
    explicit StepOffsetSampler(const StepFunction& h) {
        const auto& br = h.breaks();
        double acc = 0.0;
        for (std::size_t i = 0; i < h.pieces(); ++i) {
            const double mass = h.values()[i] * (br[i + 1] - br[i]);
            require(mass >= 0.0, "cluster: kernel must be nonnegative");
            if (mass > 0.0) {
                lo_.push_back(br[i]);
                hi_.push_back(br[i + 1]);
                cum_.push_back(acc += mass);
            }
        }
        require(acc > 0.0, "cluster: kernel has no mass");
        total_ = acc;
    }

    double draw(Rng& rng) const {
        const double u = rng.uniform() * total_;
        std::size_t i = static_cast<std::size_t>(
            std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
        if (i >= cum_.size()) i = cum_.size() - 1;
        const double prev = i == 0 ? 0.0 : cum_[i - 1];
        const double frac = (u - prev) / (cum_[i] - prev);
        return lo_[i] + frac * (hi_[i] - lo_[i]);
    }

  private:
    std::vector<double> lo_, hi_, cum_;
    double total_ = 0.0;
};

// Rejection sampler for offsets with density h/p (bounded kernels).
inline double smooth_offset_draw(const SmoothKernel& k, Rng& rng) {
    for (int tries = 0; tries < 1 << 20; ++tries) {
        const double x = rng.uniform() * k.support;
        if (rng.uniform() * k.upper_bound <= k.f(x)) return x;
    }
    throw NumericError("cluster: offset rejection sampler failed to accept");
}

}  // namespace detail

inline EventSequence simulate_cluster(const GroundTruth& truth, const SimConfig& cfg) {
    truth.validate();
    require(kernel_nonneg(truth.kernel), "simulate_cluster: kernel must be nonnegative");
    const double p = truth.branching();
    require(p < 1.0, "simulate_cluster: branching ratio must be < 1");
    require(cfg.horizon > 0.0, "simulate_cluster: horizon must be positive");

    const double A = truth.support();
    const double burn = detail::resolve_burn_in(truth, cfg);
    const double T = cfg.horizon;
    Rng rng(cfg.seed, cfg.stream);

    std::vector<double> points;
    std::deque<std::pair<double, int>> queue;  // (position, generation)

    double t = -burn;
    for (;;) {
        t += rng.exponential(truth.nu);
        if (t > T) break;
        queue.emplace_back(t, 0);
    }

    const bool step_kernel = std::holds_alternative<StepFunction>(truth.kernel);
    std::optional<detail::StepOffsetSampler> offsets;
    if (step_kernel && p > 0.0)
        offsets.emplace(std::get<StepFunction>(truth.kernel));

    while (!queue.empty()) {
        const auto [parent, gen] = queue.front();
        queue.pop_front();
        points.push_back(parent);
        if (gen >= 10000)
            throw NumericError("simulate_cluster: generation depth exceeded 10000");
        const long kids = rng.poisson(p);
        for (long k = 0; k < kids; ++k) {
            const double off = step_kernel
                                   ? offsets->draw(rng)
                                   : detail::smooth_offset_draw(
                                         std::get<SmoothKernel>(truth.kernel), rng);
            const double child = parent + off;
            if (child <= T) queue.emplace_back(child, gen + 1);
        }
    }

    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    std::vector<double> kept;
    kept.reserve(points.size());
    for (double x : points)
        if (x >= -A && x <= T) kept.push_back(x);
    return EventSequence(std::move(kept), -A, T);
}

inline EventSequence simulate_thinning(const GroundTruth& truth, const SimConfig& cfg) {
    truth.validate();
    require(truth.branching_abs() < 1.0, "simulate_thinning: need int |h| < 1");
    require(cfg.horizon > 0.0, "simulate_thinning: horizon must be positive");

    const double A = truth.support();
    const double burn = detail::resolve_burn_in(truth, cfg);
    const double T = cfg.horizon;
    const double hplus = std::max(0.0, kernel_sup(truth.kernel));
    Rng rng(cfg.seed, cfg.stream);

    std::vector<double> events;
    double t = -burn;
    for (;;) {
        // Dominating rate over (t, next candidate]: the look-back window can
        // only lose points until the next arrival, so this bound is valid.
        auto first_in_window = std::lower_bound(events.begin(), events.end(), t - A);
        const double bound = truth.nu + hplus * static_cast<double>(events.end() - first_in_window);
        t += rng.exponential(bound);
        if (t > T) break;
        double lam = truth.nu;
        auto it = std::lower_bound(events.begin(), events.end(), t - A);
        for (; it != events.end() && *it < t; ++it) lam += kernel_value(truth.kernel, t - *it);
        lam = std::max(0.0, lam);
        if (lam > bound * (1.0 + 1e-12))
            throw NumericError("simulate_thinning: intensity exceeded its bound");
        if (rng.uniform() * bound <= lam) events.push_back(t);
    }

    std::vector<double> kept;
    kept.reserve(events.size());
    for (double x : events)
        if (x >= -A) kept.push_back(x);
    return EventSequence(std::move(kept), -A, T);
}

inline EventSequence simulate(const GroundTruth& truth, const SimConfig& cfg) {
    switch (cfg.method) {
        case SimConfig::Method::cluster:
            return simulate_cluster(truth, cfg);
        case SimConfig::Method::thinning:
            return simulate_thinning(truth, cfg);
        case SimConfig::Method::auto_select:
        default:
            return kernel_nonneg(truth.kernel) ? simulate_cluster(truth, cfg)
                                               : simulate_thinning(truth, cfg);
    }
}

}  // namespace hawkes
