#pragma once

// Piecewise-constant function on (0, support]: value[i] holds on the
// half-open piece (breaks[i], breaks[i+1]], and the function is 0 outside
// (0, support].  The left-open convention matches the reproduction kernel's
// role in the intensity: an event at distance exactly 0 never contributes.

#include <algorithm>
#include <cmath>
#include <vector>

#include "hawkes/common.hpp"

namespace hawkes {

class StepFunction {
  public:
    StepFunction() : breaks_{0.0, 1.0}, values_{0.0} {}

    StepFunction(std::vector<double> breaks, std::vector<double> values)
        : breaks_(std::move(breaks)), values_(std::move(values)) {
        require(breaks_.size() >= 2, "StepFunction: need at least two breakpoints");
        require(values_.size() + 1 == breaks_.size(),
                "StepFunction: values/breakpoints size mismatch");
        require(breaks_.front() == 0.0, "StepFunction: first breakpoint must be 0");
        for (std::size_t i = 0; i + 1 < breaks_.size(); ++i)
            require(breaks_[i] < breaks_[i + 1],
                    "StepFunction: breakpoints must be strictly increasing");
        for (double v : values_)
            require(std::isfinite(v), "StepFunction: values must be finite");
    }

    static StepFunction constant(double support, double value) {
        return StepFunction({0.0, support}, {value});
    }

    // value * 1_{(left, right]} embedded in (0, support].
    static StepFunction indicator(double left, double right, double support, double value) {
        require(0.0 <= left && left < right && right <= support,
                "StepFunction::indicator: need 0 <= left < right <= support");
        std::vector<double> b{0.0};
        std::vector<double> v;
        if (left > 0.0) {
            b.push_back(left);
            v.push_back(0.0);
        }
        b.push_back(right);
        v.push_back(value);
        if (right < support) {
            b.push_back(support);
            v.push_back(0.0);
        }
        return StepFunction(std::move(b), std::move(v));
    }

    double support() const { return breaks_.back(); }
    const std::vector<double>& breaks() const { return breaks_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t pieces() const { return values_.size(); }

    double operator()(double t) const {
        if (!(t > 0.0) || t > breaks_.back()) return 0.0;
        // piece index i with breaks[i] < t <= breaks[i+1]
        auto it = std::lower_bound(breaks_.begin(), breaks_.end(), t);
        return values_[static_cast<std::size_t>(it - breaks_.begin()) - 1];
    }

    double integral() const {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            s += values_[i] * (breaks_[i + 1] - breaks_[i]);
        return s;
    }

    double integral_abs() const {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            s += std::abs(values_[i]) * (breaks_[i + 1] - breaks_[i]);
        return s;
    }

    double integral_sq() const {
        double s = 0.0;
        for (std::size_t i = 0; i < values_.size(); ++i)
            s += values_[i] * values_[i] * (breaks_[i + 1] - breaks_[i]);
        return s;
    }

    double max_value() const {
        double m = values_.front();
        for (double v : values_) m = std::max(m, v);
        return m;
    }

    double min_value() const {
        double m = values_.front();
        for (double v : values_) m = std::min(m, v);
        return m;
    }

    double max_abs() const { return std::max(std::abs(max_value()), std::abs(min_value())); }

    bool nonnegative() const { return min_value() >= 0.0; }

    StepFunction scaled(double c) const {
        std::vector<double> v = values_;
        for (double& x : v) x *= c;
        return StepFunction(breaks_, std::move(v));
    }

    // Values clamped into [lo, hi]; breakpoints unchanged.
    StepFunction clamped(double lo, double hi) const {
        require(lo <= hi, "StepFunction::clamped: lo > hi");
        std::vector<double> v = values_;
        for (double& x : v) x = std::min(hi, std::max(lo, x));
        return StepFunction(breaks_, std::move(v));
    }

    // Sorted union of both breakpoint sets (exact double comparison; callers
    // arrange for shared cut points to be bit-identical).
    static std::vector<double> merged_breaks(const StepFunction& f, const StepFunction& g) {
        std::vector<double> m;
        m.reserve(f.breaks_.size() + g.breaks_.size());
        std::merge(f.breaks_.begin(), f.breaks_.end(), g.breaks_.begin(), g.breaks_.end(),
                   std::back_inserter(m));
        m.erase(std::unique(m.begin(), m.end()), m.end());
        return m;
    }

  private:
    std::vector<double> breaks_;
    std::vector<double> values_;
};

// Exact L2 distance squared between two step functions on (0, max support].
// Supports may differ; each function is 0 beyond its own support.
inline double l2_distance_sq(const StepFunction& f, const StepFunction& g) {
    std::vector<double> cuts = StepFunction::merged_breaks(f, g);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double len = cuts[i + 1] - cuts[i];
        if (len <= 0.0) continue;
        const double d = f(cuts[i + 1]) - g(cuts[i + 1]);  // right end lies inside the piece
        s += d * d * len;
    }
    return s;
}

}  // namespace hawkes
