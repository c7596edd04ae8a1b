#pragma once

// Composite Gauss-Legendre quadrature.  32 nodes per panel is exact to
// machine precision for the smooth integrands used here (Gaussian mixtures,
// trigonometric factors with a few oscillations per panel).

#include <array>
#include <cmath>
#include <functional>

#include "hawkes/common.hpp"

namespace hawkes {

struct GaussLegendre {
    std::array<double, 32> node;    // on [-1, 1]
    std::array<double, 32> weight;
};

// Nodes/weights via Newton iteration on the Legendre recurrence.
inline const GaussLegendre& gl32() {
    static const GaussLegendre table = [] {
        GaussLegendre t{};
        const int n = 32;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            t.node[i] = x;
            t.weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return t;
    }();
    return table;
}

template <class F>
double integrate_panels(F&& f, double a, double b, long panels) {
    if (!(b > a)) return 0.0;
    if (panels < 1) panels = 1;
    const auto& gl = gl32();
    const double h = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (long p = 0; p < panels; ++p) {
        const double lo = a + h * static_cast<double>(p);
        const double mid = lo + 0.5 * h;
        double acc = 0.0;
        for (int i = 0; i < 32; ++i) acc += gl.weight[i] * f(mid + 0.5 * h * gl.node[i]);
        total += acc * 0.5 * h;
    }
    return total;
}

// Panel width capped at `max_width` (used where an accuracy floor is pinned,
// e.g. L2 distances against smooth kernels refine to support/1024).
template <class F>
double integrate_max_width(F&& f, double a, double b, double max_width) {
    if (!(b > a)) return 0.0;
    require(max_width > 0.0, "integrate_max_width: width must be positive");
    long panels = static_cast<long>(std::ceil((b - a) / max_width));
    return integrate_panels(f, a, b, panels);
}

}  // namespace hawkes
