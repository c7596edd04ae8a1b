#pragma once

// Models are finite unions of half-open intervals (left, right] inside
// (0, A].  A model built on a base partition keeps, for every interval, the
// inclusive range [first, last] of base-cell indices it covers, so that
// reductions of a Gram system never have to match floating-point endpoints.

#include <cstdint>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/step_function.hpp"

namespace hawkes {

struct Interval {
    double left = 0.0;
    double right = 0.0;
    double length() const { return right - left; }
};

struct Model {
    std::vector<Interval> intervals;                    // disjoint, sorted
    std::vector<std::pair<int, int>> cell_ranges;       // per interval, on the base cells

    int size() const { return static_cast<int>(intervals.size()); }
    bool empty() const { return intervals.empty(); }
};

// Edges 0 = x_0 < x_1 < ... < x_n = A of the regular partition; computed as
// (j*A)/n so that truths specified at multiples of A/n align bit-exactly.
inline std::vector<double> regular_edges(double A, int n) {
    require(A > 0.0, "regular_edges: A must be positive");
    require(n >= 1, "regular_edges: need at least one cell");
    std::vector<double> e(static_cast<std::size_t>(n) + 1);
    for (int j = 0; j <= n; ++j) e[static_cast<std::size_t>(j)] = (static_cast<double>(j) * A) / n;
    return e;
}

inline std::vector<Interval> cells_from_edges(const std::vector<double>& edges) {
    require(edges.size() >= 2, "cells_from_edges: need at least two edges");
    std::vector<Interval> cells(edges.size() - 1);
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        require(edges[i] < edges[i + 1], "cells_from_edges: edges must increase");
        cells[i] = {edges[i], edges[i + 1]};
    }
    return cells;
}

inline std::vector<Interval> regular_cells(double A, int n) {
    return cells_from_edges(regular_edges(A, n));
}

inline Model void_model() { return {}; }

// Full partition: one interval per base cell.
inline Model full_model(const std::vector<Interval>& cells) {
    Model m;
    m.intervals = cells;
    m.cell_ranges.reserve(cells.size());
    for (int i = 0; i < static_cast<int>(cells.size()); ++i) m.cell_ranges.push_back({i, i});
    return m;
}

// Island subset: bit c of `mask` selects base cell c as its own interval.
// Adjacent selected cells stay separate intervals (separate coefficients).
inline Model model_from_mask(const std::vector<Interval>& cells, std::uint64_t mask) {
    const int n = static_cast<int>(cells.size());
    require(n <= 63, "model_from_mask: too many cells");
    require(mask < (1ull << n), "model_from_mask: mask out of range");
    Model m;
    for (int c = 0; c < n; ++c) {
        if (mask & (1ull << c)) {
            m.intervals.push_back(cells[static_cast<std::size_t>(c)]);
            m.cell_ranges.push_back({c, c});
        }
    }
    return m;
}

// Partition of (0, A] written on contiguous base cells: bit i of `cutmask`
// keeps interior edge i+1; intervals are the maximal runs between kept cuts.
inline Model model_from_cutmask(const std::vector<Interval>& cells, std::uint64_t cutmask) {
    const int n = static_cast<int>(cells.size());
    require(n >= 1 && n <= 63, "model_from_cutmask: bad cell count");
    require(cutmask < (1ull << (n - 1)), "model_from_cutmask: mask out of range");
    for (int c = 0; c + 1 < n; ++c)
        require(cells[static_cast<std::size_t>(c)].right == cells[static_cast<std::size_t>(c) + 1].left,
                "model_from_cutmask: base cells must be contiguous");
    Model m;
    int first = 0;
    for (int c = 0; c < n; ++c) {
        const bool last_cell = (c == n - 1);
        const bool cut_after = !last_cell && (cutmask & (1ull << c));
        if (last_cell || cut_after) {
            m.intervals.push_back({cells[static_cast<std::size_t>(first)].left,
                                   cells[static_cast<std::size_t>(c)].right});
            m.cell_ranges.push_back({first, c});
            first = c + 1;
        }
    }
    return m;
}

// Step function equal to v_i on model interval i and 0 elsewhere in (0, A].
inline StepFunction step_on_model(const Model& m, const std::vector<double>& values, double A) {
    require(values.size() == m.intervals.size(), "step_on_model: value count mismatch");
    std::vector<double> breaks{0.0};
    std::vector<double> vals;
    for (std::size_t i = 0; i < m.intervals.size(); ++i) {
        const Interval& iv = m.intervals[i];
        if (iv.left > breaks.back()) {
            breaks.push_back(iv.left);
            vals.push_back(0.0);
        }
        require(iv.left == breaks.back(), "step_on_model: intervals out of order");
        breaks.push_back(iv.right);
        vals.push_back(values[i]);
    }
    if (breaks.back() < A) {
        breaks.push_back(A);
        vals.push_back(0.0);
    }
    require(breaks.back() == A, "step_on_model: model exceeds support");
    return StepFunction(std::move(breaks), std::move(vals));
}

}  // namespace hawkes
