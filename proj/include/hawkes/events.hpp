#pragma once

// An observed point pattern on a window [lower, upper].  Times are kept
// sorted and strictly increasing (simple points); duplicate handling is a
// loader policy.  Estimation on [w0, w1] needs history back to w0 - A, hence
// the window carries `lower` separately from the first event time.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hawkes/common.hpp"

namespace hawkes {

class EventSequence {
  public:
    EventSequence() : lower_(0.0), upper_(1.0) {}

    EventSequence(std::vector<double> times, double lower, double upper)
        : times_(std::move(times)), lower_(lower), upper_(upper) {
        require(lower_ < upper_, "EventSequence: empty window");
        std::sort(times_.begin(), times_.end());
        for (double t : times_) {
            require(std::isfinite(t), "EventSequence: non-finite event time");
            require(t >= lower_ && t <= upper_, "EventSequence: event outside window");
        }
        for (std::size_t i = 0; i + 1 < times_.size(); ++i)
            require(times_[i] < times_[i + 1], "EventSequence: duplicate event times");
    }

    const std::vector<double>& times() const { return times_; }
    long size() const { return static_cast<long>(times_.size()); }
    double lower() const { return lower_; }
    double upper() const { return upper_; }

    // Number of events in [a, b).
    long count_in(double a, double b) const {
        auto lo = std::lower_bound(times_.begin(), times_.end(), a);
        auto hi = std::lower_bound(times_.begin(), times_.end(), b);
        return static_cast<long>(hi - lo);
    }

    // Events in [lo, hi] become a new sequence with window [lo, hi].
    EventSequence restrict(double lo, double hi) const {
        require(lo < hi, "restrict: empty window");
        auto a = std::lower_bound(times_.begin(), times_.end(), lo);
        auto b = std::upper_bound(times_.begin(), times_.end(), hi);
        return EventSequence(std::vector<double>(a, b), lo, hi);
    }

  private:
    std::vector<double> times_;
    double lower_, upper_;
};

// Number of events in the look-back window [t - A, t); the probe instant
// itself is excluded, matching the kernel's left-open convention.
inline long window_count(const EventSequence& ev, double t, double A) {
    require(A > 0.0, "window_count: A must be positive");
    return ev.count_in(t - A, t);
}

struct LoadOptions {
    enum class Duplicates { collapse, jitter };
    Duplicates duplicates = Duplicates::collapse;
    double jitter_eps = 0.0;  // spacing used when duplicates == jitter
    // Window; NaN means "infer from the data" (min/max event time).
    double lower = std::nan("");
    double upper = std::nan("");
};

struct LoadResult {
    EventSequence events;
    long n_duplicates = 0;
};

// Text format: one position per line, '#' starts a comment, blank lines
// ignored, any order.  Values must parse fully as floating point.
inline LoadResult load_events(const std::string& path, const LoadOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) throw DataError("load_events: cannot open '" + path + "'");
    std::vector<double> times;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        // trim
        const auto b = line.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) continue;
        const auto e = line.find_last_not_of(" \t\r\n");
        std::string tok = line.substr(b, e - b + 1);
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(tok, &used);
        } catch (const std::exception&) {
            throw DataError("load_events: bad number at " + path + ":" + std::to_string(lineno));
        }
        if (used != tok.size())
            throw DataError("load_events: trailing junk at " + path + ":" + std::to_string(lineno));
        if (!std::isfinite(v))
            throw DataError("load_events: non-finite value at " + path + ":" + std::to_string(lineno));
        times.push_back(v);
    }
    std::sort(times.begin(), times.end());

    long dups = 0;
    if (opt.duplicates == LoadOptions::Duplicates::collapse) {
        auto last = std::unique(times.begin(), times.end());
        dups = static_cast<long>(times.end() - last);
        times.erase(last, times.end());
    } else {
        require(opt.jitter_eps > 0.0, "load_events: jitter requires a positive epsilon");
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (times[i] == times[i - 1]) {
                times[i] = times[i - 1] + opt.jitter_eps;
                ++dups;
            }
        }
        std::sort(times.begin(), times.end());
        for (std::size_t i = 1; i < times.size(); ++i)
            require(times[i] != times[i - 1], "load_events: jitter failed to separate duplicates");
    }

    double lo = opt.lower, hi = opt.upper;
    if (std::isnan(lo)) lo = times.empty() ? 0.0 : times.front();
    if (std::isnan(hi)) hi = times.empty() ? lo + 1.0 : times.back();
    require(lo < hi || (times.empty() && lo <= hi),
            "load_events: degenerate window");
    if (lo == hi) hi = lo + 1.0;
    return {EventSequence(std::move(times), lo, hi), dups};
}

// One position per line, shortest exact decimal (%.17g round-trips doubles).
inline void save_events(const std::string& path, const EventSequence& ev) {
    std::ofstream out(path);
    if (!out) throw DataError("save_events: cannot open '" + path + "'");
    char buf[64];
    for (double t : ev.times()) {
        std::snprintf(buf, sizeof(buf), "%.17g\n", t);
        out << buf;
    }
    if (!out) throw DataError("save_events: write failed for '" + path + "'");
}

}  // namespace hawkes
