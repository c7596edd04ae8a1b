#pragma once

// Model families over a base size N (at most 26 cells unless forced):
//
//   nested     void + dyadic regular partitions of sizes 2^0 .. 2^J (size = 2^J)
//   regular    void + regular partitions of sizes 1 .. N
//   irregular  void + every partition written on the regular N-cell grid
//              (one model per subset of the N-1 interior edges)
//   islands    every subset of the N grid cells, each kept cell its own
//              interval (2^N models; the empty subset is the void model)
//
// Enumeration order is part of the contract (ties break to the smallest
// index): regular/nested enumerate size ascending with index 0 = void;
// irregular maps index 0 to void and index 1+mask to the cut bitmask;
// islands' index is the cell bitmask itself.

#include <cstdint>
#include <mutex>
#include <vector>

#include "hawkes/common.hpp"
#include "hawkes/events.hpp"
#include "hawkes/gram.hpp"
#include "hawkes/model.hpp"

namespace hawkes {

struct Strategy {
    enum class Kind { nested, regular, irregular, islands };
    Kind kind = Kind::islands;
    int size = 15;              // N (cells of the base grid); 2^J for nested
    bool force_large = false;   // lift the 26-cell guard

    void validate() const {
        require(size >= 1, "Strategy: size must be >= 1");
        if (kind == Kind::nested) {
            int s = size;
            while (s > 1 && s % 2 == 0) s /= 2;
            require(s == 1, "Strategy: nested size must be a power of two");
        }
        // the guard protects against 2^N model enumeration, so it only
        // applies to the exponential families
        if (!force_large && (kind == Kind::irregular || kind == Kind::islands))
            require(size <= 26, "Strategy: size > 26 requires force_large");
        require(size <= 62, "Strategy: size out of range");
    }
};

inline const char* strategy_name(Strategy::Kind k) {
    switch (k) {
        case Strategy::Kind::nested: return "nested";
        case Strategy::Kind::regular: return "regular";
        case Strategy::Kind::irregular: return "irregular";
        case Strategy::Kind::islands: return "islands";
    }
    return "?";
}

inline long family_size(const Strategy& st) {
    st.validate();
    switch (st.kind) {
        case Strategy::Kind::nested: {
            long count = 2;  // void + size 1
            for (int s = st.size; s > 1; s /= 2) ++count;
            return count;
        }
        case Strategy::Kind::regular:
            return st.size + 1;
        case Strategy::Kind::irregular:
            return (1ll << (st.size - 1)) + 1;
        case Strategy::Kind::islands:
            return 1ll << st.size;
    }
    return 0;
}

inline int max_dimension(const Strategy& st) { return st.size; }

// Grams + deterministic random-access enumeration for one family on one
// fit window.  Regular/nested build one Gram system per partition size;
// irregular/islands share the base-grid system.
class FamilyScan {
  public:
    FamilyScan(Strategy st, double A, const EventSequence& ev, const FitWindow& window)
        : strategy_(st), A_(A) {
        st.validate();
        require(A > 0.0, "FamilyScan: A must be positive");
        switch (st.kind) {
            case Strategy::Kind::nested:
                sizes_.push_back(1);
                for (int s = 2; s <= st.size; s *= 2) sizes_.push_back(s);
                break;
            case Strategy::Kind::regular:
                for (int s = 1; s <= st.size; ++s) sizes_.push_back(s);
                break;
            case Strategy::Kind::irregular:
            case Strategy::Kind::islands:
                sizes_.push_back(st.size);
                break;
        }
        grams_.reserve(sizes_.size());
        for (int s : sizes_) grams_.push_back(build_gram(ev, regular_cells(A, s), window));
    }

    const Strategy& strategy() const { return strategy_; }
    double A() const { return A_; }
    long size() const { return family_size(strategy_); }
    const GramSystem& base_gram() const { return grams_.back(); }

    Model model(long index) const {
        switch (strategy_.kind) {
            case Strategy::Kind::nested:
            case Strategy::Kind::regular: {
                require(index >= 0 && index <= static_cast<long>(sizes_.size()),
                        "FamilyScan: index out of range");
                if (index == 0) return void_model();
                return full_model(grams_[static_cast<std::size_t>(index - 1)].cells);
            }
            case Strategy::Kind::irregular: {
                require(index >= 0 && index < size(), "FamilyScan: index out of range");
                if (index == 0) return void_model();
                return model_from_cutmask(grams_[0].cells,
                                          static_cast<std::uint64_t>(index - 1));
            }
            case Strategy::Kind::islands:
            default:
                require(index >= 0 && index < size(), "FamilyScan: index out of range");
                return model_from_mask(grams_[0].cells, static_cast<std::uint64_t>(index));
        }
    }

    ReducedSystem reduced(long index) const {
        switch (strategy_.kind) {
            case Strategy::Kind::nested:
            case Strategy::Kind::regular: {
                const Model m = model(index);
                const GramSystem& gs = index == 0 ? grams_[0]
                                                  : grams_[static_cast<std::size_t>(index - 1)];
                return reduce_to_model(gs, m);
            }
            case Strategy::Kind::irregular:
            case Strategy::Kind::islands:
            default:
                return reduce_to_model(grams_[0], model(index));
        }
    }

    Estimator fit(long index) const { return fit_model(reduced(index)); }

  private:
    Strategy strategy_;
    double A_;
    std::vector<int> sizes_;
    std::vector<GramSystem> grams_;
};

// Best fitted model per dimension (dimension = |m|, the number of kernel
// intervals; reports elsewhere quote |m| + 1 to count the baseline).
struct DimRecord {
    int dim = 0;
    long index = -1;
    Estimator est;
    bool filled = false;
};

struct ContrastCurve {
    Strategy strategy;
    double A = 0.0;
    std::vector<DimRecord> records;  // slot d = dimension d; all slots filled

    const DimRecord& at(int dim) const { return records[static_cast<std::size_t>(dim)]; }
    int max_dim() const { return static_cast<int>(records.size()) - 1; }
};

namespace detail {

inline void absorb_record(DimRecord& slot, int dim, long index, Estimator&& est) {
    const bool better =
        !slot.filled || est.contrast < slot.est.contrast ||
        (est.contrast == slot.est.contrast && index < slot.index);
    if (better) {
        slot.dim = dim;
        slot.index = index;
        slot.est = std::move(est);
        slot.filled = true;
    }
}

}  // namespace detail

// Fit every model in the family and keep the best contrast per dimension.
// `visit` (optional) additionally receives every fit, in enumeration order
// within each worker chunk; chunk boundaries depend on `threads` but per-model
// results do not, and the returned curve is merged deterministically.
inline ContrastCurve best_per_dimension(
    const FamilyScan& scan, int threads = 1,
    const std::function<void(long, const Model&, const Estimator&)>& visit = nullptr) {
    const long n = scan.size();
    const int maxd = max_dimension(scan.strategy());
    std::vector<std::vector<DimRecord>> partial;
    std::mutex partial_mu;

    parallel_for(n, threads, [&](long lo, long hi) {
        std::vector<DimRecord> local(static_cast<std::size_t>(maxd) + 1);
        for (long idx = lo; idx < hi; ++idx) {
            Model m = scan.model(idx);
            Estimator est = fit_model(scan.reduced(idx));
            if (visit) visit(idx, m, est);
            detail::absorb_record(local[static_cast<std::size_t>(m.size())], m.size(), idx,
                                  std::move(est));
        }
        std::lock_guard<std::mutex> g(partial_mu);
        partial.push_back(std::move(local));
    });

    ContrastCurve curve;
    curve.strategy = scan.strategy();
    curve.A = scan.A();
    curve.records.resize(static_cast<std::size_t>(maxd) + 1);
    for (auto& local : partial)
        for (std::size_t d = 0; d < local.size(); ++d)
            if (local[d].filled)
                detail::absorb_record(curve.records[d], local[d].dim, local[d].index,
                                      std::move(local[d].est));
    for (int d = 0; d <= maxd; ++d) {
        // every dimension is populated for these families (nested/regular:
        // the size-d partition; irregular/islands: any d-subset)
        if (!curve.records[static_cast<std::size_t>(d)].filled &&
            (scan.strategy().kind == Strategy::Kind::regular ||
             scan.strategy().kind == Strategy::Kind::irregular ||
             scan.strategy().kind == Strategy::Kind::islands))
            throw NumericError("best_per_dimension: dimension slot left empty");
    }
    return curve;
}

inline ContrastCurve best_per_dimension(const Strategy& st, double A, const EventSequence& ev,
                                        const FitWindow& window, int threads = 1) {
    FamilyScan scan(st, A, ev, window);
    return best_per_dimension(scan, threads);
}

}  // namespace hawkes
