#pragma once

// Counter-based pseudo-random generator (SplitMix64 output function) with
// cheap independent streams.  Hand-rolled on purpose: simulation replicates
// must be bit-exact across platforms and std:: distributions are
// implementation-defined.  Stream s of seed q is Rng(q, s); replicate r of a
// batch conventionally uses stream r.

#include <cstdint>
#include <cmath>
#include <limits>

#include "hawkes/common.hpp"

namespace hawkes {

class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : key_(mix(seed ^ mix(stream + kGamma))), counter_(0) {}

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGamma); }

    // Uniform on (0, 1]; never returns 0, so log(uniform()) is always finite.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double exponential(double rate) {
        require(rate > 0.0, "exponential: rate must be positive");
        return -std::log(uniform()) / rate;
    }

    // Product method; means here are small (offspring counts, thinning
    // candidates).  Large means are split to keep exp(-mean) in range.
    long poisson(double mean) {
        require(mean >= 0.0, "poisson: mean must be nonnegative");
        long total = 0;
        while (mean > 60.0) {
            total += poisson_small(60.0);
            mean -= 60.0;
        }
        return total + poisson_small(mean);
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    long poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double floor = std::exp(-mean);
        long k = 0;
        double prod = uniform();
        while (prod > floor) {
            ++k;
            prod *= uniform();
        }
        return k;
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace hawkes
