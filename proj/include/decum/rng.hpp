#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace decum {

// Deterministic per-path random stream. Each (seed, stream) pair yields an
// independent sequence, so path i can be generated by any worker thread and
// the results do not depend on scheduling.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0)
        : eng_(mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1))) {}

    // uniform on (0, 1), never returns an endpoint
    double uniform() {
        for (;;) {
            const double u = (eng_() >> 11) * 0x1.0p-53;
            if (u > 0.0) return u;
        }
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Exact Poisson sampling via Knuth's product method; the mean is chunked
    // so the method stays exact and fast for large means too.
    int poisson(double mean) {
        int total = 0;
        while (mean > 16.0) {
            total += poisson_knuth(16.0);
            mean -= 16.0;
        }
        if (mean > 0.0) total += poisson_knuth(mean);
        return total;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    int poisson_knuth(double mean) {
        const double limit = std::exp(-mean);
        int k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform();
        } while (p > limit);
        return k - 1;
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace decum
