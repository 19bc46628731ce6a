#pragma once

#include <vector>

#include "decum/market.hpp"

namespace decum {

// Evenly spaced log returns (typically monthly, dt = 1/12 years).
struct ReturnSeries {
    std::vector<double> log_returns;
    double dt = 1.0 / 12.0;
};

struct JumpDetection {
    std::vector<char> flags;   // 1 where the observation is a jump month
    double sigma_hat = 0.0;    // annualized diffusive volatility
    double mean_unflagged = 0.0;  // per-period mean of the quiet months
    int iterations = 0;

    int count() const {
        int n = 0;
        for (char f : flags) n += f;
        return n;
    }
};

// One-index fit: uncompensated drift, diffusive volatility, jump component.
struct IndexFit {
    double mu = 0.0;
    double sigma = 0.0;
    JumpParams jumps;
    JumpDetection detection;
};

struct GbmFit {
    double mu = 0.0;
    double sigma = 0.0;
};

// Iterated threshold detector: flag |r - m| > beta * sd where m and sd come
// from the currently unflagged months, until the flag set stabilizes.
JumpDetection detect_jumps(const ReturnSeries& series, double beta = 3.0);

// Moment fit on the detected decomposition. The drift makes the model's
// expected log return per period match the full-sample mean.
IndexFit fit_jump_diffusion(const ReturnSeries& series, double beta = 3.0);

// Lognormal fit on the full sample, same drift-matching convention.
GbmFit fit_gbm(const ReturnSeries& series);

// Pearson correlation over months flagged in neither series. Pass empty flag
// vectors to correlate the full sample.
double estimate_correlation(const ReturnSeries& a, const ReturnSeries& b,
                            const std::vector<char>& flags_a,
                            const std::vector<char>& flags_b);

}  // namespace decum
