#include "decum/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "decum/errors.hpp"

namespace decum {

namespace {

struct Moments {
    double mean = 0.0;
    double sd = 0.0;
    int n = 0;
};

Moments masked_moments(const std::vector<double>& r,
                       const std::vector<char>& excluded) {
    Moments m;
    double sum = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!excluded[i]) {
            sum += r[i];
            ++m.n;
        }
    if (m.n < 2) throw NumericsError("too few quiet observations");
    m.mean = sum / m.n;
    double ss = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
        if (!excluded[i]) ss += (r[i] - m.mean) * (r[i] - m.mean);
    m.sd = std::sqrt(ss / (m.n - 1));
    return m;
}

void check_series(const ReturnSeries& s) {
    if (s.log_returns.size() < 3)
        throw DataError("return series too short to calibrate");
    if (!(s.dt > 0.0)) throw ConfigError("return series dt must be positive");
}

}  // namespace

JumpDetection detect_jumps(const ReturnSeries& series, double beta) {
    check_series(series);
    const auto& r = series.log_returns;
    const std::size_t n = r.size();

    JumpDetection det;
    det.flags.assign(n, 0);
    Moments m = masked_moments(r, det.flags);
    const int max_iter = 1000;
    for (det.iterations = 1; det.iterations <= max_iter; ++det.iterations) {
        if (m.sd <= 1e-12 * std::max(1.0, std::abs(m.mean)))
            throw NumericsError("degenerate series: zero diffusive variance");
        std::vector<char> next(n, 0);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = std::abs(r[i] - m.mean) > beta * m.sd ? 1 : 0;
        const bool stable = next == det.flags;
        det.flags = std::move(next);
        m = masked_moments(r, det.flags);
        if (stable) break;
        if (det.iterations == max_iter)
            throw NumericsError("jump detection did not reach a fixed point");
    }
    det.sigma_hat = m.sd / std::sqrt(series.dt);
    det.mean_unflagged = m.mean;
    return det;
}

IndexFit fit_jump_diffusion(const ReturnSeries& series, double beta) {
    IndexFit fit;
    fit.detection = detect_jumps(series, beta);
    const auto& r = series.log_returns;
    const double years = double(r.size()) * series.dt;

    int n_up = 0, n_dn = 0;
    double sum_up = 0.0, sum_dn = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
        if (!fit.detection.flags[i]) continue;
        const double j = r[i] - fit.detection.mean_unflagged;
        if (j > 0.0) {
            ++n_up;
            sum_up += j;
        } else {
            ++n_dn;
            sum_dn += -j;
        }
    }
    const int n_jump = n_up + n_dn;

    JumpParams jp;
    jp.lambda = double(n_jump) / years;
    if (n_jump > 0) {
        jp.p_up = double(n_up) / n_jump;
        jp.eta1 = n_up > 0 ? 1.0 / (sum_up / n_up) : 2.0;
        jp.eta2 = n_dn > 0 ? 1.0 / (sum_dn / n_dn) : 2.0;
        if (n_up > 0 && jp.eta1 <= 1.0)
            throw NumericsError(
                "mean up-jump of 1 or more in log terms; compensator undefined");
    }
    fit.jumps = jp;
    fit.sigma = fit.detection.sigma_hat;

    double mean_all = 0.0;
    for (double x : r) mean_all += x;
    mean_all /= double(r.size());
    fit.mu = mean_all / series.dt + 0.5 * fit.sigma * fit.sigma +
             jp.lambda * jump_compensator(jp) - jp.lambda * jump_log_mean(jp);
    return fit;
}

GbmFit fit_gbm(const ReturnSeries& series) {
    check_series(series);
    const auto& r = series.log_returns;
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= double(r.size());
    double ss = 0.0;
    for (double x : r) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / double(r.size() - 1));
    if (sd <= 1e-12 * std::max(1.0, std::abs(mean)))
        throw NumericsError("degenerate series: zero variance");

    GbmFit fit;
    fit.sigma = sd / std::sqrt(series.dt);
    fit.mu = mean / series.dt + 0.5 * fit.sigma * fit.sigma;
    return fit;
}

double estimate_correlation(const ReturnSeries& a, const ReturnSeries& b,
                            const std::vector<char>& flags_a,
                            const std::vector<char>& flags_b) {
    if (a.log_returns.size() != b.log_returns.size())
        throw DataError("correlation needs series of equal length");
    const std::size_t n = a.log_returns.size();
    if (!flags_a.empty() && flags_a.size() != n)
        throw DataError("flag vector length mismatch");
    if (!flags_b.empty() && flags_b.size() != n)
        throw DataError("flag vector length mismatch");

    auto quiet = [&](std::size_t i) {
        return (flags_a.empty() || !flags_a[i]) &&
               (flags_b.empty() || !flags_b[i]);
    };
    double sx = 0, sy = 0;
    int m = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (quiet(i)) {
            sx += a.log_returns[i];
            sy += b.log_returns[i];
            ++m;
        }
    if (m < 3) throw DataError("too few jointly quiet months for a correlation");
    const double mx = sx / m, my = sy / m;
    double cxx = 0, cyy = 0, cxy = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (quiet(i)) {
            const double dx = a.log_returns[i] - mx;
            const double dy = b.log_returns[i] - my;
            cxx += dx * dx;
            cyy += dy * dy;
            cxy += dx * dy;
        }
    if (cxx == 0.0 || cyy == 0.0)
        throw NumericsError("zero variance in the jointly quiet months");
    return cxy / std::sqrt(cxx * cyy);
}

}  // namespace decum
