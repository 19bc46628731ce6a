#include <cmath>
#include <complex>
#include <vector>

#include "decum/errors.hpp"
#include "decum/market.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace decum;

namespace {

// quadrature oracle for E[e^Y - 1]: Simpson on each half-line, truncated where
// the double-exponential mass is below 1e-16
double compensator_by_quadrature(const JumpParams& jp) {
    auto simpson = [](auto f, double a, double b, int n) {
        const double h = (b - a) / n;
        double acc = f(a) + f(b);
        for (int j = 1; j < n; ++j) acc += (j % 2 ? 4.0 : 2.0) * f(a + j * h);
        return acc * h / 3.0;
    };
    auto up = [&](double y) {
        return (std::exp(y) - 1.0) * jp.p_up * jp.eta1 * std::exp(-jp.eta1 * y);
    };
    auto dn = [&](double y) {
        return (std::exp(y) - 1.0) * (1.0 - jp.p_up) * jp.eta2 *
               std::exp(jp.eta2 * y);
    };
    const double cut_up = 40.0 / (jp.eta1 - 1.0);
    const double cut_dn = 40.0 / jp.eta2;
    return simpson(up, 0.0, cut_up, 4000) + simpson(dn, -cut_dn, 0.0, 4000);
}

}  // namespace

TEST_SUITE_BEGIN("market");

TEST_CASE("compensator matches the fitted parameter set") {
    const auto mp = fitted_market();
    // quoted decimals carry the rounding of the fitted inputs, hence 1e-4
    CHECK(std::abs(jump_compensator(mp.jump_s) - (-0.04830)) < 1e-4);
    CHECK(std::abs(jump_compensator(mp.jump_b) - (-0.00413)) < 1e-4);
}

TEST_CASE("compensator agrees with quadrature") {
    const auto mp = fitted_market();
    CHECK(std::abs(jump_compensator(mp.jump_s) -
                   compensator_by_quadrature(mp.jump_s)) < 1e-9);
    CHECK(std::abs(jump_compensator(mp.jump_b) -
                   compensator_by_quadrature(mp.jump_b)) < 1e-9);
    const JumpParams odd{1.0, 0.8, 1.7, 0.4};
    CHECK(std::abs(jump_compensator(odd) - compensator_by_quadrature(odd)) <
          1e-9);
}

TEST_CASE("degenerate jump settings") {
    JumpParams off;
    off.lambda = 0.0;
    CHECK(jump_compensator(off) == 0.0);
    CHECK(jump_log_mean(off) == 0.0);

    JumpParams bad{0.5, 0.5, 0.9, 2.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = {0.5, 1.5, 2.0, 2.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("deterministic limit reproduces the exact drift") {
    MarketParams mp;
    mp.mu_s = 0.05;
    mp.mu_b = 0.01;
    RandomStream rng(1, 0);
    const auto pr = sample_period_returns(mp, 1.0, rng);
    CHECK(pr.r_s == doctest::Approx(std::exp(0.05)).epsilon(1e-14));
    CHECK(pr.r_b == doctest::Approx(std::exp(0.01)).epsilon(1e-14));
}

TEST_CASE("gross return mean matches exp(mu dt)") {
    const auto mp = fitted_market();
    const int n = 2'000'000;
    double sum_s = 0.0, sum_b = 0.0;
    for (int i = 0; i < n; ++i) {
        RandomStream rng(42, std::uint64_t(i));
        const auto pr = sample_period_returns(mp, 1.0, rng);
        sum_s += pr.r_s;
        sum_b += pr.r_b;
    }
    CHECK(sum_s / n == doctest::Approx(std::exp(mp.mu_s)).epsilon(8e-4));
    CHECK(sum_b / n == doctest::Approx(std::exp(mp.mu_b)).epsilon(2e-4));
}

TEST_CASE("log-return correlation tracks rho when jumps are off") {
    MarketParams mp = fitted_market();
    mp.jump_s.lambda = 0.0;
    mp.jump_b.lambda = 0.0;
    mp.rho_sb = 0.4;
    const int n = 400'000;
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        RandomStream rng(7, std::uint64_t(i));
        const auto pr = sample_period_returns(mp, 1.0, rng);
        const double x = std::log(pr.r_s), y = std::log(pr.r_b);
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double cx = sxx / n - (sx / n) * (sx / n);
    const double cy = syy / n - (sy / n) * (sy / n);
    const double cxy = sxy / n - (sx / n) * (sy / n);
    CHECK(cxy / std::sqrt(cx * cy) == doctest::Approx(0.4).epsilon(0.02));
}

TEST_CASE("characteristic function basics") {
    const auto mp = fitted_market();
    CHECK(std::abs(joint_log_characteristic(mp, 1.0, 0.0, 0.0) - 1.0) < 1e-14);
    RandomStream rng(3);
    for (int k = 0; k < 50; ++k) {
        const double ws = 40.0 * (rng.uniform() - 0.5);
        const double wb = 40.0 * (rng.uniform() - 0.5);
        CHECK(std::abs(joint_log_characteristic(mp, 1.0, ws, wb)) <= 1.0 + 1e-12);
    }
}

TEST_CASE("jump-free characteristic function is the bivariate normal one") {
    MarketParams mp = fitted_market();
    mp.jump_s.lambda = 0.0;
    mp.jump_b.lambda = 0.0;
    const double dt = 0.7;
    const double ms = (mp.mu_s - 0.5 * mp.sigma_s * mp.sigma_s) * dt;
    const double mb = (mp.mu_b - 0.5 * mp.sigma_b * mp.sigma_b) * dt;
    for (double ws : {-3.0, 0.5, 11.0}) {
        for (double wb : {-7.0, 0.0, 2.5}) {
            const std::complex<double> expect =
                std::exp(std::complex<double>(
                    -0.5 * dt *
                        (mp.sigma_s * mp.sigma_s * ws * ws +
                         2 * mp.rho_sb * mp.sigma_s * mp.sigma_b * ws * wb +
                         mp.sigma_b * mp.sigma_b * wb * wb),
                    ms * ws + mb * wb));
            CHECK(std::abs(joint_log_characteristic(mp, dt, ws, wb) - expect) <
                  1e-12);
        }
    }
}

TEST_CASE("characteristic function agrees with sampled expectations") {
    const auto mp = fitted_market();
    const int n = 300'000;
    const double ws = 4.0, wb = 9.0;
    std::complex<double> acc(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        RandomStream rng(11, std::uint64_t(i));
        const auto pr = sample_period_returns(mp, 1.0, rng);
        const double phase = ws * std::log(pr.r_s) + wb * std::log(pr.r_b);
        acc += std::complex<double>(std::cos(phase), std::sin(phase));
    }
    acc /= double(n);
    const auto cf = joint_log_characteristic(mp, 1.0, ws, wb);
    CHECK(std::abs(acc - cf) < 4.0 / std::sqrt(double(n)));
}

TEST_CASE("returns are strictly positive") {
    const auto mp = fitted_market();
    double lo = 1e300;
    for (int i = 0; i < 100'000; ++i) {
        RandomStream rng(5, std::uint64_t(i));
        const auto pr = sample_period_returns(mp, 1.0, rng);
        lo = std::min(lo, std::min(pr.r_s, pr.r_b));
    }
    CHECK(lo > 0.0);
}

TEST_SUITE_END();
