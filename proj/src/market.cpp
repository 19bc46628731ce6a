#include "decum/market.hpp"

#include <cmath>

#include "decum/errors.hpp"

namespace decum {

void JumpParams::validate() const {
    if (lambda < 0.0) throw ConfigError("jump intensity must be >= 0");
    if (p_up < 0.0 || p_up > 1.0) throw ConfigError("p_up must lie in [0,1]");
    if (lambda > 0.0) {
        if (!(eta1 > 1.0))
            throw ConfigError("eta1 must exceed 1 for a finite compensator");
        if (!(eta2 > 0.0)) throw ConfigError("eta2 must be positive");
    }
}

void MarketParams::validate() const {
    if (sigma_s < 0.0 || sigma_b < 0.0)
        throw ConfigError("volatilities must be >= 0");
    if (rho_sb < -1.0 || rho_sb > 1.0)
        throw ConfigError("rho_sb must lie in [-1,1]");
    jump_s.validate();
    jump_b.validate();
}

double jump_compensator(const JumpParams& jp) {
    if (jp.lambda == 0.0) return 0.0;
    return jp.p_up * jp.eta1 / (jp.eta1 - 1.0) +
           (1.0 - jp.p_up) * jp.eta2 / (jp.eta2 + 1.0) - 1.0;
}

double jump_log_mean(const JumpParams& jp) {
    if (jp.lambda == 0.0) return 0.0;
    return jp.p_up / jp.eta1 - (1.0 - jp.p_up) / jp.eta2;
}

std::complex<double> jump_size_cf(const JumpParams& jp, double omega) {
    const std::complex<double> iw(0.0, omega);
    return jp.p_up * jp.eta1 / (jp.eta1 - iw) +
           (1.0 - jp.p_up) * jp.eta2 / (jp.eta2 + iw);
}

std::complex<double> joint_log_characteristic(const MarketParams& mp, double dt,
                                              double omega_s, double omega_b) {
    const double ms =
        (mp.mu_s - mp.jump_s.lambda * jump_compensator(mp.jump_s) -
         0.5 * mp.sigma_s * mp.sigma_s) *
        dt;
    const double mb =
        (mp.mu_b - mp.jump_b.lambda * jump_compensator(mp.jump_b) -
         0.5 * mp.sigma_b * mp.sigma_b) *
        dt;
    const double quad =
        0.5 * dt *
        (mp.sigma_s * mp.sigma_s * omega_s * omega_s +
         2.0 * mp.rho_sb * mp.sigma_s * mp.sigma_b * omega_s * omega_b +
         mp.sigma_b * mp.sigma_b * omega_b * omega_b);
    std::complex<double> ex(-quad, ms * omega_s + mb * omega_b);
    if (mp.jump_s.lambda > 0.0)
        ex += mp.jump_s.lambda * dt * (jump_size_cf(mp.jump_s, omega_s) - 1.0);
    if (mp.jump_b.lambda > 0.0)
        ex += mp.jump_b.lambda * dt * (jump_size_cf(mp.jump_b, omega_b) - 1.0);
    return std::exp(ex);
}

namespace {

double jump_sum(const JumpParams& jp, double dt, RandomStream& rng) {
    if (jp.lambda == 0.0) return 0.0;
    const int n = rng.poisson(jp.lambda * dt);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        if (u < jp.p_up)
            total += rng.exponential(jp.eta1);
        else
            total -= rng.exponential(jp.eta2);
    }
    return total;
}

}  // namespace

PeriodReturns sample_period_returns(const MarketParams& mp, double dt,
                                    RandomStream& rng) {
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double zb =
        mp.rho_sb * z1 + std::sqrt(1.0 - mp.rho_sb * mp.rho_sb) * z2;
    const double sq = std::sqrt(dt);

    double xs = (mp.mu_s - mp.jump_s.lambda * jump_compensator(mp.jump_s) -
                 0.5 * mp.sigma_s * mp.sigma_s) *
                    dt +
                mp.sigma_s * sq * z1;
    double xb = (mp.mu_b - mp.jump_b.lambda * jump_compensator(mp.jump_b) -
                 0.5 * mp.sigma_b * mp.sigma_b) *
                    dt +
                mp.sigma_b * sq * zb;
    xs += jump_sum(mp.jump_s, dt, rng);
    xb += jump_sum(mp.jump_b, dt, rng);
    return PeriodReturns{std::exp(xs), std::exp(xb)};
}

}  // namespace decum
