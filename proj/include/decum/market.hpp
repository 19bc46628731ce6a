#pragma once

#include <complex>

#include "decum/rng.hpp"

namespace decum {

// Double-exponential jump size distribution: with probability p_up the jump in
// log price is +Exp(eta1), otherwise -Exp(eta2). eta1 > 1 keeps E[e^Y] finite.
struct JumpParams {
    double lambda = 0.0;  // arrival intensity per year
    double p_up = 0.5;
    double eta1 = 2.0;
    double eta2 = 2.0;

    void validate() const;
};

// Two correlated jump-diffusion indexes: stock (s) and bond (b), in real
// (deflated) terms. mu are uncompensated arithmetic drifts, sigma diffusive
// volatilities, rho_sb correlates the Brownian parts. mu_c_b is the extra
// borrowing cost applied to the bond leg while total wealth is negative.
struct MarketParams {
    double mu_s = 0.0;
    double sigma_s = 0.0;
    JumpParams jump_s;
    double mu_b = 0.0;
    double sigma_b = 0.0;
    JumpParams jump_b;
    double rho_sb = 0.0;
    double mu_c_b = 0.0;

    void validate() const;
};

// Gross real returns over one period for the two indexes.
struct PeriodReturns {
    double r_s = 1.0;
    double r_b = 1.0;
};

// E[e^Y - 1] for one jump; the drift compensator per unit intensity.
double jump_compensator(const JumpParams& jp);

// E[Y], mean log jump size.
double jump_log_mean(const JumpParams& jp);

// Characteristic function of one jump size Y.
std::complex<double> jump_size_cf(const JumpParams& jp, double omega);

// Joint characteristic function of the log-return pair (delta log s, delta
// log b) over an interval dt. Exact for the model, any dt.
std::complex<double> joint_log_characteristic(const MarketParams& mp, double dt,
                                              double omega_s, double omega_b);

// Exact one-period sampling: correlated normals plus compound-Poisson jumps.
// Draw order is fixed (normal pair, stock jumps, bond jumps) so streams are
// reproducible. The borrowing spread is not applied here; the wealth
// accounting layer owns that.
PeriodReturns sample_period_returns(const MarketParams& mp, double dt,
                                    RandomStream& rng);

}  // namespace decum
