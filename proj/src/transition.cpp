#include "decum/transition.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "decum/errors.hpp"

namespace decum {

double LatticeDensity::mean() const {
    double acc = 0.0;
    for (int l = 0; l < grid.n; ++l) acc += w[std::size_t(l)] * grid.node(l);
    return acc;
}

double LatticeDensity::growth() const {
    double acc = 0.0;
    for (int l = 0; l < grid.n; ++l)
        acc += w[std::size_t(l)] * std::exp(grid.node(l));
    return acc;
}

namespace {

bool leg_deterministic(const MarketParams& mp, Leg leg) {
    const double sigma = leg == Leg::Stock ? mp.sigma_s : mp.sigma_b;
    const auto& jp = leg == Leg::Stock ? mp.jump_s : mp.jump_b;
    return sigma == 0.0 && jp.lambda == 0.0;
}

// wrapped FFT frequency index -> angular frequency
double omega_at(int k, int n, double h) {
    const int kk = k <= n / 2 ? k : k - n;
    return 2.0 * M_PI * double(kk) / (double(n) * h);
}

// mass at an off-lattice point split over the two neighbours so the lattice
// mean is exact; endpoints absorb anything outside the grid
void place_point_mass(const ReturnGrid& g, double x, std::vector<double>& w) {
    const double pos = (x - g.r0) / g.h;
    if (pos <= 0.0) {
        w[0] += 1.0;
        return;
    }
    if (pos >= double(g.n - 1)) {
        w[std::size_t(g.n - 1)] += 1.0;
        return;
    }
    const auto l = std::size_t(pos);
    const double f = pos - double(l);
    w[l] += 1.0 - f;
    w[l + 1] += f;
}

void clamp_and_normalize(std::vector<double>& w, double& clamped) {
    clamped = 0.0;
    double sum = 0.0;
    for (double& v : w) {
        if (v < 0.0) {
            clamped -= v;
            v = 0.0;
        }
        sum += v;
    }
    if (!(sum > 0.0)) throw NumericsError("transition density lost all mass");
    for (double& v : w) v /= sum;
}

// Sampling the characteristic function on the lattice's own conjugate grid is
// only faithful while the density is wide next to the cell; a narrow density
// (the bond leg on production grids) rings and goes negative. An axis counts
// as resolved once the diffusion factor of the characteristic function has
// decayed at the lattice Nyquist frequency; otherwise the density is built on
// an internally refined lattice and the fine masses are summed per coarse
// cell, which keeps the weights non-negative with the right moments no matter
// how narrow the density is.
int oversample_factor(double sigma, double dt, double h) {
    const double width = sigma * std::sqrt(dt);
    int f = 1;
    while (f < 64 && width * (M_PI * double(f) / h) < 7.5) f *= 2;
    return f;
}

}  // namespace

namespace {

// shared inversion core; f > 1 refines the lattice before block-summing,
// clamp selects cell-mass (non-negative) versus band-limited (signed) output
LatticeDensity invert_1d(const MarketParams& mp, Leg leg, double dt,
                         const ReturnGrid& grid, double drift_shift, int f,
                         bool clamp) {
    if (grid.n < 2 || !(grid.h > 0.0))
        throw ConfigError("return lattice needs at least two nodes");
    LatticeDensity d;
    d.grid = grid;
    d.w.assign(std::size_t(grid.n), 0.0);

    if (leg_deterministic(mp, leg)) {
        const double mu = leg == Leg::Stock ? mp.mu_s : mp.mu_b;
        place_point_mass(grid, mu * dt + drift_shift, d.w);
        d.clamped = 0.0;
        return d;
    }

    const int nf = grid.n * f;
    const double hf = grid.h / f;
    // fine cell centers tile the coarse cells, so block sums are exact cell
    // masses; f == 1 reduces to sampling the coarse lattice directly
    const double r0f = grid.r0 - 0.5 * (grid.h - hf);
    std::vector<std::complex<double>> a;
    a.resize(std::size_t(nf));
    for (int k = 0; k < nf; ++k) {
        const double om = omega_at(k, nf, hf);
        const auto phi = leg == Leg::Stock
                             ? joint_log_characteristic(mp, dt, om, 0.0)
                             : joint_log_characteristic(mp, dt, 0.0, om);
        const double phase = -om * (r0f - drift_shift);
        a[std::size_t(k)] =
            phi * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    fftw_plan plan = fftw_plan_dft_1d(
        nf, reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(a.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);
    for (int j = 0; j < grid.n; ++j) {
        double acc = 0.0;
        for (int s = 0; s < f; ++s)
            acc += a[std::size_t(j) * std::size_t(f) + std::size_t(s)].real();
        d.w[std::size_t(j)] = acc / double(nf);
    }
    if (clamp) clamp_and_normalize(d.w, d.clamped);
    return d;
}

std::vector<double> invert_2d(const MarketParams& mp, double dt,
                              const ReturnGrid& gx, const ReturnGrid& gy,
                              int fx, int fy, bool clamp) {
    const int nfx = gx.n * fx, nfy = gy.n * fy;
    const double hfx = gx.h / fx, hfy = gy.h / fy;
    const double r0fx = gx.r0 - 0.5 * (gx.h - hfx);
    const double r0fy = gy.r0 - 0.5 * (gy.h - hfy);
    std::vector<std::complex<double>> a(std::size_t(nfx) * std::size_t(nfy));
    for (int k = 0; k < nfx; ++k) {
        const double om_x = omega_at(k, nfx, hfx);
        for (int l = 0; l < nfy; ++l) {
            const double om_y = omega_at(l, nfy, hfy);
            const auto phi = joint_log_characteristic(mp, dt, om_x, om_y);
            const double phase = -(om_x * r0fx + om_y * r0fy);
            a[std::size_t(k) * std::size_t(nfy) + std::size_t(l)] =
                phi * std::complex<double>(std::cos(phase), std::sin(phase));
        }
    }
    fftw_plan plan = fftw_plan_dft_2d(
        nfx, nfy, reinterpret_cast<fftw_complex*>(a.data()),
        reinterpret_cast<fftw_complex*>(a.data()), FFTW_FORWARD, FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    std::vector<double> d(std::size_t(gx.n) * std::size_t(gy.n));
    const double scale = 1.0 / (double(nfx) * double(nfy));
    for (int i = 0; i < gx.n; ++i)
        for (int j = 0; j < gy.n; ++j) {
            double acc = 0.0;
            for (int s = 0; s < fx; ++s) {
                const auto* row = a.data() +
                                  (std::size_t(i) * std::size_t(fx) +
                                   std::size_t(s)) *
                                      std::size_t(nfy) +
                                  std::size_t(j) * std::size_t(fy);
                for (int t = 0; t < fy; ++t) acc += row[std::size_t(t)].real();
            }
            d[std::size_t(i) * std::size_t(gy.n) + std::size_t(j)] =
                acc * scale;
        }
    if (clamp) {
        double clamped = 0.0;
        clamp_and_normalize(d, clamped);
    }
    return d;
}

// a degenerate axis carries no dependence, so the joint density separates
// into the product of the marginals
template <class Marginal>
std::vector<double> product_2d(const MarketParams& mp, double dt,
                               const ReturnGrid& gx, const ReturnGrid& gy,
                               Marginal&& marginal_1d) {
    const auto ds = marginal_1d(mp, Leg::Stock, dt, gx, 0.0);
    const auto db = marginal_1d(mp, Leg::Bond, dt, gy, 0.0);
    std::vector<double> d(std::size_t(gx.n) * std::size_t(gy.n));
    for (int i = 0; i < gx.n; ++i)
        for (int j = 0; j < gy.n; ++j)
            d[std::size_t(i) * std::size_t(gy.n) + std::size_t(j)] =
                ds.w[std::size_t(i)] * db.w[std::size_t(j)];
    return d;
}

}  // namespace

LatticeDensity density_1d(const MarketParams& mp, Leg leg, double dt,
                          const ReturnGrid& grid, double drift_shift) {
    const double sigma = leg == Leg::Stock ? mp.sigma_s : mp.sigma_b;
    return invert_1d(mp, leg, dt, grid, drift_shift,
                     oversample_factor(sigma, dt, grid.h), true);
}

LatticeDensity spectral_density_1d(const MarketParams& mp, Leg leg, double dt,
                                   const ReturnGrid& grid, double drift_shift) {
    return invert_1d(mp, leg, dt, grid, drift_shift, 1, false);
}

std::vector<double> density_2d(const MarketParams& mp, double dt,
                               const ReturnGrid& gx, const ReturnGrid& gy) {
    if (leg_deterministic(mp, Leg::Stock) || leg_deterministic(mp, Leg::Bond))
        return product_2d(mp, dt, gx, gy,
                          [](const MarketParams& m, Leg l, double t,
                             const ReturnGrid& g, double s) {
                              return density_1d(m, l, t, g, s);
                          });
    return invert_2d(mp, dt, gx, gy, oversample_factor(mp.sigma_s, dt, gx.h),
                     oversample_factor(mp.sigma_b, dt, gy.h), true);
}

std::vector<double> spectral_density_2d(const MarketParams& mp, double dt,
                                        const ReturnGrid& gx,
                                        const ReturnGrid& gy) {
    if (leg_deterministic(mp, Leg::Stock) || leg_deterministic(mp, Leg::Bond))
        return product_2d(mp, dt, gx, gy,
                          [](const MarketParams& m, Leg l, double t,
                             const ReturnGrid& g, double s) {
                              return spectral_density_1d(m, l, t, g, s);
                          });
    return invert_2d(mp, dt, gx, gy, 1, 1, false);
}

std::vector<double> cross_correlate_1d(const std::vector<double>& f_ext,
                                       const std::vector<double>& w,
                                       int n_out) {
    if (f_ext.size() + 1 < std::size_t(n_out) + w.size())
        throw ConfigError("field too short for the correlation reach");
    std::vector<double> out;
    out.resize(std::size_t(n_out));
    for (int j = 0; j < n_out; ++j) {
        double acc = 0.0;
        const double* f = f_ext.data() + j;
        for (std::size_t l = 0; l < w.size(); ++l) acc += w[l] * f[l];
        out[std::size_t(j)] = acc;
    }
    return out;
}

Correlator2D::Correlator2D(int nx, int ny) : nx_(nx), ny_(ny) {
    if (nx < 2 || ny < 2) throw ConfigError("correlator grid too small");
    const std::size_t nreal = std::size_t(nx) * std::size_t(ny);
    const std::size_t nspec = std::size_t(nx) * std::size_t(ny / 2 + 1);
    buf_ = fftw_alloc_real(nreal);
    spec_ = fftw_alloc_complex(nspec);
    kspec_ = fftw_alloc_complex(nspec);
    if (!buf_ || !spec_ || !kspec_)
        throw NumericsError("correlator allocation failed");
    fwd_ = fftw_plan_dft_r2c_2d(nx, ny, buf_,
                                static_cast<fftw_complex*>(spec_),
                                FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_c2r_2d(nx, ny, static_cast<fftw_complex*>(spec_),
                                buf_, FFTW_ESTIMATE);
}

Correlator2D::~Correlator2D() {
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(inv_));
    fftw_free(buf_);
    fftw_free(spec_);
    fftw_free(kspec_);
}

void Correlator2D::set_kernel(const std::vector<double>& k, int nkx, int nky) {
    if (nkx > nx_ || nky > ny_ || k.size() != std::size_t(nkx) * std::size_t(nky))
        throw ConfigError("kernel does not fit the correlator grid");
    std::fill(buf_, buf_ + std::size_t(nx_) * std::size_t(ny_), 0.0);
    for (int i = 0; i < nkx; ++i)
        std::copy(k.begin() + std::size_t(i) * std::size_t(nky),
                  k.begin() + std::size_t(i + 1) * std::size_t(nky),
                  buf_ + std::size_t(i) * std::size_t(ny_));
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), buf_,
                         static_cast<fftw_complex*>(kspec_));
    have_kernel_ = true;
}

void Correlator2D::apply(const std::vector<double>& field,
                         std::vector<double>& out) {
    if (!have_kernel_) throw ConfigError("correlator used before set_kernel");
    const std::size_t nreal = std::size_t(nx_) * std::size_t(ny_);
    if (field.size() != nreal)
        throw ConfigError("field size does not match the correlator grid");
    std::copy(field.begin(), field.end(), buf_);
    fftw_execute_dft_r2c(static_cast<fftw_plan>(fwd_), buf_,
                         static_cast<fftw_complex*>(spec_));
    // cross-correlation: multiply by the conjugate kernel spectrum
    auto* s = static_cast<fftw_complex*>(spec_);
    auto* ks = static_cast<fftw_complex*>(kspec_);
    const std::size_t nspec = std::size_t(nx_) * std::size_t(ny_ / 2 + 1);
    const double scale = 1.0 / double(nreal);
    for (std::size_t i = 0; i < nspec; ++i) {
        const double re = s[i][0] * ks[i][0] + s[i][1] * ks[i][1];
        const double im = s[i][1] * ks[i][0] - s[i][0] * ks[i][1];
        s[i][0] = re * scale;
        s[i][1] = im * scale;
    }
    fftw_execute_dft_c2r(static_cast<fftw_plan>(inv_), s, buf_);
    out.assign(buf_, buf_ + nreal);
}

}  // namespace decum
