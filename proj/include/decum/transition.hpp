#pragma once

#include <vector>

#include "decum/market.hpp"

namespace decum {

// Uniform lattice of log-return offsets r_l = r0 + l h.
struct ReturnGrid {
    double r0 = 0.0;
    double h = 0.0;
    int n = 0;

    double node(int l) const { return r0 + h * double(l); }
};

enum class Leg { Stock, Bond };

// One-period log-return distribution collapsed onto a lattice. Each weight
// is the probability mass of its cell, recovered by inverting the closed-form
// characteristic function with an FFT; an axis too narrow for the lattice is
// inverted on an internally refined grid and block-summed, so the weights
// stay non-negative with the right moments at any spacing. Residual negative
// rounding is clamped to zero and the mass renormalized, so constants are
// preserved exactly by any correlation against these weights.
struct LatticeDensity {
    ReturnGrid grid;
    std::vector<double> w;
    double clamped = 0.0;  // mass removed by the clamp, diagnostic only

    double mean() const;
    double growth() const;  // sum of w_l e^{r_l}, the lattice gross return
};

// drift_shift adds a deterministic offset to the log return (used for the
// borrowing spread on the debt side of the grid)
LatticeDensity density_1d(const MarketParams& mp, Leg leg, double dt,
                          const ReturnGrid& grid, double drift_shift = 0.0);

// Joint lattice density of (stock, bond) log returns, row-major with the
// stock index slowest: d[ix * gy.n + iy]. An axis whose diffusion and jumps
// both vanish degenerates to a two-node mass placed to preserve the mean; in
// that case the joint density is the product of the marginals.
std::vector<double> density_2d(const MarketParams& mp, double dt,
                               const ReturnGrid& gx, const ReturnGrid& gy);

// Band-limited variants: the characteristic function is sampled on the
// lattice's own conjugate grid and inverted as-is, with no refinement, no
// clamp and no renormalization. Total mass is exactly one by construction,
// but individual weights ring negative wherever the density is narrow next
// to the cell, so these suit value-function stepping (the classical Fourier
// approach), not anything that needs a probability vector. A deterministic
// axis still gets the interpolated point mass.
LatticeDensity spectral_density_1d(const MarketParams& mp, Leg leg, double dt,
                                   const ReturnGrid& grid,
                                   double drift_shift = 0.0);

std::vector<double> spectral_density_2d(const MarketParams& mp, double dt,
                                        const ReturnGrid& gx,
                                        const ReturnGrid& gy);

// out_j = sum_l w_l f_ext[j + l], j = 0..n_out-1. The field must cover the
// full reach of the kernel: f_ext.size() >= n_out + w.size() - 1.
std::vector<double> cross_correlate_1d(const std::vector<double>& f_ext,
                                       const std::vector<double>& w,
                                       int n_out);

// FFT cross-correlation of a (large) field with a fixed non-negative kernel,
// both real. Sized once; the kernel transform is cached so repeated fields
// cost one forward and one inverse transform each. Output matches the field
// size; entries j with j + (kernel extent) exceeding the field wrap around
// and must not be read.
class Correlator2D {
  public:
    Correlator2D(int nx, int ny);
    ~Correlator2D();
    Correlator2D(const Correlator2D&) = delete;
    Correlator2D& operator=(const Correlator2D&) = delete;

    int nx() const { return nx_; }
    int ny() const { return ny_; }

    // kernel is nkx x nky row-major, zero-padded up to (nx, ny)
    void set_kernel(const std::vector<double>& k, int nkx, int nky);

    // field and out are nx x ny row-major; out may alias field
    void apply(const std::vector<double>& field, std::vector<double>& out);

  private:
    int nx_, ny_;
    double* buf_;
    void* spec_;   // fftw_complex[nx * (ny/2 + 1)]
    void* kspec_;  // cached kernel transform, same layout
    void* fwd_;    // fftw plans
    void* inv_;
    bool have_kernel_ = false;
};

}  // namespace decum
