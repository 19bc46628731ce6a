#pragma once

#include <cmath>
#include <vector>

#include "decum/controls.hpp"
#include "decum/simulate.hpp"
#include "decum/transition.hpp"

namespace decum {

// Backward-induction solve of the pre-commitment spending problem. The
// objective committed to at time zero, for a fixed shortfall threshold W*, is
//
//   E[ sum of withdrawals
//      + kappa (W* + min(W_T - W*, 0) / alpha)
//      + epsilon W_T ]
//
// maximized over the equity fraction chosen at every rebalance date as a
// function of post-withdrawal wealth. Maximizing the same quantity over W*
// afterwards turns the bracketed term into the expected shortfall of W_T, so
// the full solve is an outer line search over W* around an inner dynamic
// program.
struct SolveOptions {
    int n = 512;             // wealth nodes per sign, even
    double x_center = std::log(100.0);
    double half_span = 8.0;  // log-wealth window is x_center +- half_span
    double kappa = 2.5;
    double alpha = 0.05;
    double epsilon = -1e-4;  // terminal-wealth tilt, zero disables
    int n_controls = 0;      // equity-fraction grid points, 0 means n + 1

    // Transition weights for the period steps. Spectral weights invert the
    // characteristic function band-limited to the lattice, the classical
    // Fourier-stepping operator; they ring signed on coarse grids but carry
    // a smaller low-order bias on the smooth surfaces stepped here. Cell
    // masses stay non-negative on any grid at the price of extra smoothing.
    bool spectral_kernels = true;

    // Outer search over the committed threshold. The dual can carry more
    // than one self-consistent local maximum; the default domain floors the
    // threshold at zero, which selects the solution that protects against
    // ending below broke. A negative lower bound widens the search to
    // negative thresholds deliberately.
    double w_star_lo = 0.0;
    double w_star_hi = 1500.0;
    int scan_points = 129;
    double w_star_tol = 0.02;
    double w_star_hint = std::nan("");  // finite skips the scan
    double w_star_window = 6.0;         // half-width of the hinted bracket

    void validate() const;
};

// One backward pass at a fixed committed threshold.
struct ThresholdSolve {
    double value = 0.0;      // objective at the starting wealth
    double ew_sum = 0.0;     // E[sum of withdrawals], sidecar pass only
    double shortfall = 0.0;  // E[min(W_T - W*, 0)], sidecar pass only
    ControlTable table;      // filled on the sidecar pass

    // time-zero value function on the full signed wealth grid, ascending
    std::vector<double> nodes_w;
    std::vector<double> nodes_v;
};

struct SolveResult {
    ControlTable table;
    double value = 0.0;
    double w_star = 0.0;
    double es = 0.0;           // w_star + shortfall / alpha
    double ew_per_date = 0.0;  // ew_sum / number of withdrawal dates
};

// Holds the grid, the transition kernels and the FFT workspace so repeated
// solves at different thresholds (the outer search) pay the setup once.
class BackwardSolver {
  public:
    BackwardSolver(const WealthDynamics& dyn, const WithdrawalRule& rule,
                   const SolveOptions& opt);

    // value pass only, cheap enough for the outer line search
    double value_at(double w_star);

    // with_sidecars also carries the withdrawal-sum and shortfall
    // expectations through the recursion and emits the control table
    ThresholdSolve solve(double w_star, bool with_sidecars);

    const SolveOptions& options() const { return opt_; }

  private:
    // fitted far-field asymptotes a + s w of a collapsed function, one line
    // per sign of wealth
    struct TailFit {
        double ap, sp;  // right tail
        double an, sn;  // left tail
    };

    void terminal_condition(double w_star, bool with_sidecars);
    void step_back(int date, bool with_sidecars);
    double eval_collapsed(const std::vector<double>& pos,
                          const std::vector<double>& neg, double w) const;
    TailFit fit_tails(const std::vector<double>& pos,
                      const std::vector<double>& neg) const;
    double eval_residual(const std::vector<double>& pos,
                         const std::vector<double>& neg, double w, double la,
                         double ls) const;

    WealthDynamics dyn_;
    WithdrawalRule rule_;
    SolveOptions opt_;

    int n_ = 0;       // nodes per sign
    double h_ = 0.0;  // lattice spacing, shared by wealth and return grids
    double x_min_ = 0.0;
    double w_bot_ = 0.0;  // wealth at the innermost node
    double w_top_ = 0.0;  // wealth at the outermost node
    std::vector<double> node_w_;    // e^{x_j}, j = 0..n-1
    std::vector<double> eu_;        // wealth on the extended field lattice
    std::vector<double> s_over_h_;  // log1p(e^{-d h}) / h
    std::vector<double> ln_p_, ln_1mp_;

    LatticeDensity ker_s_, ker_b_, ker_debt_;
    std::vector<double> ker_2d_;
    Correlator2D corr_;

    // exact one-period gross means, e^{mu dt}; mix_m_[k] blends the stock and
    // bond means at control node k
    double m_s_ = 1.0, m_b_ = 1.0, m_debt_ = 1.0;
    std::vector<double> mix_m_;

    // collapsed arrays, positive and mirror sides
    std::vector<double> vp_, vn_, vp_next_, vn_next_;
    std::vector<double> ap_, an_, ap_next_, an_next_;
    std::vector<double> bp_, bn_, bp_next_, bn_next_;

    std::vector<double> field_;  // (2n)^2 build-and-correlate scratch
    std::vector<double> rp_, rn_;  // tail-subtracted collapsed scratch
    std::vector<double> core_v_, core_a_, core_b_;
    std::vector<double> g1s_, g1b_, g1neg_;
    std::vector<double> g1s_a_, g1b_a_, g1neg_a_;
    std::vector<double> g1s_b_, g1b_b_, g1neg_b_;
    std::vector<double> f1pos_, f1neg_;

    ControlTable table_;
};

// Outer threshold search wrapped around the backward solver. Without a hint
// the threshold is bracketed by an even scan of [w_star_lo, w_star_hi]; a
// scan maximum on the bracket edge raises NumericsError, except on an
// exact-zero lower edge, which counts as the floor of the threshold domain
// rather than a mis-bracketing, and a refined threshold within tolerance of
// that floor is reported as exactly zero. When opt.n exceeds 512 and no hint
// is given, the scan runs on a 512-node solver first and only the
// refinement, over a window clipped to the search domain, pays the full
// grid. A user hint overrides the domain: its window is searched as given.
SolveResult solve_optimal(const WealthDynamics& dyn, const WithdrawalRule& rule,
                          const SolveOptions& opt);

}  // namespace decum
