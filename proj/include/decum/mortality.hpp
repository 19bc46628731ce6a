#pragma once

#include <string>
#include <vector>

namespace decum {

// One-year death probabilities q_x at consecutive integer ages. The last row
// is the terminal age with q = 1 (nobody outlives the table). Survival between
// integer ages is linear.
struct MortalityTable {
    int start_age = 0;
    std::vector<double> qx;

    int terminal_age() const { return start_age + int(qx.size()) - 1; }

    static MortalityTable load_csv(const std::string& path);
    void save_csv(const std::string& path) const;
    void validate() const;

    // survival probability from exact age a0 to exact age a1 (a1 >= a0),
    // on the piecewise-linear survival curve
    double survival(double a0, double a1) const;
};

// Spending rule configuration. r is the real annuitization rate, q_min/q_max
// the floor and cap on the annual withdrawal (thousands), survival_fraction
// the tail mass that defines the planning horizon.
struct ArvaConfig {
    double x0 = 65.0;
    double r = 0.0;
    double survival_fraction = 0.2;
    double q_min = 0.0;
    double q_max = 0.0;

    void validate() const;
};

// Planning horizon T*, measured in years since retirement: the time by which
// all but survival_fraction of the cohort alive at x0 + t has died, capped at
// the table's terminal age. Returns T* with T* >= t.
double conditional_horizon(const MortalityTable& mt, double x0, double t,
                           double fraction);

// a(t) = (1 - e^{-r h}) / r for h = T* - t remaining years; h for r = 0.
double annuity_factor_a(double r, double horizon);

// Fraction of current wealth paid out over [t_i, t_i + 1):
//   A(t_i) = integral e^{-r (t - t_i)} / a(t) dt,
// Simpson quadrature with step doubling, clamped at 1. Hits 1 exactly when
// the annuity factor reaches zero inside the interval.
double lump_sum_fraction(const ArvaConfig& cfg, const MortalityTable& mt,
                         double t_i);

// q = max(q_min, min(A w, q_max)); the floor applies even when wealth is
// negative (withdrawals continue on borrowed money).
double arva_withdrawal(double w_minus, double A, double q_min, double q_max);

// A(t_i) for t_i = 0..M at annual spacing.
std::vector<double> arva_schedule(const ArvaConfig& cfg,
                                  const MortalityTable& mt, int M);

}  // namespace decum
