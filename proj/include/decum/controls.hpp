#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace decum {

// Optimal equity fraction at one rebalance date, tabulated on a grid of
// post-withdrawal wealth levels (thousands), ascending.
struct ControlSlice {
    std::vector<double> w;
    std::vector<double> p;
};

// Full feedback control: one slice per rebalance date t_0..t_{M-1}, plus the
// committed shortfall threshold the objective was solved with.
struct ControlTable {
    std::vector<ControlSlice> slices;
    double w_star = 0.0;
    double kappa = 0.0;
    double alpha = 0.0;
    double epsilon = 0.0;
    double w0 = 0.0;
    std::uint64_t scenario_hash = 0;
    int n_x = 0, n_y = 0;
    double x_min = 0.0, x_max = 0.0;

    int n_dates() const { return int(slices.size()); }

    // Linear interpolation in wealth, clamped at the grid ends and to [0,1].
    // Insolvent states never hold equity.
    double p_at(int date, double w_plus) const;

    void save(const std::string& path) const;
    static ControlTable load(const std::string& path);

    // heat-map rows (t, w, p) restricted to a wealth window
    void export_heatmap_csv(const std::string& path, double w_lo,
                            double w_hi) const;
};

}  // namespace decum
