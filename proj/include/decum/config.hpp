#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "decum/market.hpp"
#include "decum/mortality.hpp"
#include "decum/simulate.hpp"
#include "decum/solver.hpp"

namespace decum {

// Everything a run needs, read from a flat `key = value` text file. Lines
// starting with # are comments; unknown keys are errors; every key has a
// default, so a fragment holding only market.* keys (a calibration output)
// loads fine. save_scenario writes the full key set back in a fixed order,
// and the scenario hash is FNV-1a over that canonical text minus the keys
// that cannot change results (output directory, thread count).
struct ScenarioConfig {
    MarketParams market;
    bool calibrate = false;  // refit market.* from engine.market_csv first

    // spending rule: the proportional schedule with floor and cap, or a
    // constant draw of fixed_q
    bool proportional = true;
    double fixed_q = 40.0;
    ArvaConfig arva;
    std::string mortality_file = "data/mortality_male_ca.csv";

    double w0 = 1000.0;
    int n_dates = 30;  // M rebalances; horizon T = M dt
    double dt = 1.0;
    bool final_withdrawal = true;

    // wealth lattice, powers of two; the correlation step needs a square
    // field so n_x must equal n_y
    int n_x = 512, n_y = 512;
    int n_p = 0;  // control grid points, 0 means n_x + 1
    double grid_center = 100.0;  // wealth at the middle node
    double half_span = 8.0;      // log-wealth half-width
    bool spectral_kernels = true;  // band-limited transition weights

    std::vector<double> kappas = {2.5};
    double alpha = 0.05;
    double epsilon = -1e-4;

    double w_star_lo = 0.0;
    double w_star_hi = 1500.0;
    double w_star_hint = std::nan("");
    double w_star_window = 6.0;
    int scan_points = 129;
    double w_star_tol = 0.02;

    int synthetic_paths = 200000;
    int bootstrap_paths = 0;
    double block_years = 2.0;        // expected bootstrap block length
    std::string market_csv;          // monthly level history, when needed
    std::uint64_t seed = 1;
    int threads = 1;
    std::string output_dir = "out";
    double heatmap_w_lo = 0.0;       // wealth window of the exported heat map
    double heatmap_w_hi = 2000.0;

    void validate() const;
    std::uint64_t hash() const;

    // assembled engine inputs
    WealthDynamics dynamics() const;
    WithdrawalRule withdrawal_rule(const MortalityTable& mt) const;
    SolveOptions solve_options(double kappa) const;
};

// Parse one `key = value` assignment onto cfg; ConfigError names the key on
// unknown keys or unparsable values.
void set_scenario_key(ScenarioConfig& cfg, const std::string& key,
                      const std::string& value);

ScenarioConfig load_scenario(const std::string& path);
void save_scenario(const ScenarioConfig& cfg, const std::string& path);

// full canonical key set, one `key = value` per line
std::string scenario_text(const ScenarioConfig& cfg);

// just the market.* keys; what the calibrator writes
std::string market_fragment(const MarketParams& mp);

}  // namespace decum
