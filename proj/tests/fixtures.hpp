#pragma once

#include <string>

#include "decum/market.hpp"

// Calibrated 1926-2018 monthly real-return parameter set used across tests.
inline decum::MarketParams fitted_market() {
    decum::MarketParams mp;
    mp.mu_s = 0.08607;
    mp.sigma_s = 0.14600;
    mp.jump_s = {0.32258, 0.23333, 4.3578, 5.5089};
    mp.mu_b = 0.00454;
    mp.sigma_b = 0.01301;
    mp.jump_b = {0.51610, 0.39580, 65.875, 57.737};
    mp.rho_sb = 0.08311;
    mp.mu_c_b = 0.02;
    return mp;
}

inline std::string test_data_dir() { return DECUM_TEST_DATA_DIR; }
inline std::string data_dir() { return DECUM_DATA_DIR; }
