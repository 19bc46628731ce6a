#include <cmath>
#include <cstdio>
#include <fstream>

#include "decum/errors.hpp"
#include "decum/mortality.hpp"
#include "doctest.h"
#include "fixtures.hpp"

using namespace decum;

namespace {

MortalityTable three_year_table() {
    // S(65)=1, S(66)=.5, S(67)=.25, S(68)=0
    MortalityTable mt;
    mt.start_age = 65;
    mt.qx = {0.5, 0.5, 1.0};
    return mt;
}

MortalityTable immortal_until_terminal() {
    MortalityTable mt;
    mt.start_age = 65;
    mt.qx = {0.0, 0.0, 0.0, 0.0, 1.0};  // terminal age 69
    return mt;
}

ArvaConfig base_arva() {
    ArvaConfig cfg;
    cfg.x0 = 65.0;
    cfg.r = 0.00454;
    cfg.survival_fraction = 0.2;
    cfg.q_min = 30.0;
    cfg.q_max = 80.0;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("mortality");

TEST_CASE("conditional horizon on a hand-checked table") {
    const auto mt = three_year_table();
    // 20% survival point: S linear on [67,68], S=0.2 at 67.2, capped at 67
    CHECK(conditional_horizon(mt, 65.0, 0.0, 0.2) == doctest::Approx(2.0));
    // 40%: S=0.4 at 66 + (0.5-0.4)/(0.5-0.25) = 66.4
    CHECK(conditional_horizon(mt, 65.0, 0.0, 0.4) ==
          doctest::Approx(1.4).epsilon(1e-12));
    // fraction 1 gives a zero remaining horizon
    CHECK(conditional_horizon(mt, 65.0, 0.7, 1.0) == doctest::Approx(0.7));
}

TEST_CASE("zero mortality runs to the terminal age") {
    const auto mt = immortal_until_terminal();
    CHECK(conditional_horizon(mt, 65.0, 0.0, 0.2) == doctest::Approx(4.0));
    CHECK(conditional_horizon(mt, 65.0, 1.5, 0.5) == doctest::Approx(4.0));
}

TEST_CASE("extinct cohort is a data error") {
    MortalityTable mt;
    mt.start_age = 65;
    mt.qx = {1.0, 0.0, 1.0};
    CHECK_THROWS_AS(conditional_horizon(mt, 65.0, 1.5, 0.2), DataError);
}

TEST_CASE("annuity factor closed form and quadrature") {
    CHECK(annuity_factor_a(0.00454, 20.0) == doctest::Approx(19.119).epsilon(5e-5));
    // oracle: Simpson on the discount integrand
    const double r = 0.00454, h = 20.0;
    const int n = 2000;
    double acc = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
        acc += w * std::exp(-r * (h * j / n));
    }
    acc *= h / n / 3.0;
    CHECK(annuity_factor_a(r, h) == doctest::Approx(acc).epsilon(1e-10));

    CHECK(annuity_factor_a(0.0, 12.5) == 12.5);
    CHECK(annuity_factor_a(0.1, 0.0) == 0.0);
    CHECK(annuity_factor_a(0.1, -3.0) == 0.0);
}

TEST_CASE("lump-sum fraction basics") {
    const auto cfg = base_arva();
    const auto mt = MortalityTable::load_csv(data_dir() +
                                             "/mortality_male_ca.csv");
    SUBCASE("beyond the terminal age everything pays out") {
        CHECK(lump_sum_fraction(cfg, mt, double(mt.terminal_age()) - 65.0 + 2.0) ==
              1.0);
    }
    SUBCASE("bounded and increasing over the retirement window") {
        double prev = 0.0;
        for (int t = 0; t <= 30; ++t) {
            const double A = lump_sum_fraction(cfg, mt, double(t));
            CHECK(A > 0.0);
            CHECK(A <= 1.0);
            CHECK(A > prev);
            prev = A;
        }
    }
    SUBCASE("year-zero withdrawal of the base scenario sits inside the bounds") {
        const double A0 = lump_sum_fraction(cfg, mt, 0.0);
        const double q0 = arva_withdrawal(1000.0, A0, cfg.q_min, cfg.q_max);
        CHECK(q0 > cfg.q_min);
        CHECK(q0 < cfg.q_max);
    }
    SUBCASE("quadrature result is step-doubling stable") {
        // the production rule already doubles until 1e-6; verify against a
        // much finer fixed-step Simpson evaluation of the same integrand
        const double A = lump_sum_fraction(cfg, mt, 10.0);
        const int n = 3072;
        double acc = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double t = 10.0 + double(j) / n;
            const double ts = conditional_horizon(mt, 65.0, t, 0.2);
            const double a = annuity_factor_a(cfg.r, ts - t);
            const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            acc += w * std::exp(-cfg.r * (t - 10.0)) / a;
        }
        acc /= n * 3.0;
        CHECK(A == doctest::Approx(acc).epsilon(2e-6));
    }
}

TEST_CASE("withdrawal clamps") {
    CHECK(arva_withdrawal(200.0, 0.05, 30.0, 80.0) == 30.0);   // floor
    CHECK(arva_withdrawal(1000.0, 0.2, 30.0, 80.0) == 80.0);   // cap
    CHECK(arva_withdrawal(1000.0, 0.05, 30.0, 80.0) == 50.0);  // interior
    CHECK(arva_withdrawal(-500.0, 0.05, 30.0, 80.0) == 30.0);  // insolvent
}

TEST_CASE("schedule covers every withdrawal date") {
    const auto cfg = base_arva();
    const auto mt = MortalityTable::load_csv(data_dir() +
                                             "/mortality_male_ca.csv");
    const auto A = arva_schedule(cfg, mt, 30);
    CHECK(A.size() == 31);
    CHECK(A.front() == lump_sum_fraction(cfg, mt, 0.0));
    CHECK(A.back() == lump_sum_fraction(cfg, mt, 30.0));
}

TEST_CASE("csv round trip and validation") {
    const auto mt = three_year_table();
    const std::string path = "mortality_roundtrip_tmp.csv";
    mt.save_csv(path);
    const auto back = MortalityTable::load_csv(path);
    CHECK(back.start_age == mt.start_age);
    REQUIRE(back.qx.size() == mt.qx.size());
    for (std::size_t k = 0; k < mt.qx.size(); ++k)
        CHECK(back.qx[k] == doctest::Approx(mt.qx[k]).epsilon(1e-8));
    std::remove(path.c_str());

    auto write_and_load = [](const char* text) {
        const std::string p = "mortality_bad_tmp.csv";
        std::ofstream(p) << text;
        auto cleanup = [&p]() { std::remove(p.c_str()); };
        try {
            MortalityTable::load_csv(p);
        } catch (...) {
            cleanup();
            throw;
        }
        cleanup();
    };
    CHECK_THROWS_AS(write_and_load("age;qx\n65,0.5\n"), DataError);
    CHECK_THROWS_AS(write_and_load("age,qx\n65,0.5\n67,1.0\n"), DataError);
    CHECK_THROWS_AS(write_and_load("age,qx\n65,0.5\n66,0.7\n"), DataError);
    CHECK_THROWS_AS(write_and_load("age,qx\n65,1.5\n66,1.0\n"), DataError);
}

TEST_CASE("config validation") {
    auto cfg = base_arva();
    cfg.q_max = 10.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = base_arva();
    cfg.survival_fraction = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_SUITE_END();
