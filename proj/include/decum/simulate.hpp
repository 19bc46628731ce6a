#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "decum/controls.hpp"
#include "decum/market.hpp"

namespace decum {

// Wealth accounting shared by every strategy: withdrawals at t_0..t_M,
// rebalancing at t_0..t_{M-1}, annual spacing dt. Negative wealth is carried
// as debt at the bond return times the borrowing spread.
struct WealthDynamics {
    MarketParams market;
    double dt = 1.0;
    int n_dates = 30;  // M
    double w0 = 1000.0;
    bool final_withdrawal = true;  // take a draw at t_M as well
};

// Either a fixed annual amount or the capped/floored proportional rule driven
// by the precomputed schedule A[0..M].
struct WithdrawalRule {
    bool proportional = false;
    double q_fixed = 0.0;
    std::vector<double> A;
    double q_min = 0.0;
    double q_max = 0.0;

    double q_at(int date, double wealth) const;
};

enum class StrategyKind { ConstantWeight, Control };

struct Strategy {
    StrategyKind kind = StrategyKind::ConstantWeight;
    double p = 0.0;                       // ConstantWeight
    const ControlTable* table = nullptr;  // Control
};

// Source of one path's per-period gross return pairs; implementations must be
// a pure function of (path index, their own seed) so any thread layout
// produces identical paths.
class ReturnPathSource {
  public:
    virtual ~ReturnPathSource() = default;
    virtual void fill(std::uint64_t path,
                      std::vector<PeriodReturns>& out) const = 0;
};

class SyntheticPathSource final : public ReturnPathSource {
  public:
    SyntheticPathSource(const MarketParams& mp, double dt, std::uint64_t seed)
        : mp_(mp), dt_(dt), seed_(seed) {}
    void fill(std::uint64_t path, std::vector<PeriodReturns>& out) const override;

  private:
    MarketParams mp_;
    double dt_;
    std::uint64_t seed_;
};

// Paired monthly log-return history for resampling.
struct MonthlyHistory {
    std::vector<double> stock;  // log returns
    std::vector<double> bond;
};

// Stationary block bootstrap: uniform starts, geometric block lengths with
// the configured mean (years), circular wrap, paired sampling, monthly
// returns compounded into annual pairs.
class BootstrapPathSource final : public ReturnPathSource {
  public:
    BootstrapPathSource(MonthlyHistory history, double mean_block_years,
                        std::uint64_t seed);
    void fill(std::uint64_t path, std::vector<PeriodReturns>& out) const override;

  private:
    MonthlyHistory hist_;
    double mean_block_months_;
    std::uint64_t seed_;
};

// deterministic core of the block resampler, exposed for tests: expand
// (start, length) block descriptors into n_months circular history indices
std::vector<std::size_t> block_indices(const std::vector<std::size_t>& starts,
                                       const std::vector<std::size_t>& lengths,
                                       std::size_t n_months,
                                       std::size_t history_len);

struct SimRequest {
    int n_paths = 100000;
    std::uint64_t seed = 1;
    int threads = 1;
    bool record_weights = true;
    bool record_fans = false;
};

struct PathOutcomes {
    int n_dates = 0;  // M
    int n_draws = 0;  // withdrawal dates actually taken (M or M+1)
    std::vector<double> terminal_wealth;
    std::vector<double> total_withdrawn;
    // date-major, filled when recording is on
    std::vector<std::vector<double>> weights;      // M x n
    std::vector<std::vector<double>> withdrawals;  // (M+1) x n
    std::vector<std::vector<double>> wealth;       // (M+1) x n, at t_i^-
};

struct SummaryStats {
    double es = 0.0;            // expected shortfall of terminal wealth
    double ew_per_date = 0.0;   // mean total withdrawn / number of draws
    double mean_total_withdrawn = 0.0;
    double median_terminal = 0.0;
    double mean_median_weight = 0.0;  // average over dates of the median weight
    double alpha = 0.0;
    int n_paths = 0;
};

// Mean of the floor(n * alpha) smallest values.
double expected_shortfall(const std::vector<double>& sample, double alpha);

PathOutcomes simulate_strategy(const WealthDynamics& dyn,
                               const WithdrawalRule& rule,
                               const Strategy& strategy,
                               const ReturnPathSource& source,
                               const SimRequest& req);

SummaryStats ew_es_summary(const PathOutcomes& out, double alpha);

// linear-interpolation percentiles of one value across paths
double percentile(std::vector<double> values, double pct);

// rows follow the date axis of the field matrix; one column per requested
// percentile
std::vector<std::vector<double>> percentile_fan(
    const std::vector<std::vector<double>>& field_by_date,
    const std::vector<double>& percentiles);

}  // namespace decum
