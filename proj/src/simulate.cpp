#include "decum/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

#include "decum/errors.hpp"
#include "decum/mortality.hpp"

namespace decum {

double WithdrawalRule::q_at(int date, double wealth) const {
    if (!proportional) return q_fixed;
    if (date < 0 || date >= int(A.size()))
        throw ConfigError("withdrawal schedule does not cover this date");
    return arva_withdrawal(wealth, A[std::size_t(date)], q_min, q_max);
}

void SyntheticPathSource::fill(std::uint64_t path,
                               std::vector<PeriodReturns>& out) const {
    RandomStream rng(seed_, path);
    for (auto& pr : out) pr = sample_period_returns(mp_, dt_, rng);
}

BootstrapPathSource::BootstrapPathSource(MonthlyHistory history,
                                         double mean_block_years,
                                         std::uint64_t seed)
    : hist_(std::move(history)),
      mean_block_months_(mean_block_years * 12.0),
      seed_(seed) {
    if (hist_.stock.size() != hist_.bond.size())
        throw DataError("bootstrap history legs differ in length");
    if (hist_.stock.size() < 2) throw DataError("bootstrap history too short");
    if (!(mean_block_months_ >= 1.0))
        throw ConfigError("mean block length must be at least one month");
}

std::vector<std::size_t> block_indices(const std::vector<std::size_t>& starts,
                                       const std::vector<std::size_t>& lengths,
                                       std::size_t n_months,
                                       std::size_t history_len) {
    if (starts.size() != lengths.size())
        throw ConfigError("block starts and lengths differ in count");
    std::vector<std::size_t> idx;
    idx.reserve(n_months);
    for (std::size_t b = 0; b < starts.size() && idx.size() < n_months; ++b)
        for (std::size_t k = 0; k < lengths[b] && idx.size() < n_months; ++k)
            idx.push_back((starts[b] + k) % history_len);
    if (idx.size() < n_months)
        throw ConfigError("blocks do not cover the requested months");
    return idx;
}

void BootstrapPathSource::fill(std::uint64_t path,
                               std::vector<PeriodReturns>& out) const {
    const std::size_t months = out.size() * 12;
    const std::size_t n = hist_.stock.size();
    RandomStream rng(seed_, path);

    std::vector<std::size_t> starts, lengths;
    std::size_t covered = 0;
    const double p_end = 1.0 / mean_block_months_;
    while (covered < months) {
        starts.push_back(std::size_t(rng.uniform() * double(n)) % n);
        // geometric block length with mean 1/p_end
        const std::size_t len =
            p_end >= 1.0
                ? 1
                : std::size_t(std::ceil(std::log(rng.uniform()) /
                                        std::log1p(-p_end)));
        lengths.push_back(std::max<std::size_t>(len, 1));
        covered += lengths.back();
    }
    const auto idx = block_indices(starts, lengths, months, n);

    for (std::size_t y = 0; y < out.size(); ++y) {
        double ls = 0.0, lb = 0.0;
        for (std::size_t m = 0; m < 12; ++m) {
            const std::size_t i = idx[y * 12 + m];
            ls += hist_.stock[i];
            lb += hist_.bond[i];
        }
        out[y] = PeriodReturns{std::exp(ls), std::exp(lb)};
    }
}

double expected_shortfall(const std::vector<double>& sample, double alpha) {
    if (sample.empty()) throw DataError("expected shortfall of an empty sample");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha must lie in (0,1)");
    const auto k = std::size_t(std::floor(double(sample.size()) * alpha));
    if (k == 0)
        throw DataError("sample too small for the requested tail");
    std::vector<double> tmp(sample);
    std::nth_element(tmp.begin(), tmp.begin() + (k - 1), tmp.end());
    const double acc =
        std::accumulate(tmp.begin(), tmp.begin() + k, 0.0);
    return acc / double(k);
}

PathOutcomes simulate_strategy(const WealthDynamics& dyn,
                               const WithdrawalRule& rule,
                               const Strategy& strategy,
                               const ReturnPathSource& source,
                               const SimRequest& req) {
    dyn.market.validate();
    if (req.n_paths <= 0) throw ConfigError("path count must be positive");
    if (dyn.n_dates <= 0) throw ConfigError("need at least one rebalance date");
    if (strategy.kind == StrategyKind::Control) {
        if (!strategy.table) throw ConfigError("control strategy without a table");
        if (strategy.table->n_dates() < dyn.n_dates)
            throw ConfigError("control table covers too few dates");
    }
    if (rule.proportional && int(rule.A.size()) < dyn.n_dates + 1)
        throw ConfigError("withdrawal schedule shorter than the horizon");

    const int M = dyn.n_dates;
    const int n = req.n_paths;
    PathOutcomes out;
    out.n_dates = M;
    out.n_draws = dyn.final_withdrawal ? M + 1 : M;
    out.terminal_wealth.assign(std::size_t(n), 0.0);
    out.total_withdrawn.assign(std::size_t(n), 0.0);
    if (req.record_weights)
        out.weights.assign(std::size_t(M),
                           std::vector<double>(std::size_t(n), 0.0));
    if (req.record_fans) {
        out.withdrawals.assign(std::size_t(M) + 1,
                               std::vector<double>(std::size_t(n), 0.0));
        out.wealth.assign(std::size_t(M) + 1,
                          std::vector<double>(std::size_t(n), 0.0));
    }

    const double spread_growth = std::exp(dyn.market.mu_c_b * dyn.dt);

    auto run_range = [&](int lo, int hi) {
        std::vector<PeriodReturns> returns;
        returns.resize(std::size_t(M));
        for (int j = lo; j < hi; ++j) {
            source.fill(std::uint64_t(j), returns);
            double w = dyn.w0;
            double drawn = 0.0;
            bool insolvent = false;
            for (int i = 0; i <= M; ++i) {
                if (req.record_fans) out.wealth[std::size_t(i)][std::size_t(j)] = w;
                const double q =
                    (i == M && !dyn.final_withdrawal) ? 0.0 : rule.q_at(i, w);
                drawn += q;
                const double w_plus = w - q;
                if (req.record_fans)
                    out.withdrawals[std::size_t(i)][std::size_t(j)] = q;
                if (i == M) {
                    out.terminal_wealth[std::size_t(j)] = w_plus;
                    break;
                }
                if (w_plus <= 0.0) insolvent = true;
                double p = 0.0;
                if (!insolvent) {
                    p = strategy.kind == StrategyKind::ConstantWeight
                            ? strategy.p
                            : strategy.table->p_at(i, w_plus);
                }
                if (req.record_weights)
                    out.weights[std::size_t(i)][std::size_t(j)] = p;
                const auto& r = returns[std::size_t(i)];
                if (w_plus > 0.0)
                    w = w_plus * (p * r.r_s + (1.0 - p) * r.r_b);
                else
                    w = w_plus * r.r_b * spread_growth;
            }
            out.total_withdrawn[std::size_t(j)] = drawn;
        }
    };

    const int threads = std::max(1, req.threads);
    if (threads == 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const int lo = t * chunk;
            const int hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi);
        }
        for (auto& th : pool) th.join();
    }
    return out;
}

SummaryStats ew_es_summary(const PathOutcomes& out, double alpha) {
    SummaryStats s;
    s.alpha = alpha;
    s.n_paths = int(out.terminal_wealth.size());
    s.es = expected_shortfall(out.terminal_wealth, alpha);
    s.mean_total_withdrawn =
        std::accumulate(out.total_withdrawn.begin(), out.total_withdrawn.end(),
                        0.0) /
        double(s.n_paths);
    s.ew_per_date = s.mean_total_withdrawn / double(out.n_draws);
    s.median_terminal = percentile(out.terminal_wealth, 50.0);
    if (!out.weights.empty()) {
        double acc = 0.0;
        for (const auto& row : out.weights) acc += percentile(row, 50.0);
        s.mean_median_weight = acc / double(out.weights.size());
    }
    return s;
}

double percentile(std::vector<double> values, double pct) {
    if (values.empty()) throw DataError("percentile of an empty sample");
    std::sort(values.begin(), values.end());
    const double pos = pct / 100.0 * double(values.size() - 1);
    const auto k = std::size_t(pos);
    if (k + 1 >= values.size()) return values.back();
    const double f = pos - double(k);
    return values[k] * (1.0 - f) + values[k + 1] * f;
}

std::vector<std::vector<double>> percentile_fan(
    const std::vector<std::vector<double>>& field_by_date,
    const std::vector<double>& percentiles) {
    std::vector<std::vector<double>> fan;
    fan.reserve(field_by_date.size());
    for (const auto& row : field_by_date) {
        std::vector<double> cols;
        cols.reserve(percentiles.size());
        for (double p : percentiles) cols.push_back(percentile(row, p));
        fan.push_back(std::move(cols));
    }
    return fan;
}

}  // namespace decum
