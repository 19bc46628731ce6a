#include "decum/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <utility>

#include "json.hpp"

#include "decum/csvio.hpp"
#include "decum/errors.hpp"
#include "decum/mortality.hpp"

namespace decum {

namespace fs = std::filesystem;

namespace {

// rethrow component errors with the failing stage named, keeping the type so
// the exit code still tells config, data and numerics failures apart
template <class Fn>
auto stage(const std::string& label, Fn&& fn) {
    try {
        return fn();
    } catch (const ConfigError& e) {
        throw ConfigError(label + ": " + e.what());
    } catch (const DataError& e) {
        throw DataError(label + ": " + e.what());
    } catch (const NumericsError& e) {
        throw NumericsError(label + ": " + e.what());
    }
}

std::string cell(double v) {
    return std::isfinite(v) ? format_double(v) : std::string();
}

// kappa=2.5 -> "2.5" with a filesystem-safe decimal point
std::string key_tag(double v) {
    std::string s = format_double(v);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

MonthlyHistory load_history(const ScenarioConfig& cfg) {
    const MarketHistory h = ingest_market_csv(cfg.market_csv);
    return MonthlyHistory{h.stock.log_returns, h.bond.log_returns};
}

SummaryStats simulate_summary(const ScenarioConfig& cfg,
                              const WithdrawalRule& rule,
                              const Strategy& strategy,
                              const ReturnPathSource& src, int n_paths,
                              PathOutcomes* fans_out) {
    SimRequest req;
    req.n_paths = n_paths;
    req.seed = cfg.seed;
    req.threads = cfg.threads;
    req.record_weights = true;
    req.record_fans = fans_out != nullptr;
    PathOutcomes out =
        simulate_strategy(cfg.dynamics(), rule, strategy, src, req);
    SummaryStats stats = ew_es_summary(out, cfg.alpha);
    if (fans_out) *fans_out = std::move(out);
    return stats;
}

void write_fan_csv(const std::string& path,
                   const std::vector<std::vector<double>>& field_by_date,
                   const std::vector<double>& pcts) {
    CsvTable t;
    t.header.push_back("date");
    for (double p : pcts) t.header.push_back("p" + format_double(p));
    const auto fan = percentile_fan(field_by_date, pcts);
    for (std::size_t d = 0; d < fan.size(); ++d) {
        std::vector<std::string> row;
        row.push_back(std::to_string(d));
        for (double v : fan[d]) row.push_back(format_double(v));
        t.rows.push_back(std::move(row));
    }
    write_csv_table(t, path);
}

void write_manifest(const ScenarioConfig& cfg, const ScenarioReport& rep,
                    const std::string& path) {
    nlohmann::ordered_json m;
    m["engine_version"] = kEngineVersion;
    char hex[24];
    std::snprintf(hex, sizeof hex, "%016llx",
                  (unsigned long long)rep.config_hash);
    m["config_hash"] = hex;
    m["seed"] = cfg.seed;
    m["config_text"] = scenario_text(cfg);
    m["outputs"] = rep.files;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << m.dump(2) << '\n';
    if (!out) throw DataError("write failed: " + path);
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg_in,
                            const StrategyOverride& override_strategy) {
    ScenarioConfig cfg = cfg_in;
    cfg.validate();
    fs::create_directories(cfg.output_dir);
    const auto outpath = [&cfg](const std::string& name) {
        return (fs::path(cfg.output_dir) / name).string();
    };

    ScenarioReport rep;

    if (cfg.calibrate) {
        stage("calibrate", [&] {
            const MarketHistory h = ingest_market_csv(cfg.market_csv);
            const IndexFit fs_ = fit_jump_diffusion(h.stock);
            const IndexFit fb = fit_jump_diffusion(h.bond);
            cfg.market.mu_s = fs_.mu;
            cfg.market.sigma_s = fs_.sigma;
            cfg.market.jump_s = fs_.jumps;
            cfg.market.mu_b = fb.mu;
            cfg.market.sigma_b = fb.sigma;
            cfg.market.jump_b = fb.jumps;
            cfg.market.rho_sb = estimate_correlation(
                h.stock, h.bond, fs_.detection.flags, fb.detection.flags);
            std::ofstream out(outpath("market_calibrated.cfg"));
            if (!out) throw DataError("cannot write calibration fragment");
            out << market_fragment(cfg.market);
            rep.files.push_back("market_calibrated.cfg");
        });
    }
    rep.config_hash = cfg.hash();

    MortalityTable mt;
    if (cfg.proportional)
        mt = stage("mortality",
                   [&] { return MortalityTable::load_csv(cfg.mortality_file); });
    const WithdrawalRule rule = cfg.withdrawal_rule(mt);

    // assemble the strategies to evaluate
    struct Pending {
        StrategyReport r;
        ControlTable table;  // owns storage for Strategy::table
        Strategy strategy;
    };
    std::vector<Pending> pending;
    const double nan = std::nan("");

    if (override_strategy.kind == StrategyOverride::Kind::ConstWeight) {
        Pending p;
        p.r.kappa = nan;
        p.r.p_const = override_strategy.p;
        p.strategy.kind = StrategyKind::ConstantWeight;
        p.strategy.p = override_strategy.p;
        pending.push_back(std::move(p));
    } else if (override_strategy.kind == StrategyOverride::Kind::TableFile) {
        Pending p;
        p.table = stage("load-table", [&] {
            return ControlTable::load(override_strategy.table_file);
        });
        p.r.kappa = p.table.kappa;
        p.r.p_const = nan;
        p.r.table_file = override_strategy.table_file;
        pending.push_back(std::move(p));
    } else {
        for (double kappa : cfg.kappas) {
            Pending p;
            p.r.kappa = kappa;
            p.r.p_const = nan;
            p.r.solved = stage("solve[kappa=" + format_double(kappa) + "]", [&] {
                return solve_optimal(cfg.dynamics(), rule,
                                     cfg.solve_options(kappa));
            });
            p.table = p.r.solved.table;
            p.table.scenario_hash = rep.config_hash;
            const std::string tag = key_tag(kappa);
            const std::string tname = "controls_kappa" + tag + ".ctl";
            p.table.save(outpath(tname));
            rep.files.push_back(tname);
            p.r.table_file = tname;
            const std::string hname = "heatmap_kappa" + tag + ".csv";
            p.table.export_heatmap_csv(outpath(hname), cfg.heatmap_w_lo,
                                       cfg.heatmap_w_hi);
            rep.files.push_back(hname);
            pending.push_back(std::move(p));
        }
    }
    for (auto& p : pending)
        if (p.r.table_file.size() && p.strategy.kind != StrategyKind::ConstantWeight) {
            p.strategy.kind = StrategyKind::Control;
            p.strategy.table = &p.table;
        }

    const std::vector<double> fan_pcts = {5, 25, 50, 75, 95};
    for (auto& p : pending) {
        const std::string tag =
            std::isfinite(p.r.kappa) ? "kappa" + key_tag(p.r.kappa)
                                     : "p" + key_tag(p.r.p_const);
        if (cfg.synthetic_paths > 0) {
            stage("simulate-synthetic[" + tag + "]", [&] {
                SyntheticPathSource src(cfg.market, cfg.dt, cfg.seed);
                PathOutcomes fans;
                p.r.synthetic =
                    simulate_summary(cfg, rule, p.strategy, src,
                                     cfg.synthetic_paths, &fans);
                const std::string wname = "wealth_fan_" + tag + ".csv";
                write_fan_csv(outpath(wname), fans.wealth, fan_pcts);
                rep.files.push_back(wname);
                const std::string qname = "withdrawal_fan_" + tag + ".csv";
                write_fan_csv(outpath(qname), fans.withdrawals, fan_pcts);
                rep.files.push_back(qname);
                return 0;
            });
        }
        if (cfg.bootstrap_paths > 0) {
            stage("simulate-bootstrap[" + tag + "]", [&] {
                BootstrapPathSource src(load_history(cfg), cfg.block_years,
                                        cfg.seed);
                p.r.bootstrap = simulate_summary(cfg, rule, p.strategy, src,
                                                 cfg.bootstrap_paths, nullptr);
                return 0;
            });
        }
    }

    // one summary row per strategy and engine
    CsvTable sum;
    sum.header = {"strategy", "kappa",           "p",
                  "engine",   "value",           "w_star",
                  "es",       "ew_per_date",     "median_terminal",
                  "mean_median_weight", "n_paths"};
    for (const auto& p : pending) {
        const bool solved = p.r.table_file.size() && std::isfinite(p.r.kappa);
        const std::string name =
            p.strategy.kind == StrategyKind::Control ? "optimal" : "const_p";
        if (solved && p.r.solved.table.n_dates() > 0)
            sum.rows.push_back({name, cell(p.r.kappa), cell(p.r.p_const),
                                "solver", cell(p.r.solved.value),
                                cell(p.r.solved.w_star), cell(p.r.solved.es),
                                cell(p.r.solved.ew_per_date), "", "", ""});
        const auto mc_row = [&](const char* engine, const SummaryStats& s) {
            if (s.n_paths == 0) return;
            sum.rows.push_back({name, cell(p.r.kappa), cell(p.r.p_const),
                                engine, "", "", cell(s.es),
                                cell(s.ew_per_date), cell(s.median_terminal),
                                cell(s.mean_median_weight),
                                std::to_string(s.n_paths)});
        };
        mc_row("synthetic", p.r.synthetic);
        mc_row("bootstrap", p.r.bootstrap);
    }
    write_csv_table(sum, outpath("summary.csv"));
    rep.files.push_back("summary.csv");

    for (auto& p : pending) rep.strategies.push_back(std::move(p.r));
    write_manifest(cfg, rep, outpath("manifest.json"));
    rep.files.push_back("manifest.json");
    return rep;
}

void flag_dominated(std::vector<FrontierPoint>& pts) {
    for (auto& a : pts) {
        a.dominated = false;
        for (const auto& b : pts) {
            if (&a == &b) continue;
            const bool weakly = b.es >= a.es && b.ew_per_withdrawal >= a.ew_per_withdrawal;
            const bool strictly =
                b.es > a.es || b.ew_per_withdrawal > a.ew_per_withdrawal;
            if (weakly && strictly) {
                a.dominated = true;
                break;
            }
        }
    }
}

std::vector<FrontierPoint> frontier_sweep(const ScenarioConfig& cfg_in,
                                          const std::vector<double>& kappas,
                                          const std::vector<double>& p_list) {
    ScenarioConfig cfg = cfg_in;
    cfg.validate();
    const bool by_weight = !p_list.empty();
    const auto& keys = by_weight ? p_list : kappas;
    if (keys.size() < 2)
        throw ConfigError("a frontier sweep needs at least two values");
    fs::create_directories(cfg.output_dir);

    MortalityTable mt;
    if (cfg.proportional)
        mt = stage("mortality",
                   [&] { return MortalityTable::load_csv(cfg.mortality_file); });
    const WithdrawalRule rule = cfg.withdrawal_rule(mt);

    std::vector<FrontierPoint> pts;
    for (double key : keys) {
        FrontierPoint fp;
        fp.key = key;
        fp.median_wt = std::nan("");
        Strategy strategy;
        ControlTable table;
        if (by_weight) {
            strategy.kind = StrategyKind::ConstantWeight;
            strategy.p = key;
        } else {
            const SolveResult sol =
                stage("solve[kappa=" + format_double(key) + "]", [&] {
                    return solve_optimal(cfg.dynamics(), rule,
                                         cfg.solve_options(key));
                });
            fp.es = sol.es;
            fp.ew_per_withdrawal = sol.ew_per_date;
            table = sol.table;
            strategy.kind = StrategyKind::Control;
            strategy.table = &table;
        }
        if (cfg.synthetic_paths > 0) {
            const SummaryStats s =
                stage("simulate[" + format_double(key) + "]", [&] {
                    SyntheticPathSource src(cfg.market, cfg.dt, cfg.seed);
                    return simulate_summary(cfg, rule, strategy, src,
                                            cfg.synthetic_paths, nullptr);
                });
            fp.median_wt = s.median_terminal;
            if (by_weight) {
                fp.es = s.es;
                fp.ew_per_withdrawal = s.ew_per_date;
            }
        } else if (by_weight) {
            throw ConfigError(
                "a constant-weight sweep needs engine.synthetic_paths > 0");
        }
        pts.push_back(fp);
    }
    flag_dominated(pts);

    CsvTable t;
    t.header = {by_weight ? "p" : "kappa", "es", "ew_per_withdrawal",
                "median_terminal"};
    for (const auto& fp : pts)
        if (!fp.dominated)
            t.rows.push_back({format_double(fp.key), cell(fp.es),
                              cell(fp.ew_per_withdrawal), cell(fp.median_wt)});
    write_csv_table(t, (fs::path(cfg.output_dir) / "frontier.csv").string());
    return pts;
}

}  // namespace decum
