#pragma once

#include <string>
#include <vector>

#include "decum/config.hpp"
#include "decum/simulate.hpp"
#include "decum/solver.hpp"

namespace decum {

inline constexpr const char* kEngineVersion = "0.1.0";

// Lets the pipeline evaluate a fixed strategy instead of solving: either a
// constant equity weight or a control table loaded from an earlier solve.
struct StrategyOverride {
    enum class Kind { None, ConstWeight, TableFile };
    Kind kind = Kind::None;
    double p = 0.0;
    std::string table_file;
};

// One strategy's results. kappa is meaningful for solved strategies, p_const
// for constant-weight ones; the other is NaN. Simulation summaries hold
// n_paths == 0 when that engine did not run.
struct StrategyReport {
    double kappa = 0.0;
    double p_const = 0.0;
    SolveResult solved;
    SummaryStats synthetic;
    SummaryStats bootstrap;
    std::string table_file;  // written control table, empty when none
};

struct ScenarioReport {
    std::uint64_t config_hash = 0;
    std::vector<StrategyReport> strategies;
    std::vector<std::string> files;  // paths written, relative to output_dir
};

// Full pipeline: optional calibration, one solve per kappa (or the override
// strategy), synthetic and bootstrap simulation as configured, then the
// output bundle: summary.csv, control tables, heat-map and percentile-fan
// CSVs, and manifest.json tying everything to the config hash and seed.
// Errors from a stage are rethrown with the stage name prefixed.
ScenarioReport run_scenario(const ScenarioConfig& cfg,
                            const StrategyOverride& override_strategy = {});

struct FrontierPoint {
    double key = 0.0;  // kappa, or the constant equity weight
    double es = 0.0;
    double ew_per_withdrawal = 0.0;
    double median_wt = 0.0;  // NaN when no simulation ran
    bool dominated = false;
};

// Marks points beaten on both ES and EW (one strictly) by another point.
void flag_dominated(std::vector<FrontierPoint>& pts);

// Sweep kappa with optimal controls (p_list empty), or sweep constant
// weights under the configured spending rule. Writes frontier.csv to the
// output directory with dominated points dropped; the returned list keeps
// them, flagged.
std::vector<FrontierPoint> frontier_sweep(const ScenarioConfig& cfg,
                                          const std::vector<double>& kappas,
                                          const std::vector<double>& p_list);

}  // namespace decum
