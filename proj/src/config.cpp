#include "decum/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string_view>

#include "decum/csvio.hpp"
#include "decum/errors.hpp"

namespace decum {

namespace {

// the spending-rule selector gets its own tag so the generic visitor can
// spell it arva/fixed instead of on/off
struct RuleRef {
    bool* proportional;
};

// One pass over every key in canonical file order. The same walk backs
// parsing, writing and hashing, so the three can never drift apart.
template <class F>
void visit_keys(ScenarioConfig& c, F&& f) {
    f("market.calibrate", &c.calibrate);
    f("market.stock.mu", &c.market.mu_s);
    f("market.stock.sigma", &c.market.sigma_s);
    f("market.stock.lambda", &c.market.jump_s.lambda);
    f("market.stock.p_up", &c.market.jump_s.p_up);
    f("market.stock.eta1", &c.market.jump_s.eta1);
    f("market.stock.eta2", &c.market.jump_s.eta2);
    f("market.bond.mu", &c.market.mu_b);
    f("market.bond.sigma", &c.market.sigma_b);
    f("market.bond.lambda", &c.market.jump_b.lambda);
    f("market.bond.p_up", &c.market.jump_b.p_up);
    f("market.bond.eta1", &c.market.jump_b.eta1);
    f("market.bond.eta2", &c.market.jump_b.eta2);
    f("market.rho_sb", &c.market.rho_sb);
    f("market.borrow_premium", &c.market.mu_c_b);
    f("spending.rule", RuleRef{&c.proportional});
    f("spending.fixed_q", &c.fixed_q);
    f("spending.start_age", &c.arva.x0);
    f("spending.rate", &c.arva.r);
    f("spending.survival_fraction", &c.arva.survival_fraction);
    f("spending.q_min", &c.arva.q_min);
    f("spending.q_max", &c.arva.q_max);
    f("spending.mortality_file", &c.mortality_file);
    f("scenario.w0", &c.w0);
    f("scenario.dates", &c.n_dates);
    f("scenario.dt", &c.dt);
    f("scenario.final_withdrawal", &c.final_withdrawal);
    f("grid.n_x", &c.n_x);
    f("grid.n_y", &c.n_y);
    f("grid.n_p", &c.n_p);
    f("grid.center", &c.grid_center);
    f("grid.half_span", &c.half_span);
    f("grid.spectral_kernels", &c.spectral_kernels);
    f("objective.kappa", &c.kappas);
    f("objective.alpha", &c.alpha);
    f("objective.epsilon", &c.epsilon);
    f("solver.w_star_lo", &c.w_star_lo);
    f("solver.w_star_hi", &c.w_star_hi);
    f("solver.w_star_hint", &c.w_star_hint);
    f("solver.w_star_window", &c.w_star_window);
    f("solver.scan_points", &c.scan_points);
    f("solver.w_star_tol", &c.w_star_tol);
    f("engine.synthetic_paths", &c.synthetic_paths);
    f("engine.bootstrap_paths", &c.bootstrap_paths);
    f("engine.block_years", &c.block_years);
    f("engine.market_csv", &c.market_csv);
    f("engine.seed", &c.seed);
    f("engine.threads", &c.threads);
    f("output.dir", &c.output_dir);
    f("output.heatmap_w_lo", &c.heatmap_w_lo);
    f("output.heatmap_w_hi", &c.heatmap_w_hi);
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace((unsigned char)s[a])) ++a;
    while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
    return s.substr(a, b - a);
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError(key + ": cannot parse number '" + v + "'");
    return x;
}

struct Setter {
    const std::string& key;
    const std::string& value;
    bool* done;

    bool hit(const char* name) const { return !*done && key == name; }

    void operator()(const char* name, double* p) const {
        if (!hit(name)) return;
        *p = parse_double(key, value);
        *done = true;
    }
    void operator()(const char* name, int* p) const {
        if (!hit(name)) return;
        const double x = parse_double(key, value);
        if (x != double(int(x)))
            throw ConfigError(key + ": wants an integer, got '" + value + "'");
        *p = int(x);
        *done = true;
    }
    void operator()(const char* name, bool* p) const {
        if (!hit(name)) return;
        if (value == "on" || value == "true" || value == "1")
            *p = true;
        else if (value == "off" || value == "false" || value == "0")
            *p = false;
        else
            throw ConfigError(key + ": wants on or off, got '" + value + "'");
        *done = true;
    }
    void operator()(const char* name, std::string* p) const {
        if (!hit(name)) return;
        *p = value;
        *done = true;
    }
    void operator()(const char* name, std::uint64_t* p) const {
        if (!hit(name)) return;
        char* end = nullptr;
        *p = std::strtoull(value.c_str(), &end, 10);
        if (end == value.c_str() || *end != '\0')
            throw ConfigError(key + ": cannot parse integer '" + value + "'");
        *done = true;
    }
    void operator()(const char* name, std::vector<double>* p) const {
        if (!hit(name)) return;
        std::vector<double> xs;
        std::string item;
        std::istringstream ss(value);
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty())
                throw ConfigError(key + ": empty list entry in '" + value + "'");
            xs.push_back(parse_double(key, item));
        }
        if (xs.empty()) throw ConfigError(key + ": empty list");
        *p = xs;
        *done = true;
    }
    void operator()(const char* name, RuleRef r) const {
        if (!hit(name)) return;
        if (value == "arva")
            *r.proportional = true;
        else if (value == "fixed")
            *r.proportional = false;
        else
            throw ConfigError(key + ": wants arva or fixed, got '" + value +
                              "'");
        *done = true;
    }
};

struct Writer {
    std::ostream& out;
    bool for_hash;

    bool skip(const char* name) const {
        // location and parallelism cannot change any result
        return for_hash && (std::string_view(name) == "output.dir" ||
                            std::string_view(name) == "engine.threads");
    }

    void line(const char* name, const std::string& v) const {
        out << name << " = " << v << '\n';
    }
    void operator()(const char* name, double* p) const {
        if (!skip(name)) line(name, format_double(*p));
    }
    void operator()(const char* name, int* p) const {
        if (!skip(name)) line(name, std::to_string(*p));
    }
    void operator()(const char* name, bool* p) const {
        if (!skip(name)) line(name, *p ? "on" : "off");
    }
    void operator()(const char* name, std::string* p) const {
        if (!skip(name)) line(name, *p);
    }
    void operator()(const char* name, std::uint64_t* p) const {
        if (!skip(name)) line(name, std::to_string(*p));
    }
    void operator()(const char* name, std::vector<double>* p) const {
        if (skip(name)) return;
        std::string v;
        for (std::size_t i = 0; i < p->size(); ++i) {
            if (i) v += ',';
            v += format_double((*p)[i]);
        }
        line(name, v);
    }
    void operator()(const char* name, RuleRef r) const {
        if (!skip(name)) line(name, *r.proportional ? "arva" : "fixed");
    }
};

std::string canonical_text(const ScenarioConfig& cfg, bool for_hash) {
    std::ostringstream out;
    visit_keys(const_cast<ScenarioConfig&>(cfg), Writer{out, for_hash});
    return out.str();
}

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void set_scenario_key(ScenarioConfig& cfg, const std::string& key,
                      const std::string& value) {
    bool done = false;
    visit_keys(cfg, Setter{key, value, &done});
    if (!done) throw ConfigError("unknown config key '" + key + "'");
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    ScenarioConfig cfg;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(ln) +
                              ": expected 'key = value'");
        set_scenario_key(cfg, trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
    }
    return cfg;
}

void save_scenario(const ScenarioConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write config: " + path);
    out << scenario_text(cfg);
    if (!out) throw DataError("write failed: " + path);
}

std::string scenario_text(const ScenarioConfig& cfg) {
    return canonical_text(cfg, false);
}

std::string market_fragment(const MarketParams& mp) {
    ScenarioConfig cfg;
    cfg.market = mp;
    std::istringstream all(canonical_text(cfg, false));
    std::ostringstream out;
    std::string line;
    while (std::getline(all, line))
        if (line.rfind("market.", 0) == 0 &&
            line.rfind("market.calibrate", 0) != 0)
            out << line << '\n';
    return out.str();
}

std::uint64_t ScenarioConfig::hash() const {
    const std::string text = canonical_text(*this, true);
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

void ScenarioConfig::validate() const {
    market.validate();
    if (proportional) arva.validate();
    if (!proportional && !(fixed_q >= 0.0))
        throw ConfigError("spending.fixed_q must be non-negative");
    if (!(w0 > 0.0)) throw ConfigError("scenario.w0 must be positive");
    if (n_dates < 1) throw ConfigError("scenario.dates must be at least 1");
    if (!(dt > 0.0)) throw ConfigError("scenario.dt must be positive");
    if (!power_of_two(n_x) || !power_of_two(n_y))
        throw ConfigError("grid sizes must be powers of two");
    if (n_x != n_y)
        throw ConfigError("the correlation lattice is square: grid.n_x must "
                          "equal grid.n_y");
    if (n_p != 0 && n_p < 2)
        throw ConfigError("grid.n_p must be 0 (auto) or at least 2");
    if (!(grid_center > 0.0)) throw ConfigError("grid.center must be positive");
    if (!(half_span > 0.0))
        throw ConfigError("grid.half_span must be positive");
    if (kappas.empty()) throw ConfigError("objective.kappa list is empty");
    for (double k : kappas)
        if (!(k > 0.0)) throw ConfigError("objective.kappa entries must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ConfigError("objective.alpha must lie in (0,1]");
    if (!std::isfinite(epsilon))
        throw ConfigError("objective.epsilon must be finite");
    if (!(w_star_lo < w_star_hi))
        throw ConfigError("solver.w_star_lo must be below solver.w_star_hi");
    if (scan_points < 3) throw ConfigError("solver.scan_points must be >= 3");
    if (!(w_star_tol > 0.0))
        throw ConfigError("solver.w_star_tol must be positive");
    if (!(w_star_window > 0.0))
        throw ConfigError("solver.w_star_window must be positive");
    if (synthetic_paths < 0 || bootstrap_paths < 0)
        throw ConfigError("path counts cannot be negative");
    if (!(block_years > 0.0))
        throw ConfigError("engine.block_years must be positive");
    if (threads < 1) throw ConfigError("engine.threads must be at least 1");
    if (!(heatmap_w_lo < heatmap_w_hi))
        throw ConfigError("output.heatmap_w_lo must be below output.heatmap_w_hi");

    namespace fs = std::filesystem;
    if (proportional && !fs::exists(mortality_file))
        throw ConfigError("spending.mortality_file not found: " +
                          mortality_file);
    if ((calibrate || bootstrap_paths > 0) && !fs::exists(market_csv))
        throw ConfigError("engine.market_csv not found: " + market_csv);
}

WealthDynamics ScenarioConfig::dynamics() const {
    WealthDynamics dyn;
    dyn.market = market;
    dyn.dt = dt;
    dyn.n_dates = n_dates;
    dyn.w0 = w0;
    dyn.final_withdrawal = final_withdrawal;
    return dyn;
}

WithdrawalRule ScenarioConfig::withdrawal_rule(const MortalityTable& mt) const {
    WithdrawalRule rule;
    if (proportional) {
        rule.proportional = true;
        rule.A = arva_schedule(arva, mt, n_dates);
        rule.q_min = arva.q_min;
        rule.q_max = arva.q_max;
    } else {
        rule.q_fixed = fixed_q;
    }
    return rule;
}

SolveOptions ScenarioConfig::solve_options(double kappa) const {
    SolveOptions opt;
    opt.n = n_x;
    opt.x_center = std::log(grid_center);
    opt.half_span = half_span;
    opt.kappa = kappa;
    opt.alpha = alpha;
    opt.epsilon = epsilon;
    opt.n_controls = n_p;
    opt.spectral_kernels = spectral_kernels;
    opt.w_star_lo = w_star_lo;
    opt.w_star_hi = w_star_hi;
    opt.scan_points = scan_points;
    opt.w_star_tol = w_star_tol;
    opt.w_star_hint = w_star_hint;
    opt.w_star_window = w_star_window;
    return opt;
}

}  // namespace decum
