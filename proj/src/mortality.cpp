#include "decum/mortality.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "decum/errors.hpp"

namespace decum {

namespace {

// survival curve knots: S[k] = P(alive at start_age + k | alive at start_age),
// with S[n] = 0 one past the terminal age
std::vector<double> survival_knots(const MortalityTable& mt) {
    std::vector<double> s(mt.qx.size() + 1);
    s[0] = 1.0;
    for (std::size_t k = 0; k < mt.qx.size(); ++k)
        s[k + 1] = s[k] * (1.0 - mt.qx[k]);
    return s;
}

double interp_knots(const MortalityTable& mt, const std::vector<double>& s,
                    double age) {
    const double pos = age - mt.start_age;
    if (pos <= 0.0) return 1.0;
    if (pos >= double(s.size() - 1)) return 0.0;
    const auto k = std::size_t(pos);
    const double f = pos - double(k);
    return s[k] * (1.0 - f) + s[k + 1] * f;
}

}  // namespace

void MortalityTable::validate() const {
    if (qx.size() < 2) throw DataError("mortality table needs at least 2 rows");
    for (double q : qx)
        if (!(q >= 0.0 && q <= 1.0))
            throw DataError("mortality rates must lie in [0,1]");
    if (qx.back() != 1.0)
        throw DataError("mortality table must end with q = 1 at the terminal age");
}

MortalityTable MortalityTable::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open mortality table: " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty mortality table: " + path);
    auto strip = [](std::string s) {
        s.erase(std::remove_if(s.begin(), s.end(),
                               [](unsigned char c) { return std::isspace(c); }),
                s.end());
        return s;
    };
    if (strip(line) != "age,qx")
        throw DataError("mortality table header must be 'age,qx': " + path);

    MortalityTable mt;
    int expect = 0;
    bool first = true;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        std::istringstream row(line);
        std::string age_s, qx_s;
        if (!std::getline(row, age_s, ',') || !std::getline(row, qx_s))
            throw DataError("bad mortality row at line " + std::to_string(lineno));
        int age;
        double q;
        try {
            age = std::stoi(strip(age_s));
            q = std::stod(strip(qx_s));
        } catch (const std::exception&) {
            throw DataError("bad mortality row at line " + std::to_string(lineno));
        }
        if (first) {
            mt.start_age = age;
            expect = age;
            first = false;
        }
        if (age != expect)
            throw DataError("mortality ages must be consecutive integers, line " +
                            std::to_string(lineno));
        ++expect;
        mt.qx.push_back(q);
    }
    mt.validate();
    return mt;
}

void MortalityTable::save_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write mortality table: " + path);
    out << "age,qx\n";
    char buf[64];
    for (std::size_t k = 0; k < qx.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%d,%.8f\n", start_age + int(k), qx[k]);
        out << buf;
    }
}

double MortalityTable::survival(double a0, double a1) const {
    const auto s = survival_knots(*this);
    const double base = interp_knots(*this, s, a0);
    if (base <= 0.0) return 0.0;
    return interp_knots(*this, s, a1) / base;
}

void ArvaConfig::validate() const {
    if (q_min < 0.0) throw ConfigError("q_min must be >= 0");
    if (q_max < q_min) throw ConfigError("q_max must be >= q_min");
    if (!(survival_fraction > 0.0 && survival_fraction <= 1.0))
        throw ConfigError("survival_fraction must lie in (0,1]");
    if (x0 <= 0.0) throw ConfigError("retirement age must be positive");
}

double conditional_horizon(const MortalityTable& mt, double x0, double t,
                           double fraction) {
    const double a0 = x0 + t;
    if (a0 >= mt.terminal_age()) return t;  // horizon exhausted
    const auto s = survival_knots(mt);
    const double base = interp_knots(mt, s, a0);
    if (base <= 0.0)
        throw DataError("cohort already extinct at age " + std::to_string(a0));
    const double target = fraction * base;

    double a_star;
    if (interp_knots(mt, s, a0) <= target) {
        a_star = a0;  // fraction = 1
    } else {
        a_star = double(mt.terminal_age() + 1);
        double prev_age = a0;
        double prev_s = base;
        for (int k = int(std::floor(a0 - mt.start_age)) + 1;
             k <= int(s.size()) - 1; ++k) {
            const double age = mt.start_age + double(k);
            const double sv = s[std::size_t(k)];
            if (sv <= target) {
                a_star = prev_age + (prev_s - target) / (prev_s - sv) *
                                        (age - prev_age);
                break;
            }
            prev_age = age;
            prev_s = sv;
        }
    }
    a_star = std::min(a_star, double(mt.terminal_age()));
    return std::max(a_star - x0, t);
}

double annuity_factor_a(double r, double horizon) {
    if (horizon <= 0.0) return 0.0;
    if (r == 0.0) return horizon;
    return -std::expm1(-r * horizon) / r;
}

namespace {

double arva_integrand(const ArvaConfig& cfg, const MortalityTable& mt,
                      double t_i, double t) {
    const double tstar = conditional_horizon(mt, cfg.x0, t, cfg.survival_fraction);
    const double a = annuity_factor_a(cfg.r, tstar - t);
    if (a <= 0.0) return -1.0;  // terminal exhaustion marker
    return std::exp(-cfg.r * (t - t_i)) / a;
}

}  // namespace

double lump_sum_fraction(const ArvaConfig& cfg, const MortalityTable& mt,
                         double t_i) {
    if (cfg.x0 + t_i >= mt.terminal_age()) return 1.0;

    double prev = 0.0;
    for (int n = 12; n <= 12 * 256; n *= 2) {
        const double h = 1.0 / n;
        double acc = 0.0;
        for (int j = 0; j <= n; ++j) {
            const double f = arva_integrand(cfg, mt, t_i, t_i + j * h);
            if (f < 0.0) return 1.0;  // annuity factor hit zero in the interval
            const double w = (j == 0 || j == n) ? 1.0 : (j % 2 ? 4.0 : 2.0);
            acc += w * f;
        }
        const double simpson = acc * h / 3.0;
        if (n > 12 &&
            std::abs(simpson - prev) <= 1e-6 * std::max(1.0, std::abs(simpson)))
            return std::min(simpson, 1.0);
        prev = simpson;
    }
    throw NumericsError("lump_sum_fraction quadrature did not converge");
}

double arva_withdrawal(double w_minus, double A, double q_min, double q_max) {
    return std::max(q_min, std::min(A * w_minus, q_max));
}

std::vector<double> arva_schedule(const ArvaConfig& cfg,
                                  const MortalityTable& mt, int M) {
    std::vector<double> A(std::size_t(M) + 1);
    for (int i = 0; i <= M; ++i)
        A[std::size_t(i)] = lump_sum_fraction(cfg, mt, double(i));
    return A;
}

}  // namespace decum
