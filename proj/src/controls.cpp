#include "decum/controls.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "decum/errors.hpp"

namespace decum {

double ControlTable::p_at(int date, double w_plus) const {
    if (date < 0 || date >= n_dates())
        throw ConfigError("control lookup outside the tabulated dates");
    if (w_plus <= 0.0) return 0.0;
    const auto& s = slices[std::size_t(date)];
    double p;
    if (w_plus <= s.w.front()) {
        p = s.p.front();
    } else if (w_plus >= s.w.back()) {
        p = s.p.back();
    } else {
        const auto it = std::upper_bound(s.w.begin(), s.w.end(), w_plus);
        const auto k = std::size_t(it - s.w.begin()) - 1;
        const double f = (w_plus - s.w[k]) / (s.w[k + 1] - s.w[k]);
        p = s.p[k] * (1.0 - f) + s.p[k + 1] * f;
    }
    return std::clamp(p, 0.0, 1.0);
}

void ControlTable::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write control table: " + path);
    char buf[256];
    out << "decum-control v1\n";
    std::snprintf(buf, sizeof buf, "scenario_hash %016llx\n",
                  (unsigned long long)scenario_hash);
    out << buf;
    std::snprintf(buf, sizeof buf, "grid %d %d %.17g %.17g\n", n_x, n_y, x_min,
                  x_max);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "objective kappa %.17g alpha %.17g epsilon %.17g\n", kappa,
                  alpha, epsilon);
    out << buf;
    std::snprintf(buf, sizeof buf, "w_star %.17g\nw0 %.17g\ndates %d\n", w_star,
                  w0, n_dates());
    out << buf;
    for (int d = 0; d < n_dates(); ++d) {
        const auto& s = slices[std::size_t(d)];
        std::snprintf(buf, sizeof buf, "date %d nodes %zu\n", d, s.w.size());
        out << buf;
        for (std::size_t k = 0; k < s.w.size(); ++k) {
            std::snprintf(buf, sizeof buf, "%.17g %.17g\n", s.w[k], s.p[k]);
            out << buf;
        }
    }
}

ControlTable ControlTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open control table: " + path);
    std::string tok;
    std::string version_line;
    if (!std::getline(in, version_line) || version_line != "decum-control v1")
        throw DataError("unrecognized control table format: " + path);

    ControlTable ct;
    int dates = -1;
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw DataError(std::string("control table: bad ") + what);
    };
    while (in >> tok) {
        if (tok == "scenario_hash") {
            need(bool(in >> std::hex >> ct.scenario_hash >> std::dec), "hash");
        } else if (tok == "grid") {
            need(bool(in >> ct.n_x >> ct.n_y >> ct.x_min >> ct.x_max), "grid");
        } else if (tok == "objective") {
            std::string k1, k2, k3;
            need(bool(in >> k1 >> ct.kappa >> k2 >> ct.alpha >> k3 >> ct.epsilon),
                 "objective");
        } else if (tok == "w_star") {
            need(bool(in >> ct.w_star), "w_star");
        } else if (tok == "w0") {
            need(bool(in >> ct.w0), "w0");
        } else if (tok == "dates") {
            need(bool(in >> dates) && dates >= 0, "date count");
            ct.slices.resize(std::size_t(dates));
        } else if (tok == "date") {
            int d = 0;
            std::size_t n = 0;
            std::string nodes_kw;
            need(bool(in >> d >> nodes_kw >> n) && nodes_kw == "nodes", "date");
            need(dates >= 0 && d >= 0 && d < dates, "date index");
            auto& s = ct.slices[std::size_t(d)];
            s.w.resize(n);
            s.p.resize(n);
            for (std::size_t k = 0; k < n; ++k)
                need(bool(in >> s.w[k] >> s.p[k]), "node row");
        } else {
            throw DataError("control table: unknown key " + tok);
        }
    }
    if (dates < 0) throw DataError("control table missing date count");
    for (const auto& s : ct.slices)
        if (s.w.empty() || !std::is_sorted(s.w.begin(), s.w.end()))
            throw DataError("control table slices must be non-empty and sorted");
    return ct;
}

void ControlTable::export_heatmap_csv(const std::string& path, double w_lo,
                                      double w_hi) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write heatmap: " + path);
    out << "t,w,p\n";
    char buf[128];
    for (int d = 0; d < n_dates(); ++d) {
        const auto& s = slices[std::size_t(d)];
        for (std::size_t k = 0; k < s.w.size(); ++k) {
            if (s.w[k] < w_lo || s.w[k] > w_hi) continue;
            std::snprintf(buf, sizeof buf, "%d,%.10g,%.10g\n", d, s.w[k],
                          s.p[k]);
            out << buf;
        }
    }
}

}  // namespace decum
