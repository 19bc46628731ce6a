#include "decum/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "decum/errors.hpp"

namespace decum {

std::string format_double(double v) {
    char buf[40];
    for (int prec = 1; prec <= 16; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_csv_table(const CsvTable& t, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write csv: " + path);
    auto emit = [&out](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    };
    emit(t.header);
    for (const auto& r : t.rows) emit(r);
    if (!out) throw DataError("write failed: " + path);
}

CsvTable read_csv_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open csv: " + path);
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        return cells;
    };
    CsvTable t;
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty csv: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    t.header = split(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        t.rows.push_back(split(line));
        if (t.rows.back().size() != t.header.size())
            throw DataError("ragged csv row in " + path);
    }
    return t;
}

namespace {

// months since year zero for a YYYY-MM or YYYY-MM-DD date cell
int month_index(const std::string& cell, const std::string& path) {
    int y = 0, m = 0;
    if (std::sscanf(cell.c_str(), "%d-%d", &y, &m) != 2 || m < 1 || m > 12)
        throw DataError("bad date '" + cell + "' in " + path +
                        " (want YYYY-MM)");
    return y * 12 + (m - 1);
}

double level_cell(const std::string& cell, const std::string& what,
                  const std::string& path) {
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str() || !std::isfinite(v))
        throw DataError("bad " + what + " value '" + cell + "' in " + path);
    if (v <= 0.0)
        throw DataError("non-positive " + what + " level in " + path);
    return v;
}

}  // namespace

MarketHistory ingest_market_csv(const std::string& path) {
    const CsvTable t = read_csv_table(path);
    if (t.header.size() != 4 || t.header[0] != "date" ||
        t.header[1] != "stock_index" || t.header[2] != "bill_index" ||
        t.header[3] != "cpi")
        throw DataError(
            "market csv header must be 'date,stock_index,bill_index,cpi': " +
            path);
    if (t.rows.size() < 2)
        throw DataError("market csv needs at least two monthly rows: " + path);

    MarketHistory h;
    h.stock.dt = h.bond.dt = 1.0 / 12.0;
    h.first_month = t.rows.front()[0].substr(0, 7);
    h.last_month = t.rows.back()[0].substr(0, 7);

    double prev_s = 0.0, prev_b = 0.0;
    int prev_month = 0;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& r = t.rows[i];
        const int mi = month_index(r[0], path);
        if (i > 0 && mi != prev_month + 1)
            throw DataError("market csv not gap-free monthly at row " +
                            std::to_string(i + 2) + " of " + path);
        const double cpi = level_cell(r[3], "cpi", path);
        const double s = level_cell(r[1], "stock_index", path) / cpi;
        const double b = level_cell(r[2], "bill_index", path) / cpi;
        if (i > 0) {
            h.stock.log_returns.push_back(std::log(s / prev_s));
            h.bond.log_returns.push_back(std::log(b / prev_b));
        }
        prev_s = s;
        prev_b = b;
        prev_month = mi;
    }
    return h;
}

}  // namespace decum
