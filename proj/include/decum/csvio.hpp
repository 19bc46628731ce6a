#pragma once

#include <string>
#include <vector>

#include "decum/calibration.hpp"

namespace decum {

// Shortest decimal text that parses back to exactly v. Keeps written files
// readable and hashes of canonical text stable across platforms.
std::string format_double(double v);

// Rectangular text table, every cell already formatted.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

void write_csv_table(const CsvTable& t, const std::string& path);

// Simple comma splitter; no quoting or escapes, which the files written here
// never need.
CsvTable read_csv_table(const std::string& path);

// Paired real (CPI-deflated) monthly log-return series built from an index
// level file with columns date, stock_index, bill_index, cpi. Dates must be
// consecutive months; levels must be positive.
struct MarketHistory {
    std::string first_month;  // YYYY-MM of the first level row
    std::string last_month;
    ReturnSeries stock;
    ReturnSeries bond;
};

MarketHistory ingest_market_csv(const std::string& path);

}  // namespace decum
