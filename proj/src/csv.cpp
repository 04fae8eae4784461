#include "tc/returns_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace tc {

namespace {

constexpr double kGap = std::numeric_limits<double>::quiet_NaN();

[[noreturn]] void fail(const std::string& path, int line, const std::string& what) {
    throw std::runtime_error(path + " line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_line(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_price(const std::string& cell, const std::string& path, int line) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        fail(path, line, "unparseable price cell '" + cell + "'");
    if (!(value > 0.0)) fail(path, line, "non-positive price '" + cell + "'");
    return value;
}

// Rows-by-symbols price grid with NaN gaps, resolved per policy.
PricePanel finish_panel(std::vector<std::string> timestamps,
                        std::vector<std::string> symbols,
                        std::vector<std::vector<double>> grid, MissingPolicy policy,
                        const std::string& path) {
    const size_t s = symbols.size();
    if (policy == MissingPolicy::ForwardFill) {
        for (size_t j = 0; j < s; ++j) {
            double prev = kGap;
            for (auto& row : grid) {
                if (std::isnan(row[j]))
                    row[j] = prev;
                else
                    prev = row[j];
            }
        }
    }
    // Remaining gaps are either leading (forward-fill) or any gap (drop-row).
    std::vector<std::string> kept_ts;
    std::vector<std::vector<double>> kept_rows;
    for (size_t r = 0; r < grid.size(); ++r) {
        bool has_gap = std::any_of(grid[r].begin(), grid[r].end(),
                                   [](double v) { return std::isnan(v); });
        if (has_gap) continue;
        kept_ts.push_back(std::move(timestamps[r]));
        kept_rows.push_back(std::move(grid[r]));
    }
    if (kept_rows.empty())
        throw std::runtime_error(path + ": no complete rows after applying missing-data policy");
    PricePanel panel;
    panel.symbols = std::move(symbols);
    panel.timestamps = std::move(kept_ts);
    panel.prices.resize(static_cast<int>(s), static_cast<int>(kept_rows.size()));
    for (size_t r = 0; r < kept_rows.size(); ++r)
        for (size_t j = 0; j < s; ++j)
            panel.prices(static_cast<int>(j), static_cast<int>(r)) = kept_rows[r][j];
    return panel;
}

PricePanel load_wide(std::ifstream& in, const std::string& path, const CsvSchema& schema) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++lineno;
    auto header = split_line(line);
    if (header.empty() || header[0] != schema.timestamp_column)
        fail(path, lineno,
             "expected first header column '" + schema.timestamp_column + "'");
    std::vector<std::string> symbols(header.begin() + 1, header.end());
    if (symbols.empty()) fail(path, lineno, "no symbol columns in header");
    if (!schema.symbols.empty()) {
        for (const auto& sym : symbols)
            if (std::find(schema.symbols.begin(), schema.symbols.end(), sym) ==
                schema.symbols.end())
                fail(path, lineno, "unknown symbol '" + sym + "' in header");
    }

    std::vector<std::string> timestamps;
    std::vector<std::vector<double>> grid;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != symbols.size() + 1)
            fail(path, lineno,
                 "expected " + std::to_string(symbols.size() + 1) + " cells, got " +
                     std::to_string(cells.size()));
        const std::string& ts = cells[0];
        if (!timestamps.empty()) {
            if (ts == timestamps.back()) fail(path, lineno, "duplicate timestamp '" + ts + "'");
            if (ts < timestamps.back())
                fail(path, lineno, "timestamps not increasing at '" + ts + "'");
        }
        std::vector<double> row(symbols.size(), kGap);
        for (size_t j = 0; j < symbols.size(); ++j) {
            const std::string& cell = cells[j + 1];
            if (!cell.empty()) row[j] = parse_price(cell, path, lineno);
        }
        timestamps.push_back(ts);
        grid.push_back(std::move(row));
    }
    return finish_panel(std::move(timestamps), std::move(symbols), std::move(grid),
                        schema.missing, path);
}

PricePanel load_long(std::ifstream& in, const std::string& path, const CsvSchema& schema) {
    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    ++lineno;
    auto header = split_line(line);
    if (header.size() != 3 || header[0] != schema.timestamp_column ||
        header[1] != schema.symbol_column || header[2] != schema.price_column)
        fail(path, lineno,
             "expected header '" + schema.timestamp_column + "," + schema.symbol_column +
                 "," + schema.price_column + "'");

    std::vector<std::string> timestamps;
    std::vector<std::string> symbols = schema.symbols;
    std::map<std::string, size_t> symbol_index;
    for (size_t j = 0; j < symbols.size(); ++j) symbol_index[symbols[j]] = j;
    std::vector<std::map<size_t, double>> sparse_rows;

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cells = split_line(line);
        if (cells.size() != 3)
            fail(path, lineno, "expected 3 cells, got " + std::to_string(cells.size()));
        const std::string& ts = cells[0];
        const std::string& sym = cells[1];
        if (timestamps.empty() || ts != timestamps.back()) {
            if (!timestamps.empty() && ts < timestamps.back())
                fail(path, lineno, "timestamps not increasing at '" + ts + "'");
            timestamps.push_back(ts);
            sparse_rows.emplace_back();
        }
        auto it = symbol_index.find(sym);
        if (it == symbol_index.end()) {
            if (!schema.symbols.empty()) fail(path, lineno, "unknown symbol '" + sym + "'");
            symbol_index[sym] = symbols.size();
            symbols.push_back(sym);
            it = symbol_index.find(sym);
        }
        auto& row = sparse_rows.back();
        if (row.count(it->second))
            fail(path, lineno, "duplicate timestamp entry for symbol '" + sym + "'");
        row[it->second] = parse_price(cells[2], path, lineno);
    }
    if (symbols.empty()) throw std::runtime_error(path + ": no data rows");
    std::vector<std::vector<double>> grid(sparse_rows.size(),
                                          std::vector<double>(symbols.size(), kGap));
    for (size_t r = 0; r < sparse_rows.size(); ++r)
        for (const auto& [j, v] : sparse_rows[r]) grid[r][j] = v;
    return finish_panel(std::move(timestamps), std::move(symbols), std::move(grid),
                        schema.missing, path);
}

std::string format_full(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

PricePanel load_price_csv(const std::string& path, const CsvSchema& schema) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);
    return schema.layout == CsvLayout::Wide ? load_wide(in, path, schema)
                                            : load_long(in, path, schema);
}

void write_price_csv(const std::string& path, const PricePanel& panel) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write CSV file: " + path);
    out << "timestamp";
    for (const auto& sym : panel.symbols) out << ',' << sym;
    out << '\n';
    for (int t = 0; t < panel.num_points(); ++t) {
        out << (t < static_cast<int>(panel.timestamps.size()) ? panel.timestamps[t]
                                                              : std::to_string(t));
        for (int i = 0; i < panel.num_stocks(); ++i)
            out << ',' << format_full(panel.prices(i, t));
        out << '\n';
    }
}

}  // namespace tc
