#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace tc {

// Prices for S symbols over T+1 time points. All entries strictly positive,
// timestamps strictly increasing.
struct PricePanel {
    std::vector<std::string> symbols;
    std::vector<std::string> timestamps;  // length = prices.cols()
    Eigen::MatrixXd prices;               // S x (T+1)

    int num_stocks() const { return static_cast<int>(prices.rows()); }
    int num_points() const { return static_cast<int>(prices.cols()); }
};

// One-period log returns. Column t holds log(prices[t+1] / prices[t]) and
// carries the timestamp of the later price.
struct ReturnsPanel {
    std::vector<std::string> symbols;
    std::vector<std::string> timestamps;  // length = returns.cols()
    Eigen::MatrixXd returns;              // S x T

    int num_stocks() const { return static_cast<int>(returns.rows()); }
    int num_periods() const { return static_cast<int>(returns.cols()); }
};

ReturnsPanel compute_log_returns(const PricePanel& prices);

// Rebuild a price panel from returns by cumulative exponentiation, every
// stock starting at base_price. Inverse of compute_log_returns up to
// floating-point rounding.
PricePanel returns_to_prices(const ReturnsPanel& panel, double base_price = 100.0);

// Read-only column window of a ReturnsPanel, inclusive on both ends.
struct ReturnsView {
    const ReturnsPanel* panel = nullptr;
    int first = 0;
    int last = 0;

    int width() const { return last - first + 1; }
    Eigen::Ref<const Eigen::MatrixXd> columns() const {
        return panel->returns.middleCols(first, width());
    }
};

// The observation window available when predicting the return at t+1 while
// standing at time t with execution lag `lag`: columns [t-lag-window, t-lag].
ReturnsView slice_window(const ReturnsPanel& panel, int t, int window, int lag);

enum class MissingPolicy { ForwardFill, DropRow };
enum class CsvLayout { Wide, Long };

struct CsvSchema {
    CsvLayout layout = CsvLayout::Wide;
    std::string timestamp_column = "timestamp";
    std::string symbol_column = "symbol";  // long layout only
    std::string price_column = "price";    // long layout only
    // If non-empty, restricts the accepted symbols; an out-of-list symbol is
    // an error. Wide layout otherwise takes symbols from the header, long
    // layout discovers them in order of first appearance.
    std::vector<std::string> symbols;
    MissingPolicy missing = MissingPolicy::ForwardFill;
};

PricePanel load_price_csv(const std::string& path, const CsvSchema& schema);

// Wide layout, full-precision prices.
void write_price_csv(const std::string& path, const PricePanel& panel);

}  // namespace tc
