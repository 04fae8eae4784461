#include "tc/returns_data.hpp"

#include "tc/dates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tc {

ReturnsPanel compute_log_returns(const PricePanel& prices) {
    const int s = prices.num_stocks();
    const int cols = prices.num_points();
    if (cols < 2)
        throw std::invalid_argument("compute_log_returns: need at least two price points");
    ReturnsPanel out;
    out.symbols = prices.symbols;
    if (static_cast<int>(prices.timestamps.size()) == cols)
        out.timestamps.assign(prices.timestamps.begin() + 1, prices.timestamps.end());
    out.returns.resize(s, cols - 1);
    for (int i = 0; i < s; ++i) {
        for (int t = 0; t < cols; ++t) {
            if (!(prices.prices(i, t) > 0.0)) {
                std::string stamp = t < static_cast<int>(prices.timestamps.size())
                                        ? prices.timestamps[t]
                                        : std::to_string(t);
                throw std::domain_error("compute_log_returns: non-positive price for stock " +
                                        std::to_string(i) + " at timestamp " + stamp);
            }
        }
        for (int t = 0; t + 1 < cols; ++t)
            out.returns(i, t) = std::log(prices.prices(i, t + 1) / prices.prices(i, t));
    }
    return out;
}

PricePanel returns_to_prices(const ReturnsPanel& panel, double base_price) {
    const int s = panel.num_stocks();
    const int t = panel.num_periods();
    PricePanel out;
    out.symbols = panel.symbols;
    out.prices.resize(s, t + 1);
    for (int i = 0; i < s; ++i) {
        out.prices(i, 0) = base_price;
        for (int u = 0; u < t; ++u)
            out.prices(i, u + 1) = out.prices(i, u) * std::exp(panel.returns(i, u));
    }
    // Price stamps: one step before the first return stamp when the
    // timestamps are dates, otherwise synthetic keys.
    out.timestamps.reserve(t + 1);
    if (!panel.timestamps.empty()) {
        if (auto first = parse_iso_date(panel.timestamps.front()))
            out.timestamps.push_back(format_iso_date(*first - 1));
        else
            out.timestamps.push_back("start");
        out.timestamps.insert(out.timestamps.end(), panel.timestamps.begin(),
                              panel.timestamps.end());
    } else {
        for (int u = 0; u <= t; ++u) out.timestamps.push_back("p" + std::to_string(u));
    }
    return out;
}

ReturnsView slice_window(const ReturnsPanel& panel, int t, int window, int lag) {
    if (window < 1) throw std::invalid_argument("slice_window: window must be >= 1");
    if (lag < 0) throw std::invalid_argument("slice_window: lag must be >= 0");
    const int first = t - lag - window;
    const int last = t - lag;
    if (first < 0)
        throw std::out_of_range("slice_window: insufficient history at t=" +
                                std::to_string(t) + "; earliest valid t is " +
                                std::to_string(window + lag));
    if (last >= panel.num_periods())
        throw std::out_of_range("slice_window: window end " + std::to_string(last) +
                                " beyond panel length " +
                                std::to_string(panel.num_periods()));
    return ReturnsView{&panel, first, last};
}

}  // namespace tc
