#include "tc/synthetic.hpp"

#include "tc/dates.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace tc {

std::vector<std::string> synthetic_symbols(int num_stocks) {
    std::vector<std::string> symbols;
    symbols.reserve(num_stocks);
    for (int i = 0; i < num_stocks; ++i) symbols.push_back("S" + std::to_string(i));
    return symbols;
}

std::pair<ReturnsPanel, TraderParams> generate_synthetic_panel(const PlantedAlphaSpec& spec) {
    if (spec.num_stocks < 1 || spec.num_periods < 1)
        throw std::invalid_argument("generate_synthetic_panel: empty panel dimensions");
    if (spec.target_stock < 0 || spec.target_stock >= spec.num_stocks)
        throw std::invalid_argument("generate_synthetic_panel: target stock out of range");
    if (!(spec.signal_scale > 0.0))
        throw std::invalid_argument("generate_synthetic_panel: signal_scale must be > 0");
    if (spec.noise_scale < 0.0 || spec.background_scale < 0.0)
        throw std::invalid_argument("generate_synthetic_panel: negative scale");
    if (spec.ground_truth.terms.empty())
        throw std::invalid_argument("generate_synthetic_panel: empty ground truth");
    for (const auto& term : spec.ground_truth.terms)
        if (term.p >= spec.num_stocks || term.q >= spec.num_stocks)
            throw std::invalid_argument(
                "generate_synthetic_panel: ground truth references unknown stock");

    HyperRanges eval_ranges;
    eval_ranges.corr_window = spec.corr_window;
    const int first_anchor = min_anchor(spec.ground_truth, spec.corr_window);
    if (first_anchor + 1 >= spec.num_periods)
        throw std::invalid_argument(
            "generate_synthetic_panel: ground truth delays exceed panel length; first "
            "plantable column is " + std::to_string(first_anchor + 1));

    ReturnsPanel panel;
    panel.symbols = synthetic_symbols(spec.num_stocks);
    const std::int64_t day0 = days_from_civil(2000, 1, 3);
    panel.timestamps.reserve(spec.num_periods);
    for (int t = 0; t < spec.num_periods; ++t)
        panel.timestamps.push_back(format_iso_date(day0 + 1 + t));

    Rng rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    panel.returns.resize(spec.num_stocks, spec.num_periods);
    for (int i = 0; i < spec.num_stocks; ++i)
        for (int t = 0; t < spec.num_periods; ++t)
            panel.returns(i, t) = spec.background_scale * gauss(rng);

    // Plant sequentially so the ground truth may reference the target itself.
    for (int u = first_anchor; u + 1 < spec.num_periods; ++u) {
        double noise = gauss(rng);
        panel.returns(spec.target_stock, u + 1) =
            spec.signal_scale * eval_trader(spec.ground_truth, panel, u, eval_ranges) +
            spec.noise_scale * noise;
    }
    return {std::move(panel), spec.ground_truth};
}

}  // namespace tc
