#pragma once

#include "tc/formula.hpp"
#include "tc/returns_data.hpp"

#include <cstdint>
#include <utility>

namespace tc {

// Synthetic panel with a known formula planted into the target stock:
//   returns[target][t+1] = signal_scale * f_ground_truth(panel, t)
//                          + noise_scale * N(0, 1).
// Background entries are i.i.d. N(0, background_scale^2). Deterministic in
// the seed.
struct PlantedAlphaSpec {
    int num_stocks = 0;
    int num_periods = 0;
    int target_stock = 0;
    TraderParams ground_truth;
    double signal_scale = 0.01;
    double noise_scale = 0.0;
    double background_scale = 1.0;
    int corr_window = 10;
    std::uint64_t seed = 0;
};

// Symbol names used by generated panels: S0, S1, ...
std::vector<std::string> synthetic_symbols(int num_stocks);

std::pair<ReturnsPanel, TraderParams> generate_synthetic_panel(const PlantedAlphaSpec& spec);

}  // namespace tc
