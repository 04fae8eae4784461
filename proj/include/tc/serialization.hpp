#pragma once

#include "tc/backtest_types.hpp"
#include "tc/company.hpp"
#include "tc/synthetic.hpp"

#include <json.hpp>

#include <string>

namespace tc {

using Json = nlohmann::json;

Json trader_to_json(const TraderParams& trader);
TraderParams trader_from_json(const Json& j,
                              const std::vector<std::string>& symbols = {});

Json ranges_to_json(const HyperRanges& ranges);
HyperRanges ranges_from_json(const Json& j);

Json company_config_to_json(const CompanyConfig& config);
CompanyConfig company_config_from_json(const Json& j);

// Saved company document: state plus the symbol table and the trader scores
// on the final training window.
struct CompanyStateDoc {
    CompanyState state;
    std::vector<std::string> symbols;
    std::vector<double> stored_scores;
    TimeRange score_window{0, 0};
};

Json company_state_to_json(const CompanyStateDoc& doc);
CompanyStateDoc company_state_from_json(const Json& j);

void save_company_state(const std::string& path, const CompanyStateDoc& doc);
CompanyStateDoc load_company_state(const std::string& path);

Json planted_spec_to_json(const PlantedAlphaSpec& spec);
PlantedAlphaSpec planted_spec_from_json(const Json& j);

Json backtest_config_to_json(const BacktestConfig& config);
BacktestConfig backtest_config_from_json(const Json& j);
BacktestConfig load_backtest_config(const std::string& path);

}  // namespace tc
