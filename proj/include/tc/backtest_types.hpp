#pragma once

#include "tc/company.hpp"
#include "tc/returns_data.hpp"
#include "tc/synthetic.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace tc {

struct SyntheticSource {
    PlantedAlphaSpec spec;
};

struct CsvSource {
    std::string path;
    CsvSchema schema;
};

// Train/test split: explicit timestamp wins over the fraction.
struct SplitSpec {
    double fraction = 0.5;
    std::string timestamp;
};

// Online refit cadence. yearly derives boundaries from the timestamps;
// periods > 0 refits every that many test periods; neither set means a
// single segment (equivalent to the offline protocol).
struct RefitSpec {
    bool yearly = false;
    int periods = 0;
};

struct BacktestConfig {
    std::variant<SyntheticSource, CsvSource> source;
    SplitSpec split;
    int window = 10;
    int lag = 1;
    RefitSpec refit;
    int rounds = 5;  // train_step rounds per (re)fit
    CompanyConfig company;
    std::vector<std::string> targets;  // empty = all stocks
    double periods_per_year = 0.0;     // 0 = infer from timestamps
    std::uint64_t seed = 0;
    std::string out_dir = "out";       // empty = keep results in memory only
    bool market_baseline = false;      // uniform buy-and-hold instead of companies
    int threads = 0;                   // 0 = hardware concurrency
};

}  // namespace tc
