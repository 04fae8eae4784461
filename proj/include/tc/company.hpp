#pragma once

#include "tc/formula.hpp"
#include "tc/gmm.hpp"
#include "tc/returns_data.hpp"
#include "tc/rng.hpp"

#include <map>
#include <string>
#include <vector>

namespace tc {

enum class Aggregation { Mean, LinearRegression };
enum class Score { CumulativeReturn, NegativeMse };

const char* aggregation_name(Aggregation a);
const char* score_name(Score s);
Aggregation aggregation_from_name(const std::string& name);
Score score_from_name(const std::string& name);

struct CompanyConfig {
    int num_traders = 100;     // N
    double prune_ratio = 0.5;  // Q, bottom percentile educated / pruned
    int fit_times = 2;         // F, prune-and-generate refit iterations
    Aggregation aggregation = Aggregation::LinearRegression;
    Score score = Score::CumulativeReturn;
    bool educate_enabled = true;
    bool prune_enabled = true;
    HyperRanges ranges;
    double ridge = 0.0;
    int gmm_components = 5;
};

struct RunLog {
    std::vector<std::string> lines;
    void note(std::string line) { lines.push_back(std::move(line)); }
};

// Trader population for one target stock plus the aggregator. The aggregator
// vector has N trader weights followed by the intercept; after init it is the
// uniform mean (1/N each, intercept 0), which makes mean and linear
// aggregation coincide until the first fit.
struct CompanyState {
    int target = 0;
    std::vector<TraderParams> traders;
    Eigen::VectorXd aggregator;
    CompanyConfig config;
};

CompanyState init_company(int target, const CompanyConfig& config, int num_stocks,
                          Rng& rng);

double company_predict(const CompanyState& state, const ReturnsPanel& panel, int t);

// One score per trader over the range: cumulative return of the canonical
// strategy, or negative in-sample MSE against returns[target][u+1].
std::vector<double> trader_scores(const CompanyState& state, const ReturnsPanel& panel,
                                  TimeRange range);

// Linear-interpolation percentile, pct in [0, 100].
double percentile_linear(std::vector<double> values, double pct);

// Re-fit the weights of every trader scoring at or below the bottom-Q
// percentile by (ridge) least squares on its term features; formulas are
// untouched. Singular normal equations with ridge=0 fall back to ridge=1e-6
// and note it in the log.
void educate(CompanyState& state, const ReturnsPanel& panel, TimeRange range,
             RunLog* log = nullptr);

// F times: drop traders scoring below the bottom-Q percentile and refill the
// population from a mixture fitted to the survivors.
void prune_and_generate(CompanyState& state, const ReturnsPanel& panel, TimeRange range,
                        Rng& rng, RunLog* log = nullptr);

// Linear mode: ridge least squares of returns[target][u+1] on the N trader
// outputs with an (unpenalized) intercept. Mean mode: no-op.
void fit_aggregator(CompanyState& state, const ReturnsPanel& panel, TimeRange range,
                    RunLog* log = nullptr);

// educate -> prune_and_generate -> fit_aggregator over anchors [t1, t2],
// honoring the config flags.
void train_step(CompanyState& state, const ReturnsPanel& panel, int t1, int t2,
                Rng& rng, RunLog* log = nullptr);

struct UsageCensus {
    std::map<int, int> stock_counts;  // P and Q occurrences per stock index
    std::map<Operator, int> operator_counts;
    std::map<Activation, int> activation_counts;
};

UsageCensus usage_census(const CompanyState& state);

}  // namespace tc
