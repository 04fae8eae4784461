#include "tc/company.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tc {

const char* aggregation_name(Aggregation a) {
    return a == Aggregation::Mean ? "mean" : "linear-regression";
}

const char* score_name(Score s) {
    return s == Score::CumulativeReturn ? "cumulative-return" : "negative-mse";
}

Aggregation aggregation_from_name(const std::string& name) {
    if (name == "mean") return Aggregation::Mean;
    if (name == "linear-regression") return Aggregation::LinearRegression;
    throw std::invalid_argument("unknown aggregation: " + name);
}

Score score_from_name(const std::string& name) {
    if (name == "cumulative-return") return Score::CumulativeReturn;
    if (name == "negative-mse") return Score::NegativeMse;
    throw std::invalid_argument("unknown score: " + name);
}

namespace {

void check_config(const CompanyConfig& config) {
    if (config.num_traders < 1)
        throw std::invalid_argument("company config: need at least one trader");
    if (!(config.prune_ratio > 0.0 && config.prune_ratio < 1.0))
        throw std::invalid_argument("company config: prune ratio must be in (0,1)");
    if (config.fit_times < 1)
        throw std::invalid_argument("company config: fit_times must be >= 1");
    if (config.ridge < 0.0)
        throw std::invalid_argument("company config: ridge must be >= 0");
}

void check_range(const ReturnsPanel& panel, TimeRange range) {
    if (range.first > range.last)
        throw std::invalid_argument("empty training range");
    if (range.first < 0 || range.last + 1 >= panel.num_periods())
        throw std::out_of_range("training range needs target returns at last+1 < T");
}

// Unweighted term features of one trader over the anchor range, one row per
// anchor, one column per term.
Eigen::MatrixXd term_features(const TraderParams& trader, const ReturnsPanel& panel,
                              TimeRange range, int corr_window) {
    Eigen::MatrixXd features(range.length(), trader.num_terms());
    for (int u = range.first; u <= range.last; ++u)
        for (int j = 0; j < trader.num_terms(); ++j)
            features(u - range.first, j) = eval_term(trader.terms[j], panel, u, corr_window);
    return features;
}

Eigen::VectorXd target_vector(const ReturnsPanel& panel, int target, TimeRange range) {
    Eigen::VectorXd y(range.length());
    for (int u = range.first; u <= range.last; ++u)
        y[u - range.first] = panel.returns(target, u + 1);
    return y;
}

// Ridge least squares with a per-coefficient penalty mask. ridge == 0 solves
// by rank-revealing QR; a rank-deficient system falls back to ridge = 1e-6 on
// the masked coefficients and reports it.
Eigen::VectorXd solve_ridge(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                            double ridge, const Eigen::VectorXd& penalty, RunLog* log,
                            const char* what) {
    if (ridge == 0.0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
        if (qr.rank() == x.cols()) return qr.solve(y);
        if (log)
            log->note(std::string(what) +
                      ": singular normal equations with ridge=0; refit with ridge=1e-06");
        ridge = 1e-6;
    }
    Eigen::MatrixXd normal = x.transpose() * x;
    normal += ridge * penalty.asDiagonal().toDenseMatrix();
    return normal.ldlt().solve(x.transpose() * y);
}

std::vector<double> score_traders(const std::vector<TraderParams>& traders,
                                  const CompanyConfig& config, int target,
                                  const ReturnsPanel& panel, TimeRange range) {
    check_range(panel, range);
    std::vector<double> scores;
    scores.reserve(traders.size());
    if (config.score == Score::CumulativeReturn) {
        for (const auto& trader : traders)
            scores.push_back(
                trader_cumulative_return(trader, panel, target, range, config.ranges));
    } else {
        Eigen::VectorXd y = target_vector(panel, target, range);
        for (const auto& trader : traders) {
            double sse = 0.0;
            for (int u = range.first; u <= range.last; ++u) {
                double err = eval_trader(trader, panel, u, config.ranges) - y[u - range.first];
                sse += err * err;
            }
            scores.push_back(-sse / range.length());
        }
    }
    return scores;
}

}  // namespace

CompanyState init_company(int target, const CompanyConfig& config, int num_stocks,
                          Rng& rng) {
    check_config(config);
    CompanyState state;
    state.target = target;
    state.config = config;
    state.traders.reserve(config.num_traders);
    for (int n = 0; n < config.num_traders; ++n)
        state.traders.push_back(sample_uniform_trader(config.ranges, num_stocks, rng));
    state.aggregator = Eigen::VectorXd::Zero(config.num_traders + 1);
    state.aggregator.head(config.num_traders).setConstant(1.0 / config.num_traders);
    return state;
}

double company_predict(const CompanyState& state, const ReturnsPanel& panel, int t) {
    const int n = static_cast<int>(state.traders.size());
    double value = 0.0;
    if (state.config.aggregation == Aggregation::Mean) {
        for (const auto& trader : state.traders)
            value += eval_trader(trader, panel, t, state.config.ranges);
        return value / n;
    }
    for (int i = 0; i < n; ++i)
        value += state.aggregator[i] * eval_trader(state.traders[i], panel, t,
                                                   state.config.ranges);
    return value + state.aggregator[n];
}

std::vector<double> trader_scores(const CompanyState& state, const ReturnsPanel& panel,
                                  TimeRange range) {
    return score_traders(state.traders, state.config, state.target, panel, range);
}

double percentile_linear(std::vector<double> values, double pct) {
    if (values.empty()) throw std::invalid_argument("percentile of empty set");
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values[0];
    double rank = pct / 100.0 * (values.size() - 1);
    auto lo = static_cast<size_t>(std::floor(rank));
    if (lo + 1 >= values.size()) return values.back();
    double frac = rank - lo;
    return values[lo] + (values[lo + 1] - values[lo]) * frac;
}

void educate(CompanyState& state, const ReturnsPanel& panel, TimeRange range,
             RunLog* log) {
    check_range(panel, range);
    auto scores = trader_scores(state, panel, range);
    double threshold = percentile_linear(scores, 100.0 * state.config.prune_ratio);
    Eigen::VectorXd y = target_vector(panel, state.target, range);
    for (size_t n = 0; n < state.traders.size(); ++n) {
        if (scores[n] > threshold) continue;
        auto& trader = state.traders[n];
        Eigen::MatrixXd features =
            term_features(trader, panel, range, state.config.ranges.corr_window);
        Eigen::VectorXd w =
            solve_ridge(features, y, state.config.ridge,
                        Eigen::VectorXd::Ones(trader.num_terms()), log, "educate");
        for (int j = 0; j < trader.num_terms(); ++j) trader.terms[j].weight = w[j];
    }
}

void prune_and_generate(CompanyState& state, const ReturnsPanel& panel, TimeRange range,
                        Rng& rng, RunLog* log) {
    check_range(panel, range);
    const int n = static_cast<int>(state.traders.size());
    const int num_stocks = panel.num_stocks();
    for (int round = 0; round < state.config.fit_times; ++round) {
        auto scores = trader_scores(state, panel, range);
        double threshold = percentile_linear(scores, 100.0 * state.config.prune_ratio);
        std::vector<TraderParams> survivors;
        survivors.reserve(n);
        for (int i = 0; i < n; ++i)
            if (scores[i] >= threshold) survivors.push_back(state.traders[i]);
        const int n_new = n - static_cast<int>(survivors.size());
        if (n_new == 0) {
            if (log)
                log->note("prune: all traders at or above the threshold; population "
                          "unchanged");
            continue;
        }
        auto fresh = generate_traders(survivors, n_new, state.config.gmm_components,
                                      state.config.ranges, num_stocks, rng);
        survivors.insert(survivors.end(), std::make_move_iterator(fresh.begin()),
                         std::make_move_iterator(fresh.end()));
        state.traders = std::move(survivors);
    }
}

void fit_aggregator(CompanyState& state, const ReturnsPanel& panel, TimeRange range,
                    RunLog* log) {
    if (state.config.aggregation == Aggregation::Mean) return;
    check_range(panel, range);
    const int n = static_cast<int>(state.traders.size());
    Eigen::MatrixXd x(range.length(), n + 1);
    for (int i = 0; i < n; ++i)
        for (int u = range.first; u <= range.last; ++u)
            x(u - range.first, i) =
                eval_trader(state.traders[i], panel, u, state.config.ranges);
    x.col(n).setOnes();
    Eigen::VectorXd y = target_vector(panel, state.target, range);
    Eigen::VectorXd penalty = Eigen::VectorXd::Ones(n + 1);
    penalty[n] = 0.0;  // intercept unpenalized
    state.aggregator =
        solve_ridge(x, y, state.config.ridge, penalty, log, "fit_aggregator");
}

void train_step(CompanyState& state, const ReturnsPanel& panel, int t1, int t2,
                Rng& rng, RunLog* log) {
    TimeRange range{t1, t2};
    if (state.config.educate_enabled) educate(state, panel, range, log);
    if (state.config.prune_enabled) prune_and_generate(state, panel, range, rng, log);
    fit_aggregator(state, panel, range, log);
}

UsageCensus usage_census(const CompanyState& state) {
    UsageCensus census;
    for (const auto& trader : state.traders) {
        for (const auto& term : trader.terms) {
            ++census.stock_counts[term.p];
            ++census.stock_counts[term.q];
            ++census.operator_counts[term.op];
            ++census.activation_counts[term.act];
        }
    }
    return census;
}

}  // namespace tc
