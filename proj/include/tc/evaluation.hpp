#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tc {

// Out-of-sample predictions for one stock. times[k] is the panel column of
// actual[k]; predicted[k] is the model output for that column.
struct PredictionTrack {
    int target = 0;
    std::vector<int> times;
    std::vector<double> predicted;
    std::vector<double> actual;

    int size() const { return static_cast<int>(times.size()); }
};

// Elementwise sign of the predictions, sign(0) = 0.
std::vector<double> canonical_positions(const PredictionTrack& track);

// Running sum of position * actual return.
std::vector<double> cumulative_return_series(const PredictionTrack& track);

// Percent of periods where sign(predicted) == sign(actual); zeros count and
// must match exactly.
double accuracy(const PredictionTrack& track);

// 100 * (periods_per_year / T) * C[T], with T the curve length.
double annualized_return(const std::vector<double>& curve, double periods_per_year);

// Mean over population std of per-period strategy returns; missing when the
// std is zero.
std::optional<double> sharpe_ratio(const PredictionTrack& track);

// Largest peak-to-trough drop of the cumulative return curve, with an
// implicit 0 origin prepended. Always >= 0.
double max_drawdown(const std::vector<double>& curve);

// ar_pct / mdd; missing when mdd < 1e-12.
std::optional<double> calmar_ratio(double ar_pct, double mdd);

struct StockMetrics {
    double acc_pct = 0.0;
    double ar_pct = 0.0;
    std::optional<double> sharpe;
    std::optional<double> calmar;
    double mdd = 0.0;
    double final_cumulative = 0.0;
};

struct MetricsReport {
    std::vector<int> targets;
    std::vector<std::string> symbols;          // one per track
    std::vector<StockMetrics> per_stock;
    std::vector<std::vector<double>> curves;   // one per track
    std::vector<PredictionTrack> tracks;

    // Averages over stocks with defined values.
    double avg_acc = 0.0;
    double avg_ar = 0.0;
    double avg_mdd = 0.0;
    std::optional<double> avg_sharpe;
    std::optional<double> avg_calmar;
};

MetricsReport metrics_report(const std::vector<PredictionTrack>& tracks,
                             const std::vector<std::string>& panel_symbols,
                             double periods_per_year);

}  // namespace tc
