#include "tc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tc {

namespace {
inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }
}

std::vector<double> canonical_positions(const PredictionTrack& track) {
    std::vector<double> positions;
    positions.reserve(track.predicted.size());
    for (double p : track.predicted) positions.push_back(sgn(p));
    return positions;
}

std::vector<double> cumulative_return_series(const PredictionTrack& track) {
    std::vector<double> curve;
    curve.reserve(track.size());
    double acc = 0.0;
    for (int i = 0; i < track.size(); ++i) {
        acc += sgn(track.predicted[i]) * track.actual[i];
        curve.push_back(acc);
    }
    return curve;
}

double accuracy(const PredictionTrack& track) {
    if (track.size() == 0) throw std::invalid_argument("accuracy of empty track");
    int hits = 0;
    for (int i = 0; i < track.size(); ++i)
        if (sgn(track.actual[i]) == sgn(track.predicted[i])) ++hits;
    return 100.0 * hits / track.size();
}

double annualized_return(const std::vector<double>& curve, double periods_per_year) {
    if (curve.empty()) throw std::invalid_argument("annualized_return of empty curve");
    return 100.0 * (periods_per_year / static_cast<double>(curve.size())) * curve.back();
}

std::optional<double> sharpe_ratio(const PredictionTrack& track) {
    if (track.size() == 0) return std::nullopt;
    double mean = 0.0;
    for (int i = 0; i < track.size(); ++i)
        mean += sgn(track.predicted[i]) * track.actual[i];
    mean /= track.size();
    double var = 0.0;
    for (int i = 0; i < track.size(); ++i) {
        double x = sgn(track.predicted[i]) * track.actual[i] - mean;
        var += x * x;
    }
    var /= track.size();
    if (var <= 0.0) return std::nullopt;
    return mean / std::sqrt(var);
}

double max_drawdown(const std::vector<double>& curve) {
    double peak = 0.0;  // implicit zero origin
    double mdd = 0.0;
    for (double c : curve) {
        mdd = std::max(mdd, peak - c);
        peak = std::max(peak, c);
    }
    return mdd;
}

std::optional<double> calmar_ratio(double ar_pct, double mdd) {
    if (mdd < 1e-12) return std::nullopt;
    return ar_pct / mdd;
}

MetricsReport metrics_report(const std::vector<PredictionTrack>& tracks,
                             const std::vector<std::string>& panel_symbols,
                             double periods_per_year) {
    if (tracks.empty()) throw std::invalid_argument("metrics_report: no tracks");
    MetricsReport report;
    double acc_sum = 0.0, ar_sum = 0.0, mdd_sum = 0.0;
    double sr_sum = 0.0, cr_sum = 0.0;
    int sr_count = 0, cr_count = 0;
    for (const auto& track : tracks) {
        StockMetrics m;
        auto curve = cumulative_return_series(track);
        m.acc_pct = accuracy(track);
        m.ar_pct = annualized_return(curve, periods_per_year);
        m.sharpe = sharpe_ratio(track);
        m.mdd = max_drawdown(curve);
        m.calmar = calmar_ratio(m.ar_pct, m.mdd);
        m.final_cumulative = curve.back();
        acc_sum += m.acc_pct;
        ar_sum += m.ar_pct;
        mdd_sum += m.mdd;
        if (m.sharpe) {
            sr_sum += *m.sharpe;
            ++sr_count;
        }
        if (m.calmar) {
            cr_sum += *m.calmar;
            ++cr_count;
        }
        report.targets.push_back(track.target);
        report.symbols.push_back(track.target >= 0 &&
                                         track.target < static_cast<int>(panel_symbols.size())
                                     ? panel_symbols[track.target]
                                     : std::to_string(track.target));
        report.per_stock.push_back(std::move(m));
        report.curves.push_back(std::move(curve));
        report.tracks.push_back(track);
    }
    const double n = static_cast<double>(tracks.size());
    report.avg_acc = acc_sum / n;
    report.avg_ar = ar_sum / n;
    report.avg_mdd = mdd_sum / n;
    if (sr_count > 0) report.avg_sharpe = sr_sum / sr_count;
    if (cr_count > 0) report.avg_calmar = cr_sum / cr_count;
    return report;
}

}  // namespace tc
