#pragma once

#include "tc/backtest_types.hpp"
#include "tc/evaluation.hpp"
#include "tc/serialization.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace tc {

struct RunArtifacts {
    std::string run_dir;  // empty when nothing was written
    std::string mode;     // "offline" or "online"
    MetricsReport report;
    std::vector<CompanyStateDoc> states;  // empty for the market baseline
    RunLog log;
    std::vector<std::string> files;
};

// Presets: tc, tc-linear, tc-unary, tc-no-educate, tc-no-prune, tc-unimodal,
// tc-mse, market.
BacktestConfig apply_ablation_preset(BacktestConfig config, const std::string& preset);

// Train once on the pre-split history, freeze, predict every test column.
RunArtifacts run_offline_backtest(const BacktestConfig& config);

// Walk-forward: at every refit boundary retrain on all past observations,
// predict the following segment with frozen parameters.
RunArtifacts run_online_backtest(const BacktestConfig& config);

// Same protocols on a caller-supplied panel (the config data source is
// ignored). Used for panel-perturbation audits.
RunArtifacts run_offline_backtest(const BacktestConfig& config, ReturnsPanel panel);
RunArtifacts run_online_backtest(const BacktestConfig& config, ReturnsPanel panel);

// Write metrics.{csv,json} and curves.csv for a completed run; format is
// "csv" or "json". Appends the written paths to artifacts.files.
void emit_report(RunArtifacts& artifacts, const std::string& format);

// Human-readable formula and usage report for a saved company state. When
// data_csv is non-empty the traders are re-scored over `window` ("t1:t2")
// on that panel; otherwise the stored training scores are used.
std::string inspect_state(const std::string& state_path, int top_k,
                          const std::string& data_csv = {},
                          const std::string& window = {});

// Hash of the semantic run configuration (seed and output dir excluded);
// used for deterministic artifact naming.
std::uint64_t config_hash(const BacktestConfig& config);

}  // namespace tc
