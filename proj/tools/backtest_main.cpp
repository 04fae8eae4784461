#include "tc/backtest.hpp"
#include "tc/serialization.hpp"
#include "tc/synthetic.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>

namespace {

void print_summary(const tc::RunArtifacts& artifacts) {
    const auto& report = artifacts.report;
    std::cout << "mode: " << artifacts.mode << ", stocks: " << report.per_stock.size()
              << '\n';
    std::printf("%-10s %8s %8s %8s %8s %8s\n", "symbol", "ACC%", "AR%", "SR", "CR",
                "MDD");
    auto print_row = [](const std::string& sym, const tc::StockMetrics& m) {
        std::printf("%-10s %8.2f %8.2f ", sym.c_str(), m.acc_pct, m.ar_pct);
        if (m.sharpe)
            std::printf("%8.3f ", *m.sharpe);
        else
            std::printf("%8s ", "-");
        if (m.calmar)
            std::printf("%8.3f ", *m.calmar);
        else
            std::printf("%8s ", "-");
        std::printf("%8.4f\n", m.mdd);
    };
    for (size_t i = 0; i < report.per_stock.size(); ++i)
        print_row(report.symbols[i], report.per_stock[i]);
    tc::StockMetrics avg;
    avg.acc_pct = report.avg_acc;
    avg.ar_pct = report.avg_ar;
    avg.sharpe = report.avg_sharpe;
    avg.calmar = report.avg_calmar;
    avg.mdd = report.avg_mdd;
    print_row("AVERAGE", avg);
    if (!artifacts.run_dir.empty())
        std::cout << "artifacts written to " << artifacts.run_dir << '\n';
}

tc::BacktestConfig make_config(const std::string& config_path, const std::string& preset,
                               bool seed_set, std::uint64_t seed,
                               const std::string& out_override) {
    tc::BacktestConfig config = tc::load_backtest_config(config_path);
    config = tc::apply_ablation_preset(std::move(config), preset);
    if (seed_set) config.seed = seed;
    if (!out_override.empty()) config.out_dir = out_override;
    if (const char* env_out = std::getenv("BACKTEST_OUT_DIR"); env_out && *env_out)
        config.out_dir = env_out;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolutionary ensemble of formulaic traders: backtesting harness"};
    app.require_subcommand(1);

    std::string config_path, preset = "tc", out_override;
    std::uint64_t seed = 0;
    bool seed_set = false;

    auto add_run_options = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "run configuration (JSON)")->required();
        cmd->add_option("--preset", preset,
                        "tc, tc-linear, tc-unary, tc-no-educate, tc-no-prune, "
                        "tc-unimodal, tc-mse, market");
        cmd->add_option("--seed", seed, "override the config seed")
            ->each([&](const std::string&) { seed_set = true; });
        cmd->add_option("--out", out_override, "override the output directory");
    };
    auto* offline = app.add_subcommand("offline", "train on the pre-split history, "
                                                  "freeze, evaluate on the rest");
    add_run_options(offline);
    auto* online = app.add_subcommand("online", "walk-forward with periodic refits on "
                                                "all past data");
    add_run_options(online);

    std::string state_path, inspect_data, inspect_window;
    int top_k = 10;
    auto* inspect = app.add_subcommand("inspect", "report formulas and parameter usage "
                                                  "of a saved company state");
    inspect->add_option("--state", state_path, "saved company state (JSON)")->required();
    inspect->add_option("--top", top_k, "number of traders to print");
    inspect->add_option("--data", inspect_data, "price CSV to re-score the traders on");
    inspect->add_option("--window", inspect_window, "re-scoring window 't1:t2'");

    std::string synth_spec, synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic price CSV with a "
                                              "planted formula");
    synth->add_option("--spec", synth_spec, "panel spec (JSON)")->required();
    synth->add_option("--out", synth_out, "output CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (offline->parsed()) {
            auto artifacts = tc::run_offline_backtest(
                make_config(config_path, preset, seed_set, seed, out_override));
            print_summary(artifacts);
        } else if (online->parsed()) {
            auto artifacts = tc::run_online_backtest(
                make_config(config_path, preset, seed_set, seed, out_override));
            print_summary(artifacts);
        } else if (inspect->parsed()) {
            std::cout << tc::inspect_state(state_path, top_k, inspect_data,
                                           inspect_window);
        } else if (synth->parsed()) {
            std::ifstream in(synth_spec);
            if (!in) throw std::runtime_error("cannot open spec file: " + synth_spec);
            tc::Json j;
            in >> j;
            auto spec = tc::planted_spec_from_json(j);
            auto [panel, ground_truth] = tc::generate_synthetic_panel(spec);
            tc::write_price_csv(synth_out, tc::returns_to_prices(panel));
            std::cout << "wrote " << panel.num_stocks() << " stocks x "
                      << (panel.num_periods() + 1) << " price rows to " << synth_out
                      << "\nplanted formula:\n"
                      << tc::format_trader(ground_truth, panel.symbols) << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
