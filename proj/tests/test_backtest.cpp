#include <doctest.h>

#include "tc/backtest.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

using namespace tc;
namespace fs = std::filesystem;

namespace {

BacktestConfig small_synthetic_config(std::uint64_t panel_seed, std::uint64_t model_seed,
                                      double noise = 0.005) {
    PlantedAlphaSpec spec;
    spec.num_stocks = 6;
    spec.num_periods = 400;
    spec.target_stock = 0;
    spec.ground_truth = parse_trader("+1·tanh(S2_t - S4_{t-1})",
                                     synthetic_symbols(6));
    spec.signal_scale = 0.01;
    spec.noise_scale = noise;
    spec.background_scale = 1.0;
    spec.seed = panel_seed;

    BacktestConfig config;
    config.source = SyntheticSource{spec};
    config.split.fraction = 0.5;
    config.window = 10;
    config.lag = 0;
    config.rounds = 3;
    config.company.num_traders = 30;
    config.targets = {"S0"};
    config.periods_per_year = 252.0;
    config.seed = model_seed;
    config.out_dir.clear();
    config.threads = 1;
    return config;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("ablation presets adjust exactly one knob") {
    auto base = small_synthetic_config(1, 1);
    CHECK(apply_ablation_preset(base, "tc").company.ranges.allowed_ops.size() == 10);

    auto linear = apply_ablation_preset(base, "tc-linear");
    CHECK(linear.company.ranges.allowed_activations ==
          std::vector<Activation>{Activation::Identity});
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        auto trader = sample_uniform_trader(linear.company.ranges, 6, rng);
        for (const auto& term : trader.terms) CHECK(term.act == Activation::Identity);
    }

    auto unary = apply_ablation_preset(base, "tc-unary");
    CHECK(unary.company.ranges.allowed_ops == std::vector<Operator>{Operator::ProjX});
    for (int i = 0; i < 100; ++i) {
        auto trader = sample_uniform_trader(unary.company.ranges, 6, rng);
        for (const auto& term : trader.terms) CHECK(term.op == Operator::ProjX);
    }

    CHECK(apply_ablation_preset(base, "tc-no-educate").company.educate_enabled == false);
    CHECK(apply_ablation_preset(base, "tc-no-prune").company.prune_enabled == false);
    CHECK(apply_ablation_preset(base, "tc-unimodal").company.gmm_components == 1);
    CHECK(apply_ablation_preset(base, "tc-mse").company.score == Score::NegativeMse);
    CHECK(apply_ablation_preset(base, "market").market_baseline == true);
    CHECK_THROWS_AS(apply_ablation_preset(base, "tc-bogus"), std::invalid_argument);
}

TEST_CASE("market baseline holds one unit of everything") {
    auto config = apply_ablation_preset(small_synthetic_config(7, 7), "market");
    auto artifacts = run_offline_backtest(config);
    const auto& track = artifacts.report.tracks[0];
    auto [panel, gt] =
        generate_synthetic_panel(std::get<SyntheticSource>(config.source).spec);
    double buy_and_hold = 0.0;
    for (int i = 0; i < track.size(); ++i) {
        CHECK(track.predicted[i] == 1.0);
        buy_and_hold += panel.returns(0, track.times[i]);
    }
    CHECK(artifacts.report.curves[0].back() == doctest::Approx(buy_and_hold));
    CHECK(artifacts.states.empty());
}

TEST_CASE("offline learns an easy planted alpha out of sample") {
    auto config = small_synthetic_config(11, 4, /*noise=*/0.002);
    auto artifacts = run_offline_backtest(config);
    CHECK(artifacts.report.per_stock[0].acc_pct >= 90.0);
    CHECK(artifacts.report.per_stock[0].final_cumulative > 0.0);
}

TEST_CASE("identical config and seed give byte-identical artifacts") {
    auto dir_a = fresh_dir("tc_det_a");
    auto dir_b = fresh_dir("tc_det_b");
    auto config = small_synthetic_config(3, 9);
    config.out_dir = dir_a.string();
    auto a = run_offline_backtest(config);
    config.out_dir = dir_b.string();
    auto b = run_offline_backtest(config);
    for (const char* name : {"metrics.csv", "metrics.json", "curves.csv", "runlog.txt",
                             "state_S0.json", "formulas.txt", "census.csv"}) {
        fs::path pa = fs::path(a.run_dir) / name;
        fs::path pb = fs::path(b.run_dir) / name;
        REQUIRE(fs::exists(pa));
        REQUIRE(fs::exists(pb));
        CHECK(slurp(pa.string()) == slurp(pb.string()));
    }
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

TEST_CASE("different seeds give different runs but the same artifact naming") {
    auto config = small_synthetic_config(3, 9);
    auto h1 = config_hash(config);
    config.seed = 10;
    CHECK(config_hash(config) == h1);  // seed excluded from the hash
    config.company.num_traders = 31;
    CHECK(config_hash(config) != h1);
}

TEST_CASE("causality: predictions ignore data beyond t - lag") {
    auto config = small_synthetic_config(21, 2);
    config.lag = 1;
    auto [panel, gt] =
        generate_synthetic_panel(std::get<SyntheticSource>(config.source).spec);
    auto baseline = run_offline_backtest(config, panel);
    const auto& track = baseline.report.tracks[0];

    std::mt19937_64 noise_rng(99);
    std::normal_distribution<double> gauss(0.0, 3.0);
    for (int pick : {0, 25, track.size() - 1}) {
        const int target_col = track.times[pick];
        ReturnsPanel tampered = panel;
        // randomize every test-period column beyond the information boundary
        for (int col = std::max(track.times[0], target_col - config.lag);
             col < panel.num_periods(); ++col)
            for (int i = 0; i < panel.num_stocks(); ++i)
                tampered.returns(i, col) = gauss(noise_rng);
        auto rerun = run_offline_backtest(config, tampered);
        CHECK(rerun.report.tracks[0].predicted[pick] == track.predicted[pick]);
    }
}

TEST_CASE("online with a single refit segment reproduces offline byte for byte") {
    auto dir_off = fresh_dir("tc_off");
    auto dir_on = fresh_dir("tc_on");
    auto config = small_synthetic_config(5, 6);
    config.out_dir = dir_off.string();
    auto offline = run_offline_backtest(config);
    config.out_dir = dir_on.string();
    config.refit.periods = 0;  // never refit within the test span
    auto online = run_online_backtest(config);
    for (const char* name : {"metrics.csv", "metrics.json", "curves.csv",
                             "state_S0.json"}) {
        CHECK(slurp((fs::path(offline.run_dir) / name).string()) ==
              slurp((fs::path(online.run_dir) / name).string()));
    }
    fs::remove_all(dir_off);
    fs::remove_all(dir_on);
}

TEST_CASE("online segment-1 predictions are invariant to segment-2 data") {
    auto config = small_synthetic_config(13, 5);
    config.refit.periods = 100;  // two segments over the 200-column test half
    auto [panel, gt] =
        generate_synthetic_panel(std::get<SyntheticSource>(config.source).spec);
    auto baseline = run_online_backtest(config, panel);
    const auto& track = baseline.report.tracks[0];
    const int boundary = 300;  // split 200 + refit 100

    ReturnsPanel tampered = panel;
    std::mt19937_64 noise_rng(7);
    std::normal_distribution<double> gauss(0.0, 2.0);
    for (int col = boundary; col < panel.num_periods(); ++col)
        for (int i = 0; i < panel.num_stocks(); ++i)
            tampered.returns(i, col) = gauss(noise_rng);
    auto rerun = run_online_backtest(config, tampered);
    for (int k = 0; k < track.size(); ++k) {
        if (track.times[k] >= boundary) continue;
        CHECK(rerun.report.tracks[0].predicted[k] == track.predicted[k]);
    }
}

TEST_CASE("online refits recover from a regime flip") {
    // Weak planted relation during training, strong reversed relation over
    // the test half; expanding-window refits flip the learned sign while the
    // frozen offline model keeps trading the stale one.
    int online_wins = 0;
    const int trials = 20;
    for (int k = 0; k < trials; ++k) {
        const int periods = 800, flip = 400;
        ReturnsPanel panel;
        panel.symbols = synthetic_symbols(5);
        panel.returns.resize(5, periods);
        std::mt19937_64 rng(4000 + k);
        std::normal_distribution<double> gauss(0.0, 1.0);
        for (int i = 0; i < 5; ++i)
            for (int u = 0; u < periods; ++u) panel.returns(i, u) = gauss(rng);
        for (int u = 0; u < periods; ++u) panel.timestamps.push_back(std::to_string(u));
        for (int u = 0; u + 1 < periods; ++u) {
            double c = (u + 1) < flip ? 0.003 : -0.02;
            panel.returns(0, u + 1) = c * panel.returns(2, u) + 0.003 * gauss(rng);
        }

        BacktestConfig config;
        PlantedAlphaSpec dummy;
        dummy.num_stocks = 5;
        dummy.num_periods = periods;
        dummy.ground_truth = parse_trader("+1\u00B7S2_t", synthetic_symbols(5));
        config.source = SyntheticSource{dummy};  // ignored; panel injected
        config.split.fraction = 0.5;
        config.lag = 0;
        config.rounds = 3;
        config.company.num_traders = 20;
        config.targets = {"S0"};
        config.periods_per_year = 252.0;
        config.seed = k;
        config.out_dir.clear();
        config.threads = 1;

        auto offline = run_offline_backtest(config, panel);
        config.refit.periods = 100;  // boundaries at 400, 500, 600, 700
        auto online = run_online_backtest(config, panel);

        auto late_acc = [&](const PredictionTrack& track) {
            int hits = 0, total = 0;
            for (int i = 0; i < track.size(); ++i) {
                if (track.times[i] < 500) continue;  // after the first refit
                ++total;
                double p = track.predicted[i], a = track.actual[i];
                if (((p > 0) - (p < 0)) == ((a > 0) - (a < 0))) ++hits;
            }
            return 100.0 * hits / total;
        };
        if (late_acc(online.report.tracks[0]) > late_acc(offline.report.tracks[0]))
            ++online_wins;
    }
    CHECK(online_wins >= 16);  // >= 80% of seeds
}

TEST_CASE("company state survives a save/load round trip exactly") {
    auto config = small_synthetic_config(17, 3);
    auto artifacts = run_offline_backtest(config);
    REQUIRE(artifacts.states.size() == 1);
    const auto& doc = artifacts.states[0];
    fs::path path = fs::temp_directory_path() / "tc_state_roundtrip.json";
    save_company_state(path.string(), doc);
    auto loaded = load_company_state(path.string());
    CHECK(loaded.state.target == doc.state.target);
    CHECK(loaded.state.traders == doc.state.traders);
    CHECK(loaded.symbols == doc.symbols);
    CHECK(loaded.stored_scores == doc.stored_scores);
    CHECK(loaded.score_window.first == doc.score_window.first);
    CHECK(loaded.score_window.last == doc.score_window.last);
    REQUIRE(loaded.state.aggregator.size() == doc.state.aggregator.size());
    CHECK((loaded.state.aggregator.array() == doc.state.aggregator.array()).all());
    fs::remove(path);
}

TEST_CASE("inspect prints ranked formulas and census tables") {
    CompanyStateDoc doc;
    doc.symbols = {"LLOY", "SHP", "AHT"};
    doc.state.target = 0;
    doc.state.config.num_traders = 2;
    doc.state.traders = {
        parse_trader("-2.28·(SHP_t > AHT_{t-3})", doc.symbols),
        parse_trader("+0.40·tanh(AHT_t - SHP_{t-1})", doc.symbols)};
    doc.state.aggregator = Eigen::VectorXd::Zero(3);
    doc.stored_scores = {4.2, 1.1};
    doc.score_window = {10, 90};
    fs::path path = fs::temp_directory_path() / "tc_inspect_state.json";
    save_company_state(path.string(), doc);

    auto report = inspect_state(path.string(), 2);
    CHECK(report.find("-2.28·(SHP_t > AHT_{t-3})") != std::string::npos);
    CHECK(report.find("target: LLOY") != std::string::npos);
    // ranked by stored score, best first
    CHECK(report.find("# 1 (trader 0") < report.find("# 2 (trader 1"));
    // census: operator counts sum to the total number of terms
    CHECK(report.find("census operators: sub=1 gt=1") != std::string::npos);
    fs::remove(path);
}

TEST_CASE("inspect breaks score ties by trader index") {
    CompanyStateDoc doc;
    doc.symbols = {"AAA", "BBB"};
    doc.state.target = 1;
    doc.state.config.num_traders = 3;
    doc.state.traders = {parse_trader("+1.00·AAA_t", doc.symbols),
                         parse_trader("+2.00·AAA_t", doc.symbols),
                         parse_trader("+3.00·AAA_t", doc.symbols)};
    doc.state.aggregator = Eigen::VectorXd::Zero(4);
    doc.stored_scores = {1.0, 1.0, 1.0};
    fs::path path = fs::temp_directory_path() / "tc_inspect_ties.json";
    save_company_state(path.string(), doc);
    auto report = inspect_state(path.string(), 3);
    CHECK(report.find("# 1 (trader 0") < report.find("# 2 (trader 1"));
    CHECK(report.find("# 2 (trader 1") < report.find("# 3 (trader 2"));
    fs::remove(path);
}

TEST_CASE("csv and json reports carry identical numbers") {
    auto dir = fresh_dir("tc_emit");
    auto config = small_synthetic_config(19, 8);
    config.out_dir = dir.string();
    auto artifacts = run_offline_backtest(config);

    Json parsed;
    std::ifstream in(fs::path(artifacts.run_dir) / "metrics.json");
    in >> parsed;
    std::ifstream csv(fs::path(artifacts.run_dir) / "curves.csv");
    std::string line;
    std::getline(csv, line);  // header
    int rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    const auto& track = artifacts.report.tracks[0];
    CHECK(rows == track.size());  // stocks x test periods

    std::string metrics_csv = slurp((fs::path(artifacts.run_dir) / "metrics.csv").string());
    std::istringstream mcsv(metrics_csv);
    std::getline(mcsv, line);  // header
    std::getline(mcsv, line);  // S0 row
    std::stringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');
    CHECK(cell == "S0");
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) == parsed["per_stock"][0]["acc_pct"].get<double>());
    std::getline(row, cell, ',');
    CHECK(std::stod(cell) == parsed["per_stock"][0]["ar_pct"].get<double>());
    fs::remove_all(dir);
}

TEST_CASE("run configuration survives a json round trip") {
    auto config = small_synthetic_config(23, 11);
    config.refit.yearly = true;
    config.company.ridge = 0.5;
    config.company.score = Score::NegativeMse;
    auto j = backtest_config_to_json(config);
    auto back = backtest_config_from_json(j);
    CHECK(config_hash(back) == config_hash(config));
    CHECK(back.seed == config.seed);
    CHECK(back.company.ridge == 0.5);
    CHECK(back.company.score == Score::NegativeMse);
    CHECK(back.refit.yearly == true);
}

TEST_CASE("unknown target symbols are rejected") {
    auto config = small_synthetic_config(1, 1);
    config.targets = {"NOPE"};
    CHECK_THROWS_WITH_AS(run_offline_backtest(config),
                         doctest::Contains("unknown symbol 'NOPE'"),
                         std::invalid_argument);
}

TEST_CASE("insufficient history is rejected up front") {
    auto config = small_synthetic_config(1, 1);
    std::get<SyntheticSource>(config.source).spec.num_periods = 30;
    CHECK_THROWS_AS(run_offline_backtest(config), std::invalid_argument);
}
