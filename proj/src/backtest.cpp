#include "tc/backtest.hpp"

#include "tc/dates.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace fs = std::filesystem;

namespace tc {

namespace {

std::string format_full(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

struct Prepared {
    ReturnsPanel panel;
    std::vector<int> targets;
    int split_col = 0;
    int first_anchor = 0;
    double periods_per_year = 252.0;
};

void check_config(const BacktestConfig& config) {
    if (config.window < 1) throw std::invalid_argument("config: window must be >= 1");
    if (config.lag < 0) throw std::invalid_argument("config: lag must be >= 0");
    if (config.rounds < 1) throw std::invalid_argument("config: rounds must be >= 1");
}

ReturnsPanel load_panel(const BacktestConfig& config) {
    if (std::holds_alternative<SyntheticSource>(config.source))
        return generate_synthetic_panel(std::get<SyntheticSource>(config.source).spec).first;
    const auto& csv = std::get<CsvSource>(config.source);
    return compute_log_returns(load_price_csv(csv.path, csv.schema));
}

Prepared prepare(const BacktestConfig& config, ReturnsPanel panel) {
    check_config(config);
    Prepared prep;
    prep.panel = std::move(panel);
    const int t = prep.panel.num_periods();

    if (!config.split.timestamp.empty()) {
        const auto& stamps = prep.panel.timestamps;
        auto it = std::lower_bound(stamps.begin(), stamps.end(), config.split.timestamp);
        prep.split_col = static_cast<int>(it - stamps.begin());
    } else {
        if (!(config.split.fraction > 0.0 && config.split.fraction < 1.0))
            throw std::invalid_argument("config: split fraction must be in (0,1)");
        prep.split_col = static_cast<int>(std::floor(t * config.split.fraction));
    }

    prep.first_anchor =
        std::max(min_anchor(config.company.ranges), config.window + config.lag);
    if (prep.split_col - 2 < prep.first_anchor)
        throw std::invalid_argument(
            "insufficient training data: first trainable anchor is " +
            std::to_string(prep.first_anchor) + " but the split is at column " +
            std::to_string(prep.split_col));
    if (prep.split_col < prep.first_anchor + 1 + config.lag)
        throw std::invalid_argument("insufficient history before the first prediction");
    if (prep.split_col >= t)
        throw std::invalid_argument("split leaves no test data");

    if (config.targets.empty()) {
        for (int i = 0; i < prep.panel.num_stocks(); ++i) prep.targets.push_back(i);
    } else {
        for (const auto& name : config.targets) {
            auto it = std::find(prep.panel.symbols.begin(), prep.panel.symbols.end(), name);
            if (it == prep.panel.symbols.end())
                throw std::invalid_argument("unknown symbol '" + name + "'");
            prep.targets.push_back(static_cast<int>(it - prep.panel.symbols.begin()));
        }
    }

    prep.periods_per_year = config.periods_per_year > 0.0
                                ? config.periods_per_year
                                : infer_periods_per_year(prep.panel.timestamps);
    return prep;
}

std::vector<int> refit_boundaries(const BacktestConfig& config, const Prepared& prep,
                                  bool online) {
    std::vector<int> boundaries{prep.split_col};
    if (!online) return boundaries;
    const int t = prep.panel.num_periods();
    if (config.refit.yearly) {
        const auto& stamps = prep.panel.timestamps;
        for (int col = prep.split_col + 1; col < t; ++col) {
            auto a = year_of(stamps[col - 1]);
            auto b = year_of(stamps[col]);
            if (!a || !b)
                throw std::invalid_argument(
                    "yearly refit requires timestamps starting with a 4-digit year");
            if (*a != *b) boundaries.push_back(col);
        }
    } else if (config.refit.periods > 0) {
        for (int col = prep.split_col + config.refit.periods; col < t;
             col += config.refit.periods)
            boundaries.push_back(col);
    }
    return boundaries;
}

struct TargetResult {
    PredictionTrack track;
    CompanyStateDoc doc;
    bool has_doc = false;
    std::vector<std::string> log_lines;
};

TargetResult run_target(const BacktestConfig& config, const Prepared& prep,
                        int stock, const std::vector<int>& boundaries) {
    const ReturnsPanel& panel = prep.panel;
    const int t = panel.num_periods();
    TargetResult result;
    result.track.target = stock;

    if (config.market_baseline) {
        for (int col = prep.split_col; col < t; ++col) {
            result.track.times.push_back(col);
            result.track.predicted.push_back(1.0);
            result.track.actual.push_back(panel.returns(stock, col));
        }
        return result;
    }

    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(stock)));
    RunLog log;
    CompanyState state = init_company(stock, config.company, panel.num_stocks(), rng);
    TimeRange train_range{prep.first_anchor, 0};
    for (size_t k = 0; k < boundaries.size(); ++k) {
        const int boundary = boundaries[k];
        const int next = k + 1 < boundaries.size() ? boundaries[k + 1] : t;
        train_range.last = boundary - 2;
        for (int round = 0; round < config.rounds; ++round)
            train_step(state, panel, train_range.first, train_range.last, rng, &log);
        for (int col = boundary; col < next; ++col) {
            const int anchor = col - 1 - config.lag;
            result.track.times.push_back(col);
            result.track.predicted.push_back(company_predict(state, panel, anchor));
            result.track.actual.push_back(panel.returns(stock, col));
        }
    }

    result.doc.state = std::move(state);
    result.doc.symbols = panel.symbols;
    result.doc.stored_scores = trader_scores(result.doc.state, panel, train_range);
    result.doc.score_window = train_range;
    result.has_doc = true;
    result.log_lines = std::move(log.lines);
    return result;
}

// Deterministic parallel map: slot i always holds target i's result.
std::vector<TargetResult> run_all_targets(const BacktestConfig& config,
                                          const Prepared& prep,
                                          const std::vector<int>& boundaries) {
    std::vector<TargetResult> results(prep.targets.size());
    std::vector<std::exception_ptr> errors(prep.targets.size());
    unsigned hw = std::thread::hardware_concurrency();
    unsigned workers = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                          : (hw > 0 ? hw : 1);
    workers = std::min<unsigned>(workers, static_cast<unsigned>(prep.targets.size()));
    std::atomic<size_t> next{0};
    auto body = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= prep.targets.size()) return;
            try {
                results[i] = run_target(config, prep, prep.targets[i], boundaries);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
        for (auto& th : pool) th.join();
    }
    for (auto& err : errors)
        if (err) std::rethrow_exception(err);
    return results;
}

void write_text_file(const std::string& path, const std::string& content,
                     std::vector<std::string>& files) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << content;
    files.push_back(path);
}

std::string metrics_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "symbol,acc_pct,ar_pct,sharpe,calmar,mdd,final_cum_return\n";
    auto row = [&](const std::string& sym, const StockMetrics& m) {
        out << sym << ',' << format_full(m.acc_pct) << ',' << format_full(m.ar_pct) << ','
            << (m.sharpe ? format_full(*m.sharpe) : "") << ','
            << (m.calmar ? format_full(*m.calmar) : "") << ',' << format_full(m.mdd)
            << ',' << format_full(m.final_cumulative) << '\n';
    };
    for (size_t i = 0; i < report.per_stock.size(); ++i)
        row(report.symbols[i], report.per_stock[i]);
    StockMetrics avg;
    avg.acc_pct = report.avg_acc;
    avg.ar_pct = report.avg_ar;
    avg.sharpe = report.avg_sharpe;
    avg.calmar = report.avg_calmar;
    avg.mdd = report.avg_mdd;
    avg.final_cumulative = 0.0;
    for (const auto& m : report.per_stock)
        avg.final_cumulative += m.final_cumulative / report.per_stock.size();
    row("AVERAGE", avg);
    return out.str();
}

Json metrics_json(const MetricsReport& report) {
    Json per_stock = Json::array();
    auto entry = [](const std::string& sym, const StockMetrics& m) {
        Json j{{"symbol", sym},
               {"acc_pct", m.acc_pct},
               {"ar_pct", m.ar_pct},
               {"mdd", m.mdd},
               {"final_cum_return", m.final_cumulative}};
        j["sharpe"] = m.sharpe ? Json(*m.sharpe) : Json(nullptr);
        j["calmar"] = m.calmar ? Json(*m.calmar) : Json(nullptr);
        return j;
    };
    for (size_t i = 0; i < report.per_stock.size(); ++i)
        per_stock.push_back(entry(report.symbols[i], report.per_stock[i]));
    StockMetrics avg;
    avg.acc_pct = report.avg_acc;
    avg.ar_pct = report.avg_ar;
    avg.sharpe = report.avg_sharpe;
    avg.calmar = report.avg_calmar;
    avg.mdd = report.avg_mdd;
    for (const auto& m : report.per_stock)
        avg.final_cumulative += m.final_cumulative / report.per_stock.size();
    return Json{{"per_stock", per_stock}, {"average", entry("AVERAGE", avg)}};
}

std::string curves_csv(const MetricsReport& report) {
    std::ostringstream out;
    out << "stock,time,cumulative_return\n";
    for (size_t i = 0; i < report.curves.size(); ++i)
        for (size_t k = 0; k < report.curves[i].size(); ++k)
            out << report.symbols[i] << ',' << report.tracks[i].times[k] << ','
                << format_full(report.curves[i][k]) << '\n';
    return out.str();
}

std::string census_csv(const std::vector<CompanyStateDoc>& states) {
    std::ostringstream out;
    out << "target,kind,key,count\n";
    for (const auto& doc : states) {
        const std::string target = doc.symbols[doc.state.target];
        auto census = usage_census(doc.state);
        for (const auto& [stock, count] : census.stock_counts)
            out << target << ",stock," << doc.symbols[stock] << ',' << count << '\n';
        for (const auto& [op, count] : census.operator_counts)
            out << target << ",operator," << operator_name(op) << ',' << count << '\n';
        for (const auto& [act, count] : census.activation_counts)
            out << target << ",activation," << activation_name(act) << ',' << count << '\n';
    }
    return out.str();
}

std::string ranked_formulas(const CompanyStateDoc& doc, int top_k) {
    std::vector<int> order(doc.state.traders.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return doc.stored_scores[a] > doc.stored_scores[b];
    });
    std::ostringstream out;
    const int shown = std::min<int>(top_k, static_cast<int>(order.size()));
    for (int r = 0; r < shown; ++r) {
        int idx = order[r];
        out << "# " << (r + 1) << " (trader " << idx
            << ", score=" << format_full(doc.stored_scores[idx]) << ")\n"
            << format_trader(doc.state.traders[idx], doc.symbols) << '\n';
    }
    return out.str();
}

std::string formulas_report(const std::vector<CompanyStateDoc>& states, int top_k) {
    std::ostringstream out;
    for (const auto& doc : states) {
        out << "== " << doc.symbols[doc.state.target] << " ==\n"
            << ranked_formulas(doc, top_k);
    }
    return out.str();
}

RunArtifacts run_impl(const BacktestConfig& config, ReturnsPanel panel, bool online) {
    Prepared prep = prepare(config, std::move(panel));
    auto boundaries = refit_boundaries(config, prep, online);
    auto results = run_all_targets(config, prep, boundaries);

    RunArtifacts artifacts;
    artifacts.mode = online ? "online" : "offline";
    std::vector<PredictionTrack> tracks;
    tracks.reserve(results.size());
    for (auto& result : results) {
        tracks.push_back(std::move(result.track));
        for (auto& line : result.log_lines)
            artifacts.log.note(prep.panel.symbols[tracks.back().target] + ": " +
                               std::move(line));
        if (result.has_doc) artifacts.states.push_back(std::move(result.doc));
    }
    artifacts.report = metrics_report(tracks, prep.panel.symbols, prep.periods_per_year);

    if (!config.out_dir.empty()) {
        char hash_hex[32];
        std::snprintf(hash_hex, sizeof hash_hex, "%016llx",
                      static_cast<unsigned long long>(config_hash(config)));
        artifacts.run_dir = config.out_dir + "/run-" + hash_hex + "-s" +
                            std::to_string(config.seed);
        fs::create_directories(artifacts.run_dir);
        emit_report(artifacts, "csv");
        emit_report(artifacts, "json");
        for (const auto& doc : artifacts.states) {
            std::string path =
                artifacts.run_dir + "/state_" + doc.symbols[doc.state.target] + ".json";
            save_company_state(path, doc);
            artifacts.files.push_back(path);
        }
        if (!artifacts.states.empty()) {
            write_text_file(artifacts.run_dir + "/formulas.txt",
                            formulas_report(artifacts.states, 10), artifacts.files);
            write_text_file(artifacts.run_dir + "/census.csv",
                            census_csv(artifacts.states), artifacts.files);
        }
        std::string log_text;
        for (const auto& line : artifacts.log.lines) log_text += line + '\n';
        write_text_file(artifacts.run_dir + "/runlog.txt", log_text, artifacts.files);
        Json manifest{{"mode", artifacts.mode},
                      {"seed", config.seed},
                      {"config_hash", hash_hex},
                      {"config", backtest_config_to_json(config)}};
        write_text_file(artifacts.run_dir + "/manifest.json", manifest.dump(2) + "\n",
                        artifacts.files);
    }
    return artifacts;
}

}  // namespace

BacktestConfig apply_ablation_preset(BacktestConfig config, const std::string& preset) {
    if (preset == "tc") return config;
    if (preset == "tc-linear") {
        config.company.ranges.allowed_activations = {Activation::Identity};
    } else if (preset == "tc-unary") {
        config.company.ranges.allowed_ops = {Operator::ProjX};
    } else if (preset == "tc-no-educate") {
        config.company.educate_enabled = false;
    } else if (preset == "tc-no-prune") {
        config.company.prune_enabled = false;
    } else if (preset == "tc-unimodal") {
        config.company.gmm_components = 1;
    } else if (preset == "tc-mse") {
        config.company.score = Score::NegativeMse;
    } else if (preset == "market") {
        config.market_baseline = true;
    } else {
        throw std::invalid_argument("unknown preset: " + preset);
    }
    return config;
}

RunArtifacts run_offline_backtest(const BacktestConfig& config) {
    return run_impl(config, load_panel(config), false);
}

RunArtifacts run_offline_backtest(const BacktestConfig& config, ReturnsPanel panel) {
    return run_impl(config, std::move(panel), false);
}

RunArtifacts run_online_backtest(const BacktestConfig& config) {
    return run_impl(config, load_panel(config), true);
}

RunArtifacts run_online_backtest(const BacktestConfig& config, ReturnsPanel panel) {
    return run_impl(config, std::move(panel), true);
}

void emit_report(RunArtifacts& artifacts, const std::string& format) {
    if (artifacts.run_dir.empty())
        throw std::runtime_error("emit_report: run has no output directory");
    if (format == "csv") {
        write_text_file(artifacts.run_dir + "/metrics.csv", metrics_csv(artifacts.report),
                        artifacts.files);
        write_text_file(artifacts.run_dir + "/curves.csv", curves_csv(artifacts.report),
                        artifacts.files);
    } else if (format == "json") {
        write_text_file(artifacts.run_dir + "/metrics.json",
                        metrics_json(artifacts.report).dump(2) + "\n", artifacts.files);
    } else {
        throw std::invalid_argument("emit_report: unknown format '" + format + "'");
    }
}

std::string inspect_state(const std::string& state_path, int top_k,
                          const std::string& data_csv, const std::string& window) {
    CompanyStateDoc doc = load_company_state(state_path);
    std::string score_source = "stored training scores";
    if (!data_csv.empty()) {
        CsvSchema schema;
        ReturnsPanel panel = compute_log_returns(load_price_csv(data_csv, schema));
        TimeRange range = doc.score_window;
        if (!window.empty()) {
            auto colon = window.find(':');
            if (colon == std::string::npos)
                throw std::invalid_argument("window must be 't1:t2'");
            range.first = std::stoi(window.substr(0, colon));
            range.last = std::stoi(window.substr(colon + 1));
        }
        doc.stored_scores = trader_scores(doc.state, panel, range);
        doc.score_window = range;
        score_source = "re-scored on " + data_csv + " over [" +
                       std::to_string(range.first) + ", " + std::to_string(range.last) +
                       "]";
    }
    std::ostringstream out;
    out << "target: " << doc.symbols[doc.state.target] << " (stock "
        << doc.state.target << ")\n"
        << "traders: " << doc.state.traders.size()
        << ", aggregation: " << aggregation_name(doc.state.config.aggregation)
        << ", score: " << score_name(doc.state.config.score) << '\n'
        << "ranking: " << score_source << '\n'
        << ranked_formulas(doc, top_k);

    auto census = usage_census(doc.state);
    out << "census stocks:";
    for (const auto& [stock, count] : census.stock_counts)
        out << ' ' << doc.symbols[stock] << '=' << count;
    out << "\ncensus operators:";
    for (const auto& [op, count] : census.operator_counts)
        out << ' ' << operator_name(op) << '=' << count;
    out << "\ncensus activations:";
    for (const auto& [act, count] : census.activation_counts)
        out << ' ' << activation_name(act) << '=' << count;
    out << '\n';
    return out.str();
}

std::uint64_t config_hash(const BacktestConfig& config) {
    Json j = backtest_config_to_json(config);
    j.erase("seed");
    j.erase("out");
    const std::string dump = j.dump();
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : dump) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

}  // namespace tc
