#include "tc/serialization.hpp"

#include "tc/synthetic.hpp"

#include <fstream>
#include <stdexcept>

namespace tc {

Json trader_to_json(const TraderParams& trader) {
    Json terms = Json::array();
    for (const auto& term : trader.terms) {
        terms.push_back({{"p", term.p},
                         {"q", term.q},
                         {"d", term.d},
                         {"f", term.f},
                         {"op", operator_name(term.op)},
                         {"act", activation_name(term.act)},
                         {"w", term.weight}});
    }
    return Json{{"terms", terms}};
}

TraderParams trader_from_json(const Json& j, const std::vector<std::string>& symbols) {
    if (j.is_string()) return parse_trader(j.get<std::string>(), symbols);
    TraderParams trader;
    for (const auto& jt : j.at("terms")) {
        TermParams term;
        term.p = jt.at("p").get<int>();
        term.q = jt.at("q").get<int>();
        term.d = jt.at("d").get<int>();
        term.f = jt.at("f").get<int>();
        term.op = operator_from_name(jt.at("op").get<std::string>());
        term.act = activation_from_name(jt.at("act").get<std::string>());
        term.weight = jt.at("w").get<double>();
        trader.terms.push_back(term);
    }
    return trader;
}

Json ranges_to_json(const HyperRanges& ranges) {
    Json ops = Json::array();
    for (auto op : ranges.allowed_ops) ops.push_back(operator_name(op));
    Json acts = Json::array();
    for (auto act : ranges.allowed_activations) acts.push_back(activation_name(act));
    return Json{{"max_terms", ranges.max_terms},
                {"max_delay", ranges.max_delay},
                {"operators", ops},
                {"activations", acts},
                {"weight_range", {ranges.weight_init_range.first,
                                  ranges.weight_init_range.second}},
                {"corr_window", ranges.corr_window}};
}

HyperRanges ranges_from_json(const Json& j) {
    HyperRanges ranges;
    ranges.max_terms = j.value("max_terms", ranges.max_terms);
    ranges.max_delay = j.value("max_delay", ranges.max_delay);
    if (j.contains("operators")) {
        ranges.allowed_ops.clear();
        for (const auto& name : j.at("operators"))
            ranges.allowed_ops.push_back(operator_from_name(name.get<std::string>()));
    }
    if (j.contains("activations")) {
        ranges.allowed_activations.clear();
        for (const auto& name : j.at("activations"))
            ranges.allowed_activations.push_back(
                activation_from_name(name.get<std::string>()));
    }
    if (j.contains("weight_range")) {
        auto wr = j.at("weight_range");
        ranges.weight_init_range = {wr.at(0).get<double>(), wr.at(1).get<double>()};
    }
    ranges.corr_window = j.value("corr_window", ranges.corr_window);
    return ranges;
}

Json company_config_to_json(const CompanyConfig& config) {
    return Json{{"traders", config.num_traders},
                {"prune_ratio", config.prune_ratio},
                {"fit_times", config.fit_times},
                {"aggregation", aggregation_name(config.aggregation)},
                {"score", score_name(config.score)},
                {"educate", config.educate_enabled},
                {"prune", config.prune_enabled},
                {"ridge", config.ridge},
                {"gmm_components", config.gmm_components},
                {"ranges", ranges_to_json(config.ranges)}};
}

CompanyConfig company_config_from_json(const Json& j) {
    CompanyConfig config;
    config.num_traders = j.value("traders", config.num_traders);
    config.prune_ratio = j.value("prune_ratio", config.prune_ratio);
    config.fit_times = j.value("fit_times", config.fit_times);
    if (j.contains("aggregation"))
        config.aggregation = aggregation_from_name(j.at("aggregation").get<std::string>());
    if (j.contains("score")) config.score = score_from_name(j.at("score").get<std::string>());
    config.educate_enabled = j.value("educate", config.educate_enabled);
    config.prune_enabled = j.value("prune", config.prune_enabled);
    config.ridge = j.value("ridge", config.ridge);
    config.gmm_components = j.value("gmm_components", config.gmm_components);
    if (j.contains("ranges")) config.ranges = ranges_from_json(j.at("ranges"));
    return config;
}

Json company_state_to_json(const CompanyStateDoc& doc) {
    Json traders = Json::array();
    for (const auto& trader : doc.state.traders) traders.push_back(trader_to_json(trader));
    std::vector<double> aggregator(doc.state.aggregator.data(),
                                   doc.state.aggregator.data() + doc.state.aggregator.size());
    return Json{{"target", doc.state.target},
                {"symbols", doc.symbols},
                {"config", company_config_to_json(doc.state.config)},
                {"traders", traders},
                {"aggregator", aggregator},
                {"scores", doc.stored_scores},
                {"score_window", {doc.score_window.first, doc.score_window.last}}};
}

CompanyStateDoc company_state_from_json(const Json& j) {
    CompanyStateDoc doc;
    doc.state.target = j.at("target").get<int>();
    doc.symbols = j.at("symbols").get<std::vector<std::string>>();
    doc.state.config = company_config_from_json(j.at("config"));
    for (const auto& jt : j.at("traders"))
        doc.state.traders.push_back(trader_from_json(jt, doc.symbols));
    auto agg = j.at("aggregator").get<std::vector<double>>();
    doc.state.aggregator =
        Eigen::Map<const Eigen::VectorXd>(agg.data(), static_cast<int>(agg.size()));
    doc.stored_scores = j.value("scores", std::vector<double>{});
    if (j.contains("score_window")) {
        doc.score_window.first = j.at("score_window").at(0).get<int>();
        doc.score_window.last = j.at("score_window").at(1).get<int>();
    }
    return doc;
}

void save_company_state(const std::string& path, const CompanyStateDoc& doc) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write state file: " + path);
    out << company_state_to_json(doc).dump(2) << '\n';
}

CompanyStateDoc load_company_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open state file: " + path);
    Json j;
    try {
        in >> j;
        return company_state_from_json(j);
    } catch (const Json::exception& e) {
        throw std::runtime_error("corrupt state file " + path + ": " + e.what());
    }
}

Json planted_spec_to_json(const PlantedAlphaSpec& spec) {
    return Json{{"stocks", spec.num_stocks},
                {"periods", spec.num_periods},
                {"target", spec.target_stock},
                {"ground_truth", trader_to_json(spec.ground_truth)},
                {"signal_scale", spec.signal_scale},
                {"noise_scale", spec.noise_scale},
                {"background_scale", spec.background_scale},
                {"corr_window", spec.corr_window},
                {"seed", spec.seed}};
}

PlantedAlphaSpec planted_spec_from_json(const Json& j) {
    PlantedAlphaSpec spec;
    spec.num_stocks = j.at("stocks").get<int>();
    spec.num_periods = j.at("periods").get<int>();
    spec.target_stock = j.value("target", 0);
    spec.signal_scale = j.value("signal_scale", spec.signal_scale);
    spec.noise_scale = j.value("noise_scale", spec.noise_scale);
    spec.background_scale = j.value("background_scale", spec.background_scale);
    spec.corr_window = j.value("corr_window", spec.corr_window);
    spec.seed = j.value("seed", spec.seed);
    spec.ground_truth =
        trader_from_json(j.at("ground_truth"), synthetic_symbols(spec.num_stocks));
    return spec;
}

namespace {

Json schema_to_json(const CsvSchema& schema) {
    return Json{{"layout", schema.layout == CsvLayout::Wide ? "wide" : "long"},
                {"timestamp_column", schema.timestamp_column},
                {"symbol_column", schema.symbol_column},
                {"price_column", schema.price_column},
                {"symbols", schema.symbols},
                {"missing", schema.missing == MissingPolicy::ForwardFill ? "forward-fill"
                                                                         : "drop-row"}};
}

CsvSchema schema_from_json(const Json& j) {
    CsvSchema schema;
    if (j.contains("layout")) {
        auto layout = j.at("layout").get<std::string>();
        if (layout == "wide")
            schema.layout = CsvLayout::Wide;
        else if (layout == "long")
            schema.layout = CsvLayout::Long;
        else
            throw std::invalid_argument("unknown CSV layout: " + layout);
    }
    schema.timestamp_column = j.value("timestamp_column", schema.timestamp_column);
    schema.symbol_column = j.value("symbol_column", schema.symbol_column);
    schema.price_column = j.value("price_column", schema.price_column);
    schema.symbols = j.value("symbols", schema.symbols);
    if (j.contains("missing")) {
        auto missing = j.at("missing").get<std::string>();
        if (missing == "forward-fill")
            schema.missing = MissingPolicy::ForwardFill;
        else if (missing == "drop-row")
            schema.missing = MissingPolicy::DropRow;
        else
            throw std::invalid_argument("unknown missing-data policy: " + missing);
    }
    return schema;
}

}  // namespace

Json backtest_config_to_json(const BacktestConfig& config) {
    Json j;
    if (std::holds_alternative<SyntheticSource>(config.source)) {
        j["data"] = Json{
            {"synthetic", planted_spec_to_json(std::get<SyntheticSource>(config.source).spec)}};
    } else {
        const auto& csv = std::get<CsvSource>(config.source);
        Json jc = schema_to_json(csv.schema);
        jc["path"] = csv.path;
        j["data"] = Json{{"csv", jc}};
    }
    if (!config.split.timestamp.empty())
        j["split"] = Json{{"timestamp", config.split.timestamp}};
    else
        j["split"] = config.split.fraction;
    j["window"] = config.window;
    j["lag"] = config.lag;
    if (config.refit.yearly)
        j["refit"] = "yearly";
    else if (config.refit.periods > 0)
        j["refit"] = Json{{"periods", config.refit.periods}};
    j["rounds"] = config.rounds;
    j["company"] = company_config_to_json(config.company);
    if (!config.targets.empty()) j["targets"] = config.targets;
    if (config.periods_per_year > 0) j["periods_per_year"] = config.periods_per_year;
    j["seed"] = config.seed;
    j["out"] = config.out_dir;
    if (config.market_baseline) j["market_baseline"] = true;
    if (config.threads > 0) j["threads"] = config.threads;
    return j;
}

BacktestConfig backtest_config_from_json(const Json& j) {
    BacktestConfig config;
    const auto& data = j.at("data");
    if (data.contains("synthetic")) {
        config.source = SyntheticSource{planted_spec_from_json(data.at("synthetic"))};
    } else if (data.contains("csv")) {
        CsvSource csv;
        csv.path = data.at("csv").at("path").get<std::string>();
        csv.schema = schema_from_json(data.at("csv"));
        config.source = csv;
    } else {
        throw std::invalid_argument("config: data must name 'synthetic' or 'csv'");
    }
    if (j.contains("split")) {
        if (j.at("split").is_number())
            config.split.fraction = j.at("split").get<double>();
        else
            config.split.timestamp = j.at("split").at("timestamp").get<std::string>();
    }
    config.window = j.value("window", config.window);
    config.lag = j.value("lag", config.lag);
    if (j.contains("refit")) {
        if (j.at("refit").is_string()) {
            if (j.at("refit").get<std::string>() != "yearly")
                throw std::invalid_argument("config: refit must be 'yearly' or {periods}");
            config.refit.yearly = true;
        } else {
            config.refit.periods = j.at("refit").at("periods").get<int>();
        }
    }
    config.rounds = j.value("rounds", config.rounds);
    if (j.contains("company"))
        config.company = company_config_from_json(j.at("company"));
    if (j.contains("targets") && !j.at("targets").is_string())
        config.targets = j.at("targets").get<std::vector<std::string>>();
    config.periods_per_year = j.value("periods_per_year", config.periods_per_year);
    config.seed = j.value("seed", config.seed);
    config.out_dir = j.value("out", config.out_dir);
    config.market_baseline = j.value("market_baseline", config.market_baseline);
    config.threads = j.value("threads", config.threads);
    return config;
}

BacktestConfig load_backtest_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    Json j;
    in >> j;
    return backtest_config_from_json(j);
}

}  // namespace tc
