#include <doctest.h>

#include "tc/formula.hpp"
#include "tc/synthetic.hpp"

#include <cmath>
#include <map>
#include <random>

using namespace tc;

namespace {

ReturnsPanel make_panel(const Eigen::MatrixXd& values,
                        std::vector<std::string> symbols = {}) {
    ReturnsPanel panel;
    panel.returns = values;
    if (symbols.empty())
        for (int i = 0; i < values.rows(); ++i) symbols.push_back("S" + std::to_string(i));
    panel.symbols = std::move(symbols);
    for (int u = 0; u < values.cols(); ++u) panel.timestamps.push_back(std::to_string(u));
    return panel;
}

ReturnsPanel random_panel(int stocks, int periods, unsigned seed, double scale = 0.02) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, scale);
    Eigen::MatrixXd values(stocks, periods);
    for (int i = 0; i < stocks; ++i)
        for (int u = 0; u < periods; ++u) values(i, u) = gauss(rng);
    return make_panel(values);
}

}  // namespace

TEST_CASE("activation table") {
    CHECK(eval_activation(Activation::Relu, -0.5) == 0.0);
    CHECK(eval_activation(Activation::Relu, 0.3) == 0.3);
    CHECK(eval_activation(Activation::Tanh, 0.0) == 0.0);
    CHECK(eval_activation(Activation::Exp, 1.0) == doctest::Approx(std::exp(1.0)));
    CHECK(eval_activation(Activation::Sign, -0.2) == -1.0);
    CHECK(eval_activation(Activation::Sign, 0.0) == 0.0);
    CHECK(eval_activation(Activation::Identity, 0.7) == 0.7);
    // exp is clamped, so the table stays closed over finite inputs
    CHECK(eval_activation(Activation::Exp, 1000.0) == std::exp(50.0));
    CHECK(std::isfinite(eval_activation(Activation::Exp, 1e308)));
}

TEST_CASE("binary operator table") {
    CHECK(eval_binary_op(Operator::Max, 0.5, -0.3) == 0.5);
    CHECK(eval_binary_op(Operator::Min, 0.5, -0.3) == -0.3);
    CHECK(eval_binary_op(Operator::Gt, 0.5, -0.3) == 1.0);
    CHECK(eval_binary_op(Operator::Gt, 0.2, 0.2) == 0.0);  // tie -> sign(0)
    CHECK(eval_binary_op(Operator::Lt, 0.5, -0.3) == -1.0);
    CHECK(eval_binary_op(Operator::Add, 0.1, 0.2) == doctest::Approx(0.3));
    CHECK(eval_binary_op(Operator::Sub, 0.1, 0.2) == doctest::Approx(-0.1));
    CHECK(eval_binary_op(Operator::Mul, 2.0, 3.0) == 6.0);
    CHECK(eval_binary_op(Operator::ProjX, 1.0, 2.0) == 1.0);
    CHECK(eval_binary_op(Operator::ProjY, 1.0, 2.0) == 2.0);
    CHECK_THROWS_AS(eval_binary_op(Operator::Corr, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("operators map finite pairs to finite values") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> wide(-kExpClamp, kExpClamp);
    const double maxmag = std::exp(kExpClamp);
    for (int it = 0; it < 2000; ++it) {
        double x = wide(rng), y = wide(rng);
        for (int o = 0; o < kNumOperators; ++o) {
            auto op = static_cast<Operator>(o);
            if (op == Operator::Corr) continue;
            for (int a = 0; a < kNumActivations; ++a) {
                double v = eval_activation(static_cast<Activation>(a),
                                           eval_binary_op(op, x, y));
                CHECK(std::isfinite(v));
                CHECK(std::abs(v) <= maxmag);
            }
        }
    }
}

TEST_CASE("projection with identity activation returns the raw return") {
    auto panel = random_panel(4, 20, 1);
    TermParams term;
    term.p = 2;
    term.q = 3;
    term.d = 0;
    term.f = 5;
    term.op = Operator::ProjX;
    term.act = Activation::Identity;
    CHECK(eval_term(term, panel, 10, 10) == panel.returns(2, 10));
}

TEST_CASE("comparison term from an extracted formula evaluates to the weighted sign") {
    // -2.28 * (SHP_t > AHT_{t-3}) with r_SHP[t] = 0.004, r_AHT[t-3] = -0.002
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(3, 6);
    values(1, 5) = 0.004;   // SHP at t = 5
    values(2, 2) = -0.002;  // AHT at t - 3
    auto panel = make_panel(values, {"LLOY", "SHP", "AHT"});
    TraderParams trader = parse_trader("-2.28·(SHP_t > AHT_{t-3})", panel.symbols);
    CHECK(eval_term(trader.terms[0], panel, 5, 10) == 1.0);
    CHECK(eval_trader(trader, panel, 5, HyperRanges{}) == doctest::Approx(-2.28));
}

TEST_CASE("correlation of a series with itself is one before activation") {
    auto panel = random_panel(3, 30, 2);
    TermParams term;
    term.p = 1;
    term.q = 1;
    term.d = 2;
    term.f = 2;
    term.op = Operator::Corr;
    term.act = Activation::Tanh;
    CHECK(eval_term(term, panel, 20, 10) == doctest::Approx(std::tanh(1.0)));
}

TEST_CASE("correlation with a constant series is defined as zero") {
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(2, 30);
    for (int u = 0; u < 30; ++u) values(0, u) = 0.01 * u;
    auto panel = make_panel(values);
    TermParams term;
    term.p = 0;
    term.q = 1;  // constant zero series
    term.op = Operator::Corr;
    CHECK(eval_term(term, panel, 20, 10) == 0.0);
}

TEST_CASE("insufficient history is rejected with the earliest valid t") {
    auto panel = random_panel(3, 30, 3);
    TermParams term;
    term.p = 0;
    term.q = 1;
    term.d = 4;
    term.f = 2;
    term.op = Operator::Corr;
    // needs t >= max(d, f) + corr_window - 1 = 4 + 9
    CHECK_THROWS_WITH_AS(eval_term(term, panel, 12, 10),
                         doctest::Contains("earliest valid t is 13"), std::out_of_range);
    CHECK_NOTHROW(eval_term(term, panel, 13, 10));
}

TEST_CASE("trader with all-zero weights predicts zero") {
    auto panel = random_panel(5, 40, 4);
    HyperRanges ranges;
    Rng rng(17);
    auto trader = sample_uniform_trader(ranges, 5, rng);
    for (auto& term : trader.terms) term.weight = 0.0;
    CHECK(eval_trader(trader, panel, 30, ranges) == 0.0);
}

TEST_CASE("single term scales linearly with its weight") {
    auto panel = random_panel(5, 40, 5);
    HyperRanges ranges;
    TermParams term;
    term.p = 1;
    term.q = 2;
    term.op = Operator::Add;
    term.weight = 2.0;
    TraderParams trader{{term}};
    double base = eval_term(term, panel, 25, ranges.corr_window);
    CHECK(eval_trader(trader, panel, 25, ranges) == doctest::Approx(2.0 * base));
}

TEST_CASE("multi-term trader equals the independently summed terms") {
    // The three-term extracted formula, hand-evaluated.
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(6, 10);
    auto panel = make_panel(values, {"LLOY", "AHT", "WEIR", "WTB", "PFC", "DGE"});
    const int t = 8;
    panel.returns(1, t - 3) = 0.003;   // AHT_{t-3}
    panel.returns(2, t - 2) = -0.001;  // WEIR_{t-2}
    panel.returns(3, t - 5) = 0.002;   // WTB_{t-5}
    panel.returns(4, t - 1) = -0.004;  // PFC_{t-1}
    panel.returns(5, t - 3) = -0.006;  // DGE_{t-3}
    TraderParams trader = parse_trader(
        "+4.919·ReLU(AHT_{t-3})\n"
        "+5.859·sign(max(WEIR_{t-2}, WTB_{t-5}))\n"
        "-1.07·(PFC_{t-1} > DGE_{t-3})",
        panel.symbols);
    double expected = 4.919 * std::max(0.003, 0.0) +
                      5.859 * 1.0 /* sign(max(-0.001, 0.002)) */ +
                      -1.07 * 1.0 /* sign(-0.004 - (-0.006)) */;
    CHECK(eval_trader(trader, panel, t, HyperRanges{}) == doctest::Approx(expected));
}

TEST_CASE("evaluation never looks ahead of the anchor") {
    HyperRanges ranges;
    Rng rng(31);
    for (int it = 0; it < 50; ++it) {
        auto panel = random_panel(6, 60, 100 + it);
        auto trader = sample_uniform_trader(ranges, 6, rng);
        const int t = 40;
        double before = eval_trader(trader, panel, t, ranges);
        std::mt19937_64 noise(it);
        std::normal_distribution<double> gauss(0.0, 5.0);
        for (int i = 0; i < panel.num_stocks(); ++i)
            for (int u = t + 1; u < panel.num_periods(); ++u)
                panel.returns(i, u) = gauss(noise);
        CHECK(eval_trader(trader, panel, t, ranges) == before);
    }
}

TEST_CASE("cumulative return sums signed realized returns") {
    // predictions [0.2, -0.1, 0.3] against actuals [0.1, -0.2, -0.4]
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(2, 4);
    values(1, 0) = 0.2;
    values(1, 1) = -0.1;
    values(1, 2) = 0.3;
    values(0, 1) = 0.1;
    values(0, 2) = -0.2;
    values(0, 3) = -0.4;
    auto panel = make_panel(values);
    TraderParams trader = parse_trader("+1·S1_t", panel.symbols);
    HyperRanges ranges;
    double expected = 0.0;  // direct sum oracle
    for (int u = 0; u <= 2; ++u) {
        double p = values(1, u);
        double sign = (p > 0) - (p < 0);
        expected += sign * values(0, u + 1);
    }
    CHECK(expected == doctest::Approx(-0.1));
    CHECK(trader_cumulative_return(trader, panel, 0, {0, 2}, ranges) ==
          doctest::Approx(expected));
}

TEST_CASE("perfect foresight collects the absolute returns") {
    Eigen::MatrixXd values = Eigen::MatrixXd::Zero(2, 4);
    values(0, 1) = 0.1;
    values(0, 2) = -0.2;
    values(0, 3) = 0.3;
    values(1, 0) = 0.1;
    values(1, 1) = -0.2;
    values(1, 2) = 0.3;
    auto panel = make_panel(values);
    TraderParams trader = parse_trader("+1·S1_t", panel.symbols);
    CHECK(trader_cumulative_return(trader, panel, 0, {0, 2}, HyperRanges{}) ==
          doctest::Approx(0.6));
}

TEST_CASE("zero predictions never trade") {
    auto panel = random_panel(3, 30, 8);
    TraderParams trader = parse_trader("+0·S1_t", panel.symbols);
    CHECK(trader_cumulative_return(trader, panel, 0, {0, 20}, HyperRanges{}) == 0.0);
}

TEST_CASE("objective is invariant under positive weight scaling") {
    HyperRanges ranges;
    Rng rng(77);
    auto panel = random_panel(5, 80, 9);
    for (int it = 0; it < 20; ++it) {
        auto trader = sample_uniform_trader(ranges, 5, rng);
        auto scaled = trader;
        for (auto& term : scaled.terms) term.weight *= 3.7;
        TimeRange range{min_anchor(ranges), 70};
        CHECK(trader_cumulative_return(trader, panel, 0, range, ranges) ==
              doctest::Approx(trader_cumulative_return(scaled, panel, 0, range, ranges)));
    }
}

TEST_CASE("uniform sampler is deterministic and respects degenerate ranges") {
    HyperRanges ranges;
    Rng a(123), b(123);
    auto t1 = sample_uniform_trader(ranges, 8, a);
    auto t2 = sample_uniform_trader(ranges, 8, b);
    CHECK(t1 == t2);

    HyperRanges tight;
    tight.max_terms = 1;
    tight.max_delay = 0;
    tight.allowed_ops = {Operator::Gt};
    tight.allowed_activations = {Activation::Sign};
    Rng c(5);
    auto t3 = sample_uniform_trader(tight, 1, c);
    CHECK(t3.num_terms() == 1);
    CHECK(t3.terms[0].p == 0);
    CHECK(t3.terms[0].q == 0);
    CHECK(t3.terms[0].d == 0);
    CHECK(t3.terms[0].op == Operator::Gt);
    CHECK(t3.terms[0].act == Activation::Sign);
}

TEST_CASE("sampled operator frequencies are uniform within 5 sigma") {
    HyperRanges ranges;
    Rng rng(2024);
    std::map<Operator, long> counts;
    long total = 0;
    for (int i = 0; i < 10000; ++i) {
        auto trader = sample_uniform_trader(ranges, 10, rng);
        for (const auto& term : trader.terms) {
            ++counts[term.op];
            ++total;
        }
    }
    const double p = 1.0 / kNumOperators;
    const double expected = total * p;
    const double band = 5.0 * std::sqrt(total * p * (1.0 - p));
    for (int o = 0; o < kNumOperators; ++o) {
        double n = static_cast<double>(counts[static_cast<Operator>(o)]);
        CHECK(std::abs(n - expected) < band);
    }
}

TEST_CASE("pretty format matches the report style") {
    std::vector<std::string> symbols{"LLOY", "SHP", "AHT"};
    TraderParams trader = parse_trader("-2.28·(SHP_t > AHT_{t-3})", symbols);
    CHECK(format_trader(trader, symbols) == "-2.28·(SHP_t > AHT_{t-3})");

    TraderParams zero;
    TermParams term;
    term.p = 1;
    term.q = 1;
    term.op = Operator::ProjX;
    term.weight = 0.0;
    zero.terms = {term};
    CHECK(format_trader(zero, symbols) == "+0.00·SHP_t");
}

TEST_CASE("pretty format elides identity and projections only") {
    std::vector<std::string> symbols{"A", "B"};
    CHECK(format_trader(parse_trader("+1.5·sign(A_{t-3} + B_t)", symbols), symbols) ==
          "+1.50·sign(A_{t-3} + B_t)");
    CHECK(format_trader(parse_trader("-1.85·sign(min(A_{t-2}, B_{t-5}))", symbols),
                        symbols) == "-1.85·sign(min(A_{t-2}, B_{t-5}))");
    CHECK(format_trader(parse_trader("+4.92·ReLU(A_{t-3})", symbols), symbols) ==
          "+4.92·ReLU(A_{t-3})");
}

TEST_CASE("exact mode round-trips random traders") {
    HyperRanges ranges;
    Rng rng(404);
    auto symbols = synthetic_symbols(12);
    for (int it = 0; it < 300; ++it) {
        auto trader = sample_uniform_trader(ranges, 12, rng);
        auto text = format_trader(trader, symbols, FormatMode::Exact);
        auto parsed = parse_trader(text, symbols);
        CHECK(parsed == trader);
    }
}

TEST_CASE("pretty round trip preserves structure up to print precision") {
    std::vector<std::string> symbols{"AAA", "BBB", "CCC"};
    TraderParams trader;
    TermParams term;
    term.p = 0;
    term.q = 2;
    term.d = 1;
    term.f = 4;
    term.op = Operator::Max;
    term.act = Activation::Tanh;
    term.weight = 1.23456;
    trader.terms = {term};
    auto parsed = parse_trader(format_trader(trader, symbols), symbols);
    CHECK(parsed.terms[0].p == term.p);
    CHECK(parsed.terms[0].q == term.q);
    CHECK(parsed.terms[0].d == term.d);
    CHECK(parsed.terms[0].f == term.f);
    CHECK(parsed.terms[0].op == term.op);
    CHECK(parsed.terms[0].act == term.act);
    CHECK(parsed.terms[0].weight == doctest::Approx(1.23).epsilon(1e-9));
}

TEST_CASE("parser reports position and unknown symbols") {
    std::vector<std::string> symbols{"AAA"};
    CHECK_THROWS_WITH_AS(parse_trader("+1.0·ZZZ_t", symbols),
                         doctest::Contains("unknown symbol 'ZZZ'"), std::invalid_argument);
    CHECK_THROWS_WITH_AS(parse_trader("garbage", symbols),
                         doctest::Contains("position"), std::invalid_argument);
    CHECK_THROWS_AS(parse_trader("", symbols), std::invalid_argument);
}
