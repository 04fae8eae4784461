#pragma once

#include "tc/returns_data.hpp"
#include "tc/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tc {

// Binary operators available to a formula term. Comparisons are signed:
// gt(x, y) = sign(x - y), lt(x, y) = sign(y - x). Corr is the Pearson
// correlation of the two lagged return windows.
enum class Operator { Add, Sub, Mul, ProjX, ProjY, Max, Min, Gt, Lt, Corr };

enum class Activation { Identity, Tanh, Exp, Sign, Relu };

constexpr int kNumOperators = 10;
constexpr int kNumActivations = 5;

// Exp activation is clamped to exp(min(x, kExpClamp)) so that the operator
// table stays closed over finite inputs.
constexpr double kExpClamp = 50.0;

const char* operator_name(Operator op);        // "add", "sub", ...
const char* activation_name(Activation act);   // "id", "tanh", ...
Operator operator_from_name(const std::string& name);
Activation activation_from_name(const std::string& name);

inline double sgn(double x) { return (x > 0.0) - (x < 0.0); }

// One term of a prediction formula: weight * act(op(r_p[t-d], r_q[t-f])).
struct TermParams {
    int p = 0;
    int q = 0;
    int d = 0;
    int f = 0;
    Operator op = Operator::ProjX;
    Activation act = Activation::Identity;
    double weight = 0.0;

    bool operator==(const TermParams&) const = default;
};

// A trader: the weighted sum of M terms.
struct TraderParams {
    std::vector<TermParams> terms;

    int num_terms() const { return static_cast<int>(terms.size()); }
    bool operator==(const TraderParams&) const = default;
};

// Sampling ranges and structural limits for trader formulas.
struct HyperRanges {
    int max_terms = 10;
    int max_delay = 10;
    std::vector<Operator> allowed_ops;            // defaults to all ten
    std::vector<Activation> allowed_activations;  // defaults to all five
    std::pair<double, double> weight_init_range{-1.0, 1.0};
    int corr_window = 10;

    HyperRanges();
};

double eval_activation(Activation code, double x);

// Pointwise operators only; Corr needs history and lives in eval_term.
double eval_binary_op(Operator code, double x, double y);

// Earliest time index at which a term / trader / any trader within the
// ranges can be evaluated.
int min_anchor(const TermParams& term, int corr_window);
int min_anchor(const TraderParams& trader, int corr_window);
int min_anchor(const HyperRanges& ranges);

// Value of a term at time t, activation applied, weight NOT applied.
double eval_term(const TermParams& term, const ReturnsPanel& panel, int t,
                 int corr_window);

double eval_trader(const TraderParams& trader, const ReturnsPanel& panel, int t,
                   const HyperRanges& ranges);

// Inclusive interval of evaluation anchors.
struct TimeRange {
    int first = 0;
    int last = 0;

    int length() const { return last - first + 1; }
};

// Cumulative return of the canonical strategy driven by this trader:
// sum over u in range of sign(prediction at u) * returns[target][u+1].
double trader_cumulative_return(const TraderParams& trader, const ReturnsPanel& panel,
                                int target, TimeRange range, const HyperRanges& ranges);

TraderParams sample_uniform_trader(const HyperRanges& ranges, int num_stocks, Rng& rng);

// Pretty: report style, weights at 2 decimals, identity activations and
// projection operands elided. Exact: every field explicit, weights at full
// precision; parse_trader inverts it exactly.
enum class FormatMode { Pretty, Exact };

std::string format_trader(const TraderParams& trader,
                          const std::vector<std::string>& symbols,
                          FormatMode mode = FormatMode::Pretty);

// Accepts both format modes. Elided projection operands come back
// canonicalized as (q, f) := (p, d).
TraderParams parse_trader(const std::string& text,
                          const std::vector<std::string>& symbols);

}  // namespace tc
