#include "tc/formula.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>
#include <string_view>

namespace tc {

namespace {

const char* const kOperatorNames[kNumOperators] = {"add", "sub", "mul", "x", "y",
                                                   "max", "min", "gt",  "lt", "corr"};
const char* const kActivationNames[kNumActivations] = {"id", "tanh", "exp", "sign",
                                                       "relu"};

}  // namespace

const char* operator_name(Operator op) { return kOperatorNames[static_cast<int>(op)]; }
const char* activation_name(Activation act) {
    return kActivationNames[static_cast<int>(act)];
}

Operator operator_from_name(const std::string& name) {
    for (int i = 0; i < kNumOperators; ++i)
        if (name == kOperatorNames[i]) return static_cast<Operator>(i);
    throw std::invalid_argument("unknown operator name: " + name);
}

Activation activation_from_name(const std::string& name) {
    for (int i = 0; i < kNumActivations; ++i)
        if (name == kActivationNames[i]) return static_cast<Activation>(i);
    if (name == "ReLU") return Activation::Relu;
    throw std::invalid_argument("unknown activation name: " + name);
}

HyperRanges::HyperRanges() {
    allowed_ops.reserve(kNumOperators);
    for (int i = 0; i < kNumOperators; ++i)
        allowed_ops.push_back(static_cast<Operator>(i));
    allowed_activations.reserve(kNumActivations);
    for (int i = 0; i < kNumActivations; ++i)
        allowed_activations.push_back(static_cast<Activation>(i));
}

double eval_activation(Activation code, double x) {
    switch (code) {
        case Activation::Identity: return x;
        case Activation::Tanh: return std::tanh(x);
        case Activation::Exp: return std::exp(std::min(x, kExpClamp));
        case Activation::Sign: return sgn(x);
        case Activation::Relu: return std::max(x, 0.0);
    }
    throw std::logic_error("bad activation code");
}

double eval_binary_op(Operator code, double x, double y) {
    switch (code) {
        case Operator::Add: return x + y;
        case Operator::Sub: return x - y;
        case Operator::Mul: return x * y;
        case Operator::ProjX: return x;
        case Operator::ProjY: return y;
        case Operator::Max: return std::max(x, y);
        case Operator::Min: return std::min(x, y);
        case Operator::Gt: return sgn(x - y);
        case Operator::Lt: return sgn(y - x);
        case Operator::Corr:
            throw std::invalid_argument("Corr is windowed and handled in eval_term");
    }
    throw std::logic_error("bad operator code");
}

int min_anchor(const TermParams& term, int corr_window) {
    int anchor = std::max(term.d, term.f);
    if (term.op == Operator::Corr) anchor += corr_window - 1;
    return anchor;
}

int min_anchor(const TraderParams& trader, int corr_window) {
    int anchor = 0;
    for (const auto& term : trader.terms)
        anchor = std::max(anchor, min_anchor(term, corr_window));
    return anchor;
}

int min_anchor(const HyperRanges& ranges) {
    bool has_corr = std::find(ranges.allowed_ops.begin(), ranges.allowed_ops.end(),
                              Operator::Corr) != ranges.allowed_ops.end();
    return ranges.max_delay + (has_corr ? ranges.corr_window - 1 : 0);
}

namespace {

double pearson(const ReturnsPanel& panel, const TermParams& term, int t, int window) {
    double mx = 0.0, my = 0.0;
    for (int k = 0; k < window; ++k) {
        mx += panel.returns(term.p, t - term.d - k);
        my += panel.returns(term.q, t - term.f - k);
    }
    mx /= window;
    my /= window;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (int k = 0; k < window; ++k) {
        double dx = panel.returns(term.p, t - term.d - k) - mx;
        double dy = panel.returns(term.q, t - term.f - k) - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double eval_term(const TermParams& term, const ReturnsPanel& panel, int t,
                 int corr_window) {
    const int need = min_anchor(term, corr_window);
    if (t < need)
        throw std::out_of_range("eval_term: insufficient history at t=" +
                                std::to_string(t) + "; earliest valid t is " +
                                std::to_string(need));
    if (t >= panel.num_periods())
        throw std::out_of_range("eval_term: t beyond panel length");
    if (term.p < 0 || term.p >= panel.num_stocks() || term.q < 0 ||
        term.q >= panel.num_stocks())
        throw std::out_of_range("eval_term: stock index out of range");
    double v;
    if (term.op == Operator::Corr) {
        v = pearson(panel, term, t, corr_window);
    } else {
        v = eval_binary_op(term.op, panel.returns(term.p, t - term.d),
                           panel.returns(term.q, t - term.f));
    }
    return eval_activation(term.act, v);
}

double eval_trader(const TraderParams& trader, const ReturnsPanel& panel, int t,
                   const HyperRanges& ranges) {
    double sum = 0.0;
    for (const auto& term : trader.terms)
        sum += term.weight * eval_term(term, panel, t, ranges.corr_window);
    return sum;
}

double trader_cumulative_return(const TraderParams& trader, const ReturnsPanel& panel,
                                int target, TimeRange range, const HyperRanges& ranges) {
    if (range.last + 1 >= panel.num_periods())
        throw std::out_of_range(
            "trader_cumulative_return: range needs returns at last+1 < T");
    double total = 0.0;
    for (int u = range.first; u <= range.last; ++u) {
        double s = sgn(eval_trader(trader, panel, u, ranges));
        if (s != 0.0) total += s * panel.returns(target, u + 1);
    }
    return total;
}

TraderParams sample_uniform_trader(const HyperRanges& ranges, int num_stocks, Rng& rng) {
    if (num_stocks < 1) throw std::invalid_argument("sample_uniform_trader: no stocks");
    if (ranges.allowed_ops.empty() || ranges.allowed_activations.empty())
        throw std::invalid_argument("sample_uniform_trader: empty operator/activation set");
    std::uniform_int_distribution<int> num_terms(1, ranges.max_terms);
    std::uniform_int_distribution<int> stock(0, num_stocks - 1);
    std::uniform_int_distribution<int> delay(0, ranges.max_delay);
    std::uniform_int_distribution<int> op(0, static_cast<int>(ranges.allowed_ops.size()) - 1);
    std::uniform_int_distribution<int> act(
        0, static_cast<int>(ranges.allowed_activations.size()) - 1);
    std::uniform_real_distribution<double> weight(ranges.weight_init_range.first,
                                                  ranges.weight_init_range.second);
    TraderParams trader;
    const int m = num_terms(rng);
    trader.terms.reserve(m);
    for (int j = 0; j < m; ++j) {
        TermParams term;
        term.p = stock(rng);
        term.q = stock(rng);
        term.d = delay(rng);
        term.f = delay(rng);
        term.op = ranges.allowed_ops[op(rng)];
        term.act = ranges.allowed_activations[act(rng)];
        term.weight = weight(rng);
        trader.terms.push_back(term);
    }
    return trader;
}

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

namespace {

std::string format_weight(double w, FormatMode mode) {
    char buf[64];
    if (mode == FormatMode::Pretty)
        std::snprintf(buf, sizeof buf, "%+.2f", w);
    else
        std::snprintf(buf, sizeof buf, "%+.17g", w);
    return buf;
}

std::string operand_str(const std::vector<std::string>& symbols, int stock, int delay,
                        FormatMode mode) {
    if (stock < 0 || stock >= static_cast<int>(symbols.size()))
        throw std::out_of_range("format_trader: stock index " + std::to_string(stock) +
                                " outside symbol table");
    const std::string& sym = symbols[stock];
    if (mode == FormatMode::Pretty && delay == 0) return sym + "_t";
    return sym + "_{t-" + std::to_string(delay) + "}";
}

std::string format_term(const TermParams& term, const std::vector<std::string>& symbols,
                        FormatMode mode) {
    const std::string a = operand_str(symbols, term.p, term.d, mode);
    const std::string b = operand_str(symbols, term.q, term.f, mode);
    std::string body;
    if (mode == FormatMode::Exact) {
        body = std::string(activation_name(term.act)) + "(" + operator_name(term.op) +
               "(" + a + ", " + b + "))";
        return format_weight(term.weight, mode) + "·" + body;
    }
    bool self_delimited = false;  // needs no extra parens under identity
    switch (term.op) {
        case Operator::Add: body = a + " + " + b; break;
        case Operator::Sub: body = a + " - " + b; break;
        case Operator::Mul: body = a + " * " + b; break;
        case Operator::Gt: body = a + " > " + b; break;
        case Operator::Lt: body = a + " < " + b; break;
        case Operator::ProjX: body = a; self_delimited = true; break;
        case Operator::ProjY: body = b; self_delimited = true; break;
        case Operator::Max: body = "max(" + a + ", " + b + ")"; self_delimited = true; break;
        case Operator::Min: body = "min(" + a + ", " + b + ")"; self_delimited = true; break;
        case Operator::Corr: body = "corr(" + a + ", " + b + ")"; self_delimited = true; break;
    }
    std::string act_name;
    switch (term.act) {
        case Activation::Identity: act_name = ""; break;
        case Activation::Tanh: act_name = "tanh"; break;
        case Activation::Exp: act_name = "exp"; break;
        case Activation::Sign: act_name = "sign"; break;
        case Activation::Relu: act_name = "ReLU"; break;
    }
    std::string rendered;
    if (!act_name.empty())
        rendered = act_name + "(" + body + ")";
    else if (self_delimited)
        rendered = body;
    else
        rendered = "(" + body + ")";
    return format_weight(term.weight, mode) + "·" + rendered;
}

}  // namespace

std::string format_trader(const TraderParams& trader,
                          const std::vector<std::string>& symbols, FormatMode mode) {
    std::string out;
    for (size_t j = 0; j < trader.terms.size(); ++j) {
        if (j) out += '\n';
        out += format_term(trader.terms[j], symbols, mode);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(size_t pos, const std::string& what) {
    throw std::invalid_argument("parse_trader: at position " + std::to_string(pos) +
                                ": " + what);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Index of the ')' matching an opening paren at `open`, or npos.
size_t matching_paren(std::string_view s, size_t open) {
    int depth = 0;
    for (size_t i = open; i < s.size(); ++i) {
        if (s[i] == '(') ++depth;
        if (s[i] == ')' && --depth == 0) return i;
    }
    return std::string_view::npos;
}

int lookup_symbol(std::string_view name, const std::vector<std::string>& symbols,
                  size_t pos) {
    for (size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i] == name) return static_cast<int>(i);
    parse_fail(pos, "unknown symbol '" + std::string(name) + "'");
}

// SYM_t or SYM_{t-D}
void parse_operand(std::string_view s, size_t base, const std::vector<std::string>& symbols,
                   int& stock, int& delay) {
    s = trim(s);
    if (s.size() > 2 && s.substr(s.size() - 2) == "_t") {
        stock = lookup_symbol(s.substr(0, s.size() - 2), symbols, base);
        delay = 0;
        return;
    }
    size_t mark = s.rfind("_{t-");
    if (mark == std::string_view::npos || s.back() != '}')
        parse_fail(base, "malformed operand '" + std::string(s) + "'");
    std::string_view digits = s.substr(mark + 4, s.size() - mark - 5);
    if (digits.empty()) parse_fail(base, "missing delay in operand");
    int d = 0;
    for (char c : digits) {
        if (c < '0' || c > '9') parse_fail(base, "bad delay in operand");
        d = d * 10 + (c - '0');
    }
    stock = lookup_symbol(s.substr(0, mark), symbols, base);
    delay = d;
}

// Splits "lhs, rhs" at the single top-level comma.
bool split_top_comma(std::string_view s, std::string_view& lhs, std::string_view& rhs) {
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '{') ++depth;
        if (c == ')' || c == '}') --depth;
        if (c == ',' && depth == 0) {
            lhs = s.substr(0, i);
            rhs = s.substr(i + 1);
            return true;
        }
    }
    return false;
}

struct NamedForm {
    const char* name;
    Operator op;
};

constexpr NamedForm kFunctionOps[] = {
    {"add", Operator::Add},   {"sub", Operator::Sub}, {"mul", Operator::Mul},
    {"max", Operator::Max},   {"min", Operator::Min}, {"gt", Operator::Gt},
    {"lt", Operator::Lt},     {"corr", Operator::Corr}, {"Corr", Operator::Corr},
    {"x", Operator::ProjX},   {"y", Operator::ProjY},
};

void parse_opexpr(std::string_view s, size_t base, const std::vector<std::string>& symbols,
                  TermParams& term) {
    s = trim(s);
    if (s.empty()) parse_fail(base, "empty operator expression");

    // Function form: name(a, b)
    for (const auto& form : kFunctionOps) {
        std::string_view name(form.name);
        if (s.size() > name.size() + 1 && s.substr(0, name.size()) == name &&
            s[name.size()] == '(' && matching_paren(s, name.size()) == s.size() - 1) {
            std::string_view inner = s.substr(name.size() + 1, s.size() - name.size() - 2);
            std::string_view lhs, rhs;
            if (!split_top_comma(inner, lhs, rhs))
                parse_fail(base, "expected two comma-separated operands");
            term.op = form.op;
            parse_operand(lhs, base, symbols, term.p, term.d);
            parse_operand(rhs, base, symbols, term.q, term.f);
            return;
        }
    }

    // Strip one pair of enclosing parens.
    if (s.front() == '(' && matching_paren(s, 0) == s.size() - 1)
        s = trim(s.substr(1, s.size() - 2));

    // Top-level infix operator; '-' inside "{t-D}" is shielded by brace depth.
    int depth = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (c == '(' || c == '{') ++depth;
        if (c == ')' || c == '}') --depth;
        if (depth != 0 || i == 0) continue;
        Operator op;
        switch (c) {
            case '+': op = Operator::Add; break;
            case '-': op = Operator::Sub; break;
            case '*': op = Operator::Mul; break;
            case '>': op = Operator::Gt; break;
            case '<': op = Operator::Lt; break;
            default: continue;
        }
        term.op = op;
        parse_operand(s.substr(0, i), base, symbols, term.p, term.d);
        parse_operand(s.substr(i + 1), base + i + 1, symbols, term.q, term.f);
        return;
    }

    // Bare operand: elided projection, canonicalized to (q, f) := (p, d).
    term.op = Operator::ProjX;
    parse_operand(s, base, symbols, term.p, term.d);
    term.q = term.p;
    term.f = term.d;
}

TermParams parse_term_line(const std::string& line, size_t base,
                           const std::vector<std::string>& symbols) {
    TermParams term;
    const char* start = line.c_str();
    char* end = nullptr;
    term.weight = std::strtod(start, &end);
    if (end == start) parse_fail(base, "expected a leading weight");
    size_t idx = static_cast<size_t>(end - start);
    while (idx < line.size() && (line[idx] == ' ' || line[idx] == '\t')) ++idx;
    // Separator: '·' (UTF-8 C2 B7) or '*'.
    if (idx + 1 < line.size() && static_cast<unsigned char>(line[idx]) == 0xC2 &&
        static_cast<unsigned char>(line[idx + 1]) == 0xB7)
        idx += 2;
    else if (idx < line.size() && line[idx] == '*')
        idx += 1;
    else
        parse_fail(base + idx, "expected '·' or '*' after the weight");
    std::string_view rest = trim(std::string_view(line).substr(idx));

    // Optional activation wrapper.
    term.act = Activation::Identity;
    static constexpr std::pair<const char*, Activation> kActs[] = {
        {"id", Activation::Identity},  {"tanh", Activation::Tanh},
        {"exp", Activation::Exp},      {"sign", Activation::Sign},
        {"relu", Activation::Relu},    {"ReLU", Activation::Relu},
    };
    for (const auto& [name, act] : kActs) {
        std::string_view n(name);
        if (rest.size() > n.size() + 1 && rest.substr(0, n.size()) == n &&
            rest[n.size()] == '(' && matching_paren(rest, n.size()) == rest.size() - 1) {
            term.act = act;
            rest = rest.substr(n.size() + 1, rest.size() - n.size() - 2);
            break;
        }
    }
    parse_opexpr(rest, base + idx, symbols, term);
    return term;
}

}  // namespace

TraderParams parse_trader(const std::string& text,
                          const std::vector<std::string>& symbols) {
    TraderParams trader;
    size_t pos = 0;
    while (pos <= text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string::npos) nl = text.size();
        std::string line = text.substr(pos, nl - pos);
        if (!trim(line).empty())
            trader.terms.push_back(parse_term_line(line, pos, symbols));
        if (nl == text.size()) break;
        pos = nl + 1;
    }
    if (trader.terms.empty())
        throw std::invalid_argument("parse_trader: no terms in input");
    return trader;
}

}  // namespace tc
