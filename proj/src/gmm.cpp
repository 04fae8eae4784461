#include "tc/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace tc {

namespace {

int index_in(const std::vector<Operator>& ops, Operator op) {
    auto it = std::find(ops.begin(), ops.end(), op);
    if (it == ops.end())
        throw std::invalid_argument("encode_term: operator not in allowed set");
    return static_cast<int>(it - ops.begin());
}

int index_in(const std::vector<Activation>& acts, Activation act) {
    auto it = std::find(acts.begin(), acts.end(), act);
    if (it == acts.end())
        throw std::invalid_argument("encode_term: activation not in allowed set");
    return static_cast<int>(it - acts.begin());
}

int round_clip(double v, int lo, int hi) {
    long long r = std::llround(v);
    if (r < lo) return lo;
    if (r > hi) return hi;
    return static_cast<int>(r);
}

}  // namespace

TermVector encode_term(const TermParams& term, const HyperRanges& ranges) {
    TermVector v(kTermVectorDim);
    v << term.p, term.q, term.d, term.f,
        index_in(ranges.allowed_ops, term.op),
        index_in(ranges.allowed_activations, term.act), term.weight;
    return v;
}

EncodedPopulation encode_terms(const std::vector<TraderParams>& traders,
                               const HyperRanges& ranges) {
    if (traders.empty()) throw std::invalid_argument("encode_terms: empty trader list");
    EncodedPopulation out;
    for (const auto& trader : traders) {
        out.m_values.push_back(trader.num_terms());
        for (const auto& term : trader.terms)
            out.points.push_back(encode_term(term, ranges));
    }
    const double n = static_cast<double>(out.m_values.size());
    for (int m : out.m_values) out.m_distribution[m] += 1.0 / n;
    return out;
}

TermParams decode_term(const TermVector& vec, const HyperRanges& ranges,
                       int num_stocks) {
    if (vec.size() != kTermVectorDim)
        throw std::invalid_argument("decode_term: wrong vector dimension");
    TermParams term;
    term.p = round_clip(vec[0], 0, num_stocks - 1);
    term.q = round_clip(vec[1], 0, num_stocks - 1);
    term.d = round_clip(vec[2], 0, ranges.max_delay);
    term.f = round_clip(vec[3], 0, ranges.max_delay);
    term.op = ranges.allowed_ops[round_clip(
        vec[4], 0, static_cast<int>(ranges.allowed_ops.size()) - 1)];
    term.act = ranges.allowed_activations[round_clip(
        vec[5], 0, static_cast<int>(ranges.allowed_activations.size()) - 1)];
    term.weight = vec[6];
    return term;
}

// ---------------------------------------------------------------------------
// Gaussian mixture fit
// ---------------------------------------------------------------------------

namespace {

struct ComponentCache {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double log_norm = 0.0;  // -0.5 * (d log 2pi + log det)
};

ComponentCache make_cache(const Eigen::MatrixXd& cov) {
    ComponentCache c;
    c.llt.compute(cov);
    double logdet = 0.0;
    const auto& l = c.llt.matrixLLT();
    for (int i = 0; i < cov.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    c.log_norm = -0.5 * (cov.rows() * std::log(2.0 * M_PI) + logdet);
    return c;
}

double log_pdf(const ComponentCache& cache, const Eigen::VectorXd& mean,
               const Eigen::VectorXd& x) {
    Eigen::VectorXd diff = x - mean;
    double quad = diff.dot(cache.llt.solve(diff));
    return cache.log_norm - 0.5 * quad;
}

std::vector<int> kmeanspp_centers(const std::vector<TermVector>& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.size());
    std::vector<int> centers;
    std::uniform_int_distribution<int> uniform_point(0, n - 1);
    centers.push_back(uniform_point(rng));
    std::vector<double> d2(n, 0.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    while (static_cast<int>(centers.size()) < k) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int c : centers)
                best = std::min(best, (points[i] - points[c]).squaredNorm());
            d2[i] = best;
            total += best;
        }
        int chosen;
        if (total <= 0.0) {
            chosen = uniform_point(rng);  // all points coincide with centers
        } else {
            double target = unit(rng) * total;
            double acc = 0.0;
            chosen = n - 1;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (acc >= target) {
                    chosen = i;
                    break;
                }
            }
        }
        centers.push_back(chosen);
    }
    return centers;
}

}  // namespace

GMModel fit_gmm(const std::vector<TermVector>& points, int k, Rng& rng) {
    if (points.empty()) throw std::invalid_argument("fit_gmm: empty point set");
    if (k < 1) throw std::invalid_argument("fit_gmm: k must be >= 1");
    const int n = static_cast<int>(points.size());
    const int dim = static_cast<int>(points[0].size());
    k = std::min(k, n);

    // Pooled covariance for the initial components.
    Eigen::VectorXd pooled_mean = Eigen::VectorXd::Zero(dim);
    for (const auto& x : points) pooled_mean += x;
    pooled_mean /= n;
    Eigen::MatrixXd pooled_cov = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& x : points) {
        Eigen::VectorXd diff = x - pooled_mean;
        pooled_cov += diff * diff.transpose();
    }
    pooled_cov /= n;
    pooled_cov += kCovarianceFloor * Eigen::MatrixXd::Identity(dim, dim);

    GMModel model;
    model.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
    auto centers = kmeanspp_centers(points, k, rng);
    for (int c : centers) model.means.push_back(points[c]);
    model.covariances.assign(k, pooled_cov);

    Eigen::MatrixXd resp(n, k);
    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 200; ++iter) {
        // E-step with log-sum-exp.
        std::vector<ComponentCache> caches;
        caches.reserve(k);
        for (int c = 0; c < k; ++c) caches.push_back(make_cache(model.covariances[c]));
        double ll = 0.0;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXd logp(k);
            for (int c = 0; c < k; ++c) {
                logp[c] = model.weights[c] > 0.0
                              ? std::log(model.weights[c]) +
                                    log_pdf(caches[c], model.means[c], points[i])
                              : -std::numeric_limits<double>::infinity();
            }
            double m = logp.maxCoeff();
            double lse = m + std::log((logp.array() - m).exp().sum());
            resp.row(i) = (logp.array() - lse).exp();
            ll += lse;
        }
        if (iter > 0 && ll - prev_ll < 1e-6) break;
        prev_ll = ll;

        // M-step.
        for (int c = 0; c < k; ++c) {
            double nk = resp.col(c).sum();
            model.weights[c] = nk / n;
            if (nk < 1e-12) continue;  // dead component keeps its parameters
            Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
            for (int i = 0; i < n; ++i) mean += resp(i, c) * points[i];
            mean /= nk;
            Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
            for (int i = 0; i < n; ++i) {
                Eigen::VectorXd diff = points[i] - mean;
                cov += resp(i, c) * (diff * diff.transpose());
            }
            cov /= nk;
            cov += kCovarianceFloor * Eigen::MatrixXd::Identity(dim, dim);
            model.means[c] = mean;
            model.covariances[c] = cov;
        }
        model.weights /= model.weights.sum();
    }
    return model;
}

std::vector<TermVector> sample_gmm(const GMModel& model, int n, Rng& rng) {
    if (n < 0) throw std::invalid_argument("sample_gmm: n must be >= 0");
    std::vector<TermVector> out;
    if (n == 0) return out;
    const int k = model.components();
    const int dim = static_cast<int>(model.means.at(0).size());
    std::vector<Eigen::MatrixXd> chol;
    chol.reserve(k);
    for (int c = 0; c < k; ++c)
        chol.push_back(Eigen::LLT<Eigen::MatrixXd>(model.covariances[c]).matrixL());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        double u = unit(rng);
        double acc = 0.0;
        int comp = k - 1;
        for (int c = 0; c < k; ++c) {
            acc += model.weights[c];
            if (u <= acc) {
                comp = c;
                break;
            }
        }
        Eigen::VectorXd z(dim);
        for (int d = 0; d < dim; ++d) z[d] = gauss(rng);
        out.push_back(model.means[comp] + chol[comp] * z);
    }
    return out;
}

std::vector<TraderParams> generate_traders(const std::vector<TraderParams>& survivors,
                                           int n_new, int k, const HyperRanges& ranges,
                                           int num_stocks, Rng& rng) {
    if (survivors.empty())
        throw std::invalid_argument("generate_traders: empty survivor set");
    std::vector<TraderParams> out;
    if (n_new <= 0) return out;
    EncodedPopulation encoded = encode_terms(survivors, ranges);
    GMModel model = fit_gmm(encoded.points, k, rng);
    std::uniform_int_distribution<int> pick_m(
        0, static_cast<int>(encoded.m_values.size()) - 1);
    out.reserve(n_new);
    for (int i = 0; i < n_new; ++i) {
        int m = encoded.m_values[pick_m(rng)];
        auto vecs = sample_gmm(model, m, rng);
        TraderParams trader;
        trader.terms.reserve(m);
        for (const auto& v : vecs)
            trader.terms.push_back(decode_term(v, ranges, num_stocks));
        out.push_back(std::move(trader));
    }
    return out;
}

}  // namespace tc
