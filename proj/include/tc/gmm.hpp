#pragma once

#include "tc/formula.hpp"
#include "tc/rng.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace tc {

// Diagonal regularization added to every fitted covariance.
constexpr double kCovarianceFloor = 1e-6;

constexpr int kTermVectorDim = 7;

// Real-vector encoding of one term: (p, q, d, f, op index, act index, w),
// where op/act indices are positions in the allowed lists of the ranges.
using TermVector = Eigen::VectorXd;

struct GMModel {
    Eigen::VectorXd weights;                  // K, sums to 1
    std::vector<Eigen::VectorXd> means;       // K x dim
    std::vector<Eigen::MatrixXd> covariances; // K x dim x dim, floor-regularized

    int components() const { return static_cast<int>(weights.size()); }
};

struct EncodedPopulation {
    std::vector<TermVector> points;     // one per term, pooled across traders
    std::vector<int> m_values;          // formula length of each trader
    std::map<int, double> m_distribution;
};

TermVector encode_term(const TermParams& term, const HyperRanges& ranges);
EncodedPopulation encode_terms(const std::vector<TraderParams>& traders,
                               const HyperRanges& ranges);

// Discrete dimensions are rounded to the nearest integer and clipped into
// their valid ranges; the weight passes through. Total on finite input.
TermParams decode_term(const TermVector& vec, const HyperRanges& ranges,
                       int num_stocks);

// EM with kmeans++-style seeding. Stops when the log-likelihood improves by
// less than 1e-6 or after 200 iterations. Effective component count is
// min(k, number of points). Deterministic given the rng state.
GMModel fit_gmm(const std::vector<TermVector>& points, int k, Rng& rng);

std::vector<TermVector> sample_gmm(const GMModel& model, int n, Rng& rng);

// New traders: formula length resampled from the survivors' empirical
// distribution, terms drawn from a mixture fitted to the survivors' pooled
// term vectors and decoded.
std::vector<TraderParams> generate_traders(const std::vector<TraderParams>& survivors,
                                           int n_new, int k, const HyperRanges& ranges,
                                           int num_stocks, Rng& rng);

}  // namespace tc
