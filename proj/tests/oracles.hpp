#pragma once

// Independent oracle implementations used to cross-check the library. These
// are deliberately naive/direct computations kept separate from the code
// under test.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ioforge/causal.hpp"
#include "ioforge/topics.hpp"

namespace oracles {

// Average precision recomputed from scratch: for every distinct score
// threshold (descending), recount the full confusion table, then apply the
// summation definition sum (R_k - R_{k-1}) * P_k.
inline double brute_average_precision(const std::vector<std::pair<double, int>>& scored) {
    std::set<double, std::greater<double>> thresholds;
    long long total_pos = 0;
    for (const auto& [score, label] : scored) {
        thresholds.insert(score);
        total_pos += label == 1;
    }
    double ap = 0.0, prev_recall = 0.0;
    for (double t : thresholds) {
        long long tp = 0, fp = 0;
        for (const auto& [score, label] : scored) {
            if (score >= t) (label == 1 ? tp : fp) += 1;
        }
        const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    return ap;
}

// Average top-n word overlap between fitted topics and planted vocabularies
// under greedy (best-pair-first) matching, in [0,1].
inline double greedy_topic_overlap(const ioforge::TopicModel& model,
                                   const std::vector<std::vector<std::string>>& truth_vocabs,
                                   std::size_t n = 10) {
    const std::size_t K = truth_vocabs.size();
    std::vector<std::vector<double>> overlap(model.K, std::vector<double>(K, 0.0));
    for (int k = 0; k < model.K; ++k) {
        const auto top = ioforge::top_words(model, k, n);
        for (std::size_t t = 0; t < K; ++t) {
            const std::set<std::string> truth(truth_vocabs[t].begin(), truth_vocabs[t].end());
            std::size_t hits = 0;
            for (const auto& [token, prob] : top) hits += truth.count(token);
            overlap[k][t] = static_cast<double>(hits) / static_cast<double>(n);
        }
    }
    std::vector<bool> used_k(model.K, false), used_t(K, false);
    double total = 0.0;
    const std::size_t pairs = std::min<std::size_t>(model.K, K);
    for (std::size_t step = 0; step < pairs; ++step) {
        double best = -1.0;
        int bk = -1, bt = -1;
        for (int k = 0; k < model.K; ++k) {
            if (used_k[k]) continue;
            for (std::size_t t = 0; t < K; ++t) {
                if (used_t[t]) continue;
                if (overlap[k][t] > best) {
                    best = overlap[k][t];
                    bk = k;
                    bt = static_cast<int>(t);
                }
            }
        }
        used_k[bk] = true;
        used_t[bt] = true;
        total += best;
    }
    return total / static_cast<double>(pairs);
}

// PageRank by dense linear solve: x = (1-d)/N 1 + d G x where G is the
// column-stochastic walk matrix with dangling columns replaced by 1/N.
// Solves (I - dG) x = (1-d)/N 1 by Gaussian elimination with partial pivoting.
inline std::vector<double> dense_pagerank(
    const std::vector<std::vector<double>>& walk_weights,  // walk_weights[to][from]
    double damping) {
    const std::size_t n = walk_weights.size();
    std::vector<std::vector<double>> G(n, std::vector<double>(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        double colsum = 0.0;
        for (std::size_t i = 0; i < n; ++i) colsum += walk_weights[i][j];
        for (std::size_t i = 0; i < n; ++i)
            G[i][j] = colsum > 0.0 ? walk_weights[i][j] / colsum : 1.0 / static_cast<double>(n);
    }
    // A = I - d G, b = (1-d)/N
    std::vector<std::vector<double>> A(n, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) A[i][j] = (i == j ? 1.0 : 0.0) - damping * G[i][j];
        A[i][n] = (1.0 - damping) / static_cast<double>(n);
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
        std::swap(A[col], A[pivot]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || A[r][col] == 0.0) continue;
            const double f = A[r][col] / A[col][col];
            for (std::size_t c = col; c <= n; ++c) A[r][c] -= f * A[col][c];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = A[i][n] / A[i][i];
    return x;
}

inline std::vector<std::vector<std::int64_t>> to_dense(const ioforge::EdgeCounts& A) {
    const std::size_t n = A.size();
    std::vector<std::vector<std::int64_t>> dense(n, std::vector<std::int64_t>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& [j, w] : A[i]) dense[i][j] = w;
    return dense;
}

// n-hop exposure by explicit path enumeration: the exposure of target t at
// hop h is the sum over every directed path (v_0, ..., v_h = t) of
// Z[v_0] * prod_e A[v_e][v_{e+1}]. Exponential-time on purpose.
inline std::vector<std::vector<std::int64_t>> brute_exposure_counts(
    const std::vector<std::vector<std::int64_t>>& A, const std::vector<int>& Z, int n_hop) {
    const std::size_t n = A.size();
    std::vector<std::vector<std::int64_t>> out;
    for (int hop = 1; hop <= n_hop; ++hop) {
        std::vector<std::int64_t> exp_h(n, 0);
        // enumerate all vertex tuples (v_0, ..., v_hop)
        std::vector<std::size_t> tuple(static_cast<std::size_t>(hop) + 1, 0);
        while (true) {
            std::int64_t w = Z[tuple[0]];
            for (int e = 0; e < hop && w != 0; ++e) w *= A[tuple[static_cast<std::size_t>(e)]]
                                                          [tuple[static_cast<std::size_t>(e) + 1]];
            if (w != 0) exp_h[tuple.back()] += w;
            std::size_t pos = tuple.size();
            bool done = false;
            while (true) {
                if (pos == 0) {
                    done = true;
                    break;
                }
                --pos;
                if (++tuple[pos] < n) break;
                tuple[pos] = 0;
            }
            if (done) break;
        }
        out.push_back(std::move(exp_h));
    }
    return out;
}

// Direct evaluation of the outcome model's expected potential outcomes using
// the dense path-enumeration exposures above.
inline std::vector<double> brute_expected_outcomes(const ioforge::OutcomeParams& params,
                                                   const std::vector<std::vector<std::int64_t>>& A,
                                                   const std::vector<int>& Z,
                                                   const ioforge::Rows& X) {
    const std::size_t n = A.size();
    const int n_hop = static_cast<int>(params.gamma.size());
    const auto counts = n_hop > 0 ? brute_exposure_counts(A, Z, n_hop)
                                  : std::vector<std::vector<std::int64_t>>{};
    std::vector<double> ey(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double lr = params.tau * Z[i] + params.mu + 0.5 * params.sigma_eps * params.sigma_eps;
        double prod = 1.0;
        for (int hop = 0; hop < n_hop; ++hop) {
            prod *= params.gamma[static_cast<std::size_t>(hop)];
            lr += std::log1p(static_cast<double>(counts[static_cast<std::size_t>(hop)][i])) *
                  params.tau * prod;
        }
        for (std::size_t j = 0; j < params.beta.size(); ++j) lr += params.beta[j] * X[i][j];
        ey[i] = std::exp(lr);
    }
    return ey;
}

// Direct substitution into the impact definition: mean over vertices of the
// expected-outcome difference between forcing Z_j = 1 and Z_j = 0.
inline double brute_zeta(std::size_t j, const ioforge::OutcomeParams& params,
                         const std::vector<std::vector<std::int64_t>>& A,
                         const ioforge::Rows& X, std::vector<int> base_z) {
    const std::size_t n = A.size();
    if (base_z.empty()) base_z.assign(n, 0);
    std::vector<int> z_plus = base_z, z_minus = base_z;
    z_plus[j] = 1;
    z_minus[j] = 0;
    const auto ey_plus = brute_expected_outcomes(params, A, z_plus, X);
    const auto ey_minus = brute_expected_outcomes(params, A, z_minus, X);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += ey_plus[i] - ey_minus[i];
    return sum / static_cast<double>(n);
}

}  // namespace oracles
