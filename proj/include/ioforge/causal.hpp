#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ioforge/forest.hpp"  // Rows
#include "ioforge/network.hpp"

namespace ioforge {

// A[i][j] = nonnegative integer influence weight i -> j (same layout as
// NarrativeNetwork::out_edges).
using EdgeCounts = std::vector<std::map<std::size_t, std::int64_t>>;

// One realization a_ij ~ Poisson(c_ij) on the support of c.
EdgeCounts draw_influence(const EdgeCounts& c, std::mt19937_64& eng);

// Fixed outcome-model parameters (a single draw of Eq.-style GLMM params).
struct OutcomeParams {
    double tau = 0.0;
    std::vector<double> gamma;  // per hop, each in [0,1]
    std::vector<double> beta;   // covariate coefficients (may be empty)
    double mu = 0.0;
    double sigma_eps = 0.0;
};

// Integer exposure counts ((A^T)^n Z for n = 1..n_hop) by repeated sparse
// mat-vec; exact integer arithmetic.
std::vector<std::vector<std::int64_t>> exposure_counts(const EdgeCounts& A,
                                                       const std::vector<int>& Z, int n_hop);

// s^(n) = log((A^T)^n Z + 1) elementwise, natural log.
std::vector<std::vector<double>> compute_exposures(const EdgeCounts& A,
                                                   const std::vector<int>& Z, int n_hop);

// log lambda_i = tau*Z_i + sum_n s_i^(n) * tau * prod_{k<=n} gamma_k
//              + beta.x_i + mu + eps_i ; throws if the result exceeds 30
// (overflow guard) or is non-finite. s_i has one entry per hop; x_i must
// match beta's length.
double log_rate(const OutcomeParams& params, int Z_i, const std::vector<double>& s_i,
                const std::vector<double>& x_i, double eps_i);

// Y_i ~ Poisson(exp(log lambda_i)) with eps_i ~ Normal(0, sigma_eps^2); the
// number of hops is params.gamma.size(). X may be empty (no covariates).
std::vector<std::int64_t> simulate_outcomes(const OutcomeParams& params, const EdgeCounts& A,
                                            const std::vector<int>& Z, const Rows& X,
                                            std::uint64_t seed);

// Covariate matrix: log1p in/out degree, log1p followers, one-hot community
// (block 0 dropped) when a partition is given.
struct Covariates {
    std::vector<std::string> names;
    Rows X;  // one row per vertex
};
Covariates build_covariates(const NarrativeNetwork& net, const Partition* partition);

struct CausalConfig {
    int n_hop = 2;
    int chains = 4;
    int warmup = 1000;
    int samples = 1000;        // kept draws per chain
    int refresh_every = 10;    // influence-draw refresh period (iterations)
    std::uint64_t seed = 0;
    bool likelihood_off = false;  // sample the prior only (testing hook)
};

struct PosteriorDraw {
    double tau = 0.0;
    std::vector<double> gamma;
    std::vector<double> beta;
    double mu = 0.0;
    double sigma_eps = 0.0;
};

struct OutcomeModelPosterior {
    int n_hop = 0;
    int chains = 0;
    int samples = 0;                      // kept per chain
    std::vector<PosteriorDraw> draws;     // chain-major: chain c draw d at c*samples+d
    std::vector<std::string> beta_names;
    std::map<std::string, double> split_rhat;   // per scalar parameter
    std::map<std::string, double> acceptance;   // per update block
    bool converged = true;                      // all split-Rhat <= 1.05
};

// Poisson log-likelihood sum_i (Y_i log lambda_i - lambda_i) at fixed
// parameters; -inf when any log lambda exceeds the overflow guard.
double model_log_likelihood(const OutcomeParams& params, const EdgeCounts& A,
                            const std::vector<int>& Z, const Rows& X,
                            const std::vector<std::int64_t>& Y,
                            const std::vector<double>& eps);

// Metropolis-within-Gibbs sampler for the Poisson GLMM: refreshes the
// influence draw every refresh_every iterations, random-walk updates for
// tau/beta/mu (Normal(0,2.5^2) priors), reflected updates for gamma_k
// (Uniform(0,1)), log-scale updates for sigma_eps (half-Normal(1)), a joint
// non-centered (sigma, eps) scale move, and per-vertex eps updates; step
// sizes adapt toward 0.44 acceptance during warm-up. Throws when Y is all
// zero with Z all zero (degenerate likelihood); non-convergence only flags.
OutcomeModelPosterior fit_outcome_model(const std::vector<std::int64_t>& Y_obs,
                                        const std::vector<int>& Z_obs, const EdgeCounts& c,
                                        const Covariates& cov, const CausalConfig& config);

struct ImpactEstimate {
    double mean = 0.0;
    double lo = 0.0;   // 2.5 percentile
    double hi = 0.0;   // 97.5 percentile
    std::vector<double> draws;
};

// Expected potential outcomes E[Y_i] = exp(log lambda_i^{no-eps} +
// sigma_eps^2/2) for every vertex (log-normal mean marginalizing eps).
std::vector<double> expected_outcomes(const OutcomeParams& params, const EdgeCounts& A,
                                      const std::vector<int>& Z, const Rows& X);

// zeta_j: per posterior draw, redraw A ~ Poisson(c) and impute expected
// potential outcomes under base_z with entry j forced to 1 vs 0; draw value
// is the mean over vertices of the difference. sampled_imputation instead
// imputes Y ~ Poisson(lambda) with eps sampled (strict multiple-imputation
// fidelity). base_z empty means the zero vector.
ImpactEstimate estimate_impact(std::size_t j, const OutcomeModelPosterior& posterior,
                               const EdgeCounts& c, const Rows& X,
                               const std::vector<int>& base_z = {},
                               std::uint64_t seed = 0, bool sampled_imputation = false);

// xi_i(z): primary (unit-level) effect of treating i under fixed assignment z
// for the others (z's i-th entry is ignored).
double primary_effect(std::size_t i, const std::vector<int>& z, const OutcomeParams& params,
                      const EdgeCounts& A, const Rows& X);

struct AverageEffect {
    double value = 0.0;
    double mc_se = 0.0;  // 0 when exact
    bool exact = true;
};

// xi_i^ave: mean of xi_i(z) over all 2^(N-1) assignments (exact when N <= 12,
// else seeded Monte Carlo over mc_assignments draws).
AverageEffect average_primary_effect_unit(std::size_t i, const OutcomeParams& params,
                                          const EdgeCounts& A, const Rows& X,
                                          int mc_assignments = 1024, std::uint64_t seed = 0);

// xi^ave = (1/N) sum_i xi_i^ave.
AverageEffect average_primary_effect(const OutcomeParams& params, const EdgeCounts& A,
                                     const Rows& X, int mc_assignments = 1024,
                                     std::uint64_t seed = 0);

// Undirected neighborhood of i on the support of A (union of in/out edges).
std::vector<std::size_t> neighbors_of(const EdgeCounts& A, std::size_t i);

// delta_{i,k}(z_i): average over assignments giving exactly k of i's
// neighbors treatment (non-neighbors control) of E[Y_i(z_i, z)] - E[Y_i(z_i,
// 0)]; exact when C(|N_i|, k) <= 10^4, else seeded Monte Carlo. Throws when
// k exceeds the neighborhood size.
AverageEffect k_neighbor_effect(std::size_t i, std::size_t k, int z_i,
                                const OutcomeParams& params, const EdgeCounts& A, const Rows& X,
                                int mc_assignments = 1024, std::uint64_t seed = 0);

// delta_k^ave: mean of delta_{i,k}(z_i) over units with at least k neighbors.
AverageEffect average_k_neighbor_effect(std::size_t k, int z_i, const OutcomeParams& params,
                                        const EdgeCounts& A, const Rows& X,
                                        int mc_assignments = 1024, std::uint64_t seed = 0);

// delta~_{i,k}: absolute k-neighborhood exposure — Z_i = 1 and the average
// runs over assignments with at least k treated neighbors.
AverageEffect absolute_k_neighbor_effect(std::size_t i, std::size_t k,
                                         const OutcomeParams& params, const EdgeCounts& A,
                                         const Rows& X, int mc_assignments = 1024,
                                         std::uint64_t seed = 0);

// zeta_A(z): (1/N) sum_i E[Y_i(z, A')] - E[Y_i(z, A)].
double network_manipulation_effect(const std::vector<int>& z, const EdgeCounts& A,
                                   const EdgeCounts& A_prime, const OutcomeParams& params,
                                   const Rows& X);

// Same estimand evaluated at every posterior draw (fixed A, A').
ImpactEstimate network_manipulation_effect_posterior(const std::vector<int>& z,
                                                     const EdgeCounts& A,
                                                     const EdgeCounts& A_prime,
                                                     const OutcomeModelPosterior& posterior,
                                                     const Rows& X);

// Posterior predictive check: replicate Y from posterior draws (redrawing A
// and eps) and report two-sided tail probabilities for the total-count and
// zero-count statistics.
struct PosteriorPredictive {
    double p_total = 0.0;
    double p_zero = 0.0;
};
PosteriorPredictive posterior_predictive_check(const OutcomeModelPosterior& posterior,
                                               const std::vector<std::int64_t>& Y_obs,
                                               const std::vector<int>& Z_obs,
                                               const EdgeCounts& c, const Rows& X,
                                               std::uint64_t seed = 0);

// One row per kept draw: chain, draw, tau, gamma_*, beta_*, mu, sigma_eps.
void write_posterior_csv(const OutcomeModelPosterior& posterior, const std::string& path);

// account_id, zeta_mean, zeta_lo, zeta_hi.
void write_impact_csv(const std::vector<std::string>& account_ids,
                      const std::vector<ImpactEstimate>& impacts, const std::string& path);

}  // namespace ioforge
