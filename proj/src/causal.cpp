#include "ioforge/causal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ioforge/rng.hpp"

namespace ioforge {

namespace {

constexpr double kLogRateGuard = 30.0;
constexpr double kScalarPriorSd = 2.5;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) return 0.0;
    if (sorted.size() == 1) return sorted[0];
    const double h = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - std::floor(h);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

ImpactEstimate summarize_draws(std::vector<double> draws) {
    ImpactEstimate est;
    est.draws = draws;
    if (draws.empty()) return est;
    est.mean = std::accumulate(draws.begin(), draws.end(), 0.0) /
               static_cast<double>(draws.size());
    std::sort(draws.begin(), draws.end());
    est.lo = quantile_sorted(draws, 0.025);
    est.hi = quantile_sorted(draws, 0.975);
    return est;
}

// exposure-weighted sum S_i = sum_n s_i^(n) prod_{k<=n} gamma_k
std::vector<double> weighted_exposure(const std::vector<std::vector<double>>& s,
                                      const std::vector<double>& gamma, std::size_t n) {
    std::vector<double> S(n, 0.0);
    double prod = 1.0;
    for (std::size_t hop = 0; hop < gamma.size(); hop++) {
        prod *= gamma[hop];
        if (prod == 0.0) break;
        for (std::size_t i = 0; i < n; i++) S[i] += s[hop][i] * prod;
    }
    return S;
}

double dot_or_zero(const std::vector<double>& beta, const Rows& X, std::size_t i) {
    if (beta.empty()) return 0.0;
    const std::vector<double>& x = X[i];
    double d = 0.0;
    for (std::size_t j = 0; j < beta.size(); j++) d += beta[j] * x[j];
    return d;
}

void check_params_shapes(const OutcomeParams& params, const Rows& X, std::size_t n) {
    if (!params.beta.empty()) {
        if (X.size() != n) throw std::runtime_error("covariate row count mismatch");
        for (const auto& row : X)
            if (row.size() != params.beta.size())
                throw std::runtime_error("covariate width does not match beta");
    }
}

}  // namespace

EdgeCounts draw_influence(const EdgeCounts& c, std::mt19937_64& eng) {
    EdgeCounts A(c.size());
    for (std::size_t i = 0; i < c.size(); i++)
        for (const auto& [j, w] : c[i]) {
            std::poisson_distribution<std::int64_t> pois(static_cast<double>(w));
            A[i][j] = pois(eng);
        }
    return A;
}

std::vector<std::vector<std::int64_t>> exposure_counts(const EdgeCounts& A,
                                                       const std::vector<int>& Z, int n_hop) {
    if (n_hop < 1) throw std::runtime_error("exposure_counts: n_hop must be >= 1");
    const std::size_t n = A.size();
    if (Z.size() != n) throw std::runtime_error("exposure_counts: Z size mismatch");
    std::vector<std::vector<std::int64_t>> out;
    std::vector<std::int64_t> cur(n, 0);
    for (std::size_t i = 0; i < n; i++) cur[i] = Z[i];
    for (int hop = 0; hop < n_hop; hop++) {
        std::vector<std::int64_t> next(n, 0);
        for (std::size_t u = 0; u < n; u++) {
            if (cur[u] == 0) continue;
            for (const auto& [v, w] : A[u]) next[v] += w * cur[u];
        }
        out.push_back(next);
        cur = std::move(next);
    }
    return out;
}

std::vector<std::vector<double>> compute_exposures(const EdgeCounts& A,
                                                   const std::vector<int>& Z, int n_hop) {
    const auto counts = exposure_counts(A, Z, n_hop);
    std::vector<std::vector<double>> s(counts.size());
    for (std::size_t hop = 0; hop < counts.size(); hop++) {
        s[hop].resize(counts[hop].size());
        for (std::size_t i = 0; i < counts[hop].size(); i++)
            s[hop][i] = std::log1p(static_cast<double>(counts[hop][i]));
    }
    return s;
}

double log_rate(const OutcomeParams& params, int Z_i, const std::vector<double>& s_i,
                const std::vector<double>& x_i, double eps_i) {
    if (s_i.size() != params.gamma.size())
        throw std::runtime_error("log_rate: exposure entries do not match hop count");
    if (x_i.size() != params.beta.size())
        throw std::runtime_error("log_rate: covariate entries do not match beta");
    double propagated = 0.0, prod = 1.0;
    for (std::size_t k = 0; k < params.gamma.size(); k++) {
        prod *= params.gamma[k];
        propagated += s_i[k] * prod;
    }
    double lr = params.tau * (static_cast<double>(Z_i) + propagated) + params.mu + eps_i;
    for (std::size_t j = 0; j < params.beta.size(); j++) lr += params.beta[j] * x_i[j];
    if (!std::isfinite(lr) || lr > kLogRateGuard)
        throw std::runtime_error("log_rate: rate overflow (log lambda > 30)");
    return lr;
}

std::vector<std::int64_t> simulate_outcomes(const OutcomeParams& params, const EdgeCounts& A,
                                            const std::vector<int>& Z, const Rows& X,
                                            std::uint64_t seed) {
    const std::size_t n = A.size();
    if (Z.size() != n) throw std::runtime_error("simulate_outcomes: Z size mismatch");
    check_params_shapes(params, X, n);
    const int n_hop = static_cast<int>(params.gamma.size());
    const auto s = n_hop > 0 ? compute_exposures(A, Z, n_hop)
                             : std::vector<std::vector<double>>{};
    std::mt19937_64 eng = make_engine(seed);
    std::normal_distribution<double> noise(0.0, params.sigma_eps > 0 ? params.sigma_eps : 1.0);

    std::vector<std::int64_t> Y(n, 0);
    std::vector<double> s_i(params.gamma.size(), 0.0);
    std::vector<double> x_i(params.beta.size(), 0.0);
    for (std::size_t i = 0; i < n; i++) {
        const double eps = params.sigma_eps > 0 ? noise(eng) : 0.0;
        for (std::size_t hop = 0; hop < s_i.size(); hop++) s_i[hop] = s[hop][i];
        if (!params.beta.empty()) x_i = X[i];
        const double lr = log_rate(params, Z[i], s_i, x_i, eps);
        std::poisson_distribution<std::int64_t> pois(std::exp(lr));
        Y[i] = pois(eng);
    }
    return Y;
}

Covariates build_covariates(const NarrativeNetwork& net, const Partition* partition) {
    Covariates cov;
    cov.names = {"log1p_in_degree", "log1p_out_degree", "log1p_followers"};
    int blocks = 0;
    if (partition) {
        if (partition->block_of.size() != net.vertices.size())
            throw std::runtime_error("build_covariates: partition size mismatch");
        blocks = partition->num_blocks;
        for (int b = 1; b < blocks; b++)  // reference block 0 dropped
            cov.names.push_back("community_" + std::to_string(b));
    }
    const std::size_t n = net.vertices.size();
    cov.X.resize(n, std::vector<double>(cov.names.size(), 0.0));
    for (std::size_t i = 0; i < n; i++) {
        cov.X[i][0] = std::log1p(static_cast<double>(weighted_in_degree(net, i)));
        cov.X[i][1] = std::log1p(static_cast<double>(weighted_out_degree(net, i)));
        cov.X[i][2] = std::log1p(static_cast<double>(net.stats[i].follower_count));
        if (partition) {
            const int b = partition->block_of[i];
            if (b > 0) cov.X[i][3 + static_cast<std::size_t>(b - 1)] = 1.0;
        }
    }
    return cov;
}

double model_log_likelihood(const OutcomeParams& params, const EdgeCounts& A,
                            const std::vector<int>& Z, const Rows& X,
                            const std::vector<std::int64_t>& Y,
                            const std::vector<double>& eps) {
    const std::size_t n = A.size();
    if (Z.size() != n || Y.size() != n || eps.size() != n)
        throw std::runtime_error("model_log_likelihood: size mismatch");
    check_params_shapes(params, X, n);
    const int n_hop = static_cast<int>(params.gamma.size());
    const auto s = n_hop > 0 ? compute_exposures(A, Z, n_hop)
                             : std::vector<std::vector<double>>{};
    const std::vector<double> S =
        n_hop > 0 ? weighted_exposure(s, params.gamma, n) : std::vector<double>(n, 0.0);
    double ll = 0.0;
    for (std::size_t i = 0; i < n; i++) {
        const double lr = params.tau * (static_cast<double>(Z[i]) + S[i]) +
                          dot_or_zero(params.beta, X, i) + params.mu + eps[i];
        if (!std::isfinite(lr) || lr > kLogRateGuard) return -kInf;
        ll += static_cast<double>(Y[i]) * lr - std::exp(lr);
    }
    return ll;
}

// ---------------------------------------------------------------------------
// MCMC sampler
// ---------------------------------------------------------------------------

namespace {

struct AdaptCounter {
    long attempts = 0;
    long accepts = 0;
    long total_attempts = 0;
    long total_accepts = 0;

    void record(bool accepted) {
        attempts++;
        total_attempts++;
        if (accepted) {
            accepts++;
            total_accepts++;
        }
    }
    void adapt(double& step) {
        if (attempts == 0) return;
        const double rate = static_cast<double>(accepts) / static_cast<double>(attempts);
        step *= std::exp(2.0 * (rate - 0.44));
        step = std::clamp(step, 1e-5, 50.0);
        attempts = accepts = 0;
    }
    double rate() const {
        return total_attempts == 0
                   ? 0.0
                   : static_cast<double>(total_accepts) / static_cast<double>(total_attempts);
    }
};

struct ChainOutput {
    std::vector<PosteriorDraw> draws;
    std::map<std::string, double> acceptance;
};

struct SamplerInputs {
    const std::vector<std::int64_t>* Y;
    const std::vector<int>* Z;
    const EdgeCounts* c;
    const Rows* X;
    std::size_t n = 0;
    std::size_t p = 0;  // covariate count
    CausalConfig cfg;
    double mu_init = 0.0;
};

ChainOutput run_chain(const SamplerInputs& in, int chain_idx) {
    const std::size_t n = in.n;
    const std::size_t H = static_cast<std::size_t>(in.cfg.n_hop);
    const std::size_t P = in.p;
    std::mt19937_64 eng =
        make_engine(derive_seed(in.cfg.seed, "chain:" + std::to_string(chain_idx)));
    std::normal_distribution<double> stdnorm(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    // state
    double tau = 0.0, mu = in.mu_init, logsig = std::log(0.5);
    std::vector<double> gamma(H, 0.5), beta(P, 0.0), eps(n, 0.0);
    EdgeCounts A;
    std::vector<std::vector<double>> s;   // per hop log-exposures
    std::vector<double> S(n, 0.0);        // gamma-weighted exposure sum
    std::vector<double> xdot(n, 0.0);     // beta . x_i

    const bool lik_off = in.cfg.likelihood_off;
    auto loglik = [&](double tau_, const std::vector<double>& S_,
                      const std::vector<double>& xdot_, double mu_,
                      const std::vector<double>& eps_) -> double {
        if (lik_off) return 0.0;
        double ll = 0.0;
        for (std::size_t i = 0; i < n; i++) {
            const double lr =
                tau_ * (static_cast<double>((*in.Z)[i]) + S_[i]) + xdot_[i] + mu_ + eps_[i];
            if (!std::isfinite(lr) || lr > kLogRateGuard) return -kInf;
            ll += static_cast<double>((*in.Y)[i]) * lr - std::exp(lr);
        }
        return ll;
    };
    auto log_lambda_i = [&](std::size_t i) {
        return tau * (static_cast<double>((*in.Z)[i]) + S[i]) + xdot[i] + mu + eps[i];
    };
    auto accept = [&](double delta, double cur) -> bool {
        if (std::isinf(cur) && cur < 0) return std::isfinite(delta) || delta > 0;
        if (delta == -kInf) return false;
        return delta >= 0.0 || std::log(unif(eng)) < delta;
    };
    auto scalar_logprior = [](double x) {
        return -x * x / (2.0 * kScalarPriorSd * kScalarPriorSd);
    };

    double cur_ll = 0.0;
    auto refresh_influence = [&]() {
        A = draw_influence(*in.c, eng);
        if (!lik_off) {
            s = compute_exposures(A, *in.Z, in.cfg.n_hop);
            S = weighted_exposure(s, gamma, n);
        }
        cur_ll = loglik(tau, S, xdot, mu, eps);
    };

    // step sizes
    double st_tau = 0.5, st_mu = 0.5, st_lsig = 0.5, st_group = 0.3;
    std::vector<double> st_gamma(H, 0.2), st_beta(P, 0.5), st_eps(n, 0.5);
    AdaptCounter ac_tau, ac_mu, ac_lsig, ac_group;
    std::vector<AdaptCounter> ac_gamma(H), ac_beta(P), ac_eps(n);

    const int total_iters = in.cfg.warmup + in.cfg.samples;
    ChainOutput out;
    out.draws.reserve(static_cast<std::size_t>(in.cfg.samples));

    for (int iter = 0; iter < total_iters; iter++) {
        const bool warm = iter < in.cfg.warmup;
        if (iter % std::max(in.cfg.refresh_every, 1) == 0) refresh_influence();

        // tau
        {
            const double prop = tau + st_tau * stdnorm(eng);
            const double new_ll = loglik(prop, S, xdot, mu, eps);
            const double delta =
                (new_ll - cur_ll) + scalar_logprior(prop) - scalar_logprior(tau);
            const bool ok = accept(delta, cur_ll);
            if (ok) {
                tau = prop;
                cur_ll = new_ll;
            }
            ac_tau.record(ok);
        }
        // gamma_k (reflected at [0,1]; exact fold keeps the proposal symmetric
        // at any step size)
        for (std::size_t k = 0; k < H; k++) {
            double prop = gamma[k] + st_gamma[k] * stdnorm(eng);
            prop = std::fmod(std::fabs(prop), 2.0);
            if (prop > 1.0) prop = 2.0 - prop;
            std::vector<double> gamma_new = gamma;
            gamma_new[k] = prop;
            std::vector<double> S_new =
                lik_off ? S : weighted_exposure(s, gamma_new, n);
            const double new_ll = loglik(tau, S_new, xdot, mu, eps);
            const double delta = new_ll - cur_ll;  // flat prior inside [0,1]
            const bool ok = accept(delta, cur_ll);
            if (ok) {
                gamma[k] = prop;
                S = std::move(S_new);
                cur_ll = new_ll;
            }
            ac_gamma[k].record(ok);
        }
        // beta_j
        for (std::size_t j = 0; j < P; j++) {
            const double prop = beta[j] + st_beta[j] * stdnorm(eng);
            const double db = prop - beta[j];
            std::vector<double> xdot_new = xdot;
            for (std::size_t i = 0; i < n; i++) xdot_new[i] += db * (*in.X)[i][j];
            const double new_ll = loglik(tau, S, xdot_new, mu, eps);
            const double delta =
                (new_ll - cur_ll) + scalar_logprior(prop) - scalar_logprior(beta[j]);
            const bool ok = accept(delta, cur_ll);
            if (ok) {
                beta[j] = prop;
                xdot = std::move(xdot_new);
                cur_ll = new_ll;
            }
            ac_beta[j].record(ok);
        }
        // mu
        {
            const double prop = mu + st_mu * stdnorm(eng);
            const double new_ll = loglik(tau, S, xdot, prop, eps);
            const double delta =
                (new_ll - cur_ll) + scalar_logprior(prop) - scalar_logprior(mu);
            const bool ok = accept(delta, cur_ll);
            if (ok) {
                mu = prop;
                cur_ll = new_ll;
            }
            ac_mu.record(ok);
        }
        // log sigma (likelihood unchanged: sigma only enters the priors)
        {
            const double prop = logsig + st_lsig * stdnorm(eng);
            const double sig = std::exp(logsig), sig_new = std::exp(prop);
            double eps_ss = 0.0;
            for (double e : eps) eps_ss += e * e;
            const double dn = static_cast<double>(n);
            const double delta =
                (-0.5 * eps_ss / (sig_new * sig_new) - dn * prop) -
                (-0.5 * eps_ss / (sig * sig) - dn * logsig) +
                (-0.5 * sig_new * sig_new + prop) - (-0.5 * sig * sig + logsig);
            const bool ok = accept(delta, 0.0);
            if (ok) logsig = prop;
            ac_lsig.record(ok);
        }
        // joint non-centered (sigma, eps) scale move: eps' = eps e^d, the
        // eps-prior change cancels the Jacobian exactly
        {
            const double d = st_group * stdnorm(eng);
            const double sig = std::exp(logsig), sig_new = std::exp(logsig + d);
            std::vector<double> eps_new(n);
            const double scale = std::exp(d);
            for (std::size_t i = 0; i < n; i++) eps_new[i] = eps[i] * scale;
            const double new_ll = loglik(tau, S, xdot, mu, eps_new);
            const double delta = (new_ll - cur_ll) +
                                 (-0.5 * sig_new * sig_new + (logsig + d)) -
                                 (-0.5 * sig * sig + logsig);
            const bool ok = accept(delta, cur_ll);
            if (ok) {
                logsig += d;
                eps = std::move(eps_new);
                cur_ll = new_ll;
            }
            ac_group.record(ok);
        }
        // per-vertex eps
        {
            const double sig = std::exp(logsig);
            const double inv2s2 = 1.0 / (2.0 * sig * sig);
            for (std::size_t i = 0; i < n; i++) {
                const double prop = eps[i] + st_eps[i] * stdnorm(eng);
                double delta;
                double dll = 0.0;
                if (lik_off) {
                    delta = -(prop * prop - eps[i] * eps[i]) * inv2s2;
                } else {
                    const double lr_old = log_lambda_i(i);
                    const double lr_new = lr_old - eps[i] + prop;
                    if (!std::isfinite(lr_new) || lr_new > kLogRateGuard) {
                        ac_eps[i].record(false);
                        continue;
                    }
                    dll = static_cast<double>((*in.Y)[i]) * (lr_new - lr_old) -
                          (std::exp(lr_new) - std::exp(lr_old));
                    delta = dll - (prop * prop - eps[i] * eps[i]) * inv2s2;
                }
                const bool ok = accept(delta, cur_ll);
                if (ok) {
                    eps[i] = prop;
                    cur_ll += dll;
                }
                ac_eps[i].record(ok);
            }
        }

        if (warm && (iter + 1) % 50 == 0) {
            ac_tau.adapt(st_tau);
            ac_mu.adapt(st_mu);
            ac_lsig.adapt(st_lsig);
            ac_group.adapt(st_group);
            for (std::size_t k = 0; k < H; k++) ac_gamma[k].adapt(st_gamma[k]);
            for (std::size_t j = 0; j < P; j++) ac_beta[j].adapt(st_beta[j]);
            for (std::size_t i = 0; i < n; i++) ac_eps[i].adapt(st_eps[i]);
        }
        if (!warm) {
            PosteriorDraw d;
            d.tau = tau;
            d.gamma = gamma;
            d.beta = beta;
            d.mu = mu;
            d.sigma_eps = std::exp(logsig);
            out.draws.push_back(std::move(d));
        }
    }

    out.acceptance["tau"] = ac_tau.rate();
    out.acceptance["mu"] = ac_mu.rate();
    out.acceptance["sigma"] = ac_lsig.rate();
    out.acceptance["group"] = ac_group.rate();
    if (H > 0) {
        double g = 0.0;
        for (auto& a : ac_gamma) g += a.rate();
        out.acceptance["gamma"] = g / static_cast<double>(H);
    }
    if (P > 0) {
        double bb = 0.0;
        for (auto& a : ac_beta) bb += a.rate();
        out.acceptance["beta"] = bb / static_cast<double>(P);
    }
    if (n > 0) {
        double ee = 0.0;
        for (auto& a : ac_eps) ee += a.rate();
        out.acceptance["eps"] = ee / static_cast<double>(n);
    }
    return out;
}

double split_rhat(const std::vector<std::vector<double>>& chain_series) {
    // split each chain in half -> 2M sequences
    std::vector<std::vector<double>> seqs;
    for (const auto& chain : chain_series) {
        const std::size_t half = chain.size() / 2;
        if (half < 2) return 1.0;
        seqs.push_back({chain.begin(), chain.begin() + static_cast<std::ptrdiff_t>(half)});
        seqs.push_back({chain.end() - static_cast<std::ptrdiff_t>(half), chain.end()});
    }
    const double m = static_cast<double>(seqs.size());
    const double len = static_cast<double>(seqs[0].size());
    std::vector<double> means;
    double w = 0.0;
    for (const auto& seq : seqs) {
        const double mean =
            std::accumulate(seq.begin(), seq.end(), 0.0) / static_cast<double>(seq.size());
        means.push_back(mean);
        double ss = 0.0;
        for (double v : seq) ss += (v - mean) * (v - mean);
        w += ss / (static_cast<double>(seq.size()) - 1.0);
    }
    w /= m;
    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double b = 0.0;
    for (double mean : means) b += (mean - grand) * (mean - grand);
    b *= len / (m - 1.0);
    if (w <= 0.0) return 1.0;
    const double var = (len - 1.0) / len * w + b / len;
    return std::sqrt(var / w);
}

}  // namespace

OutcomeModelPosterior fit_outcome_model(const std::vector<std::int64_t>& Y_obs,
                                        const std::vector<int>& Z_obs, const EdgeCounts& c,
                                        const Covariates& cov, const CausalConfig& config) {
    const std::size_t n = c.size();
    if (Y_obs.size() != n || Z_obs.size() != n)
        throw std::runtime_error("fit_outcome_model: Y/Z size mismatch with network");
    if (!cov.names.empty()) {
        if (cov.X.size() != n)
            throw std::runtime_error("fit_outcome_model: covariate row count mismatch");
        for (const auto& row : cov.X)
            if (row.size() != cov.names.size())
                throw std::runtime_error("fit_outcome_model: covariate width mismatch");
    }
    if (config.n_hop < 1) throw std::runtime_error("fit_outcome_model: n_hop must be >= 1");
    if (config.chains < 1 || config.samples < 1 || config.warmup < 0)
        throw std::runtime_error("fit_outcome_model: bad chain configuration");

    if (!config.likelihood_off) {
        bool any_y = false, any_z = false;
        for (auto y : Y_obs) {
            if (y < 0) throw std::runtime_error("fit_outcome_model: negative outcome");
            any_y = any_y || y > 0;
        }
        for (int z : Z_obs) any_z = any_z || z != 0;
        if (!any_y && !any_z)
            throw std::runtime_error(
                "fit_outcome_model: degenerate likelihood (all-zero outcomes, no sources)");
    }

    SamplerInputs in;
    in.Y = &Y_obs;
    in.Z = &Z_obs;
    in.c = &c;
    in.X = &cov.X;
    in.n = n;
    in.p = cov.names.size();
    in.cfg = config;
    double mean_y = 0.0;
    for (auto y : Y_obs) mean_y += static_cast<double>(y);
    mean_y /= std::max<double>(1.0, static_cast<double>(n));
    in.mu_init = config.likelihood_off ? 0.0 : std::log(std::max(mean_y, 1e-3));

    std::vector<ChainOutput> outs(static_cast<std::size_t>(config.chains));
    std::vector<std::thread> threads;
    for (int ch = 0; ch < config.chains; ch++)
        threads.emplace_back(
            [&outs, &in, ch]() { outs[static_cast<std::size_t>(ch)] = run_chain(in, ch); });
    for (auto& t : threads) t.join();

    OutcomeModelPosterior post;
    post.n_hop = config.n_hop;
    post.chains = config.chains;
    post.samples = config.samples;
    post.beta_names = cov.names;
    for (const auto& o : outs)
        post.draws.insert(post.draws.end(), o.draws.begin(), o.draws.end());
    for (const auto& [name, rate] : outs[0].acceptance) {
        double sum = 0.0;
        for (const auto& o : outs) sum += o.acceptance.at(name);
        post.acceptance[name] = sum / static_cast<double>(config.chains);
    }

    // split-Rhat per scalar
    auto series_of = [&](auto&& getter) {
        std::vector<std::vector<double>> chains_series;
        for (int ch = 0; ch < config.chains; ch++) {
            std::vector<double> s;
            s.reserve(static_cast<std::size_t>(config.samples));
            for (int d = 0; d < config.samples; d++)
                s.push_back(getter(
                    post.draws[static_cast<std::size_t>(ch * config.samples + d)]));
            chains_series.push_back(std::move(s));
        }
        return chains_series;
    };
    post.split_rhat["tau"] =
        split_rhat(series_of([](const PosteriorDraw& d) { return d.tau; }));
    for (int k = 0; k < config.n_hop; k++)
        post.split_rhat["gamma_" + std::to_string(k + 1)] = split_rhat(
            series_of([k](const PosteriorDraw& d) { return d.gamma[static_cast<std::size_t>(k)]; }));
    for (std::size_t j = 0; j < cov.names.size(); j++)
        post.split_rhat["beta_" + cov.names[j]] =
            split_rhat(series_of([j](const PosteriorDraw& d) { return d.beta[j]; }));
    post.split_rhat["mu"] = split_rhat(series_of([](const PosteriorDraw& d) { return d.mu; }));
    post.split_rhat["sigma_eps"] =
        split_rhat(series_of([](const PosteriorDraw& d) { return d.sigma_eps; }));
    post.converged = true;
    for (const auto& [name, r] : post.split_rhat)
        if (r > 1.05) post.converged = false;
    return post;
}

// ---------------------------------------------------------------------------
// estimands
// ---------------------------------------------------------------------------

std::vector<double> expected_outcomes(const OutcomeParams& params, const EdgeCounts& A,
                                      const std::vector<int>& Z, const Rows& X) {
    const std::size_t n = A.size();
    if (Z.size() != n) throw std::runtime_error("expected_outcomes: Z size mismatch");
    check_params_shapes(params, X, n);
    const int n_hop = static_cast<int>(params.gamma.size());
    const auto s = n_hop > 0 ? compute_exposures(A, Z, n_hop)
                             : std::vector<std::vector<double>>{};
    const std::vector<double> S =
        n_hop > 0 ? weighted_exposure(s, params.gamma, n) : std::vector<double>(n, 0.0);
    std::vector<double> ey(n, 0.0);
    const double half_var = 0.5 * params.sigma_eps * params.sigma_eps;
    for (std::size_t i = 0; i < n; i++) {
        const double lr = params.tau * (static_cast<double>(Z[i]) + S[i]) +
                          dot_or_zero(params.beta, X, i) + params.mu + half_var;
        if (!std::isfinite(lr) || lr > kLogRateGuard)
            throw std::runtime_error("expected_outcomes: rate overflow (log lambda > 30)");
        ey[i] = std::exp(lr);
    }
    return ey;
}

namespace {

OutcomeParams params_of(const PosteriorDraw& d) {
    OutcomeParams p;
    p.tau = d.tau;
    p.gamma = d.gamma;
    p.beta = d.beta;
    p.mu = d.mu;
    p.sigma_eps = d.sigma_eps;
    return p;
}

}  // namespace

ImpactEstimate estimate_impact(std::size_t j, const OutcomeModelPosterior& posterior,
                               const EdgeCounts& c, const Rows& X,
                               const std::vector<int>& base_z, std::uint64_t seed,
                               bool sampled_imputation) {
    const std::size_t n = c.size();
    if (j >= n) throw std::runtime_error("estimate_impact: vertex index out of range");
    if (!base_z.empty() && base_z.size() != n)
        throw std::runtime_error("estimate_impact: base_z size mismatch");
    std::vector<int> z_plus = base_z.empty() ? std::vector<int>(n, 0) : base_z;
    std::vector<int> z_minus = z_plus;
    z_plus[j] = 1;
    z_minus[j] = 0;

    std::vector<double> draws;
    draws.reserve(posterior.draws.size());
    const double dn = static_cast<double>(n);
    for (std::size_t d = 0; d < posterior.draws.size(); d++) {
        std::mt19937_64 eng = make_engine(
            derive_seed(seed, "impact:" + std::to_string(j) + ":" + std::to_string(d)));
        const EdgeCounts A = draw_influence(c, eng);
        const OutcomeParams params = params_of(posterior.draws[d]);
        double diff = 0.0;
        if (!sampled_imputation) {
            const auto ey_plus = expected_outcomes(params, A, z_plus, X);
            const auto ey_minus = expected_outcomes(params, A, z_minus, X);
            for (std::size_t i = 0; i < n; i++) diff += ey_plus[i] - ey_minus[i];
        } else {
            // impute Y ~ Poisson(lambda(eps)) with shared per-vertex eps
            std::normal_distribution<double> noise(
                0.0, params.sigma_eps > 0 ? params.sigma_eps : 1.0);
            std::vector<double> eps(n, 0.0);
            for (std::size_t i = 0; i < n; i++)
                eps[i] = params.sigma_eps > 0 ? noise(eng) : 0.0;
            const int hops = static_cast<int>(params.gamma.size());
            const auto s_plus = hops > 0 ? compute_exposures(A, z_plus, hops)
                                         : std::vector<std::vector<double>>{};
            const auto s_minus = hops > 0 ? compute_exposures(A, z_minus, hops)
                                          : std::vector<std::vector<double>>{};
            const auto S_plus = weighted_exposure(s_plus, params.gamma, n);
            const auto S_minus = weighted_exposure(s_minus, params.gamma, n);
            for (std::size_t i = 0; i < n; i++) {
                const double base = dot_or_zero(params.beta, X, i) + params.mu + eps[i];
                const double lr_p =
                    params.tau * (static_cast<double>(z_plus[i]) + S_plus[i]) + base;
                const double lr_m =
                    params.tau * (static_cast<double>(z_minus[i]) + S_minus[i]) + base;
                if (lr_p > kLogRateGuard || lr_m > kLogRateGuard)
                    throw std::runtime_error("estimate_impact: rate overflow");
                std::poisson_distribution<std::int64_t> pp(std::exp(lr_p));
                std::poisson_distribution<std::int64_t> pm(std::exp(lr_m));
                diff += static_cast<double>(pp(eng)) - static_cast<double>(pm(eng));
            }
        }
        draws.push_back(diff / dn);
    }
    return summarize_draws(std::move(draws));
}

double primary_effect(std::size_t i, const std::vector<int>& z, const OutcomeParams& params,
                      const EdgeCounts& A, const Rows& X) {
    const std::size_t n = A.size();
    if (i >= n) throw std::runtime_error("primary_effect: vertex index out of range");
    if (z.size() != n) throw std::runtime_error("primary_effect: assignment size mismatch");
    std::vector<int> z_plus = z, z_minus = z;
    z_plus[i] = 1;
    z_minus[i] = 0;
    const auto ey_plus = expected_outcomes(params, A, z_plus, X);
    const auto ey_minus = expected_outcomes(params, A, z_minus, X);
    return ey_plus[i] - ey_minus[i];
}

AverageEffect average_primary_effect_unit(std::size_t i, const OutcomeParams& params,
                                          const EdgeCounts& A, const Rows& X,
                                          int mc_assignments, std::uint64_t seed) {
    const std::size_t n = A.size();
    if (i >= n) throw std::runtime_error("average_primary_effect_unit: index out of range");
    AverageEffect eff;
    if (n <= 12) {
        // exact over 2^(N-1) assignments of the others
        const std::size_t others = n - 1;
        const std::size_t count = std::size_t{1} << others;
        double sum = 0.0;
        std::vector<int> z(n, 0);
        for (std::size_t mask = 0; mask < count; mask++) {
            std::size_t bit = 0;
            for (std::size_t v = 0; v < n; v++) {
                if (v == i) continue;
                z[v] = (mask >> bit) & 1 ? 1 : 0;
                bit++;
            }
            sum += primary_effect(i, z, params, A, X);
        }
        eff.value = sum / static_cast<double>(count);
        eff.exact = true;
        return eff;
    }
    std::mt19937_64 eng =
        make_engine(derive_seed(seed, "xi_ave:" + std::to_string(i)));
    std::bernoulli_distribution coin(0.5);
    double sum = 0.0, sumsq = 0.0;
    std::vector<int> z(n, 0);
    for (int m = 0; m < mc_assignments; m++) {
        for (std::size_t v = 0; v < n; v++) z[v] = v == i ? 0 : (coin(eng) ? 1 : 0);
        const double val = primary_effect(i, z, params, A, X);
        sum += val;
        sumsq += val * val;
    }
    const double mm = static_cast<double>(mc_assignments);
    eff.value = sum / mm;
    const double var = std::max(0.0, sumsq / mm - eff.value * eff.value);
    eff.mc_se = std::sqrt(var / mm);
    eff.exact = false;
    return eff;
}

AverageEffect average_primary_effect(const OutcomeParams& params, const EdgeCounts& A,
                                     const Rows& X, int mc_assignments, std::uint64_t seed) {
    const std::size_t n = A.size();
    if (n == 0) throw std::runtime_error("average_primary_effect: empty network");
    AverageEffect total;
    double se_sq = 0.0;
    for (std::size_t i = 0; i < n; i++) {
        const AverageEffect e =
            average_primary_effect_unit(i, params, A, X, mc_assignments, derive_seed(seed, i));
        total.value += e.value;
        se_sq += e.mc_se * e.mc_se;
        total.exact = total.exact && e.exact;
    }
    const double dn = static_cast<double>(n);
    total.value /= dn;
    total.mc_se = std::sqrt(se_sq) / dn;
    return total;
}

std::vector<std::size_t> neighbors_of(const EdgeCounts& A, std::size_t i) {
    std::set<std::size_t> nb;
    for (const auto& [j, w] : A[i])
        if (w > 0 && j != i) nb.insert(j);
    for (std::size_t u = 0; u < A.size(); u++) {
        if (u == i) continue;
        auto it = A[u].find(i);
        if (it != A[u].end() && it->second > 0) nb.insert(u);
    }
    return {nb.begin(), nb.end()};
}

namespace {

// C(n, k) clamped at 2e9 to avoid overflow
double binom_approx(std::size_t n, std::size_t k) {
    if (k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t t = 0; t < k; t++) {
        c *= static_cast<double>(n - t) / static_cast<double>(t + 1);
        if (c > 2e9) return 2e9;
    }
    return c;
}

// iterate all k-subsets of {0..n-1}; callback gets index vector
template <typename F>
void for_each_combination(std::size_t n, std::size_t k, F&& f) {
    std::vector<std::size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    if (k == 0) {
        f(idx);
        return;
    }
    while (true) {
        f(idx);
        std::size_t p = k;
        while (p > 0) {
            p--;
            if (idx[p] != p + n - k) break;
            if (p == 0) return;
        }
        if (idx[p] == p + n - k) return;
        idx[p]++;
        for (std::size_t q = p + 1; q < k; q++) idx[q] = idx[q - 1] + 1;
    }
}

}  // namespace

AverageEffect k_neighbor_effect(std::size_t i, std::size_t k, int z_i,
                                const OutcomeParams& params, const EdgeCounts& A, const Rows& X,
                                int mc_assignments, std::uint64_t seed) {
    const std::size_t n = A.size();
    if (i >= n) throw std::runtime_error("k_neighbor_effect: vertex index out of range");
    const std::vector<std::size_t> nb = neighbors_of(A, i);
    if (k > nb.size())
        throw std::runtime_error("k_neighbor_effect: unit has fewer than k neighbors");

    std::vector<int> z0(n, 0);
    z0[i] = z_i;
    const double baseline = expected_outcomes(params, A, z0, X)[i];

    auto eval_subset = [&](const std::vector<std::size_t>& subset_idx) {
        std::vector<int> z(n, 0);
        z[i] = z_i;
        for (std::size_t t : subset_idx) z[nb[t]] = 1;
        return expected_outcomes(params, A, z, X)[i] - baseline;
    };

    AverageEffect eff;
    const double combos = binom_approx(nb.size(), k);
    if (combos <= 1e4) {
        double sum = 0.0;
        std::size_t count = 0;
        for_each_combination(nb.size(), k, [&](const std::vector<std::size_t>& idx) {
            sum += eval_subset(idx);
            count++;
        });
        eff.value = sum / static_cast<double>(count);
        eff.exact = true;
        return eff;
    }
    std::mt19937_64 eng = make_engine(derive_seed(
        seed, "delta:" + std::to_string(i) + ":" + std::to_string(k)));
    std::vector<std::size_t> pool(nb.size());
    std::iota(pool.begin(), pool.end(), 0);
    double sum = 0.0, sumsq = 0.0;
    for (int m = 0; m < mc_assignments; m++) {
        // partial Fisher-Yates: first k entries are a uniform k-subset
        for (std::size_t t = 0; t < k; t++) {
            std::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
            std::swap(pool[t], pool[pick(eng)]);
        }
        const double val = eval_subset({pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k)});
        sum += val;
        sumsq += val * val;
    }
    const double mm = static_cast<double>(mc_assignments);
    eff.value = sum / mm;
    eff.mc_se = std::sqrt(std::max(0.0, sumsq / mm - eff.value * eff.value) / mm);
    eff.exact = false;
    return eff;
}

AverageEffect average_k_neighbor_effect(std::size_t k, int z_i, const OutcomeParams& params,
                                        const EdgeCounts& A, const Rows& X, int mc_assignments,
                                        std::uint64_t seed) {
    const std::size_t n = A.size();
    AverageEffect total;
    double se_sq = 0.0;
    std::size_t eligible = 0;
    for (std::size_t i = 0; i < n; i++) {
        if (neighbors_of(A, i).size() < k) continue;
        const AverageEffect e =
            k_neighbor_effect(i, k, z_i, params, A, X, mc_assignments, derive_seed(seed, i));
        total.value += e.value;
        se_sq += e.mc_se * e.mc_se;
        total.exact = total.exact && e.exact;
        eligible++;
    }
    if (eligible == 0)
        throw std::runtime_error("average_k_neighbor_effect: no unit has >= k neighbors");
    total.value /= static_cast<double>(eligible);
    total.mc_se = std::sqrt(se_sq) / static_cast<double>(eligible);
    return total;
}

AverageEffect absolute_k_neighbor_effect(std::size_t i, std::size_t k,
                                         const OutcomeParams& params, const EdgeCounts& A,
                                         const Rows& X, int mc_assignments,
                                         std::uint64_t seed) {
    const std::size_t n = A.size();
    if (i >= n)
        throw std::runtime_error("absolute_k_neighbor_effect: vertex index out of range");
    const std::vector<std::size_t> nb = neighbors_of(A, i);
    if (k > nb.size())
        throw std::runtime_error("absolute_k_neighbor_effect: unit has fewer than k neighbors");

    std::vector<int> z0(n, 0);
    z0[i] = 1;
    const double baseline = expected_outcomes(params, A, z0, X)[i];
    auto eval_subset = [&](const std::vector<std::size_t>& subset_idx) {
        std::vector<int> z(n, 0);
        z[i] = 1;
        for (std::size_t t : subset_idx) z[nb[t]] = 1;
        return expected_outcomes(params, A, z, X)[i] - baseline;
    };

    double total_combos = 0.0;
    for (std::size_t l = k; l <= nb.size(); l++) total_combos += binom_approx(nb.size(), l);

    AverageEffect eff;
    if (total_combos <= 1e4) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t l = k; l <= nb.size(); l++)
            for_each_combination(nb.size(), l, [&](const std::vector<std::size_t>& idx) {
                sum += eval_subset(idx);
                count++;
            });
        eff.value = sum / static_cast<double>(count);
        eff.exact = true;
        return eff;
    }
    // Monte Carlo: draw l with weight C(|nb|, l), then a uniform l-subset
    std::mt19937_64 eng = make_engine(derive_seed(
        seed, "delta_abs:" + std::to_string(i) + ":" + std::to_string(k)));
    std::vector<double> logw;
    for (std::size_t l = k; l <= nb.size(); l++)
        logw.push_back(std::lgamma(static_cast<double>(nb.size()) + 1.0) -
                       std::lgamma(static_cast<double>(l) + 1.0) -
                       std::lgamma(static_cast<double>(nb.size() - l) + 1.0));
    const double wmax = *std::max_element(logw.begin(), logw.end());
    std::vector<double> w;
    for (double lw : logw) w.push_back(std::exp(lw - wmax));
    std::discrete_distribution<std::size_t> pick_l(w.begin(), w.end());
    std::vector<std::size_t> pool(nb.size());
    std::iota(pool.begin(), pool.end(), 0);
    double sum = 0.0, sumsq = 0.0;
    for (int m = 0; m < mc_assignments; m++) {
        const std::size_t l = k + pick_l(eng);
        for (std::size_t t = 0; t < l; t++) {
            std::uniform_int_distribution<std::size_t> pick(t, pool.size() - 1);
            std::swap(pool[t], pool[pick(eng)]);
        }
        const double val =
            eval_subset({pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(l)});
        sum += val;
        sumsq += val * val;
    }
    const double mm = static_cast<double>(mc_assignments);
    eff.value = sum / mm;
    eff.mc_se = std::sqrt(std::max(0.0, sumsq / mm - eff.value * eff.value) / mm);
    eff.exact = false;
    return eff;
}

double network_manipulation_effect(const std::vector<int>& z, const EdgeCounts& A,
                                   const EdgeCounts& A_prime, const OutcomeParams& params,
                                   const Rows& X) {
    if (A.size() != A_prime.size())
        throw std::runtime_error("network_manipulation_effect: dimension mismatch");
    const std::size_t n = A.size();
    if (z.size() != n)
        throw std::runtime_error("network_manipulation_effect: assignment size mismatch");
    const auto ey_prime = expected_outcomes(params, A_prime, z, X);
    const auto ey = expected_outcomes(params, A, z, X);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; i++) sum += ey_prime[i] - ey[i];
    return sum / static_cast<double>(n);
}

ImpactEstimate network_manipulation_effect_posterior(const std::vector<int>& z,
                                                     const EdgeCounts& A,
                                                     const EdgeCounts& A_prime,
                                                     const OutcomeModelPosterior& posterior,
                                                     const Rows& X) {
    std::vector<double> draws;
    draws.reserve(posterior.draws.size());
    for (const PosteriorDraw& d : posterior.draws)
        draws.push_back(network_manipulation_effect(z, A, A_prime, params_of(d), X));
    return summarize_draws(std::move(draws));
}

PosteriorPredictive posterior_predictive_check(const OutcomeModelPosterior& posterior,
                                               const std::vector<std::int64_t>& Y_obs,
                                               const std::vector<int>& Z_obs,
                                               const EdgeCounts& c, const Rows& X,
                                               std::uint64_t seed) {
    const std::size_t n = c.size();
    if (Y_obs.size() != n || Z_obs.size() != n)
        throw std::runtime_error("posterior_predictive_check: size mismatch");
    std::int64_t obs_total = 0, obs_zero = 0;
    for (auto y : Y_obs) {
        obs_total += y;
        obs_zero += y == 0;
    }
    long ge_total = 0, le_total = 0, ge_zero = 0, le_zero = 0;
    for (std::size_t d = 0; d < posterior.draws.size(); d++) {
        std::mt19937_64 eng = make_engine(derive_seed(seed, "ppc:" + std::to_string(d)));
        const EdgeCounts A = draw_influence(c, eng);
        const OutcomeParams params = params_of(posterior.draws[d]);
        const std::vector<std::int64_t> rep =
            simulate_outcomes(params, A, Z_obs, X, derive_seed(seed, d));
        std::int64_t rep_total = 0, rep_zero = 0;
        for (auto y : rep) {
            rep_total += y;
            rep_zero += y == 0;
        }
        ge_total += rep_total >= obs_total;
        le_total += rep_total <= obs_total;
        ge_zero += rep_zero >= obs_zero;
        le_zero += rep_zero <= obs_zero;
    }
    const double m = static_cast<double>(posterior.draws.size());
    PosteriorPredictive ppc;
    ppc.p_total = std::min(1.0, 2.0 * std::min(ge_total / m, le_total / m));
    ppc.p_zero = std::min(1.0, 2.0 * std::min(ge_zero / m, le_zero / m));
    return ppc;
}

void write_posterior_csv(const OutcomeModelPosterior& posterior, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "chain,draw,tau";
    for (int k = 1; k <= posterior.n_hop; k++) out << ",gamma_" << k;
    for (const std::string& name : posterior.beta_names) out << ",beta_" << name;
    out << ",mu,sigma_eps\n";
    for (int ch = 0; ch < posterior.chains; ch++)
        for (int d = 0; d < posterior.samples; d++) {
            const PosteriorDraw& draw =
                posterior.draws[static_cast<std::size_t>(ch * posterior.samples + d)];
            out << ch << "," << d << "," << format_g17(draw.tau);
            for (double g : draw.gamma) out << "," << format_g17(g);
            for (double b : draw.beta) out << "," << format_g17(b);
            out << "," << format_g17(draw.mu) << "," << format_g17(draw.sigma_eps) << "\n";
        }
}

void write_impact_csv(const std::vector<std::string>& account_ids,
                      const std::vector<ImpactEstimate>& impacts, const std::string& path) {
    if (account_ids.size() != impacts.size())
        throw std::runtime_error("write_impact_csv: size mismatch");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << "account_id,zeta_mean,zeta_lo,zeta_hi\n";
    for (std::size_t i = 0; i < impacts.size(); i++)
        out << account_ids[i] << "," << format_g17(impacts[i].mean) << ","
            << format_g17(impacts[i].lo) << "," << format_g17(impacts[i].hi) << "\n";
}

}  // namespace ioforge
