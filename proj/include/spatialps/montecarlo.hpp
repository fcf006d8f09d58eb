#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spatialps/weights.hpp"

namespace spatialps {

// One simulation experiment: a fixed population, a fixed convenience sample,
// and a fixed regressor vector; per replication a fresh innovation vector,
// the response built on the sampled locations, and the full zeta machinery
// at every (scheme, rho, zeta) grid point.
struct McConfig {
    std::array<std::size_t, 4> population = {2000, 200, 1000, 2400};
    std::array<std::size_t, 4> convenience = {70, 20, 150, 30};
    double beta = 1.0;
    double sigma2 = 1.0;
    double x_mean = 10.0;
    double x_var = 1.0;
    std::vector<double> rho_grid = {0.0, 0.2, 0.4, 0.6, 0.8};
    std::vector<double> zeta_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::vector<WeightScheme> schemes = {WeightScheme::threshold};
    int replications = 500;
    std::uint64_t seed = 1;
    std::optional<double> threshold;  // unset: min_connecting_threshold of the sample
    int knn_k = 4;
    double idist_exponent = 1.0;
    bool row_standardize = true;
    int threads = 1;
    bool timing = false;       // include wall time in the manifest (non-reproducible)
    bool degenerate_w = false;  // check mode: W = 0 everywhere, fits reduce to OLS
};

struct McCell {
    std::string scheme;
    double rho = 0.0;
    double zeta = 0.0;
    double mean_beta = 0.0;
    double bias2 = 0.0;     // (mean(beta_hat) - beta)^2
    double variance = 0.0;  // sample variance of beta_hat
    double mse = 0.0;       // bias2 + variance
    double mean_n = 0.0;
    int reps_used = 0;
    int failures = 0;
    double se_mean = 0.0;   // sd(beta_hat)/sqrt(reps)
    double se_bias2 = 0.0;  // delta-method: sqrt(4 bias2 se_mean^2 + 2 se_mean^4)
    double se_var = 0.0;    // Gaussian approx: variance * sqrt(2/(reps-1))
};

struct McSummary {
    McConfig config;
    std::vector<McCell> cells;  // ordered by (scheme, rho, zeta)
    int total_failures = 0;
    double wall_seconds = -1.0;  // < 0 when timing was off
};

// Deterministic for a given seed regardless of thread count: replication r
// always uses stream (seed, r) and aggregation runs in replication order.
// Failed fits are excluded from the aggregates, counted, and reported to
// stderr if they exceed 1% of draws.
McSummary run_experiment(const McConfig& config);

// Figure-3-style comparison: identical seeds across schemes (the innovation,
// deletion, and sampling streams never depend on the scheme, so common
// random numbers hold by construction).
McSummary compare_weight_schemes(const McConfig& base,
                                 const std::vector<WeightScheme>& schemes, double rho);

// CSV: scheme,rho,zeta,bias2,variance,mse,mean_n,reps,se_bias2,se_var in
// (scheme, rho, zeta) order.
void emit_curves(const McSummary& summary, const std::string& path);

// JSON manifest: config echo, seed, failure counts, and wall time when
// timing was enabled.
void write_manifest(const McSummary& summary, const std::string& path);

// Flat key=value experiment config (# comments and blank lines ignored).
McConfig read_mc_config(const std::string& path);

}  // namespace spatialps
