#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spatialps/pointset.hpp"
#include "spatialps/weights.hpp"

namespace spatialps {

// Stratified target design for post-sampling: PPS allocations against an
// auxiliary size variable, observed convenience counts, and the hard-core
// proportionality constant k.
struct StratifiedDesign {
    std::vector<std::string> labels;
    std::vector<double> aux_size;       // s_l > 0
    std::vector<std::size_t> n_l;       // observed convenience counts
    std::vector<double> m_real;         // n * s_l / S (un-rounded PPS allocation)
    std::vector<std::size_t> m_int;     // largest-remainder rounding of m_real
    double k = 1.0;                     // min_l n_l / m_real_l, capped at 1
    std::size_t k_stratum = 0;          // index attaining the minimum
    std::vector<double> hardcore_real;  // k * m_real_l, computed in ratio form

    std::size_t total_n() const;
};

// Largest-remainder rounding of n*s_l/S preserving the total. Returns both
// the real-valued and the integer allocations.
void pps_allocation(const std::vector<double>& aux_size, std::size_t n,
                    std::vector<double>& m_real, std::vector<std::size_t>& m_int);

// k = min_l n_l/m_real_l capped at 1. The hard-core targets k*m_real_l are
// produced in the algebraically equivalent ratio form n_l* * s_l / s_l*
// (l* = the minimizing stratum), which keeps exactly-representable values
// like 2.5 exact instead of accumulating rounding noise through k.
StratifiedDesign make_design(const std::vector<std::string>& labels,
                             const std::vector<double>& aux_size,
                             const std::vector<std::size_t>& n_l);

// Flexible post-sampling targets:
//   n~_l = max( round(k m_real_l), round((1-zeta) n_l) )   (round half up)
// with a largest-remainder adjustment at zeta = 1 so the total equals
// round(sum k m_real_l). Each stratum sheds a fraction zeta of its data but
// never drops below its hard-core floor.
std::vector<std::size_t> flexible_targets(const StratifiedDesign& design, double zeta);

// Post-sampling ratios PS_l = m_real_l / n_l (> 1 marks under-represented
// strata, < 1 over-represented).
std::vector<double> ps_ratio(const StratifiedDesign& design);

// Uniform without-replacement retention of exactly targets[l] points in each
// stratum. Returns retained row indices in original order; deterministic for
// a given seed.
std::vector<std::size_t> apply_postsample(const PointSet& points,
                                          const std::vector<std::string>& labels,
                                          const std::vector<std::size_t>& targets,
                                          std::uint64_t seed);

struct ZetaSweepRow {
    double zeta = 0.0;
    std::size_t n = 0;
    double beta_hat = 0.0;
    double rho_hat = 0.0;
    double avar_beta = 0.0;
    double bias = 0.0;  // |beta_zeta - beta_1|
    double mse = 0.0;   // (beta_zeta - beta_1)^2 + avar_beta
    bool fit_ok = true;
    std::string note;  // failure description when !fit_ok
};

struct ZetaSweepResult {
    std::vector<ZetaSweepRow> rows;   // grid order
    std::size_t selected = 0;         // index into rows
    double beta_final = 0.0;          // beta_hat at the selected zeta
};

// Pure decision arithmetic shared by the sweep and published-table replays:
// bias proxy B = |beta_zeta - beta_1|, MSE = (beta_zeta - beta_1)^2 + avar,
// argmin over the grid with ties broken toward smaller zeta. `zetas` must be
// strictly increasing, start at 0, and end at 1.
ZetaSweepResult decide_zeta(const std::vector<double>& zetas, const std::vector<double>& beta_hat,
                            const std::vector<double>& avar_beta);

struct SweepOptions {
    std::vector<double> zeta_grid = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    std::uint64_t seed = 1;
    int deletion_replicates = 1;  // R: average estimates over R deletions
    std::string x_attr = "x1";
    std::string y_attr = "y1";
};

// Full sweep on one dataset: per zeta — targets, deletion, W rebuilt on the
// retained points, ML fit; then the decide_zeta arithmetic. Failed per-zeta
// fits are recorded and excluded from the argmin (a failed zeta = 1 reference
// aborts the sweep).
ZetaSweepResult zeta_sweep(const PointSet& points, const std::map<std::string, double>& aux_size,
                           const WeightsOptions& weights, const SweepOptions& options);

// CSV: zeta,n,beta_hat,rho_hat,avar_beta,bias,mse,selected (selected is 0/1,
// exactly one row flagged).
void write_sweep_csv(const ZetaSweepResult& result, const std::string& path);

}  // namespace spatialps
