// Acceptance battery: ten end-to-end checks against the published tables and
// the estimator's numerical contracts. Each check prints exactly one
// [PASS]/[FAIL] line with the measured quantities; the exit status is the
// number of failed checks. `--criterion N` runs a single check (the ctest
// wiring); no arguments runs the whole battery.
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spatialps/errors.hpp"
#include "spatialps/geometry.hpp"
#include "spatialps/montecarlo.hpp"
#include "spatialps/pointset.hpp"
#include "spatialps/postsample.hpp"
#include "spatialps/rng.hpp"
#include "spatialps/slm.hpp"
#include "spatialps/weights.hpp"

using namespace spatialps;

namespace {

const std::vector<std::string> kLabels{"Q1", "Q2", "Q3", "Q4"};
const std::vector<double> kAux{2000.0, 200.0, 1000.0, 2400.0};
const std::vector<std::size_t> kObserved{70, 20, 150, 30};

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(4);
    ss << v;
    return ss.str();
}

struct Instance {
    SpatialWeights w;
    Eigen::MatrixXd x;
    Eigen::VectorXd y;
};

Instance make_instance(std::uint64_t seed, std::array<std::size_t, 4> counts, double rho_true) {
    const PointSet pts = generate_quadrant_points(counts, seed);
    SpatialWeights w = build_weights(pts, WeightsOptions{});
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd x(n, 1);
    Rng xr = Rng::stream(seed, Rng::tag("accx"));
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = 10.0 + xr.next_normal();
    SlmParams truth;
    truth.beta = Eigen::VectorXd::Constant(1, 1.0);
    truth.rho = rho_true;
    truth.sigma2 = 1.0;
    Eigen::VectorXd y = simulate(x, w, truth, seed * 2 + 1);
    return {std::move(w), std::move(x), std::move(y)};
}

// ---- criterion 1: exact retention schedule ---------------------------------

bool criterion1(std::string& d) {
    const StratifiedDesign design = make_design(kLabels, kAux, kObserved);
    const std::vector<double> zetas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::vector<std::size_t> expected{270, 222, 174, 126, 89, 70};
    std::vector<std::size_t> got;
    for (double z : zetas) {
        std::size_t total = 0;
        for (std::size_t t : flexible_targets(design, z)) total += t;
        got.push_back(total);
    }
    std::ostringstream ss;
    ss << "retained totals (";
    for (std::size_t i = 0; i < got.size(); ++i) ss << (i ? ", " : "") << got[i];
    ss << ") vs (270, 222, 174, 126, 89, 70)";
    d = ss.str();
    return got == expected;
}

// ---- criterion 2: published sweep decision replay --------------------------

bool criterion2(std::string& d) {
    const std::vector<double> zetas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::vector<double> beta{3833.99, 3901.60, 4085.39, 3992.95, 4194.31, 4214.90};
    const std::vector<double> mse{154687.83, 110405.05, 33022.39, 72865.23, 44804.66, 59591.92};
    std::vector<double> avar(6);
    for (std::size_t i = 0; i < 6; ++i) {
        const double b = beta[i] - beta.back();
        avar[i] = mse[i] - b * b;  // variance component implied by the table
        if (!(avar[i] > 0.0)) {
            d = "implied avar not positive at zeta " + fmt(zetas[i]);
            return false;
        }
    }
    const ZetaSweepResult r = decide_zeta(zetas, beta, avar);
    const double rel0 = 100.0 * r.rows[0].bias / std::abs(beta.back());
    const double sel = r.rows[r.selected].zeta;
    d = "rel bias " + fmt(rel0) + "% at zeta 0 (want 9.0 +/- 0.05), selected zeta " + fmt(sel) +
        " (want 0.4)";
    return std::abs(rel0 - 9.0) < 0.05 && sel == 0.4;
}

// ---- criterion 3: ML vs exhaustive grid ------------------------------------

// From-scratch concentrated objective: direct OLS at each rho on a 1e-5 grid,
// then the parabola through the best grid point and its two neighbors (the
// vertex removes the half-step quantization, which a 1e-6 relative beta
// tolerance could not absorb; the objective is smooth at the optimum).
void grid_oracle(const Instance& in, double& rho_out, double& beta_out) {
    const Eigen::MatrixXd wd = Eigen::MatrixXd(in.w.matrix());
    Eigen::EigenSolver<Eigen::MatrixXd> es(wd, false);
    std::vector<double> lam(static_cast<std::size_t>(wd.rows()));
    for (std::size_t i = 0; i < lam.size(); ++i)
        lam[i] = es.eigenvalues()[static_cast<Eigen::Index>(i)].real();
    const double lam_min = *std::min_element(lam.begin(), lam.end());
    const double lo = 1.0 / lam_min + 1e-6, hi = 1.0 - 1e-6;

    const auto n = in.y.size();
    const Eigen::VectorXd wy = wd * in.y;
    const auto qr = in.x.colPivHouseholderQr();
    const auto value = [&](double rho, double* beta) {
        const Eigen::VectorXd ay = in.y - rho * wy;
        const Eigen::VectorXd b = qr.solve(ay);
        const double ee = (ay - in.x * b).squaredNorm();
        double ld = 0.0;
        for (double l : lam) ld += std::log(1.0 - rho * l);
        if (beta) *beta = b(0);
        const double s2 = ee / static_cast<double>(n);
        return -0.5 * static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * s2) + 1.0) + ld;
    };

    const double step = 1e-5;
    const auto points = static_cast<std::size_t>(std::floor((hi - lo) / step));
    double best = -std::numeric_limits<double>::infinity();
    std::size_t best_k = 0;
    for (std::size_t k = 0; k <= points; ++k) {
        const double v = value(lo + static_cast<double>(k) * step, nullptr);
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    double rho = lo + static_cast<double>(best_k) * step;
    if (best_k > 0 && best_k < points) {
        const double fm = value(rho - step, nullptr);
        const double fp = value(rho + step, nullptr);
        const double denom = fm - 2.0 * best + fp;
        if (denom < 0.0) rho += 0.5 * step * (fm - fp) / denom;
    }
    rho_out = rho;
    value(rho, &beta_out);
}

bool criterion3(std::string& d) {
    double max_drho = 0.0, max_rel_dbeta = 0.0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        Rng cfg = Rng::stream(seed, Rng::tag("accrho"));
        const double rho_true = -0.4 + 1.2 * cfg.next_double();
        const Instance in = make_instance(seed, {4, 3, 3, 2}, rho_true);  // n = 12
        const SlmFit fit = fit_ml(in.y, in.x, in.w);
        double rho_g = 0.0, beta_g = 0.0;
        grid_oracle(in, rho_g, beta_g);
        max_drho = std::max(max_drho, std::abs(fit.params.rho - rho_g));
        max_rel_dbeta = std::max(max_rel_dbeta,
                                 std::abs(fit.params.beta(0) - beta_g) / std::abs(fit.params.beta(0)));
    }
    d = "50 instances, n = 12: max |drho| " + fmt(max_drho) + " (limit 1e-4), max rel dbeta " +
        fmt(max_rel_dbeta) + " (limit 1e-6)";
    return max_drho < 1e-4 && max_rel_dbeta < 1e-6;
}

// ---- criterion 4: OLS reduction --------------------------------------------

bool criterion4(std::string& d) {
    double max_dbeta = 0.0, max_ds2 = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Instance in = make_instance(seed, {8, 6, 7, 5}, 0.3);
        FitOptions opts;
        opts.pin_rho = true;
        opts.pinned_rho = 0.0;
        const SlmFit fit = fit_ml(in.y, in.x, in.w, opts);
        // closed form for the single-regressor case
        const double beta = in.x.col(0).dot(in.y) / in.x.col(0).squaredNorm();
        const double s2 =
            (in.y - beta * in.x.col(0)).squaredNorm() / static_cast<double>(in.y.size());
        max_dbeta = std::max(max_dbeta, std::abs(fit.params.beta(0) - beta));
        max_ds2 = std::max(max_ds2, std::abs(fit.params.sigma2 - s2));
    }
    d = "20 instances: max |dbeta| " + fmt(max_dbeta) + ", max |dsigma2| " + fmt(max_ds2) +
        " (limit 1e-8)";
    return max_dbeta < 1e-8 && max_ds2 < 1e-8;
}

// ---- criterion 5: information matrix vs finite differences -----------------

Eigen::MatrixXd fd_hessian(const Instance& in, const SlmParams& at) {
    const auto eval = [&](const Eigen::VectorXd& th) {
        SlmParams p;
        p.beta = th.head(th.size() - 2);
        p.rho = th(th.size() - 2);
        p.sigma2 = th(th.size() - 1);
        return loglik(p, in.y, in.x, in.w);
    };
    Eigen::VectorXd th(3);
    th << at.beta(0), at.rho, at.sigma2;
    Eigen::MatrixXd hess(3, 3);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const double hi = 1e-5 * std::max(1.0, std::abs(th(i)));
        for (Eigen::Index j = 0; j < 3; ++j) {
            const double hj = 1e-5 * std::max(1.0, std::abs(th(j)));
            if (i == j) {
                Eigen::VectorXd t = th;
                const double f0 = eval(t);
                t(i) = th(i) + hi;
                const double fp = eval(t);
                t(i) = th(i) - hi;
                const double fm = eval(t);
                hess(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
            } else {
                double sum = 0.0;
                for (int si : {1, -1})
                    for (int sj : {1, -1}) {
                        Eigen::VectorXd t = th;
                        t(i) += si * hi;
                        t(j) += sj * hj;
                        sum += si * sj * eval(t);
                    }
                hess(i, j) = sum / (4.0 * hi * hj);
            }
        }
    }
    return hess;
}

bool criterion5(std::string& d) {
    double max_rel = 0.0;
    bool zero_block = true;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const Instance in = make_instance(seed, {5, 4, 3, 3}, 0.4);  // n = 15
        const SlmFit fit = fit_ml(in.y, in.x, in.w);
        if (!fit.converged) {
            d = "fit did not converge at seed " + std::to_string(seed);
            return false;
        }
        const Eigen::MatrixXd expected = -fd_hessian(in, fit.params);
        for (Eigen::Index i = 0; i < 3; ++i)
            for (Eigen::Index j = 0; j < 3; ++j) {
                // relative error with a unit floor: entries near zero (the
                // beta-sigma2 block) are measured against 1, everything else
                // against its own magnitude
                const double rel = std::abs(fit.info(i, j) - expected(i, j)) /
                                   std::max(1.0, std::abs(expected(i, j)));
                max_rel = std::max(max_rel, rel);
            }
        zero_block = zero_block && fit.info(0, 2) == 0.0 && fit.info(2, 0) == 0.0;
    }
    d = "20 instances, n = 15: max rel error " + fmt(max_rel) +
        " (limit 1e-4), beta-sigma2 block " + (zero_block ? "exactly 0" : "NOT zero");
    return max_rel < 1e-4 && zero_block;
}

// ---- criterion 6: asymptotic vs empirical variance -------------------------

bool criterion6(std::string& d) {
    // proper (simple random) sampling of 270 locations from the population
    const PointSet pop = generate_quadrant_points({2000, 200, 1000, 2400}, 1);
    Rng sr = Rng::stream(1, Rng::tag("accsrs"));
    std::vector<std::size_t> rows = sr.sample_without_replacement(pop.size(), 270);
    std::sort(rows.begin(), rows.end());
    const PointSet sample = pop.subset(rows);
    const SpatialWeights w = build_weights(sample, WeightsOptions{});

    const Eigen::Index n = 270;
    Eigen::MatrixXd x(n, 1);
    Rng xr = Rng::stream(1, Rng::tag("accx6"));
    for (Eigen::Index i = 0; i < n; ++i) x(i, 0) = 10.0 + xr.next_normal();

    const Eigen::MatrixXd wd = Eigen::MatrixXd(w.matrix());
    const Eigen::MatrixXd a_inv =
        (Eigen::MatrixXd::Identity(n, n) - 0.4 * wd).partialPivLu().inverse();
    const Eigen::VectorXd mu = a_inv * x.col(0);  // beta = 1

    const int reps = 500;
    std::vector<double> beta_hat;
    beta_hat.reserve(reps);
    double avar_sum = 0.0;
    for (int r = 0; r < reps; ++r) {
        Eigen::VectorXd eps(n);
        Rng er = Rng::stream(1, Rng::tag("acceps"), static_cast<std::uint64_t>(r));
        for (Eigen::Index i = 0; i < n; ++i) eps[i] = er.next_normal();
        const Eigen::VectorXd y = mu + a_inv * eps;
        const SlmFit fit = fit_ml(y, x, w);
        beta_hat.push_back(fit.params.beta(0));
        avar_sum += fit.avar(0);
    }
    double mean = 0.0;
    for (double b : beta_hat) mean += b;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (double b : beta_hat) var += (b - mean) * (b - mean);
    var /= static_cast<double>(reps - 1);
    const double avar = avar_sum / static_cast<double>(reps);
    const double ratio = avar / var;
    d = "n = 270, rho = 0.4, 500 reps: mean avar " + fmt(avar) + " vs empirical var " + fmt(var) +
        " (ratio " + fmt(ratio) + ", limit [0.8, 1.2])";
    return std::abs(avar - var) / var < 0.20;
}

// ---- criterion 7: bias/variance curve shapes -------------------------------

bool criterion7(std::string& d) {
    McConfig c;
    c.replications = 200;
    c.seed = 1;
    const McSummary s = run_experiment(c);  // 5 rho x 6 zeta, threshold W
    const std::size_t nz = c.zeta_grid.size();
    const auto cell = [&](std::size_t ri, std::size_t zi) -> const McCell& {
        return s.cells[ri * nz + zi];
    };

    // (a) bias^2 drops from zeta 0 to zeta 1 by >= 3 se, every rho
    bool a = true;
    double a_worst = std::numeric_limits<double>::infinity();
    double a_rho = 0.0;
    for (std::size_t ri = 0; ri < c.rho_grid.size(); ++ri) {
        const McCell& z0 = cell(ri, 0);
        const McCell& z1 = cell(ri, nz - 1);
        const double se = std::hypot(z0.se_bias2, z1.se_bias2);
        const double margin = (z0.bias2 - z1.bias2) / se;
        if (margin < a_worst) {
            a_worst = margin;
            a_rho = z0.rho;
        }
        a = a && margin >= 3.0;
    }

    // (b) bias^2 nonincreasing in zeta up to 2 se between adjacent points
    bool b = true;
    double b_worst = -std::numeric_limits<double>::infinity();
    std::string b_where = "-";
    for (std::size_t ri = 0; ri < c.rho_grid.size(); ++ri)
        for (std::size_t zi = 0; zi + 1 < nz; ++zi) {
            const McCell& lo = cell(ri, zi);
            const McCell& hi = cell(ri, zi + 1);
            const double se = std::hypot(lo.se_bias2, hi.se_bias2);
            const double rise = (hi.bias2 - lo.bias2) / se;
            if (rise > b_worst) {
                b_worst = rise;
                b_where = "rho " + fmt(lo.rho) + ", zeta " + fmt(lo.zeta) + "->" + fmt(hi.zeta);
            }
            b = b && rise <= 2.0;
        }

    // (c) variance rises from zeta 0 to zeta 1 by >= 3 se, every rho
    bool cc = true;
    double c_worst = std::numeric_limits<double>::infinity();
    for (std::size_t ri = 0; ri < c.rho_grid.size(); ++ri) {
        const McCell& z0 = cell(ri, 0);
        const McCell& z1 = cell(ri, nz - 1);
        const double se = std::hypot(z0.se_var, z1.se_var);
        c_worst = std::min(c_worst, (z1.variance - z0.variance) / se);
        cc = cc && (z1.variance - z0.variance) / se >= 3.0;
    }

    // (d) MSE-minimizing zeta interior for rho <= 0.6
    bool dd = true;
    std::string d_list;
    for (std::size_t ri = 0; ri < c.rho_grid.size(); ++ri) {
        if (c.rho_grid[ri] > 0.6) continue;
        std::size_t best = 0;
        for (std::size_t zi = 1; zi < nz; ++zi)
            if (cell(ri, zi).mse < cell(ri, best).mse) best = zi;
        const double z = c.zeta_grid[best];
        d_list += (d_list.empty() ? "" : ",") + fmt(z);
        dd = dd && z > 0.0 && z < 1.0;
    }

    d = std::string("(a) bias2 drop>=3se: ") + (a ? "ok" : "FAIL") + " [min " + fmt(a_worst) +
        "se at rho " + fmt(a_rho) + "]; (b) nonincreasing<=2se: " + (b ? "ok" : "FAIL") +
        " [max rise " + fmt(b_worst) + "se at " + b_where + "]; (c) var rise>=3se: " +
        (cc ? "ok" : "FAIL") + " [min " + fmt(c_worst) + "se]; (d) interior argmin: " +
        (dd ? "ok" : "FAIL") + " [zeta " + d_list + "]";
    return a && b && cc && dd;
}

// ---- criterion 8: weight-scheme ordering under common random numbers -------

bool criterion8(std::string& d) {
    McConfig base;
    base.replications = 200;
    base.seed = 1;
    const McSummary s = compare_weight_schemes(
        base, {WeightScheme::threshold, WeightScheme::knn, WeightScheme::inverse_distance}, 0.2);
    const std::size_t nz = base.zeta_grid.size();
    const auto bias = [&](std::size_t scheme, std::size_t zi) {
        return std::abs(s.cells[scheme * nz + zi].mean_beta - base.beta);
    };
    const auto se = [&](std::size_t scheme, std::size_t zi) {
        return s.cells[scheme * nz + zi].se_mean;
    };

    // ordering bias(knn) >= bias(threshold) >= bias(idist) at zeta 0.2
    const std::size_t z02 = 1;
    bool ordered = true;
    std::string order_note;
    const auto gap_check = [&](std::size_t hi, std::size_t lo, const std::string& name) {
        const double gap = bias(hi, z02) - bias(lo, z02);
        const double sg = std::hypot(se(hi, z02), se(lo, z02));
        if (gap >= 2.0 * sg)
            order_note += name + " +" + fmt(gap / sg) + "se; ";
        else if (gap > -2.0 * sg)
            order_note += name + " tie (" + fmt(gap / sg) + "se); ";
        else {
            order_note += name + " INVERTED (" + fmt(gap / sg) + "se); ";
            ordered = false;
        }
    };
    gap_check(1, 0, "knn>=thr");   // scheme indices: 0 thr, 1 knn, 2 idist
    gap_check(0, 2, "thr>=idist");

    // agreement within 2 se for zeta >= 0.4
    bool agree = true;
    double worst = 0.0;
    for (std::size_t zi = 2; zi < nz; ++zi)
        for (std::size_t s1 = 0; s1 < 3; ++s1)
            for (std::size_t s2 = s1 + 1; s2 < 3; ++s2) {
                const double gap = std::abs(bias(s1, zi) - bias(s2, zi));
                const double sg = std::hypot(se(s1, zi), se(s2, zi));
                worst = std::max(worst, gap / sg);
                agree = agree && gap <= 2.0 * sg;
            }

    d = "zeta 0.2: " + order_note + "zeta>=0.4 agreement: " + (agree ? "ok" : "FAIL") +
        " [worst gap " + fmt(worst) + "se, limit 2]";
    return ordered && agree;
}

// ---- criterion 9: byte-level determinism through the CLI -------------------

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool run_cli(const std::string& args) {
    const std::string cmd = std::string(CLI_BIN) + " " + args + " > acc9/last.log 2>&1";
    return std::system(cmd.c_str()) == 0;
}

bool criterion9(std::string& d) {
    namespace fs = std::filesystem;
    fs::remove_all("acc9");
    fs::create_directory("acc9");
    bool ok = true;
    std::string note;

    const auto expect = [&](bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            note += what + " FAILED; ";
        }
    };

    expect(run_cli("simulate --seed 42 --rho 0.4 --out acc9/sim_a.csv"), "simulate run 1");
    expect(run_cli("simulate --seed 42 --rho 0.4 --out acc9/sim_b.csv"), "simulate run 2");
    expect(!slurp("acc9/sim_a.csv").empty(), "simulate output nonempty");
    expect(slurp("acc9/sim_a.csv") == slurp("acc9/sim_b.csv"), "simulate rerun identical");

    const std::string aux = "--aux Q1=2000,Q2=200,Q3=1000,Q4=2400";
    expect(run_cli("sweep --data acc9/sim_a.csv " + aux + " --seed 7 --out acc9/sw_a.csv"),
           "sweep run 1");
    expect(run_cli("sweep --data acc9/sim_a.csv " + aux + " --seed 7 --out acc9/sw_b.csv"),
           "sweep run 2");
    expect(slurp("acc9/sw_a.csv") == slurp("acc9/sw_b.csv"), "sweep rerun identical");

    const std::string mc = "mc --rho-grid 0,0.4 --replicates 40 --seed 3 ";
    expect(run_cli(mc + "--out acc9/mc_a.csv --manifest acc9/mc_a.json"), "mc run 1");
    expect(run_cli(mc + "--out acc9/mc_b.csv --manifest acc9/mc_b.json"), "mc run 2");
    expect(run_cli(mc + "--threads 3 --out acc9/mc_t.csv --manifest acc9/mc_t.json"),
           "mc run threads=3");
    expect(slurp("acc9/mc_a.csv") == slurp("acc9/mc_b.csv"), "mc rerun identical");
    expect(slurp("acc9/mc_a.json") == slurp("acc9/mc_b.json"), "mc manifest identical");
    expect(slurp("acc9/mc_a.csv") == slurp("acc9/mc_t.csv"), "mc curves thread-invariant");

    fs::remove_all("acc9");
    d = ok ? "simulate/sweep/mc reruns byte-identical, mc curves identical at threads 1 vs 3"
           : note;
    return ok;
}

// ---- criterion 10: log-det backend agreement -------------------------------

bool criterion10(std::string& d) {
    double max_diff = 0.0;
    for (std::uint64_t i = 0; i < 100; ++i) {
        Rng rng = Rng::stream(1, Rng::tag("accld"), i);
        std::array<std::size_t, 4> counts{};
        for (auto& c : counts) c = 10 + rng.next_below(40);  // n in [40, 200]
        WeightsOptions opts;
        opts.scheme = std::array<WeightScheme, 3>{WeightScheme::threshold, WeightScheme::knn,
                                                  WeightScheme::inverse_distance}[i % 3];
        opts.row_standardize = i % 4 != 3;
        const PointSet pts = generate_quadrant_points(counts, i + 1);
        const SpatialWeights w = build_weights(pts, opts);
        const auto [lo, hi] = w.admissible_rho_interval();
        const double margin = 0.05 * (hi - lo);
        const double rho = lo + margin + (hi - lo - 2.0 * margin) * rng.next_double();
        const double diff = std::abs(log_det(w, rho, LogDetBackend::eigenvalues) -
                                     log_det(w, rho, LogDetBackend::sparse_lu));
        max_diff = std::max(max_diff, diff);
    }
    d = "100 (W, rho) pairs, n <= 200: max |eig - lu| " + fmt(max_diff) + " (limit 1e-8)";
    return max_diff < 1e-8;
}

int run_criterion(int k) {
    std::string detail;
    bool pass = false;
    try {
        switch (k) {
            case 1: pass = criterion1(detail); break;
            case 2: pass = criterion2(detail); break;
            case 3: pass = criterion3(detail); break;
            case 4: pass = criterion4(detail); break;
            case 5: pass = criterion5(detail); break;
            case 6: pass = criterion6(detail); break;
            case 7: pass = criterion7(detail); break;
            case 8: pass = criterion8(detail); break;
            case 9: pass = criterion9(detail); break;
            case 10: pass = criterion10(detail); break;
            default:
                std::cerr << "no criterion " << k << "\n";
                return 1;
        }
    } catch (const std::exception& e) {
        pass = false;
        detail = std::string("unexpected exception: ") + e.what();
    }
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << k << ": " << detail << std::endl;
    return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--criterion" && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else if (arg == "--help") {
            std::cout << "usage: acceptance [--criterion N]\n";
            return 0;
        } else {
            std::cerr << "unknown argument: " << arg << "\n";
            return 2;
        }
    }
    if (only != 0) return run_criterion(only);
    int failures = 0;
    for (int k = 1; k <= 10; ++k) failures += run_criterion(k);
    return failures;
}
