#include "spatialps/postsample.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>

#include "spatialps/errors.hpp"
#include "spatialps/numfmt.hpp"
#include "spatialps/rng.hpp"
#include "spatialps/slm.hpp"

namespace spatialps {

namespace {

double round_half_up(double v) { return std::floor(v + 0.5); }

// Integerization preserving a fixed total: floor everything, then hand out
// the shortfall by descending fractional part, ties to the lower index.
std::vector<std::size_t> largest_remainder(const std::vector<double>& real_values,
                                           std::size_t total) {
    const std::size_t m = real_values.size();
    std::vector<std::size_t> out(m);
    std::vector<std::pair<double, std::size_t>> rem(m);
    std::size_t base_sum = 0;
    for (std::size_t l = 0; l < m; ++l) {
        const double fl = std::floor(real_values[l]);
        out[l] = static_cast<std::size_t>(fl);
        base_sum += out[l];
        rem[l] = {real_values[l] - fl, l};
    }
    if (base_sum > total) throw data_error("largest_remainder: floors already exceed the total");
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (std::size_t give = 0; give < total - base_sum; ++give) {
        if (give >= m) throw data_error("largest_remainder: total unreachable from floors");
        ++out[rem[give].second];
    }
    return out;
}

}  // namespace

std::size_t StratifiedDesign::total_n() const {
    return std::accumulate(n_l.begin(), n_l.end(), std::size_t{0});
}

void pps_allocation(const std::vector<double>& aux_size, std::size_t n,
                    std::vector<double>& m_real, std::vector<std::size_t>& m_int) {
    if (aux_size.empty()) throw data_error("pps_allocation: no strata");
    double total_aux = 0.0;
    for (double s : aux_size) {
        if (!(s > 0.0)) throw data_error("pps_allocation: aux sizes must be positive");
        total_aux += s;
    }
    m_real.resize(aux_size.size());
    for (std::size_t l = 0; l < aux_size.size(); ++l)
        m_real[l] = static_cast<double>(n) * aux_size[l] / total_aux;
    m_int = largest_remainder(m_real, n);
}

StratifiedDesign make_design(const std::vector<std::string>& labels,
                             const std::vector<double>& aux_size,
                             const std::vector<std::size_t>& n_l) {
    if (labels.size() != aux_size.size() || labels.size() != n_l.size())
        throw data_error("make_design: labels/aux/counts length mismatch");
    StratifiedDesign d;
    d.labels = labels;
    d.aux_size = aux_size;
    d.n_l = n_l;
    pps_allocation(aux_size, d.total_n(), d.m_real, d.m_int);

    // Hard-core constant: the stratum with the scarcest data relative to its
    // allocation pins k. m_real_l is proportional to s_l, so the argmin of
    // n_l/m_real_l is the argmin of n_l/s_l.
    for (std::size_t l = 0; l < labels.size(); ++l)
        if (n_l[l] == 0)
            throw data_error("make_design: stratum '" + labels[l] +
                             "' has no convenience data; hard-core post-sampling is infeasible");
    std::size_t l_star = 0;
    for (std::size_t l = 1; l < labels.size(); ++l)
        if (static_cast<double>(n_l[l]) / aux_size[l] <
            static_cast<double>(n_l[l_star]) / aux_size[l_star])
            l_star = l;
    d.k_stratum = l_star;
    d.k = std::min(1.0, static_cast<double>(n_l[l_star]) / d.m_real[l_star]);
    d.hardcore_real.resize(labels.size());
    for (std::size_t l = 0; l < labels.size(); ++l)
        d.hardcore_real[l] = d.k >= 1.0
                                 ? d.m_real[l]
                                 : static_cast<double>(n_l[l_star]) * aux_size[l] / aux_size[l_star];
    return d;
}

std::vector<std::size_t> flexible_targets(const StratifiedDesign& design, double zeta) {
    if (zeta < 0.0 || zeta > 1.0) throw data_error("flexible_targets: zeta must be in [0, 1]");
    const std::size_t m = design.labels.size();

    if (zeta >= 1.0) {
        // Pure hard-core: per-stratum rounding can overshoot the hard-core
        // total when several strata sit exactly on .5, so settle the column
        // with a largest-remainder pass against round(sum k m_real).
        double total_real = 0.0;
        for (double t : design.hardcore_real) total_real += t;
        return largest_remainder(design.hardcore_real,
                                 static_cast<std::size_t>(round_half_up(total_real)));
    }

    std::vector<std::size_t> out(m);
    for (std::size_t l = 0; l < m; ++l) {
        const double floor_l = round_half_up(design.hardcore_real[l]);
        const double shed_l = round_half_up((1.0 - zeta) * static_cast<double>(design.n_l[l]));
        out[l] = static_cast<std::size_t>(std::max(floor_l, shed_l));
    }
    return out;
}

std::vector<double> ps_ratio(const StratifiedDesign& design) {
    std::vector<double> ps(design.labels.size());
    for (std::size_t l = 0; l < design.labels.size(); ++l) {
        if (design.n_l[l] == 0)
            throw data_error("ps_ratio: stratum '" + design.labels[l] +
                             "' has no convenience data; ratio undefined");
        ps[l] = design.m_real[l] / static_cast<double>(design.n_l[l]);
    }
    return ps;
}

std::vector<std::size_t> apply_postsample(const PointSet& points,
                                          const std::vector<std::string>& labels,
                                          const std::vector<std::size_t>& targets,
                                          std::uint64_t seed) {
    if (labels.size() != targets.size())
        throw data_error("apply_postsample: labels/targets length mismatch");
    auto rows = points.stratum_rows(labels);
    std::vector<std::size_t> keep;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        if (targets[l] > rows[l].size())
            throw data_error("apply_postsample: target " + std::to_string(targets[l]) +
                             " exceeds stratum '" + labels[l] + "' count " +
                             std::to_string(rows[l].size()));
        Rng rng = Rng::stream(seed, Rng::tag("postsmp"), l);
        for (std::size_t j : rng.sample_without_replacement(rows[l].size(), targets[l]))
            keep.push_back(rows[l][j]);
    }
    std::sort(keep.begin(), keep.end());
    return keep;
}

ZetaSweepResult decide_zeta(const std::vector<double>& zetas, const std::vector<double>& beta_hat,
                            const std::vector<double>& avar_beta) {
    if (zetas.size() < 2 || zetas.front() != 0.0 || zetas.back() != 1.0)
        throw data_error("zeta grid must contain at least two points including 0 and 1");
    for (std::size_t i = 1; i < zetas.size(); ++i)
        if (zetas[i] <= zetas[i - 1]) throw data_error("zeta grid must be strictly increasing");
    if (beta_hat.size() != zetas.size() || avar_beta.size() != zetas.size())
        throw data_error("decide_zeta: estimate vectors must match the grid");

    ZetaSweepResult res;
    const double beta_ref = beta_hat.back();
    res.rows.resize(zetas.size());
    for (std::size_t i = 0; i < zetas.size(); ++i) {
        auto& r = res.rows[i];
        r.zeta = zetas[i];
        r.beta_hat = beta_hat[i];
        r.avar_beta = avar_beta[i];
        r.bias = std::abs(beta_hat[i] - beta_ref);
        r.mse = (beta_hat[i] - beta_ref) * (beta_hat[i] - beta_ref) + avar_beta[i];
    }
    res.selected = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < res.rows.size(); ++i)
        if (res.rows[i].mse < best) {  // strict: ties stay at the smaller zeta
            best = res.rows[i].mse;
            res.selected = i;
        }
    res.beta_final = res.rows[res.selected].beta_hat;
    return res;
}

ZetaSweepResult zeta_sweep(const PointSet& points, const std::map<std::string, double>& aux_size,
                           const WeightsOptions& weights, const SweepOptions& options) {
    const auto labels = points.stratum_labels();
    std::vector<double> aux(labels.size());
    for (std::size_t l = 0; l < labels.size(); ++l) {
        auto it = aux_size.find(labels[l]);
        if (it == aux_size.end())
            throw data_error("zeta_sweep: no auxiliary size for stratum '" + labels[l] + "'");
        aux[l] = it->second;
    }
    const auto counts = points.stratum_counts(labels);
    const StratifiedDesign design = make_design(labels, aux, counts);

    const auto& xv = points.attr(options.x_attr);
    const auto& yv = points.attr(options.y_attr);
    const auto& zetas = options.zeta_grid;
    if (zetas.size() < 2 || zetas.front() != 0.0 || zetas.back() != 1.0)
        throw data_error("zeta grid must contain at least two points including 0 and 1");

    const int R = std::max(1, options.deletion_replicates);
    std::vector<ZetaSweepRow> rows(zetas.size());
    for (std::size_t i = 0; i < zetas.size(); ++i) {
        auto& row = rows[i];
        row.zeta = zetas[i];
        const auto targets = flexible_targets(design, zetas[i]);
        row.n = std::accumulate(targets.begin(), targets.end(), std::size_t{0});
        double sum_beta = 0.0, sum_rho = 0.0, sum_avar = 0.0;
        try {
            for (int r = 0; r < R; ++r) {
                const std::uint64_t del_index =
                    (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(r);
                auto keep = apply_postsample(points, labels, targets,
                                             Rng::stream(options.seed, Rng::tag("del"), del_index)
                                                 .next_u64());
                PointSet sub = points.subset(keep);
                SpatialWeights w = rebuild_for_subset(weights, sub);
                Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
                Eigen::MatrixXd x(static_cast<Eigen::Index>(keep.size()), 1);
                for (std::size_t t = 0; t < keep.size(); ++t) {
                    y(static_cast<Eigen::Index>(t)) = yv[keep[t]];
                    x(static_cast<Eigen::Index>(t), 0) = xv[keep[t]];
                }
                SlmFit fit = fit_ml(y, x, w);
                sum_beta += fit.params.beta(0);
                sum_rho += fit.params.rho;
                sum_avar += fit.avar(0);
            }
            row.beta_hat = sum_beta / R;
            row.rho_hat = sum_rho / R;
            row.avar_beta = sum_avar / R;
        } catch (const numerical_error& err) {
            row.fit_ok = false;
            row.note = err.what();
        }
    }

    if (!rows.back().fit_ok)
        throw numerical_error("zeta_sweep: the zeta = 1 reference fit failed: " + rows.back().note);

    const double beta_ref = rows.back().beta_hat;
    ZetaSweepResult res;
    res.rows = std::move(rows);
    res.selected = res.rows.size() - 1;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < res.rows.size(); ++i) {
        auto& r = res.rows[i];
        if (!r.fit_ok) continue;
        r.bias = std::abs(r.beta_hat - beta_ref);
        r.mse = (r.beta_hat - beta_ref) * (r.beta_hat - beta_ref) + r.avar_beta;
        if (r.mse < best) {
            best = r.mse;
            res.selected = i;
        }
    }
    res.beta_final = res.rows[res.selected].beta_hat;
    return res;
}

void write_sweep_csv(const ZetaSweepResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "zeta,n,beta_hat,rho_hat,avar_beta,bias,mse,selected\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const auto& r = result.rows[i];
        out << format_double(r.zeta) << ',' << r.n << ',' << format_double(r.beta_hat) << ','
            << format_double(r.rho_hat) << ',' << format_double(r.avar_beta) << ','
            << format_double(r.bias) << ',' << format_double(r.mse) << ','
            << (i == result.selected ? 1 : 0) << '\n';
    }
    if (!out) throw data_error("write failed for '" + path + "'");
}

}  // namespace spatialps
