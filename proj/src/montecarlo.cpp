#include "spatialps/montecarlo.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>
#include <utility>

#include <Eigen/Dense>

#include <json.hpp>

#include "spatialps/errors.hpp"
#include "spatialps/geometry.hpp"
#include "spatialps/numfmt.hpp"
#include "spatialps/postsample.hpp"
#include "spatialps/rng.hpp"
#include "spatialps/slm.hpp"

namespace spatialps {

namespace {

const std::vector<std::string> kQuadrantLabels = {"Q1", "Q2", "Q3", "Q4"};

void validate_config(const McConfig& c) {
    if (c.replications < 1) throw data_error("replications must be >= 1");
    if (c.rho_grid.empty()) throw data_error("rho grid must be nonempty");
    if (c.zeta_grid.empty()) throw data_error("zeta grid must be nonempty");
    if (c.schemes.empty()) throw data_error("at least one weight scheme is required");
    if (!(c.sigma2 > 0.0)) throw data_error("sigma2 must be positive");
    if (!(c.x_var >= 0.0)) throw data_error("x variance must be nonnegative");
    if (c.threads < 1) throw data_error("threads must be >= 1");
    if (c.knn_k < 1) throw data_error("knn-k must be >= 1");
    for (double z : c.zeta_grid)
        if (!(z >= 0.0 && z <= 1.0))
            throw data_error("zeta " + format_double(z) + " outside [0, 1]");
    for (std::size_t l = 0; l < 4; ++l)
        if (c.convenience[l] > c.population[l])
            throw data_error("convenience count exceeds population in " + kQuadrantLabels[l]);
}

SpatialWeights zero_weights(std::size_t n) {
    SpatialWeights::Sparse m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    return SpatialWeights(std::move(m), false, true);
}

// Everything a replication needs, fixed for one (experiment, scheme) pass.
struct SchemePass {
    const McConfig* config = nullptr;
    const PointSet* sample = nullptr;
    const Eigen::VectorXd* x = nullptr;
    const std::vector<std::vector<std::size_t>>* targets = nullptr;  // per zeta
    WeightsOptions wopts;
    std::vector<Eigen::MatrixXd> a_inv;  // (I - rho W)^-1, per rho (dense: n is small)
    std::vector<Eigen::VectorXd> mu;     // a_inv * X beta, per rho
    double noise_sd = 1.0;
};

// Fills slots[(ri * nz + zi) * R + r] with beta_hat for one replication; NaN
// marks a failed fit. All randomness comes from streams keyed by r (and the
// deletion stream by (zeta index, r)), so the schedule cannot matter.
void run_replication(const SchemePass& pass, std::size_t r, double* slots) {
    const McConfig& cfg = *pass.config;
    const std::size_t n = pass.sample->size();
    const std::size_t nr = cfg.rho_grid.size();
    const std::size_t nz = cfg.zeta_grid.size();
    const std::size_t reps = static_cast<std::size_t>(cfg.replications);

    Eigen::VectorXd eps(static_cast<Eigen::Index>(n));
    {
        Rng er = Rng::stream(cfg.seed, Rng::tag("eps"), r);
        for (Eigen::Index i = 0; i < eps.size(); ++i) eps[i] = er.next_normal();
    }
    std::vector<Eigen::VectorXd> y(nr);
    for (std::size_t ri = 0; ri < nr; ++ri)
        y[ri] = pass.mu[ri] + pass.noise_sd * (pass.a_inv[ri] * eps);

    FitOptions fo;
    fo.compute_info = false;

    for (std::size_t zi = 0; zi < nz; ++zi) {
        // Deletion stream depends only on (zeta index, replication), never on
        // the scheme or rho: common random numbers across those dimensions.
        const std::uint64_t del_seed =
            Rng::stream(cfg.seed, Rng::tag("del"), (static_cast<std::uint64_t>(zi) << 32) | r)
                .next_u64();
        const std::vector<std::size_t> keep =
            apply_postsample(*pass.sample, kQuadrantLabels, (*pass.targets)[zi], del_seed);
        const PointSet sub = pass.sample->subset(keep);
        const SpatialWeights wz =
            cfg.degenerate_w ? zero_weights(sub.size()) : rebuild_for_subset(pass.wopts, sub);

        const Eigen::Index m = static_cast<Eigen::Index>(keep.size());
        Eigen::MatrixXd xz(m, 1);
        for (Eigen::Index j = 0; j < m; ++j) xz(j, 0) = (*pass.x)[keep[static_cast<std::size_t>(j)]];

        for (std::size_t ri = 0; ri < nr; ++ri) {
            Eigen::VectorXd yz(m);
            for (Eigen::Index j = 0; j < m; ++j)
                yz[j] = y[ri][static_cast<Eigen::Index>(keep[static_cast<std::size_t>(j)])];
            double beta_hat = std::numeric_limits<double>::quiet_NaN();
            try {
                beta_hat = fit_ml(yz, xz, wz, fo).params.beta(0);
            } catch (const numerical_error&) {
                // excluded from the aggregates, counted below
            }
            slots[(ri * nz + zi) * reps + r] = beta_hat;
        }
    }
}

}  // namespace

McSummary run_experiment(const McConfig& config) {
    validate_config(config);
    const auto t0 = std::chrono::steady_clock::now();

    // Fixed per experiment: the population pattern, the convenience sample,
    // and the regressor vector. Only the innovations and the deletions are
    // redrawn across replications.
    const PointSet population = generate_quadrant_points(config.population, config.seed);
    const std::vector<std::size_t> conv(config.convenience.begin(), config.convenience.end());
    const PointSet sample = convenience_sample(population, kQuadrantLabels, conv, config.seed);
    const std::size_t n = sample.size();

    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    {
        Rng xr = Rng::stream(config.seed, Rng::tag("xvec"));
        const double sd = std::sqrt(config.x_var);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = config.x_mean + sd * xr.next_normal();
    }

    // PPS design against the population counts; retention targets per zeta.
    std::vector<double> aux(4);
    for (std::size_t l = 0; l < 4; ++l) aux[l] = static_cast<double>(config.population[l]);
    const StratifiedDesign design = make_design(kQuadrantLabels, aux, sample.stratum_counts(kQuadrantLabels));
    const std::size_t nz = config.zeta_grid.size();
    std::vector<std::vector<std::size_t>> targets(nz);
    std::vector<double> retained_n(nz, 0.0);
    for (std::size_t zi = 0; zi < nz; ++zi) {
        targets[zi] = flexible_targets(design, config.zeta_grid[zi]);
        for (std::size_t t : targets[zi]) retained_n[zi] += static_cast<double>(t);
    }

    const std::size_t ns = config.schemes.size();
    const std::size_t nr = config.rho_grid.size();
    const std::size_t reps = static_cast<std::size_t>(config.replications);
    std::vector<double> slots(ns * nr * nz * reps, std::numeric_limits<double>::quiet_NaN());

    for (std::size_t si = 0; si < ns; ++si) {
        SchemePass pass;
        pass.config = &config;
        pass.sample = &sample;
        pass.x = &x;
        pass.targets = &targets;
        pass.wopts.scheme = config.schemes[si];
        pass.wopts.threshold = config.threshold;
        pass.wopts.knn_k = config.knn_k;
        pass.wopts.idist_exponent = config.idist_exponent;
        pass.wopts.row_standardize = config.row_standardize;
        pass.noise_sd = std::sqrt(config.sigma2);

        const SpatialWeights w_dgp =
            config.degenerate_w ? zero_weights(n) : build_weights(sample, pass.wopts);
        const auto [rho_lo, rho_hi] = w_dgp.admissible_rho_interval();
        for (double rho : config.rho_grid)
            if (!(rho > rho_lo && rho < rho_hi))
                throw data_error("rho " + format_double(rho) + " outside the admissible interval (" +
                                 format_double(rho_lo) + ", " + format_double(rho_hi) + ") for scheme " +
                                 scheme_name(config.schemes[si]));

        // n is a few hundred at most, so dense (I - rho W)^-1 per rho is both
        // the fastest way to draw y and trivially safe to share across threads.
        const Eigen::MatrixXd wd = Eigen::MatrixXd(w_dgp.matrix());
        const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(wd.rows(), wd.cols());
        pass.a_inv.resize(nr);
        pass.mu.resize(nr);
        for (std::size_t ri = 0; ri < nr; ++ri) {
            pass.a_inv[ri] = (id - config.rho_grid[ri] * wd).partialPivLu().inverse();
            pass.mu[ri] = pass.a_inv[ri] * (config.beta * x);
        }

        double* scheme_slots = slots.data() + si * nr * nz * reps;
        const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(config.threads), reps);
        if (nthreads <= 1) {
            for (std::size_t r = 0; r < reps; ++r) run_replication(pass, r, scheme_slots);
        } else {
            std::vector<std::thread> pool;
            std::vector<std::exception_ptr> errors(nthreads);
            for (std::size_t t = 0; t < nthreads; ++t) {
                pool.emplace_back([&, t] {
                    try {
                        for (std::size_t r = t; r < reps; r += nthreads)
                            run_replication(pass, r, scheme_slots);
                    } catch (...) {
                        errors[t] = std::current_exception();
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
    }

    McSummary summary;
    summary.config = config;
    summary.cells.reserve(ns * nr * nz);
    for (std::size_t si = 0; si < ns; ++si) {
        for (std::size_t ri = 0; ri < nr; ++ri) {
            for (std::size_t zi = 0; zi < nz; ++zi) {
                const double* cell = slots.data() + ((si * nr + ri) * nz + zi) * reps;
                McCell out;
                out.scheme = scheme_name(config.schemes[si]);
                out.rho = config.rho_grid[ri];
                out.zeta = config.zeta_grid[zi];
                out.mean_n = retained_n[zi];  // deletion hits its targets exactly

                double sum = 0.0;
                std::size_t m = 0;
                for (std::size_t r = 0; r < reps; ++r) {
                    if (std::isnan(cell[r])) continue;
                    sum += cell[r];
                    ++m;
                }
                out.reps_used = static_cast<int>(m);
                out.failures = static_cast<int>(reps - m);
                summary.total_failures += out.failures;
                if (m > 0) {
                    out.mean_beta = sum / static_cast<double>(m);
                    double ss = 0.0;
                    for (std::size_t r = 0; r < reps; ++r) {
                        if (std::isnan(cell[r])) continue;
                        const double d = cell[r] - out.mean_beta;
                        ss += d * d;
                    }
                    out.variance = m > 1 ? ss / static_cast<double>(m - 1) : 0.0;
                    const double err = out.mean_beta - config.beta;
                    out.bias2 = err * err;
                    out.mse = out.bias2 + out.variance;
                    const double sm2 = out.variance / static_cast<double>(m);
                    out.se_mean = std::sqrt(sm2);
                    out.se_bias2 = std::sqrt(4.0 * out.bias2 * sm2 + 2.0 * sm2 * sm2);
                    out.se_var = m > 1 ? out.variance * std::sqrt(2.0 / static_cast<double>(m - 1)) : 0.0;
                }
                summary.cells.push_back(std::move(out));
            }
        }
    }

    const std::size_t draws = ns * nr * nz * reps;
    if (summary.total_failures * 100 > static_cast<int>(draws))
        std::cerr << "warning: " << summary.total_failures << " of " << draws
                  << " fits failed (> 1%)\n";

    if (config.timing) {
        const auto t1 = std::chrono::steady_clock::now();
        summary.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    }
    return summary;
}

McSummary compare_weight_schemes(const McConfig& base, const std::vector<WeightScheme>& schemes,
                                 double rho) {
    McConfig config = base;
    config.schemes = schemes;
    config.rho_grid = {rho};
    // The innovation, deletion, and sampling streams never key on the scheme,
    // so the schemes see common random numbers by construction.
    return run_experiment(config);
}

void emit_curves(const McSummary& summary, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out << "scheme,rho,zeta,bias2,variance,mse,mean_n,reps,se_bias2,se_var\n";
    for (const McCell& c : summary.cells) {
        out << c.scheme << ',' << format_double(c.rho) << ',' << format_double(c.zeta) << ','
            << format_double(c.bias2) << ',' << format_double(c.variance) << ','
            << format_double(c.mse) << ',' << format_double(c.mean_n) << ',' << c.reps_used << ','
            << format_double(c.se_bias2) << ',' << format_double(c.se_var) << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

void write_manifest(const McSummary& summary, const std::string& path) {
    const McConfig& c = summary.config;
    nlohmann::ordered_json j;
    j["population"] = c.population;
    j["convenience"] = c.convenience;
    j["beta"] = c.beta;
    j["sigma2"] = c.sigma2;
    j["x_mean"] = c.x_mean;
    j["x_var"] = c.x_var;
    j["rho_grid"] = c.rho_grid;
    j["zeta_grid"] = c.zeta_grid;
    std::vector<std::string> names;
    for (WeightScheme s : c.schemes) names.push_back(scheme_name(s));
    j["schemes"] = names;
    j["replications"] = c.replications;
    j["seed"] = c.seed;
    if (c.threshold)
        j["threshold"] = *c.threshold;
    else
        j["threshold"] = nullptr;
    j["knn_k"] = c.knn_k;
    j["idist_exponent"] = c.idist_exponent;
    j["row_standardize"] = c.row_standardize;
    j["threads"] = c.threads;
    j["degenerate_w"] = c.degenerate_w;
    j["total_failures"] = summary.total_failures;
    nlohmann::ordered_json failed = nlohmann::ordered_json::array();
    for (const McCell& cell : summary.cells) {
        if (cell.failures == 0) continue;
        nlohmann::ordered_json f;
        f["scheme"] = cell.scheme;
        f["rho"] = cell.rho;
        f["zeta"] = cell.zeta;
        f["failures"] = cell.failures;
        failed.push_back(std::move(f));
    }
    j["cell_failures"] = std::move(failed);
    // Wall time is inherently non-reproducible, so it only appears when
    // explicitly requested; the default manifest is byte-stable across reruns.
    if (summary.wall_seconds >= 0.0) j["wall_seconds"] = summary.wall_seconds;

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw data_error("write failed: " + path);
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& key) {
    std::vector<double> out;
    for (const std::string& item : split_list(s)) out.push_back(parse_double(item, key));
    return out;
}

std::array<std::size_t, 4> parse_quad_counts(const std::string& s, const std::string& key) {
    const auto items = split_list(s);
    if (items.size() != 4) throw data_error(key + " needs exactly 4 comma-separated counts");
    std::array<std::size_t, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        const long v = parse_long(items[i], key);
        if (v < 0) throw data_error(key + " counts must be nonnegative");
        out[i] = static_cast<std::size_t>(v);
    }
    return out;
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "on" || s == "true" || s == "1") return true;
    if (s == "off" || s == "false" || s == "0") return false;
    throw data_error(key + " must be on/off, got '" + s + "'");
}

}  // namespace

McConfig read_mc_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open config " + path);
    McConfig c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string stripped = trim(line.substr(0, line.find('#')));
        if (stripped.empty()) continue;
        const std::size_t eq = stripped.find('=');
        if (eq == std::string::npos)
            throw data_error(path + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key == "population") {
            c.population = parse_quad_counts(value, key);
        } else if (key == "convenience") {
            c.convenience = parse_quad_counts(value, key);
        } else if (key == "beta") {
            c.beta = parse_double(value, key);
        } else if (key == "sigma2") {
            c.sigma2 = parse_double(value, key);
        } else if (key == "x_mean") {
            c.x_mean = parse_double(value, key);
        } else if (key == "x_var") {
            c.x_var = parse_double(value, key);
        } else if (key == "rho_grid") {
            c.rho_grid = parse_double_list(value, key);
        } else if (key == "zeta_grid") {
            c.zeta_grid = parse_double_list(value, key);
        } else if (key == "schemes") {
            c.schemes.clear();
            for (const std::string& name : split_list(value)) c.schemes.push_back(scheme_from_name(name));
        } else if (key == "replications") {
            c.replications = static_cast<int>(parse_long(value, key));
        } else if (key == "seed") {
            c.seed = static_cast<std::uint64_t>(parse_long(value, key));
        } else if (key == "threshold") {
            c.threshold = parse_double(value, key);
        } else if (key == "knn_k") {
            c.knn_k = static_cast<int>(parse_long(value, key));
        } else if (key == "idist_exponent") {
            c.idist_exponent = parse_double(value, key);
        } else if (key == "row_standardize") {
            c.row_standardize = parse_bool(value, key);
        } else if (key == "threads") {
            c.threads = static_cast<int>(parse_long(value, key));
        } else if (key == "timing") {
            c.timing = parse_bool(value, key);
        } else if (key == "degenerate_w") {
            c.degenerate_w = parse_bool(value, key);
        } else {
            throw data_error(path + ":" + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return c;
}

}  // namespace spatialps
