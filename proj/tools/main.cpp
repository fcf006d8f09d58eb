// Command-line front end: simulation, fitting, post-sampling, zeta sweeps,
// Monte Carlo experiments, listings ingestion, and the hedonic pipeline.
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>

#include "spatialps/errors.hpp"
#include "spatialps/geometry.hpp"
#include "spatialps/io.hpp"
#include "spatialps/montecarlo.hpp"
#include "spatialps/numfmt.hpp"
#include "spatialps/pointset.hpp"
#include "spatialps/postsample.hpp"
#include "spatialps/rng.hpp"
#include "spatialps/slm.hpp"
#include "spatialps/weights.hpp"

using namespace spatialps;

namespace {

std::vector<double> parse_grid(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_double(item, what));
    if (out.empty()) throw data_error(what + " is empty");
    return out;
}

std::array<std::size_t, 4> parse_counts(const std::string& csv, const std::string& what) {
    const std::vector<double> v = parse_grid(csv, what);
    if (v.size() != 4) throw data_error(what + " needs exactly 4 comma-separated counts");
    std::array<std::size_t, 4> out{};
    for (std::size_t i = 0; i < 4; ++i) {
        if (v[i] < 0 || v[i] != static_cast<double>(static_cast<long long>(v[i])))
            throw data_error(what + " entries must be nonnegative integers");
        out[i] = static_cast<std::size_t>(v[i]);
    }
    return out;
}

std::map<std::string, double> parse_aux(const std::string& spec) {
    std::map<std::string, double> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos)
            throw data_error("--aux expects label=size pairs, got '" + item + "'");
        const std::string label = item.substr(0, eq);
        const double size = parse_double(item.substr(eq + 1), "--aux " + label);
        if (!out.emplace(label, size).second) throw data_error("--aux repeats label '" + label + "'");
    }
    if (out.empty()) throw data_error("--aux is empty");
    return out;
}

Eigen::MatrixXd design_matrix(const PointSet& ps, const std::string& x_attr) {
    if (!ps.has_attr(x_attr)) throw data_error("no attribute column '" + x_attr + "'");
    const std::vector<double>& x = ps.attr(x_attr);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(ps.size()), 1);
    for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, 0) = x[static_cast<std::size_t>(i)];
    return X;
}

Eigen::VectorXd response_vector(const PointSet& ps, const std::string& y_attr) {
    if (!ps.has_attr(y_attr)) throw data_error("no attribute column '" + y_attr + "'");
    const std::vector<double>& y = ps.attr(y_attr);
    Eigen::VectorXd out(static_cast<Eigen::Index>(ps.size()));
    for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = y[static_cast<std::size_t>(i)];
    return out;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw data_error("write failed: " + path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial lag model estimation with post-sampling correction"};
    app.require_subcommand(1);

    // Global flags, usable before or after the subcommand name.
    std::uint64_t seed = 1;
    std::string weights_name = "threshold";
    int knn_k = 4;
    double threshold_value = 0.0;
    std::string row_std = "on";
    std::string zeta_grid_str = "0,0.2,0.4,0.6,0.8,1";
    int replicates = 1;
    std::string out_path;
    app.add_option("--seed", seed, "Base RNG seed")->capture_default_str();
    auto* opt_weights = app.add_option("--weights", weights_name, "Spatial weights scheme")
                            ->check(CLI::IsMember({"threshold", "knn", "idist"}))
                            ->capture_default_str();
    app.add_option("--knn-k", knn_k, "Neighbors for the knn scheme")->capture_default_str();
    auto* opt_threshold =
        app.add_option("--threshold", threshold_value,
                       "Threshold distance (default: smallest distance leaving no point isolated)");
    app.add_option("--row-standardize", row_std, "Row-standardize W")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    auto* opt_zeta = app.add_option("--zeta-grid", zeta_grid_str, "Post-sampling grid (must span 0..1)")
                         ->capture_default_str();
    auto* opt_reps =
        app.add_option("--replicates", replicates,
                       "Deletion replicates (sweep/hedonic) or MC replications (mc)")
            ->capture_default_str();
    app.add_option("--out", out_path, "Primary output file");

    const auto weight_options = [&] {
        WeightsOptions w;
        w.scheme = scheme_from_name(weights_name);
        w.knn_k = knn_k;
        if (opt_threshold->count() > 0) w.threshold = threshold_value;
        w.row_standardize = row_std == "on";
        return w;
    };
    const auto require_out = [&]() -> const std::string& {
        if (out_path.empty()) throw CLI::RequiredError("--out");
        return out_path;
    };

    // --- simulate ---------------------------------------------------------
    auto* cmd_sim = app.add_subcommand("simulate", "Draw one convenience sample and its response");
    cmd_sim->fallthrough();
    std::string sim_pop = "2000,200,1000,2400";
    std::string sim_conv = "70,20,150,30";
    double sim_rho = 0.4, sim_beta = 1.0, sim_sigma2 = 1.0, sim_xmean = 10.0, sim_xvar = 1.0;
    cmd_sim->add_option("--population", sim_pop, "Population counts per quadrant")->capture_default_str();
    cmd_sim->add_option("--convenience", sim_conv, "Convenience counts per quadrant")->capture_default_str();
    cmd_sim->add_option("--rho", sim_rho, "Spatial lag coefficient")->capture_default_str();
    cmd_sim->add_option("--beta", sim_beta, "Regression slope")->capture_default_str();
    cmd_sim->add_option("--sigma2", sim_sigma2, "Innovation variance")->capture_default_str();
    cmd_sim->add_option("--x-mean", sim_xmean, "Regressor mean")->capture_default_str();
    cmd_sim->add_option("--x-var", sim_xvar, "Regressor variance")->capture_default_str();
    cmd_sim->callback([&] {
        const PointSet population = generate_quadrant_points(parse_counts(sim_pop, "--population"), seed);
        const auto conv = parse_counts(sim_conv, "--convenience");
        const PointSet sample =
            convenience_sample(population, {"Q1", "Q2", "Q3", "Q4"},
                               std::vector<std::size_t>(conv.begin(), conv.end()), seed);
        const Eigen::Index n = static_cast<Eigen::Index>(sample.size());
        Eigen::MatrixXd X(n, 1);
        Rng xr = Rng::stream(seed, Rng::tag("xvec"));
        for (Eigen::Index i = 0; i < n; ++i) X(i, 0) = sim_xmean + std::sqrt(sim_xvar) * xr.next_normal();
        const SpatialWeights W = build_weights(sample, weight_options());
        SlmParams params;
        params.beta = Eigen::VectorXd::Constant(1, sim_beta);
        params.rho = sim_rho;
        params.sigma2 = sim_sigma2;
        const Eigen::VectorXd y = simulate(X, W, params, Rng::stream(seed, Rng::tag("simy")).next_u64());
        PointSet out = sample;
        out.add_attr("x1");
        out.add_attr("y1");  // adding a column may reallocate, so index afterwards
        std::vector<double>& x1 = out.attrs[out.attrs.size() - 2];
        std::vector<double>& y1 = out.attrs.back();
        for (Eigen::Index i = 0; i < n; ++i) {
            x1[static_cast<std::size_t>(i)] = X(i, 0);
            y1[static_cast<std::size_t>(i)] = y[i];
        }
        write_pointset_csv(out, require_out());
        std::cout << "wrote " << out.size() << " points to " << out_path << "\n";
    });

    // --- fit --------------------------------------------------------------
    auto* cmd_fit = app.add_subcommand("fit", "Single ML fit on a point CSV");
    cmd_fit->fallthrough();
    std::string fit_data, fit_x = "x1", fit_y = "y1", fit_info = "observed";
    double fit_pin_rho = 0.0;
    bool fit_intercept = false;
    cmd_fit->add_option("--data", fit_data, "Point CSV (id,x,y,stratum,attrs...)")->required();
    cmd_fit->add_option("--x-attr", fit_x, "Regressor column")->capture_default_str();
    cmd_fit->add_option("--y-attr", fit_y, "Response column")->capture_default_str();
    cmd_fit->add_flag("--intercept", fit_intercept, "Prepend a constant column");
    auto* opt_pin = cmd_fit->add_option("--pin-rho", fit_pin_rho, "Fix rho instead of estimating it");
    cmd_fit->add_option("--info", fit_info, "Information matrix flavor")
        ->check(CLI::IsMember({"observed", "expected"}))
        ->capture_default_str();
    cmd_fit->callback([&] {
        const PointSet ps = read_pointset_csv(fit_data);
        const SpatialWeights W = build_weights(ps, weight_options());
        if (W.isolated_count() > 0)
            std::cerr << "warning: " << W.isolated_count() << " points have no neighbors\n";
        FitOptions fo;
        fo.add_intercept = fit_intercept;
        fo.info_kind = fit_info == "expected" ? InfoKind::expected : InfoKind::observed;
        if (opt_pin->count() > 0) {
            fo.pin_rho = true;
            fo.pinned_rho = fit_pin_rho;
        }
        const SlmFit fit = fit_ml(response_vector(ps, fit_y), design_matrix(ps, fit_x), W, fo);
        if (!fit.converged) std::cerr << "warning: optimizer stopped at the rho interval edge\n";
        const std::string json = fit_to_json(fit) + "\n";
        if (out_path.empty())
            std::cout << json;
        else
            write_text(out_path, json);
    });

    // --- postsample -------------------------------------------------------
    auto* cmd_post = app.add_subcommand("postsample", "Per-stratum targets and retained ids");
    cmd_post->fallthrough();
    std::string post_data, post_aux;
    double post_zeta = 1.0;
    cmd_post->add_option("--data", post_data, "Point CSV with stratum labels")->required();
    cmd_post->add_option("--aux", post_aux, "Stratum sizes, label=size[,label=size...]")->required();
    cmd_post->add_option("--zeta", post_zeta, "Post-sampling intensity in [0, 1]")->capture_default_str();
    cmd_post->callback([&] {
        const PointSet ps = read_pointset_csv(post_data);
        const std::map<std::string, double> aux = parse_aux(post_aux);
        const std::vector<std::string> labels = ps.stratum_labels();
        std::vector<double> sizes;
        for (const std::string& l : labels) {
            const auto it = aux.find(l);
            if (it == aux.end()) throw data_error("--aux is missing stratum '" + l + "'");
            sizes.push_back(it->second);
        }
        const StratifiedDesign design = make_design(labels, sizes, ps.stratum_counts(labels));
        const std::vector<std::size_t> targets = flexible_targets(design, post_zeta);
        const std::vector<double> ratios = ps_ratio(design);
        const std::vector<std::size_t> kept = apply_postsample(ps, labels, targets, seed);

        nlohmann::ordered_json j;
        j["zeta"] = post_zeta;
        j["k"] = design.k;
        j["strata"] = nlohmann::ordered_json::array();
        std::size_t total = 0;
        for (std::size_t l = 0; l < labels.size(); ++l) {
            nlohmann::ordered_json s;
            s["stratum"] = labels[l];
            s["observed"] = design.n_l[l];
            s["pps_target"] = design.m_int[l];
            s["ps_ratio"] = ratios[l];
            s["hardcore"] = design.hardcore_real[l];
            s["target"] = targets[l];
            j["strata"].push_back(std::move(s));
            total += targets[l];
        }
        j["total_target"] = total;
        nlohmann::ordered_json ids = nlohmann::ordered_json::array();
        for (std::size_t i : kept) ids.push_back(ps.ids[i]);
        j["retained_ids"] = std::move(ids);
        const std::string text = j.dump(2) + "\n";
        if (out_path.empty())
            std::cout << text;
        else
            write_text(out_path, text);
    });

    // --- sweep ------------------------------------------------------------
    auto* cmd_sweep = app.add_subcommand("sweep", "Zeta sweep with MSE-based selection");
    cmd_sweep->fallthrough();
    std::string sweep_data, sweep_aux, sweep_x = "x1", sweep_y = "y1";
    cmd_sweep->add_option("--data", sweep_data, "Point CSV with stratum labels")->required();
    cmd_sweep->add_option("--aux", sweep_aux, "Stratum sizes, label=size[,...]")->required();
    cmd_sweep->add_option("--x-attr", sweep_x, "Regressor column")->capture_default_str();
    cmd_sweep->add_option("--y-attr", sweep_y, "Response column")->capture_default_str();
    cmd_sweep->callback([&] {
        const PointSet ps = read_pointset_csv(sweep_data);
        SweepOptions so;
        so.zeta_grid = parse_grid(zeta_grid_str, "--zeta-grid");
        so.seed = seed;
        so.deletion_replicates = replicates;
        so.x_attr = sweep_x;
        so.y_attr = sweep_y;
        const ZetaSweepResult res = zeta_sweep(ps, parse_aux(sweep_aux), weight_options(), so);
        write_sweep_csv(res, require_out());
        for (const ZetaSweepRow& r : res.rows)
            if (!r.fit_ok)
                std::cerr << "warning: zeta " << format_double(r.zeta) << " skipped: " << r.note << "\n";
        const ZetaSweepRow& sel = res.rows[res.selected];
        std::cout << "selected zeta " << format_double(sel.zeta) << " (beta "
                  << format_double(sel.beta_hat) << ", n " << sel.n << ") -> " << out_path << "\n";
    });

    // --- mc ----------------------------------------------------------------
    auto* cmd_mc = app.add_subcommand("mc", "Monte Carlo bias/variance/MSE curves");
    cmd_mc->fallthrough();
    std::string mc_config_path, mc_rho_grid, mc_schemes, mc_pop, mc_conv, mc_manifest;
    double mc_beta = 1.0, mc_sigma2 = 1.0;
    int mc_threads = 1;
    bool mc_timing = false, mc_degenerate = false;
    cmd_mc->add_option("--config", mc_config_path, "key = value experiment file");
    cmd_mc->add_option("--rho-grid", mc_rho_grid, "Override rho grid");
    cmd_mc->add_option("--schemes", mc_schemes, "Override scheme list, e.g. threshold,knn,idist");
    cmd_mc->add_option("--population", mc_pop, "Override population counts");
    cmd_mc->add_option("--convenience", mc_conv, "Override convenience counts");
    auto* opt_mc_beta = cmd_mc->add_option("--beta", mc_beta, "True slope");
    auto* opt_mc_sigma2 = cmd_mc->add_option("--sigma2", mc_sigma2, "True innovation variance");
    auto* opt_mc_threads = cmd_mc->add_option("--threads", mc_threads, "Worker threads");
    cmd_mc->add_flag("--timing", mc_timing, "Record wall time in the manifest (non-reproducible)");
    cmd_mc->add_flag("--degenerate-w", mc_degenerate, "Check mode: W = 0, fits reduce to OLS");
    cmd_mc->add_option("--manifest", mc_manifest, "Manifest path (default: <out>.manifest.json)");
    cmd_mc->callback([&] {
        McConfig config;
        if (!mc_config_path.empty()) config = read_mc_config(mc_config_path);
        config.seed = seed;
        if (opt_reps->count() > 0) config.replications = replicates;
        if (opt_zeta->count() > 0) config.zeta_grid = parse_grid(zeta_grid_str, "--zeta-grid");
        if (!mc_rho_grid.empty()) config.rho_grid = parse_grid(mc_rho_grid, "--rho-grid");
        if (!mc_schemes.empty()) {
            config.schemes.clear();
            std::stringstream ss(mc_schemes);
            std::string name;
            while (std::getline(ss, name, ',')) config.schemes.push_back(scheme_from_name(name));
        } else if (opt_weights->count() > 0) {
            config.schemes = {scheme_from_name(weights_name)};
        }
        if (!mc_pop.empty()) config.population = parse_counts(mc_pop, "--population");
        if (!mc_conv.empty()) config.convenience = parse_counts(mc_conv, "--convenience");
        if (opt_mc_beta->count() > 0) config.beta = mc_beta;
        if (opt_mc_sigma2->count() > 0) config.sigma2 = mc_sigma2;
        if (opt_threshold->count() > 0) config.threshold = threshold_value;
        config.knn_k = knn_k;
        config.row_standardize = row_std == "on";
        if (opt_mc_threads->count() > 0) config.threads = mc_threads;
        if (mc_timing) config.timing = true;
        if (mc_degenerate) config.degenerate_w = true;

        const McSummary summary = run_experiment(config);
        emit_curves(summary, require_out());
        const std::string manifest = mc_manifest.empty() ? out_path + ".manifest.json" : mc_manifest;
        write_manifest(summary, manifest);
        std::cout << "wrote " << summary.cells.size() << " cells to " << out_path << " ("
                  << summary.total_failures << " failed fits)\n";
    });

    // --- ingest -------------------------------------------------------------
    auto* cmd_ingest = app.add_subcommand("ingest", "Validate listings, project, assign strata");
    cmd_ingest->fallthrough();
    std::string ing_listings, ing_strata;
    cmd_ingest->add_option("--listings", ing_listings, "CSV id,lon,lat,price,size[,stratum][,...]")
        ->required();
    cmd_ingest->add_option("--strata", ing_strata, "Strata JSON with polygon rings");
    cmd_ingest->callback([&] {
        IngestReport rep = ingest_listings(ing_listings);
        for (const std::string& r : rep.rejections) std::cerr << "rejected " << r << "\n";
        std::size_t unassigned = 0;
        if (!ing_strata.empty()) {
            const StrataSpec spec = read_strata_json(ing_strata);
            AssignReport assigned = assign_strata(rep.points, spec);
            for (const std::string& id : assigned.unassigned_ids)
                std::cerr << "unassigned: " << id << " (outside every stratum)\n";
            unassigned = assigned.unassigned_ids.size();
            rep.points = std::move(assigned.points);
        }
        write_pointset_csv(rep.points, require_out());
        std::cout << "read " << rep.rows_read << " rows, rejected " << rep.rejections.size()
                  << ", unassigned " << unassigned << ", kept " << rep.points.size() << " -> "
                  << out_path << "\n";
    });

    // --- hedonic ------------------------------------------------------------
    auto* cmd_hed = app.add_subcommand("hedonic", "Price-on-size pipeline with zeta selection");
    cmd_hed->fallthrough();
    std::string hed_listings, hed_strata;
    bool hed_preassigned = false;
    cmd_hed->add_option("--listings", hed_listings, "Listings CSV")->required();
    cmd_hed->add_option("--strata", hed_strata, "Strata JSON (aux sizes; rings unless pre-assigned)")
        ->required();
    cmd_hed->add_flag("--pre-assigned", hed_preassigned,
                      "Listings already carry a stratum column; skip polygon assignment");
    cmd_hed->callback([&] {
        const IngestReport rep = ingest_listings(hed_listings);
        for (const std::string& r : rep.rejections) std::cerr << "rejected " << r << "\n";
        const StrataSpec spec = read_strata_json(hed_strata);
        PointSet labeled;
        if (hed_preassigned) {
            labeled = rep.points;
        } else {
            AssignReport assigned = assign_strata(rep.points, spec);
            for (const std::string& id : assigned.unassigned_ids)
                std::cerr << "unassigned: " << id << " (outside every stratum)\n";
            labeled = std::move(assigned.points);
        }
        WeightsOptions wopts = weight_options();
        SweepOptions so;
        so.zeta_grid = parse_grid(zeta_grid_str, "--zeta-grid");
        so.seed = seed;
        so.deletion_replicates = replicates;
        const HedonicResult res = hedonic_pipeline(labeled, spec, wopts, so);
        for (const std::string& w : res.warnings) std::cerr << "warning: " << w << "\n";
        write_hedonic_csv(res, require_out());
        std::cout << "zeta\tn\trho_hat\tbeta_hat\trel_bias_pct\tmse\n";
        for (const HedonicRow& r : res.rows)
            std::cout << format_double(r.zeta) << '\t' << r.n << '\t' << format_double(r.rho_hat)
                      << '\t' << format_double(r.beta_hat) << '\t' << format_double(r.rel_bias_pct)
                      << '\t' << format_double(r.mse) << (res.rows[res.selected].zeta == r.zeta ? "\t<- selected" : "")
                      << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 1;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
