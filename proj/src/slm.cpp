#include "spatialps/slm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/SparseLU>

#include "spatialps/errors.hpp"
#include "spatialps/numfmt.hpp"
#include "spatialps/rng.hpp"

namespace spatialps {

namespace {

using Sparse = SpatialWeights::Sparse;

Eigen::SparseMatrix<double> system_matrix(const SpatialWeights& W, double rho) {
    Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(W.size()),
                                  static_cast<Eigen::Index>(W.size()));
    a.setIdentity();
    a -= Eigen::SparseMatrix<double>(rho * W.matrix());  // align storage orders
    return a;
}

void check_admissible(const SpatialWeights& W, double rho, const char* who) {
    if (W.nonzero_count() == 0) return;  // I - rho*0 is always invertible
    auto [lo, hi] = W.admissible_rho_interval();
    if (rho < lo || rho > hi)
        throw numerical_error(std::string(who) + ": rho=" + format_double(rho) +
                              " outside admissible interval (" + format_double(lo) + ", " +
                              format_double(hi) + ")");
}

}  // namespace

Eigen::VectorXd simulate(const Eigen::MatrixXd& X, const SpatialWeights& W,
                         const SlmParams& params, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(W.size());
    if (X.rows() != n) throw data_error("simulate: X rows must match W size");
    if (X.cols() != params.beta.size()) throw data_error("simulate: beta length must match X cols");
    if (params.sigma2 < 0.0) throw data_error("simulate: sigma2 must be nonnegative");
    check_admissible(W, params.rho, "simulate");

    Eigen::VectorXd rhs = X * params.beta;
    if (params.sigma2 > 0.0) {
        Rng rng = Rng::stream(seed, Rng::tag("simeps"));
        const double s = std::sqrt(params.sigma2);
        for (Eigen::Index i = 0; i < n; ++i) rhs(i) += s * rng.next_normal();
    }
    if (params.rho == 0.0) return rhs;

    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(system_matrix(W, params.rho));
    if (lu.info() != Eigen::Success) throw numerical_error("simulate: I - rho W is singular");
    return lu.solve(rhs);
}

double log_det(const SpatialWeights& W, double rho, LogDetBackend backend) {
    if (rho == 0.0 || W.nonzero_count() == 0) return 0.0;
    if (backend == LogDetBackend::eigenvalues) {
        if (W.has_real_spectrum()) {
            double acc = 0.0;
            for (double lam : W.eigenvalues()) {
                const double t = 1.0 - rho * lam;
                if (t <= 0.0)
                    throw numerical_error("log_det: 1 - rho*lambda <= 0 (rho outside admissible region)");
                acc += std::log(t);
            }
            return acc;
        }
        // Complex spectrum: pairs contribute ln|1 - rho*lambda| each; the sum
        // is real because eigenvalues come in conjugate pairs.
        double acc = 0.0;
        for (const auto& lam : W.complex_eigenvalues()) {
            const std::complex<double> t = 1.0 - rho * lam;
            if (std::abs(t) <= 0.0) throw numerical_error("log_det: singular I - rho W");
            if (std::abs(lam.imag()) <= 1e-10 && t.real() <= 0.0)
                throw numerical_error("log_det: 1 - rho*lambda <= 0 (rho outside admissible region)");
            acc += std::log(std::abs(t));
        }
        return acc;
    }
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(system_matrix(W, rho));
    if (lu.info() != Eigen::Success) throw numerical_error("log_det: LU factorization failed");
    if (lu.signDeterminant() <= 0)
        throw numerical_error("log_det: det(I - rho W) <= 0 (rho outside admissible region)");
    return lu.logAbsDeterminant();
}

double loglik(const SlmParams& params, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
              const SpatialWeights& W) {
    const auto n = y.size();
    if (X.rows() != n || static_cast<std::size_t>(n) != W.size())
        throw data_error("loglik: dimension mismatch between y, X, W");
    if (params.sigma2 <= 0.0) throw data_error("loglik: sigma2 must be positive");
    check_admissible(W, params.rho, "loglik");

    Eigen::VectorXd e = y - params.rho * (W.matrix() * y) - X * params.beta;
    const double quad = e.squaredNorm() / (2.0 * params.sigma2);
    const double nd = static_cast<double>(n);
    return -0.5 * nd * std::log(2.0 * std::numbers::pi * params.sigma2) +
           log_det(W, params.rho) - quad;
}

namespace {

// Everything fixed across rho values during one fit: projection residuals
// make the concentrated likelihood O(1) per rho evaluation (plus the O(n)
// eigenvalue sum inside log_det).
struct ConcentratedProblem {
    double c0, c1, c2;  // e'e(rho) = c0 - 2 rho c1 + rho^2 c2
    Eigen::VectorXd coef_y, coef_wy;
    double n;

    double ee(double rho) const { return c0 - 2.0 * rho * c1 + rho * rho * c2; }
};

double concentrated_loglik(const ConcentratedProblem& cp, const std::vector<double>* eigs,
                           double rho) {
    const double ee = cp.ee(rho);
    if (ee <= 0.0) throw numerical_error("fit_ml: residual sum of squares vanished");
    double ld = 0.0;
    if (eigs) {
        for (double lam : *eigs) {
            const double t = 1.0 - rho * lam;
            if (t <= 0.0) return -std::numeric_limits<double>::infinity();
            ld += std::log(t);
        }
    }
    return -0.5 * cp.n * (std::log(2.0 * std::numbers::pi) + 1.0) -
           0.5 * cp.n * std::log(ee / cp.n) + ld;
}

}  // namespace

SlmFit fit_ml(const Eigen::VectorXd& y, const Eigen::MatrixXd& X_in, const SpatialWeights& W,
              const FitOptions& options) {
    const auto n = y.size();
    Eigen::MatrixXd X = X_in;
    if (options.add_intercept) {
        Eigen::MatrixXd Xi(X_in.rows(), X_in.cols() + 1);
        Xi.col(0).setOnes();
        Xi.rightCols(X_in.cols()) = X_in;
        X = std::move(Xi);
    }
    const auto p = X.cols();
    if (X.rows() != n || static_cast<std::size_t>(n) != W.size())
        throw data_error("fit_ml: dimension mismatch between y, X, W");
    if (n <= p + 2)
        throw data_error("fit_ml: need n > p + 2 (n=" + std::to_string(n) +
                         ", p=" + std::to_string(p) + ")");

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < p) throw data_error("fit_ml: X is rank-deficient");

    const Eigen::VectorXd wy = W.matrix() * y;
    ConcentratedProblem cp;
    cp.n = static_cast<double>(n);
    cp.coef_y = qr.solve(y);
    cp.coef_wy = qr.solve(wy);
    const Eigen::VectorXd ry = y - X * cp.coef_y;
    const Eigen::VectorXd rwy = wy - X * cp.coef_wy;
    cp.c0 = ry.squaredNorm();
    cp.c1 = ry.dot(rwy);
    cp.c2 = rwy.squaredNorm();

    SlmFit fit;
    fit.n = static_cast<std::size_t>(n);
    fit.grid_points = options.grid_points;
    fit.refine_tol = options.refine_tol;

    double rho_hat;
    const bool degenerate = W.nonzero_count() == 0;
    const std::vector<double>* eigs = nullptr;
    if (!degenerate) {
        if (!W.has_real_spectrum())
            throw numerical_error("fit_ml: W has a complex spectrum; concentrated search needs real eigenvalues");
        eigs = &W.eigenvalues();
    }

    if (options.pin_rho || degenerate) {
        rho_hat = options.pin_rho ? options.pinned_rho : 0.0;
        if (!degenerate) check_admissible(W, rho_hat, "fit_ml(pinned)");
        fit.converged = true;
    } else {
        auto [lo, hi] = W.admissible_rho_interval();
        const int G = std::max(options.grid_points, 4);
        const double h = (hi - lo) / static_cast<double>(G - 1);
        int best = 0;
        double best_val = -std::numeric_limits<double>::infinity();
        for (int g = 0; g < G; ++g) {
            const double v = concentrated_loglik(cp, eigs, lo + g * h);
            if (v > best_val) {
                best_val = v;
                best = g;
            }
        }
        // Golden-section refinement inside the bracketing grid cells.
        double a = std::max(lo, lo + (best - 1) * h);
        double b = std::min(hi, lo + (best + 1) * h);
        constexpr double inv_phi = 0.6180339887498949;
        double x1 = b - inv_phi * (b - a);
        double x2 = a + inv_phi * (b - a);
        double f1 = concentrated_loglik(cp, eigs, x1);
        double f2 = concentrated_loglik(cp, eigs, x2);
        int iters = 0;
        while (b - a > options.refine_tol && iters < 200) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + inv_phi * (b - a);
                f2 = concentrated_loglik(cp, eigs, x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - inv_phi * (b - a);
                f1 = concentrated_loglik(cp, eigs, x1);
            }
            ++iters;
        }
        rho_hat = 0.5 * (a + b);
        fit.refine_iterations = iters;
        fit.boundary_hit = (rho_hat - lo < 2.0 * options.refine_tol) ||
                           (hi - rho_hat < 2.0 * options.refine_tol);
        fit.converged = !fit.boundary_hit;
    }

    fit.params.rho = rho_hat;
    fit.params.beta = cp.coef_y - rho_hat * cp.coef_wy;
    const double ee = cp.ee(rho_hat);
    if (ee <= 0.0) throw numerical_error("fit_ml: residual sum of squares vanished at the optimum");
    fit.params.sigma2 = ee / cp.n;
    fit.loglik = degenerate
                     ? -0.5 * cp.n * (std::log(2.0 * std::numbers::pi) + 1.0) -
                           0.5 * cp.n * std::log(fit.params.sigma2)
                     : concentrated_loglik(cp, eigs, rho_hat);

    if (options.compute_info) {
        fit.info = information_matrix(fit.params, y, X, W, options.info_kind);
        fit.avar = avar_from_info(fit.info);
    }
    return fit;
}

namespace {

// tr(G) and tr(G^2) for G = W (I - rho W)^-1. With a real spectrum these are
// eigenvalue sums; otherwise fall back to a dense solve.
std::pair<double, double> g_traces(const SpatialWeights& W, double rho, Eigen::MatrixXd* g_out) {
    if (W.has_real_spectrum() && g_out == nullptr) {
        double t1 = 0.0, t2 = 0.0;
        for (double lam : W.eigenvalues()) {
            const double g = lam / (1.0 - rho * lam);
            t1 += g;
            t2 += g * g;
        }
        return {t1, t2};
    }
    // G = W A^-1 solved column-by-column: A^T G^T = W^T.
    Eigen::SparseMatrix<double> at = system_matrix(W, rho).transpose();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lut(at);
    if (lut.info() != Eigen::Success) throw numerical_error("information_matrix: singular I - rho W");
    Eigen::MatrixXd wt = Eigen::MatrixXd(W.matrix()).transpose();
    Eigen::MatrixXd gt = lut.solve(wt);
    Eigen::MatrixXd g = gt.transpose();
    double t1 = g.trace();
    double t2 = (g * g).trace();
    if (g_out) *g_out = std::move(g);
    return {t1, t2};
}

}  // namespace

Eigen::MatrixXd information_matrix(const SlmParams& at, const Eigen::VectorXd& y,
                                   const Eigen::MatrixXd& X, const SpatialWeights& W,
                                   InfoKind kind) {
    const auto n = y.size();
    const auto p = X.cols();
    if (X.rows() != n || static_cast<std::size_t>(n) != W.size())
        throw data_error("information_matrix: dimension mismatch");
    if (at.sigma2 <= 0.0) throw data_error("information_matrix: sigma2 must be positive");
    check_admissible(W, at.rho, "information_matrix");

    const double s2 = at.sigma2;
    const double nd = static_cast<double>(n);
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(p + 2, p + 2);
    info.topLeftCorner(p, p) = X.transpose() * X / s2;

    const Eigen::Index ir = p;      // rho row/col
    const Eigen::Index is = p + 1;  // sigma2 row/col

    if (W.nonzero_count() == 0) {
        // Degenerate W: only the OLS block and the sigma2 curvature survive.
        info(is, is) = nd / (2.0 * s2 * s2);
        return info;
    }

    const Eigen::VectorXd wy = W.matrix() * y;

    if (kind == InfoKind::observed) {
        const auto traces = g_traces(W, at.rho, nullptr);
        const Eigen::VectorXd e = y - at.rho * wy - X * at.beta;
        info.block(0, ir, p, 1) = X.transpose() * wy / s2;
        info(ir, ir) = traces.second + wy.squaredNorm() / s2;
        info(ir, is) = wy.dot(e) / (s2 * s2);
        info(is, is) = e.squaredNorm() / (s2 * s2 * s2) - nd / (2.0 * s2 * s2);
    } else {
        Eigen::MatrixXd g;
        const auto traces = g_traces(W, at.rho, &g);
        const Eigen::VectorXd gxb = g * (X * at.beta);
        info.block(0, ir, p, 1) = X.transpose() * gxb / s2;
        info(ir, ir) = traces.second + (g.transpose() * g).trace() + gxb.squaredNorm() / s2;
        info(ir, is) = traces.first / s2;
        info(is, is) = nd / (2.0 * s2 * s2);
    }
    // beta-sigma2 block is identically zero: its observed value is X'e/sigma^4,
    // which vanishes at the ML solution where X'e = 0.
    info.block(ir, 0, 1, p) = info.block(0, ir, p, 1).transpose();
    info(is, ir) = info(ir, is);
    return info;
}

Eigen::VectorXd avar_from_info(const Eigen::MatrixXd& info) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(info);
    if (es.info() != Eigen::Success)
        throw numerical_error("avar: eigendecomposition of the information matrix failed");
    const auto& ev = es.eigenvalues();
    if (ev.minCoeff() <= 0.0) {
        std::ostringstream msg;
        msg << "avar: information matrix is not positive definite; eigenvalues:";
        for (Eigen::Index i = 0; i < ev.size(); ++i) msg << ' ' << format_double(ev(i));
        throw numerical_error(msg.str());
    }
    Eigen::MatrixXd inv =
        es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
    return inv.diagonal();
}

std::string fit_to_json(const SlmFit& fit) {
    std::ostringstream out;
    out << "{\n  \"beta\": [";
    for (Eigen::Index i = 0; i < fit.params.beta.size(); ++i)
        out << (i ? ", " : "") << format_double(fit.params.beta(i));
    out << "],\n";
    out << "  \"rho\": " << format_double(fit.params.rho) << ",\n";
    out << "  \"sigma2\": " << format_double(fit.params.sigma2) << ",\n";
    out << "  \"loglik\": " << format_double(fit.loglik) << ",\n";
    const auto p = fit.params.beta.size();
    out << "  \"avar_beta\": [";
    for (Eigen::Index i = 0; i < p && fit.avar.size() == p + 2; ++i)
        out << (i ? ", " : "") << format_double(fit.avar(i));
    out << "],\n";
    if (fit.avar.size() == p + 2) {
        out << "  \"avar_rho\": " << format_double(fit.avar(p)) << ",\n";
        out << "  \"avar_sigma2\": " << format_double(fit.avar(p + 1)) << ",\n";
    } else {
        out << "  \"avar_rho\": null,\n  \"avar_sigma2\": null,\n";
    }
    out << "  \"n\": " << fit.n << ",\n";
    out << "  \"converged\": " << (fit.converged ? "true" : "false") << ",\n";
    out << "  \"grid_points\": " << fit.grid_points << ",\n";
    out << "  \"refine_tol\": " << format_double(fit.refine_tol) << "\n}\n";
    return out.str();
}

}  // namespace spatialps
