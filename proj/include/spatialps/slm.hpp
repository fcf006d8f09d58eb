#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spatialps/weights.hpp"

namespace spatialps {

struct SlmParams {
    Eigen::VectorXd beta;  // length p (p = 1 in the reference experiments)
    double rho = 0.0;
    double sigma2 = 1.0;  // innovation variance
};

enum class InfoKind {
    // Blocks of -d2 loglik, evaluated at the supplied parameters. At the ML
    // optimum this is the matrix a finite-difference Hessian converges to.
    observed,
    // Classical expected-Fisher blocks (X'GXb instead of X'Wy, trace terms
    // instead of realized quadratic forms).
    expected,
};

enum class LogDetBackend { eigenvalues, sparse_lu };

struct FitOptions {
    int grid_points = 64;        // coarse concentrated-likelihood grid
    double refine_tol = 1e-8;    // golden-section interval width on rho
    bool pin_rho = false;        // fix rho at pinned_rho (OLS reduction check)
    double pinned_rho = 0.0;
    bool compute_info = true;    // skip for speed in large sweeps
    InfoKind info_kind = InfoKind::observed;
    bool add_intercept = false;  // optional leading constant column
};

struct SlmFit {
    SlmParams params;
    double loglik = 0.0;
    Eigen::MatrixXd info;        // (p+2) x (p+2), order (beta..., rho, sigma2)
    Eigen::VectorXd avar;        // diagonal of info^-1, same order
    std::size_t n = 0;
    bool converged = false;
    bool boundary_hit = false;   // optimizer stopped at the rho interval edge
    int grid_points = 0;
    double refine_tol = 0.0;
    int refine_iterations = 0;
};

// y = (I - rho W)^-1 X beta + s (I - rho W)^-1 eps, eps ~ iid N(0,1), with
// noise scale s = sqrt(sigma2): sigma2 is treated as a variance. sigma2 = 0
// is allowed here (noise suppressed); fitting requires sigma2 > 0.
Eigen::VectorXd simulate(const Eigen::MatrixXd& X, const SpatialWeights& W,
                         const SlmParams& params, std::uint64_t seed);

// Gaussian SLM log-likelihood:
//   -(n/2) ln(2 pi sigma2) + ln|I - rho W| - e'e / (2 sigma2),
// e = (I - rho W) y - X beta.
double loglik(const SlmParams& params, const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
              const SpatialWeights& W);

// ln|I - rho W| via precomputed eigenvalues or a sparse LU factorization.
// The two backends agree to 1e-8; eigenvalues amortize over many rho values.
double log_det(const SpatialWeights& W, double rho,
               LogDetBackend backend = LogDetBackend::eigenvalues);

// Maximum likelihood by concentration: for fixed rho, beta and sigma2 have
// closed forms; the scalar concentrated likelihood is maximized over the
// admissible rho interval by a coarse grid followed by golden-section
// refinement. Deterministic and derivative-free.
SlmFit fit_ml(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const SpatialWeights& W,
              const FitOptions& options = {});

// (p+2)x(p+2) estimated information at `at`, ordered (beta..., rho, sigma2).
// The beta-sigma2 block is identically zero (X'e vanishes at the ML solution).
Eigen::MatrixXd information_matrix(const SlmParams& at, const Eigen::VectorXd& y,
                                   const Eigen::MatrixXd& X, const SpatialWeights& W,
                                   InfoKind kind = InfoKind::observed);

// Diagonal of info^-1. Throws numerical_error with an eigenvalue report if
// info is not positive definite.
Eigen::VectorXd avar_from_info(const Eigen::MatrixXd& info);

std::string fit_to_json(const SlmFit& fit);

}  // namespace spatialps
