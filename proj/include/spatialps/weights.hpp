#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "spatialps/pointset.hpp"

namespace spatialps {

enum class WeightScheme { threshold, knn, inverse_distance };

std::string scheme_name(WeightScheme s);
WeightScheme scheme_from_name(const std::string& name);

struct WeightsOptions {
    WeightScheme scheme = WeightScheme::threshold;
    // Threshold distance; unset means "derive min_connecting_threshold from
    // the points being connected".
    std::optional<double> threshold;
    int knn_k = 4;
    double idist_exponent = 1.0;
    bool row_standardize = true;
};

// Immutable spatial weight matrix with zero diagonal. Eigenvalues and the
// admissible rho interval are computed once on first use; the cache is shared
// between copies and safe under concurrent first access.
class SpatialWeights {
public:
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

    // Raw-matrix constructor (tests, degenerate configurations). Set
    // `symmetric_similarity` when the matrix is D^-1 * A or A itself with A
    // symmetric, which guarantees a real spectrum.
    SpatialWeights(Sparse matrix, bool row_standardized, bool symmetric_similarity);

    std::size_t size() const { return static_cast<std::size_t>(matrix_.rows()); }
    std::size_t nonzero_count() const { return static_cast<std::size_t>(matrix_.nonZeros()); }
    const Sparse& matrix() const { return matrix_; }
    bool row_standardized() const { return row_standardized_; }

    // Rows with no neighbors (possible when an explicit threshold is smaller
    // than the connecting distance).
    std::size_t isolated_count() const { return isolated_count_; }

    // Real spectrum, ascending. Throws numerical_error if the spectrum is
    // complex (only possible for raw asymmetric matrices).
    const std::vector<double>& eigenvalues() const;
    bool has_real_spectrum() const;
    // All eigenvalues as complex numbers (general fallback).
    const std::vector<std::complex<double>>& complex_eigenvalues() const;

    // Open interval of rho for which I - rho*W is positive-stable:
    // (1/lambda_min + 1e-6, 1 - 1e-6) when row-standardized, general
    // eigenvalue bounds otherwise.
    std::pair<double, double> admissible_rho_interval() const;

    // Coordinate-list export: `i j w`, 0-based, sorted by (i, j).
    void export_coo(const std::string& path) const;

    // Parameters the matrix was actually built with (threshold resolved).
    const WeightsOptions& build_options() const { return options_; }

private:
    friend SpatialWeights build_weights(const PointSet&, const WeightsOptions&);

    void ensure_spectrum() const;

    Sparse matrix_;
    bool row_standardized_ = false;
    bool symmetric_similarity_ = false;
    std::size_t isolated_count_ = 0;
    WeightsOptions options_;

    struct SpectrumCache {
        std::once_flag once;
        bool real = false;
        std::vector<double> eigs;
        std::vector<std::complex<double>> cplx;
    };
    std::shared_ptr<SpectrumCache> spectrum_ = std::make_shared<SpectrumCache>();
};

// Smallest distance d such that a threshold graph at d leaves no point
// isolated: max over points of the nearest-neighbor distance.
double min_connecting_threshold(const PointSet& points);

// Builds W on `points` under the given scheme. Threshold scheme with an
// explicit threshold below min_connecting_threshold(points) produces isolated
// rows; this is a warning condition surfaced via isolated_count(), not an
// error. knn uses symmetric union (i~j if either lists the other among its k
// nearest); inverse-distance connects every pair with weight 1/d^exponent.
SpatialWeights build_weights(const PointSet& points, const WeightsOptions& options);

// Reconstructs W from scratch on the retained points under the same scheme.
// For the threshold scheme the threshold is re-derived via
// min_connecting_threshold so the no-isolated-points guarantee survives
// subsetting; knn keeps k, inverse-distance keeps its exponent.
SpatialWeights rebuild_for_subset(const WeightsOptions& options, const PointSet& retained);

}  // namespace spatialps
