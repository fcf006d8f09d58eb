#include "spatialps/weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "spatialps/errors.hpp"
#include "spatialps/numfmt.hpp"

namespace spatialps {

std::string scheme_name(WeightScheme s) {
    switch (s) {
        case WeightScheme::threshold: return "threshold";
        case WeightScheme::knn: return "knn";
        case WeightScheme::inverse_distance: return "idist";
    }
    return "?";
}

WeightScheme scheme_from_name(const std::string& name) {
    if (name == "threshold") return WeightScheme::threshold;
    if (name == "knn") return WeightScheme::knn;
    if (name == "idist" || name == "inverse-distance") return WeightScheme::inverse_distance;
    throw data_error("unknown weight scheme '" + name + "' (threshold|knn|idist)");
}

namespace {

double dist(const PointSet& p, std::size_t i, std::size_t j) {
    const double dx = p.xs[i] - p.xs[j];
    const double dy = p.ys[i] - p.ys[j];
    return std::sqrt(dx * dx + dy * dy);
}

}  // namespace

double min_connecting_threshold(const PointSet& points) {
    const std::size_t n = points.size();
    if (n < 2) throw data_error("min_connecting_threshold: need at least 2 points");
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) nearest = std::min(nearest, dist(points, i, j));
        worst = std::max(worst, nearest);
    }
    return worst;
}

SpatialWeights::SpatialWeights(Sparse matrix, bool row_standardized, bool symmetric_similarity)
    : matrix_(std::move(matrix)),
      row_standardized_(row_standardized),
      symmetric_similarity_(symmetric_similarity) {
    if (matrix_.rows() != matrix_.cols()) throw data_error("weight matrix must be square");
    matrix_.makeCompressed();
    for (int i = 0; i < matrix_.outerSize(); ++i) {
        bool empty = true;
        for (Sparse::InnerIterator it(matrix_, i); it; ++it) {
            if (it.row() == it.col() && it.value() != 0.0)
                throw data_error("weight matrix must have a zero diagonal");
            if (it.value() < 0.0) throw data_error("weights must be nonnegative");
            if (it.value() != 0.0) empty = false;
        }
        if (empty) ++isolated_count_;
    }
}

void SpatialWeights::ensure_spectrum() const {
    std::call_once(spectrum_->once, [this] {
        const auto n = matrix_.rows();
        if (n == 0) {
            spectrum_->real = true;
            return;
        }
        Eigen::MatrixXd dense(matrix_);
        if (symmetric_similarity_ && row_standardized_) {
            // W = D^-1 A with A symmetric is similar to S = D^-1/2 A D^-1/2,
            // and S_ij = sqrt(W_ij * W_ji), so the spectrum is real and a
            // symmetric solver applies. Isolated rows have zero row and
            // column in both W and S and contribute eigenvalue 0 either way.
            Eigen::MatrixXd a = dense;
            for (Eigen::Index i = 0; i < n; ++i)
                for (Eigen::Index j = 0; j < i; ++j) {
                    const double s = std::sqrt(a(i, j) * a(j, i));
                    a(i, j) = s;
                    a(j, i) = s;
                }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
            if (es.info() != Eigen::Success)
                throw numerical_error("eigenvalue computation failed on W");
            spectrum_->eigs.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
            spectrum_->real = true;
        } else if (symmetric_similarity_) {
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense, Eigen::EigenvaluesOnly);
            if (es.info() != Eigen::Success)
                throw numerical_error("eigenvalue computation failed on W");
            spectrum_->eigs.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
            spectrum_->real = true;
        } else {
            Eigen::EigenSolver<Eigen::MatrixXd> es(dense, /*computeEigenvectors=*/false);
            if (es.info() != Eigen::Success)
                throw numerical_error("eigenvalue computation failed on W");
            spectrum_->cplx.resize(static_cast<std::size_t>(n));
            bool real = true;
            for (Eigen::Index i = 0; i < n; ++i) {
                spectrum_->cplx[static_cast<std::size_t>(i)] = es.eigenvalues()(i);
                if (std::abs(es.eigenvalues()(i).imag()) > 1e-10) real = false;
            }
            if (real) {
                spectrum_->eigs.reserve(static_cast<std::size_t>(n));
                for (const auto& z : spectrum_->cplx) spectrum_->eigs.push_back(z.real());
                std::sort(spectrum_->eigs.begin(), spectrum_->eigs.end());
            }
            spectrum_->real = real;
        }
        std::sort(spectrum_->eigs.begin(), spectrum_->eigs.end());
    });
}

bool SpatialWeights::has_real_spectrum() const {
    ensure_spectrum();
    return spectrum_->real;
}

const std::vector<double>& SpatialWeights::eigenvalues() const {
    ensure_spectrum();
    if (!spectrum_->real)
        throw numerical_error("W has a complex spectrum; real eigenvalues unavailable");
    return spectrum_->eigs;
}

const std::vector<std::complex<double>>& SpatialWeights::complex_eigenvalues() const {
    ensure_spectrum();
    if (spectrum_->cplx.empty() && spectrum_->real) {
        // Promote lazily for callers that want the general form.
        auto* cache = spectrum_.get();
        static std::mutex promote_mutex;
        std::lock_guard<std::mutex> lock(promote_mutex);
        if (cache->cplx.empty())
            for (double v : cache->eigs) cache->cplx.emplace_back(v, 0.0);
    }
    return spectrum_->cplx;
}

std::pair<double, double> SpatialWeights::admissible_rho_interval() const {
    if (nonzero_count() == 0) return {-1.0 + 1e-6, 1.0 - 1e-6};
    double lam_min, lam_max;
    if (has_real_spectrum()) {
        lam_min = eigenvalues().front();
        lam_max = eigenvalues().back();
    } else {
        // General case: bound by real parts (standard practice for the
        // admissible interval when the spectrum is complex).
        lam_min = std::numeric_limits<double>::infinity();
        lam_max = -std::numeric_limits<double>::infinity();
        for (const auto& z : complex_eigenvalues()) {
            lam_min = std::min(lam_min, z.real());
            lam_max = std::max(lam_max, z.real());
        }
    }
    if (row_standardized_) {
        const double lo = lam_min < 0.0 ? 1.0 / lam_min : -1.0;
        return {lo + 1e-6, 1.0 - 1e-6};
    }
    if (lam_min >= 0.0 || lam_max <= 0.0)
        throw numerical_error("cannot derive an admissible rho interval: one-signed spectrum");
    const double lo = 1.0 / lam_min, hi = 1.0 / lam_max;
    const double pad = 1e-6 * (hi - lo);
    return {lo + pad, hi - pad};
}

void SpatialWeights::export_coo(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    // Row-major compressed storage iterates exactly in (i, j) order.
    for (int i = 0; i < matrix_.outerSize(); ++i)
        for (Sparse::InnerIterator it(matrix_, i); it; ++it)
            if (it.value() != 0.0)
                out << it.row() << ' ' << it.col() << ' ' << format_double(it.value()) << '\n';
    if (!out) throw data_error("write failed for '" + path + "'");
}

namespace {

using Triplet = Eigen::Triplet<double>;

void row_standardize(std::vector<Triplet>& entries, std::size_t n) {
    std::vector<double> row_sum(n, 0.0);
    for (const auto& t : entries) row_sum[static_cast<std::size_t>(t.row())] += t.value();
    for (auto& t : entries) {
        const double s = row_sum[static_cast<std::size_t>(t.row())];
        if (s > 0.0) t = Triplet(t.row(), t.col(), t.value() / s);
    }
}

SpatialWeights finish(std::vector<Triplet> entries, std::size_t n, const WeightsOptions& resolved) {
    if (resolved.row_standardize) row_standardize(entries, n);
    SpatialWeights::Sparse m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    m.setFromTriplets(entries.begin(), entries.end());
    return SpatialWeights(std::move(m), resolved.row_standardize, /*symmetric_similarity=*/true);
}

}  // namespace

SpatialWeights build_weights(const PointSet& points, const WeightsOptions& options) {
    const std::size_t n = points.size();
    if (n < 2) throw data_error("build_weights: need at least 2 points");
    WeightsOptions resolved = options;
    std::vector<Triplet> entries;

    switch (options.scheme) {
        case WeightScheme::threshold: {
            if (!resolved.threshold) resolved.threshold = min_connecting_threshold(points);
            const double d = *resolved.threshold;
            if (!(d > 0.0)) throw data_error("threshold must be positive");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    if (dist(points, i, j) <= d) {
                        entries.emplace_back(static_cast<int>(i), static_cast<int>(j), 1.0);
                        entries.emplace_back(static_cast<int>(j), static_cast<int>(i), 1.0);
                    }
            break;
        }
        case WeightScheme::knn: {
            const int k = resolved.knn_k;
            if (k < 1 || static_cast<std::size_t>(k) >= n)
                throw data_error("knn needs 1 <= k < n (k=" + std::to_string(k) + ", n=" +
                                 std::to_string(n) + ")");
            // Symmetric union: i~j if either lists the other among its k
            // nearest. Distance ties break deterministically by index.
            std::vector<std::pair<double, std::size_t>> cand(n - 1);
            std::vector<std::vector<std::size_t>> nearest(n);
            for (std::size_t i = 0; i < n; ++i) {
                cand.clear();
                for (std::size_t j = 0; j < n; ++j)
                    if (j != i) cand.emplace_back(dist(points, i, j), j);
                std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
                nearest[i].reserve(static_cast<std::size_t>(k));
                for (int t = 0; t < k; ++t) nearest[i].push_back(cand[static_cast<std::size_t>(t)].second);
            }
            std::vector<std::pair<std::size_t, std::size_t>> edges;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j : nearest[i])
                    edges.emplace_back(std::min(i, j), std::max(i, j));
            std::sort(edges.begin(), edges.end());
            edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
            for (auto [a, b] : edges) {
                entries.emplace_back(static_cast<int>(a), static_cast<int>(b), 1.0);
                entries.emplace_back(static_cast<int>(b), static_cast<int>(a), 1.0);
            }
            break;
        }
        case WeightScheme::inverse_distance: {
            const double alpha = resolved.idist_exponent;
            if (!(alpha > 0.0)) throw data_error("inverse-distance exponent must be positive");
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double d = dist(points, i, j);
                    if (d <= 0.0)
                        throw data_error("coincident points ('" + points.ids[i] + "', '" +
                                         points.ids[j] + "') under inverse-distance scheme");
                    const double w = alpha == 1.0 ? 1.0 / d : std::pow(d, -alpha);
                    entries.emplace_back(static_cast<int>(i), static_cast<int>(j), w);
                    entries.emplace_back(static_cast<int>(j), static_cast<int>(i), w);
                }
            break;
        }
    }
    SpatialWeights w = finish(std::move(entries), n, resolved);
    w.options_ = resolved;
    return w;
}

SpatialWeights rebuild_for_subset(const WeightsOptions& options, const PointSet& retained) {
    WeightsOptions o = options;
    if (o.scheme == WeightScheme::threshold) o.threshold.reset();
    return build_weights(retained, o);
}

}  // namespace spatialps
