#include "spatialps/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spatialps/errors.hpp"
#include "spatialps/rng.hpp"

namespace spatialps {

void Polygon::validate(const std::string& name) const {
    if (xs.size() != ys.size()) throw data_error("polygon '" + name + "': x/y length mismatch");
    if (xs.size() < 4)
        throw data_error("polygon '" + name + "': needs at least 4 vertices (closed ring)");
    if (xs.front() != xs.back() || ys.front() != ys.back())
        throw data_error("polygon '" + name + "': ring is not closed (first vertex != last)");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (xs[i] == xs[i + 1] && ys[i] == ys[i + 1])
            throw data_error("polygon '" + name + "': degenerate zero-length edge");
}

namespace {

// Distance-free test for a point lying on the segment (x1,y1)-(x2,y2).
bool on_segment(double px, double py, double x1, double y1, double x2, double y2) {
    const double cross = (x2 - x1) * (py - y1) - (y2 - y1) * (px - x1);
    if (std::abs(cross) > 1e-12 * std::max({1.0, std::abs(x2 - x1), std::abs(y2 - y1)})) return false;
    return px >= std::min(x1, x2) - 1e-12 && px <= std::max(x1, x2) + 1e-12 &&
           py >= std::min(y1, y2) - 1e-12 && py <= std::max(y1, y2) + 1e-12;
}

}  // namespace

bool point_in_polygon(const Polygon& poly, double x, double y) {
    const std::size_t m = poly.vertex_count();
    // Boundary counts as inside; the crossing test below is unreliable there.
    for (std::size_t i = 0; i + 1 < m; ++i)
        if (on_segment(x, y, poly.xs[i], poly.ys[i], poly.xs[i + 1], poly.ys[i + 1])) return true;

    bool inside = false;
    for (std::size_t i = 0, j = m - 2; i + 1 < m; j = i++) {
        const double xi = poly.xs[i], yi = poly.ys[i];
        const double xj = poly.xs[j], yj = poly.ys[j];
        if ((yi > y) != (yj > y)) {
            const double x_cross = xi + (y - yi) / (yj - yi) * (xj - xi);
            if (x < x_cross) inside = !inside;
        }
    }
    return inside;
}

int unit_square_quadrant(double x, double y) {
    const int right = x >= 0.5 ? 1 : 0;
    const int bottom = y < 0.5 ? 1 : 0;
    return 1 + right + 2 * bottom;
}

PointSet generate_quadrant_points(const std::array<std::size_t, 4>& counts, std::uint64_t seed) {
    // Quadrant origins in Q1..Q4 order; each quadrant is a 0.5 x 0.5 cell.
    static constexpr double ox[4] = {0.0, 0.5, 0.0, 0.5};
    static constexpr double oy[4] = {0.5, 0.5, 0.0, 0.0};
    PointSet ps;
    std::size_t total = counts[0] + counts[1] + counts[2] + counts[3];
    ps.reserve(total);
    Rng rng = Rng::stream(seed, Rng::tag("quadpop"));
    std::size_t serial = 0;
    for (int q = 0; q < 4; ++q) {
        const std::string label = "Q" + std::to_string(q + 1);
        for (std::size_t i = 0; i < counts[static_cast<std::size_t>(q)]; ++i) {
            const double x = ox[q] + 0.5 * rng.next_double();
            const double y = oy[q] + 0.5 * rng.next_double();
            ps.add("p" + std::to_string(serial++), x, y, label);
        }
    }
    return ps;
}

PointSet convenience_sample(const PointSet& population, const std::vector<std::string>& labels,
                            const std::vector<std::size_t>& counts, std::uint64_t seed) {
    if (labels.size() != counts.size())
        throw data_error("convenience_sample: labels/counts length mismatch");
    auto rows = population.stratum_rows(labels);
    std::vector<std::size_t> keep;
    for (std::size_t l = 0; l < labels.size(); ++l) {
        if (counts[l] > rows[l].size())
            throw data_error("convenience_sample: stratum '" + labels[l] + "' has " +
                             std::to_string(rows[l].size()) + " points, requested " +
                             std::to_string(counts[l]));
        Rng rng = Rng::stream(seed, Rng::tag("convsmp"), l);
        for (std::size_t j : rng.sample_without_replacement(rows[l].size(), counts[l]))
            keep.push_back(rows[l][j]);
    }
    std::sort(keep.begin(), keep.end());
    return population.subset(keep);
}

std::pair<double, double> LocalProjection::to_meters(double lon, double lat) const {
    constexpr double deg = std::numbers::pi / 180.0;
    const double x = earth_radius_m * (lon - lon0) * deg * std::cos(lat0 * deg);
    const double y = earth_radius_m * (lat - lat0) * deg;
    return {x, y};
}

LocalProjection projection_about_centroid(const std::vector<double>& lons,
                                          const std::vector<double>& lats) {
    if (lons.empty() || lons.size() != lats.size())
        throw data_error("projection_about_centroid: empty or mismatched coordinate lists");
    LocalProjection proj;
    for (double v : lons) proj.lon0 += v;
    for (double v : lats) proj.lat0 += v;
    proj.lon0 /= static_cast<double>(lons.size());
    proj.lat0 /= static_cast<double>(lats.size());
    return proj;
}

}  // namespace spatialps
