#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spatialps/pointset.hpp"

namespace spatialps {

// Simple planar polygon given as a closed ring (first vertex == last).
struct Polygon {
    std::vector<double> xs;
    std::vector<double> ys;

    std::size_t vertex_count() const { return xs.size(); }
    void validate(const std::string& name) const;  // closed, >= 4 vertices
};

// Even-odd ray-casting membership test. Points exactly on an edge or vertex
// count as inside (callers apply their own tie rules across polygons).
bool point_in_polygon(const Polygon& poly, double x, double y);

// Quadrants of the unit square, labeled like reading order:
//   Q1 = [0,.5)x[.5,1]   Q2 = [.5,1]x[.5,1]
//   Q3 = [0,.5)x[0,.5)   Q4 = [.5,1]x[0,.5)
// Points on the x=.5 / y=.5 split lines fall right/top respectively.
int unit_square_quadrant(double x, double y);

// Uniform points per quadrant with labels "Q1".."Q4" and ids "p0","p1",...
// in quadrant order. Deterministic for a given seed.
PointSet generate_quadrant_points(const std::array<std::size_t, 4>& counts, std::uint64_t seed);

// Uniform without-replacement draw of the requested number of points inside
// each stratum, preserving original row order in the result.
PointSet convenience_sample(const PointSet& population, const std::vector<std::string>& labels,
                            const std::vector<std::size_t>& counts, std::uint64_t seed);

// Equirectangular projection to local planar meters about the data centroid:
// x = R * dlon * cos(lat0), y = R * dlat, R = 6371000 m, angles in radians.
struct LocalProjection {
    double lon0 = 0.0;  // degrees
    double lat0 = 0.0;  // degrees
    static constexpr double earth_radius_m = 6371000.0;

    std::pair<double, double> to_meters(double lon, double lat) const;
};

LocalProjection projection_about_centroid(const std::vector<double>& lons,
                                          const std::vector<double>& lats);

}  // namespace spatialps
