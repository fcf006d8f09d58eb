#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spatialps/geometry.hpp"
#include "spatialps/pointset.hpp"
#include "spatialps/postsample.hpp"
#include "spatialps/weights.hpp"

namespace spatialps {

// Result of reading a listings CSV (`id,lon,lat,price,size[,stratum][,...]`).
// Geographic coordinates are projected to local planar meters about the data
// centroid; the raw degrees are kept as `lon`/`lat` attribute columns so
// serialization is lossless. A header of `id,x,y,...` is accepted as already
// planar and passed through unprojected.
struct IngestReport {
    PointSet points;
    LocalProjection projection;
    bool was_geographic = true;
    std::size_t rows_read = 0;                // data rows seen (valid or not)
    std::vector<std::string> rejections;      // one message per excluded row
};

// Malformed rows (wrong field count, unparseable numbers) are hard errors
// with line numbers; rows violating value invariants (price <= 0, size <= 0,
// non-finite coordinates) are rejected individually and reported.
IngestReport ingest_listings(const std::string& path);

// Inverse of ingest for valid data: same header shape, values identical as
// parsed doubles (shortest round-trip formatting).
void write_listings_csv(const PointSet& points, const std::string& path);

struct Stratum {
    std::string id;
    double aux_size = 0.0;  // e.g. resident family counts
    Polygon ring;           // closed, same coordinate space as the listings
};

struct StrataSpec {
    std::vector<Stratum> strata;
    std::map<std::string, double> aux() const;
};

// Minimal geo-collection format:
//   { "strata": [ { "id": "...", "aux_size": 123, "ring": [[x,y], ...] } ] }
// Rings must be closed (first == last vertex); `ring` may be omitted when the
// listings carry their own stratum column.
StrataSpec read_strata_json(const std::string& path);

struct AssignReport {
    PointSet points;                         // labeled; unassigned rows excluded
    std::vector<std::string> unassigned_ids;
};

// Even-odd ray-casting membership against each stratum ring; points on a
// shared boundary go to the smallest stratum id containing them (ids compared
// as strings, ascending). Membership is tested in the coordinate space the
// rings are given in: the `lon`/`lat` columns when present, planar x/y
// otherwise. Points inside no ring are reported and excluded.
AssignReport assign_strata(const PointSet& points, const StrataSpec& spec);

struct HedonicRow {
    double zeta = 0.0;
    std::size_t n = 0;
    double rho_hat = 0.0;
    double beta_hat = 0.0;
    double rel_bias_pct = 0.0;  // 100 * |beta_zeta - beta_1| / |beta_1|
    double mse = 0.0;
    bool ok = true;
};

struct HedonicResult {
    std::vector<HedonicRow> rows;  // one per grid zeta
    std::size_t selected = 0;      // index into rows
    std::vector<std::string> warnings;
    ZetaSweepResult sweep;
};

// Price-on-size hedonic regression with the full post-sampling sweep: PPS
// targets from the strata aux sizes, per-zeta deletion and refit, MSE-based
// zeta choice. Strata without listings are excluded from the design with a
// warning (their post-sampling ratio is undefined).
HedonicResult hedonic_pipeline(const PointSet& labeled, const StrataSpec& spec,
                               const WeightsOptions& weights, const SweepOptions& sweep);

// CSV: zeta,n,rho_hat,beta_hat,rel_bias_pct,mse,selected.
void write_hedonic_csv(const HedonicResult& result, const std::string& path);

// Synthetic Milan-like fixture: 1,000 listings over 88 rectangular strata
// with a center-periphery price gradient, a genuine spatial lag in the DGP,
// and downtown-heavy convenience coverage. Deterministic for a given seed, so
// the checked-in fixture can be regenerated byte-identically.
void write_synthetic_milan(const std::string& listings_path, const std::string& strata_path,
                           std::uint64_t seed);

}  // namespace spatialps
