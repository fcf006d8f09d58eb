#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spatialps/errors.hpp"
#include "spatialps/io.hpp"
#include "spatialps/slm.hpp"

using namespace spatialps;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("io_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

StrataSpec two_squares() {
    StrataSpec spec;
    Stratum a;
    a.id = "A";
    a.aux_size = 100.0;
    a.ring = Polygon{{0.0, 1.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 1.0, 0.0}};
    Stratum b;
    b.id = "B";
    b.aux_size = 200.0;
    b.ring = Polygon{{1.0, 2.0, 2.0, 1.0, 1.0}, {0.0, 0.0, 1.0, 1.0, 0.0}};
    spec.strata = {a, b};
    return spec;
}

}  // namespace

TEST_CASE("ingest parses geographic listings and projects to meters") {
    TempFile f("geo.csv");
    write_text(f.path,
               "id,lon,lat,price,size\n"
               "L1,9.10,45.40,250000,80\n"
               "L2,9.10,45.41,310000,95\n"
               "L3,9.11,45.40,199000,60\n");
    const IngestReport r = ingest_listings(f.path);
    CHECK(r.was_geographic);
    CHECK(r.rows_read == 3);
    CHECK(r.rejections.empty());
    REQUIRE(r.points.size() == 3);
    CHECK(r.points.ids[0] == "L1");
    CHECK(r.points.attr("price")[1] == 310000.0);
    CHECK(r.points.attr("size")[2] == 60.0);
    // raw degrees preserved for lossless serialization
    CHECK(r.points.attr("lon")[0] == 9.10);
    CHECK(r.points.attr("lat")[1] == 45.41);
    // 0.01 degrees of latitude is about 1111.9 planar meters
    const double dy = r.points.ys[1] - r.points.ys[0];
    CHECK(std::abs(dy - 1111.9) / 1111.9 < 1e-3);
    // planar coordinates are centered on the data centroid
    const double mean_x = (r.points.xs[0] + r.points.xs[1] + r.points.xs[2]) / 3.0;
    CHECK(std::abs(mean_x) < 1e-9);
}

TEST_CASE("ingest accepts planar x,y files without projecting") {
    TempFile f("planar.csv");
    write_text(f.path,
               "id,x,y,price,size\n"
               "P1,10,20,100,50\n"
               "P2,30,40,200,75\n");
    const IngestReport r = ingest_listings(f.path);
    CHECK_FALSE(r.was_geographic);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points.xs == std::vector<double>{10.0, 30.0});
    CHECK(r.points.ys == std::vector<double>{20.0, 40.0});
    CHECK_FALSE(r.points.has_attr("lon"));
}

TEST_CASE("ingest rejects invalid values row by row but keeps going") {
    TempFile f("reject.csv");
    write_text(f.path,
               "id,lon,lat,price,size\n"
               "L1,9.10,45.40,250000,80\n"
               "L2,9.10,45.41,0,95\n"        // price <= 0
               "L3,9.11,45.40,199000,-3\n"   // size <= 0
               "L4,9.12,45.42,180000,70\n");
    const IngestReport r = ingest_listings(f.path);
    CHECK(r.rows_read == 4);
    REQUIRE(r.points.size() == 2);
    CHECK(r.points.ids == std::vector<std::string>{"L1", "L4"});
    REQUIRE(r.rejections.size() == 2);
    CHECK(r.rejections[0].find("L2") != std::string::npos);
    CHECK(r.rejections[1].find("L3") != std::string::npos);
}

TEST_CASE("malformed listings are hard errors with line numbers") {
    TempFile f("bad.csv");
    write_text(f.path,
               "id,lon,lat,price,size\n"
               "L1,9.10,45.40,250000,80\n"
               "L2,9.10,45.41\n");
    CHECK_THROWS_WITH_AS(ingest_listings(f.path), doctest::Contains(":3"), data_error);

    write_text(f.path,
               "id,lon,lat,price,size\n"
               "L1,9.10,xx,250000,80\n");
    CHECK_THROWS_WITH_AS(ingest_listings(f.path), doctest::Contains(":2"), data_error);

    write_text(f.path, "id,foo,bar,price,size\nL1,1,2,3,4\n");
    CHECK_THROWS_AS(ingest_listings(f.path), data_error);
    CHECK_THROWS_AS(ingest_listings("no_such_listings.csv"), data_error);
}

TEST_CASE("listings survive a write/ingest round trip exactly") {
    TempFile f("rt_in.csv"), g("rt_out.csv");
    write_text(f.path,
               "id,lon,lat,price,size,stratum\n"
               "L1,9.101,45.402,250000,80.5,NIL01\n"
               "L2,9.205,45.411,310000,95.25,NIL02\n");
    const IngestReport first = ingest_listings(f.path);
    REQUIRE(first.points.size() == 2);
    CHECK(first.points.strata[0] == "NIL01");
    write_listings_csv(first.points, g.path);
    const IngestReport second = ingest_listings(g.path);
    REQUIRE(second.points.size() == 2);
    CHECK(second.points.ids == first.points.ids);
    CHECK(second.points.strata == first.points.strata);
    CHECK(second.points.attr("lon") == first.points.attr("lon"));
    CHECK(second.points.attr("lat") == first.points.attr("lat"));
    CHECK(second.points.attr("price") == first.points.attr("price"));
    CHECK(second.points.attr("size") == first.points.attr("size"));
    CHECK(second.points.xs == first.points.xs);
}

TEST_CASE("strata specs parse, validate rings, and reject duplicates") {
    TempFile f("strata.json");
    write_text(f.path, R"({"strata": [
        {"id": "A", "aux_size": 100, "ring": [[0,0],[1,0],[1,1],[0,1],[0,0]]},
        {"id": "B", "aux_size": 200, "ring": [[1,0],[2,0],[2,1],[1,1],[1,0]]}
    ]})");
    const StrataSpec spec = read_strata_json(f.path);
    REQUIRE(spec.strata.size() == 2);
    CHECK(spec.strata[0].id == "A");
    CHECK(spec.strata[1].aux_size == 200.0);
    const auto aux = spec.aux();
    CHECK(aux.at("A") == 100.0);
    CHECK(aux.at("B") == 200.0);

    // open ring: the error names the offending stratum
    write_text(f.path, R"({"strata": [
        {"id": "S9", "aux_size": 10, "ring": [[0,0],[1,0],[1,1]]}
    ]})");
    CHECK_THROWS_WITH_AS(read_strata_json(f.path), doctest::Contains("S9"), data_error);

    write_text(f.path, R"({"strata": [
        {"id": "A", "aux_size": 1, "ring": [[0,0],[1,0],[1,1],[0,0]]},
        {"id": "A", "aux_size": 2, "ring": [[2,0],[3,0],[3,1],[2,0]]}
    ]})");
    CHECK_THROWS_WITH_AS(read_strata_json(f.path), doctest::Contains("duplicate"), data_error);

    write_text(f.path, R"({"strata": [{"id": "A", "aux_size": -5,
        "ring": [[0,0],[1,0],[1,1],[0,0]]}]})");
    CHECK_THROWS_AS(read_strata_json(f.path), data_error);

    write_text(f.path, "{nonsense");
    CHECK_THROWS_AS(read_strata_json(f.path), data_error);
}

TEST_CASE("assign_strata labels by ring membership") {
    PointSet ps;
    ps.add("inA", 0.5, 0.5, "", {});
    ps.add("inB", 1.5, 0.5, "", {});
    ps.add("outside", 5.0, 5.0, "", {});
    ps.add("shared_edge", 1.0, 0.5, "", {});  // on the A|B boundary

    const AssignReport r = assign_strata(ps, two_squares());
    REQUIRE(r.points.size() == 3);
    CHECK(r.points.strata[0] == "A");
    CHECK(r.points.strata[1] == "B");
    // boundary points go to the smallest containing id
    CHECK(r.points.ids[2] == "shared_edge");
    CHECK(r.points.strata[2] == "A");
    CHECK(r.unassigned_ids == std::vector<std::string>{"outside"});
}

TEST_CASE("assignment does not depend on the declaration order of strata") {
    PointSet ps;
    ps.add("edge", 1.0, 0.25, "", {});
    StrataSpec fwd = two_squares();
    StrataSpec rev = two_squares();
    std::swap(rev.strata[0], rev.strata[1]);
    CHECK(assign_strata(ps, fwd).points.strata[0] == "A");
    CHECK(assign_strata(ps, rev).points.strata[0] == "A");
}

TEST_CASE("assign_strata uses lon/lat columns when the points carry them") {
    TempFile f("geo2.csv");
    write_text(f.path,
               "id,lon,lat,price,size\n"
               "L1,0.5,0.5,100,50\n"
               "L2,1.5,0.5,100,50\n");
    const IngestReport ing = ingest_listings(f.path);  // planar xs centered, degrees kept
    const AssignReport r = assign_strata(ing.points, two_squares());
    REQUIRE(r.points.size() == 2);
    CHECK(r.points.strata == std::vector<std::string>{"A", "B"});
}

TEST_CASE("synthetic fixture regenerates byte-identically") {
    TempFile l("milan_listings.csv"), s("milan_strata.json");
    write_synthetic_milan(l.path, s.path, 20250801);
    CHECK(slurp(l.path) == slurp(FIXTURE_DIR "/milan_listings.csv"));
    CHECK(slurp(s.path) == slurp(FIXTURE_DIR "/milan_strata.json"));
}

TEST_CASE("hedonic pipeline corrects the convenience bias on the bundled city") {
    const IngestReport ing = ingest_listings(FIXTURE_DIR "/milan_listings.csv");
    REQUIRE(ing.points.size() == 1000);
    const StrataSpec spec = read_strata_json(FIXTURE_DIR "/milan_strata.json");
    REQUIRE(spec.strata.size() == 88);
    const AssignReport assigned = assign_strata(ing.points, spec);
    CHECK(assigned.unassigned_ids.empty());

    SweepOptions sweep;
    sweep.seed = 4;
    const HedonicResult r =
        hedonic_pipeline(assigned.points, spec, WeightsOptions{}, sweep);
    REQUIRE(r.rows.size() == 6);

    // empty outskirt strata are dropped from the design with a warning
    CHECK_FALSE(r.warnings.empty());
    for (const auto& w : r.warnings) CHECK(w.find("no listings") != std::string::npos);

    for (const HedonicRow& row : r.rows) {
        CHECK(row.ok);
        CHECK(row.rho_hat > 0.0);  // the DGP has a genuine positive lag
        CHECK(row.n <= 1000);
    }
    CHECK(r.rows[0].n == 1000);
    CHECK(r.rows.back().rel_bias_pct == 0.0);
    // the deliberate downtown oversampling biases the raw fit; the correction
    // moves the estimate toward the zeta = 1 reference
    CHECK(r.rows[0].rel_bias_pct > 1.0);
    CHECK(r.rows[r.selected].rel_bias_pct < r.rows[0].rel_bias_pct);
    CHECK(r.selected > 0);

    TempFile csv("hedonic.csv");
    write_hedonic_csv(r, csv.path);
    std::ifstream in(csv.path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "zeta,n,rho_hat,beta_hat,rel_bias_pct,mse,selected");
    std::size_t rows = 0, selected = 0;
    while (std::getline(in, line)) {
        ++rows;
        if (line.size() >= 2 && line.substr(line.size() - 2) == ",1") ++selected;
    }
    CHECK(rows == 6);
    CHECK(selected == 1);
}

TEST_CASE("hedonic pipeline demands labels and the price/size columns") {
    const StrataSpec spec = two_squares();
    PointSet unlabeled;
    unlabeled.attr_names = {"price", "size"};
    unlabeled.attrs.resize(2);
    unlabeled.add("p", 0.5, 0.5, "", {100.0, 50.0});
    CHECK_THROWS_AS(hedonic_pipeline(unlabeled, spec, WeightsOptions{}, SweepOptions{}),
                    data_error);

    PointSet no_price;
    no_price.add("p", 0.5, 0.5, "A", {});
    CHECK_THROWS_AS(hedonic_pipeline(no_price, spec, WeightsOptions{}, SweepOptions{}),
                    data_error);

    PointSet foreign;  // label not in the spec
    foreign.attr_names = {"price", "size"};
    foreign.attrs.resize(2);
    foreign.add("p", 0.5, 0.5, "ZZ", {100.0, 50.0});
    CHECK_THROWS_AS(hedonic_pipeline(foreign, spec, WeightsOptions{}, SweepOptions{}),
                    data_error);
}

TEST_CASE("degenerate zeta grids are rejected before any fitting") {
    const IngestReport ing = ingest_listings(FIXTURE_DIR "/milan_listings.csv");
    const StrataSpec spec = read_strata_json(FIXTURE_DIR "/milan_strata.json");
    const AssignReport assigned = assign_strata(ing.points, spec);
    SweepOptions sweep;
    sweep.zeta_grid = {1.0};
    CHECK_THROWS_WITH_AS(hedonic_pipeline(assigned.points, spec, WeightsOptions{}, sweep),
                         doctest::Contains("must contain at least two points including 0 and 1"),
                         data_error);
}

TEST_CASE("library fit agrees with the frozen reference on the 12-point set") {
    const PointSet pts = read_pointset_csv(FIXTURE_DIR "/fit12.csv");
    REQUIRE(pts.size() == 12);
    const SpatialWeights w = build_weights(pts, WeightsOptions{});
    const auto n = static_cast<Eigen::Index>(pts.size());
    Eigen::MatrixXd x(n, 1);
    Eigen::VectorXd y(n);
    const auto& x1 = pts.attr("x1");
    const auto& y1 = pts.attr("y1");
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = x1[static_cast<std::size_t>(i)];
        y(i) = y1[static_cast<std::size_t>(i)];
    }
    const SlmFit fit = fit_ml(y, x, w);
    REQUIRE(fit.converged);

    const nlohmann::json golden = nlohmann::json::parse(slurp(FIXTURE_DIR "/fit12.golden.json"));
    CHECK(fit.n == golden["n"].get<std::size_t>());
    CHECK(fit.params.beta(0) == doctest::Approx(golden["beta"][0].get<double>()).epsilon(1e-8));
    CHECK(fit.params.sigma2 == doctest::Approx(golden["sigma2"].get<double>()).epsilon(1e-8));
    CHECK(fit.loglik == doctest::Approx(golden["loglik"].get<double>()).epsilon(1e-8));
    CHECK(std::abs(fit.params.rho - golden["rho"].get<double>()) < 1e-6);
    CHECK(fit.avar(0) == doctest::Approx(golden["avar_beta"][0].get<double>()).epsilon(1e-6));
    CHECK(fit.avar(1) == doctest::Approx(golden["avar_rho"].get<double>()).epsilon(1e-6));
    CHECK(fit.avar(2) == doctest::Approx(golden["avar_sigma2"].get<double>()).epsilon(1e-6));
}
