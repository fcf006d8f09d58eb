#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "spatialps/errors.hpp"
#include "spatialps/pointset.hpp"

using namespace spatialps;

namespace {

PointSet sample_set() {
    PointSet ps;
    ps.attr_names = {"x1", "y1"};
    ps.attrs.resize(2);
    ps.add("a", 0.1, 0.2, "S1", {1.5, -2.0});
    ps.add("b", 0.3, 0.4, "S2", {2.5, 0.125});
    ps.add("c", 0.5, 0.6, "S1", {3.5, 1e-9});
    ps.add("d", 0.7, 0.8, "S3", {4.5, 12345.678});
    return ps;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("ps_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("stratum helpers use first-appearance order") {
    const PointSet ps = sample_set();
    const auto labels = ps.stratum_labels();
    REQUIRE(labels == std::vector<std::string>{"S1", "S2", "S3"});
    CHECK(ps.stratum_counts(labels) == std::vector<std::size_t>{2, 1, 1});
    const auto rows = ps.stratum_rows(labels);
    CHECK(rows[0] == std::vector<std::size_t>{0, 2});
    CHECK(rows[1] == std::vector<std::size_t>{1});
}

TEST_CASE("subset keeps requested order and all columns") {
    const PointSet ps = sample_set();
    const PointSet sub = ps.subset({2, 0});
    REQUIRE(sub.size() == 2);
    CHECK(sub.ids == std::vector<std::string>{"c", "a"});
    CHECK(sub.xs == std::vector<double>{0.5, 0.1});
    CHECK(sub.strata == std::vector<std::string>{"S1", "S1"});
    CHECK(sub.attr("x1") == std::vector<double>{3.5, 1.5});
}

TEST_CASE("attribute access and guards") {
    PointSet ps = sample_set();
    CHECK(ps.has_attr("x1"));
    CHECK_FALSE(ps.has_attr("z"));
    CHECK_THROWS_AS(ps.attr("z"), data_error);
    CHECK_THROWS_AS(ps.add_attr("x1"), data_error);
    ps.add_attr("z");
    CHECK(ps.attr("z") == std::vector<double>(4, 0.0));
    CHECK_THROWS_AS(ps.add("e", 0, 0, "S1", {1.0}), data_error);  // wrong attr count
}

TEST_CASE("csv round trip preserves every field exactly") {
    const PointSet ps = sample_set();
    TempFile f("roundtrip.csv");
    write_pointset_csv(ps, f.path);
    const PointSet back = read_pointset_csv(f.path);
    REQUIRE(back.size() == ps.size());
    CHECK(back.ids == ps.ids);
    CHECK(back.xs == ps.xs);  // exact: shortest round-trip formatting
    CHECK(back.ys == ps.ys);
    CHECK(back.strata == ps.strata);
    REQUIRE(back.attr_names == ps.attr_names);
    CHECK(back.attrs == ps.attrs);
}

TEST_CASE("csv reader reports malformed input with line numbers") {
    TempFile f("bad.csv");
    {
        std::ofstream out(f.path);
        out << "id,x,y,stratum,x1\n";
        out << "a,0.1,0.2,S1,1.5\n";
        out << "b,0.3,S2,2.5\n";  // missing a field
    }
    CHECK_THROWS_WITH_AS(read_pointset_csv(f.path), doctest::Contains("line 3"), data_error);
}

TEST_CASE("csv reader rejects junk numbers and bad headers") {
    TempFile f("junk.csv");
    {
        std::ofstream out(f.path);
        out << "id,x,y,stratum\n";
        out << "a,0.1,zebra,S1\n";
    }
    CHECK_THROWS_AS(read_pointset_csv(f.path), data_error);

    TempFile g("hdr.csv");
    {
        std::ofstream out(g.path);
        out << "identifier,x,y,stratum\n";
    }
    CHECK_THROWS_AS(read_pointset_csv(g.path), data_error);
}
