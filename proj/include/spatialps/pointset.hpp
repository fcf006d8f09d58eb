#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace spatialps {

// Planar point collection with a stratum label and optional named numeric
// attribute columns (regressors, responses, prices, ...). Stored as parallel
// arrays; row order is meaningful and preserved by every operation.
//
// CSV schema: `id,x,y,stratum[,attr...]` — the first four columns are
// positional, attribute columns are identified by header name.
class PointSet {
public:
    std::vector<std::string> ids;
    std::vector<double> xs;
    std::vector<double> ys;
    std::vector<std::string> strata;
    std::vector<std::string> attr_names;
    std::vector<std::vector<double>> attrs;  // one vector per attr_names entry

    std::size_t size() const { return ids.size(); }

    void reserve(std::size_t n);
    // Appends a row with attribute values in attr_names order.
    void add(std::string id, double x, double y, std::string stratum,
             const std::vector<double>& attr_values = {});

    bool has_attr(const std::string& name) const;
    const std::vector<double>& attr(const std::string& name) const;
    std::vector<double>& add_attr(const std::string& name);

    // Row subset in the given order; ids/attrs/strata follow.
    PointSet subset(const std::vector<std::size_t>& rows) const;

    // Distinct stratum labels in first-appearance order, and per-label counts.
    std::vector<std::string> stratum_labels() const;
    std::vector<std::size_t> stratum_counts(const std::vector<std::string>& labels) const;
    // Row indices per label, in row order.
    std::vector<std::vector<std::size_t>> stratum_rows(const std::vector<std::string>& labels) const;
};

PointSet read_pointset_csv(const std::string& path);
void write_pointset_csv(const PointSet& ps, const std::string& path);

}  // namespace spatialps
