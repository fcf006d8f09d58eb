#include "spatialps/pointset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "spatialps/errors.hpp"
#include "spatialps/numfmt.hpp"

namespace spatialps {

void PointSet::reserve(std::size_t n) {
    ids.reserve(n);
    xs.reserve(n);
    ys.reserve(n);
    strata.reserve(n);
    for (auto& col : attrs) col.reserve(n);
}

void PointSet::add(std::string id, double x, double y, std::string stratum,
                   const std::vector<double>& attr_values) {
    if (attr_values.size() != attr_names.size())
        throw data_error("attribute count mismatch for point '" + id + "'");
    ids.push_back(std::move(id));
    xs.push_back(x);
    ys.push_back(y);
    strata.push_back(std::move(stratum));
    for (std::size_t k = 0; k < attr_values.size(); ++k) attrs[k].push_back(attr_values[k]);
}

bool PointSet::has_attr(const std::string& name) const {
    return std::find(attr_names.begin(), attr_names.end(), name) != attr_names.end();
}

const std::vector<double>& PointSet::attr(const std::string& name) const {
    auto it = std::find(attr_names.begin(), attr_names.end(), name);
    if (it == attr_names.end()) throw data_error("no attribute column named '" + name + "'");
    return attrs[static_cast<std::size_t>(it - attr_names.begin())];
}

std::vector<double>& PointSet::add_attr(const std::string& name) {
    if (has_attr(name)) throw data_error("attribute column '" + name + "' already exists");
    attr_names.push_back(name);
    attrs.emplace_back(size(), 0.0);
    return attrs.back();
}

PointSet PointSet::subset(const std::vector<std::size_t>& rows) const {
    PointSet out;
    out.attr_names = attr_names;
    out.attrs.resize(attrs.size());
    out.reserve(rows.size());
    for (std::size_t r : rows) {
        if (r >= size()) throw data_error("subset row index out of range");
        out.ids.push_back(ids[r]);
        out.xs.push_back(xs[r]);
        out.ys.push_back(ys[r]);
        out.strata.push_back(strata[r]);
        for (std::size_t k = 0; k < attrs.size(); ++k) out.attrs[k].push_back(attrs[k][r]);
    }
    return out;
}

std::vector<std::string> PointSet::stratum_labels() const {
    std::vector<std::string> labels;
    for (const auto& s : strata)
        if (std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
    return labels;
}

std::vector<std::size_t> PointSet::stratum_counts(const std::vector<std::string>& labels) const {
    std::vector<std::size_t> counts(labels.size(), 0);
    for (const auto& s : strata) {
        auto it = std::find(labels.begin(), labels.end(), s);
        if (it != labels.end()) ++counts[static_cast<std::size_t>(it - labels.begin())];
    }
    return counts;
}

std::vector<std::vector<std::size_t>> PointSet::stratum_rows(
    const std::vector<std::string>& labels) const {
    std::vector<std::vector<std::size_t>> rows(labels.size());
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t l = 0; l < labels.size(); ++l) index[labels[l]] = l;
    for (std::size_t i = 0; i < strata.size(); ++i) {
        auto it = index.find(strata[i]);
        if (it != index.end()) rows[it->second].push_back(i);
    }
    return rows;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

}  // namespace

PointSet read_pointset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw data_error("'" + path + "': empty file");
    auto header = split_csv_line(line);
    if (header.size() < 4 || header[0] != "id")
        throw data_error("'" + path + "': header must start with id,x,y,stratum");

    PointSet ps;
    for (std::size_t k = 4; k < header.size(); ++k) {
        if (header[k].empty()) throw data_error("'" + path + "': empty attribute column name");
        ps.attr_names.push_back(header[k]);
    }
    ps.attrs.resize(ps.attr_names.size());

    std::size_t lineno = 1;
    std::vector<double> vals(ps.attr_names.size());
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto f = split_csv_line(line);
        if (f.size() != header.size())
            throw data_error("'" + path + "' line " + std::to_string(lineno) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(f.size()));
        const std::string ctx = path + " line " + std::to_string(lineno);
        for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = parse_double(f[4 + k], ctx);
        ps.add(f[0], parse_double(f[1], ctx), parse_double(f[2], ctx), f[3], vals);
    }
    return ps;
}

void write_pointset_csv(const PointSet& ps, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write '" + path + "'");
    out << "id,x,y,stratum";
    for (const auto& name : ps.attr_names) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < ps.size(); ++i) {
        out << ps.ids[i] << ',' << format_double(ps.xs[i]) << ',' << format_double(ps.ys[i]) << ','
            << ps.strata[i];
        for (const auto& col : ps.attrs) out << ',' << format_double(col[i]);
        out << '\n';
    }
    if (!out) throw data_error("write failed for '" + path + "'");
}

}  // namespace spatialps
