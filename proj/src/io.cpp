#include "spatialps/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include <json.hpp>

#include "spatialps/errors.hpp"
#include "spatialps/numfmt.hpp"
#include "spatialps/rng.hpp"
#include "spatialps/slm.hpp"

namespace spatialps {

namespace {

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

IngestReport ingest_listings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open listings file " + path);

    std::string line;
    if (!std::getline(in, line)) throw data_error(path + ": empty file");
    const std::vector<std::string> header = split_csv(strip_cr(line));
    if (header.size() < 5 || header[0] != "id" || header[3] != "price" || header[4] != "size")
        throw data_error(path + ": header must start id,lon,lat,price,size (or id,x,y,price,size)");
    bool geographic;
    if (header[1] == "lon" && header[2] == "lat")
        geographic = true;
    else if (header[1] == "x" && header[2] == "y")
        geographic = false;
    else
        throw data_error(path + ": coordinate columns must be lon,lat or x,y");

    std::size_t first_extra = 5;
    bool has_stratum = false;
    if (header.size() > 5 && header[5] == "stratum") {
        has_stratum = true;
        first_extra = 6;
    }
    std::vector<std::string> extra_names(header.begin() + static_cast<long>(first_extra), header.end());
    for (const std::string& name : extra_names)
        if (name == "stratum")
            throw data_error(path + ": a stratum column must come right after size");

    struct Row {
        std::string id, stratum;
        double c1, c2, price, size;
        std::vector<double> extras;
    };
    std::vector<Row> rows;
    IngestReport report;
    report.was_geographic = geographic;

    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        ++report.rows_read;
        const std::vector<std::string> f = split_csv(line);
        const std::string where = path + ":" + std::to_string(lineno);
        if (f.size() != header.size())
            throw data_error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                             std::to_string(f.size()));
        Row r;
        r.id = f[0];
        r.c1 = parse_double(f[1], where + " " + header[1]);
        r.c2 = parse_double(f[2], where + " " + header[2]);
        r.price = parse_double(f[3], where + " price");
        r.size = parse_double(f[4], where + " size");
        if (has_stratum) r.stratum = f[5];
        for (std::size_t k = 0; k < extra_names.size(); ++k)
            r.extras.push_back(parse_double(f[first_extra + k], where + " " + extra_names[k]));

        // Value-level invariants: the row is skipped and reported, the rest
        // of the file still loads.
        if (!std::isfinite(r.c1) || !std::isfinite(r.c2)) {
            report.rejections.push_back(where + ": non-finite coordinates (id " + r.id + ")");
            continue;
        }
        if (!(r.price > 0.0)) {
            report.rejections.push_back(where + ": price must be positive (id " + r.id + ")");
            continue;
        }
        if (!(r.size > 0.0)) {
            report.rejections.push_back(where + ": size must be positive (id " + r.id + ")");
            continue;
        }
        rows.push_back(std::move(r));
    }

    PointSet& ps = report.points;
    ps.attr_names.push_back("price");
    ps.attr_names.push_back("size");
    for (const std::string& name : extra_names) ps.attr_names.push_back(name);
    if (geographic) {
        ps.attr_names.push_back("lon");
        ps.attr_names.push_back("lat");
        std::vector<double> lons, lats;
        lons.reserve(rows.size());
        lats.reserve(rows.size());
        for (const Row& r : rows) {
            lons.push_back(r.c1);
            lats.push_back(r.c2);
        }
        report.projection = projection_about_centroid(lons, lats);
    }
    ps.attrs.resize(ps.attr_names.size());
    ps.reserve(rows.size());
    for (const Row& r : rows) {
        double x = r.c1, y = r.c2;
        if (geographic) {
            const auto [mx, my] = report.projection.to_meters(r.c1, r.c2);
            x = mx;
            y = my;
        }
        std::vector<double> attrs;
        attrs.push_back(r.price);
        attrs.push_back(r.size);
        for (double e : r.extras) attrs.push_back(e);
        if (geographic) {
            attrs.push_back(r.c1);
            attrs.push_back(r.c2);
        }
        ps.add(r.id, x, y, r.stratum, attrs);
    }
    return report;
}

void write_listings_csv(const PointSet& points, const std::string& path) {
    const bool geographic = points.has_attr("lon") && points.has_attr("lat");
    if (!points.has_attr("price") || !points.has_attr("size"))
        throw data_error("write_listings_csv: points lack price/size attributes");
    bool has_stratum = false;
    for (const std::string& s : points.strata)
        if (!s.empty()) has_stratum = true;

    std::vector<std::string> extras;
    for (const std::string& name : points.attr_names)
        if (name != "price" && name != "size" && name != "lon" && name != "lat")
            extras.push_back(name);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out << (geographic ? "id,lon,lat,price,size" : "id,x,y,price,size");
    if (has_stratum) out << ",stratum";
    for (const std::string& name : extras) out << ',' << name;
    out << '\n';

    const std::vector<double>* lon = geographic ? &points.attr("lon") : nullptr;
    const std::vector<double>* lat = geographic ? &points.attr("lat") : nullptr;
    const std::vector<double>& price = points.attr("price");
    const std::vector<double>& size = points.attr("size");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double cx = geographic ? (*lon)[i] : points.xs[i];
        const double cy = geographic ? (*lat)[i] : points.ys[i];
        out << points.ids[i] << ',' << format_double(cx) << ',' << format_double(cy) << ','
            << format_double(price[i]) << ',' << format_double(size[i]);
        if (has_stratum) out << ',' << points.strata[i];
        for (const std::string& name : extras) out << ',' << format_double(points.attr(name)[i]);
        out << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

std::map<std::string, double> StrataSpec::aux() const {
    std::map<std::string, double> out;
    for (const Stratum& s : strata) out[s.id] = s.aux_size;
    return out;
}

StrataSpec read_strata_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open strata file " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw data_error("strata file " + path + ": " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("strata") || !j["strata"].is_array())
        throw data_error("strata file " + path + ": expected an object with a 'strata' array");

    StrataSpec spec;
    std::set<std::string> seen;
    for (const auto& e : j["strata"]) {
        if (!e.is_object() || !e.contains("id") || !e["id"].is_string())
            throw data_error(path + ": every stratum needs a string 'id'");
        Stratum s;
        s.id = e["id"].get<std::string>();
        if (!e.contains("aux_size") || !e["aux_size"].is_number())
            throw data_error("stratum '" + s.id + "': missing numeric 'aux_size'");
        s.aux_size = e["aux_size"].get<double>();
        if (!(s.aux_size > 0.0)) throw data_error("stratum '" + s.id + "': aux_size must be positive");
        if (!seen.insert(s.id).second) throw data_error(path + ": duplicate stratum id '" + s.id + "'");
        if (e.contains("ring")) {
            if (!e["ring"].is_array()) throw data_error("stratum '" + s.id + "': ring must be an array");
            for (const auto& v : e["ring"]) {
                if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
                    throw data_error("stratum '" + s.id + "': ring vertices must be [x, y] pairs");
                s.ring.xs.push_back(v[0].get<double>());
                s.ring.ys.push_back(v[1].get<double>());
            }
            s.ring.validate(s.id);
        }
        spec.strata.push_back(std::move(s));
    }
    if (spec.strata.empty()) throw data_error(path + ": no strata defined");
    return spec;
}

AssignReport assign_strata(const PointSet& points, const StrataSpec& spec) {
    if (spec.strata.empty()) throw data_error("assign_strata: no strata");
    std::vector<std::size_t> order(spec.strata.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return spec.strata[a].id < spec.strata[b].id; });
    for (std::size_t idx : order) {
        const Stratum& s = spec.strata[idx];
        if (s.ring.vertex_count() == 0) throw data_error("stratum '" + s.id + "' has no polygon");
        s.ring.validate(s.id);
    }

    // Geographic data keeps raw degrees in lon/lat columns; rings are given
    // in the same space, so membership is tested there.
    const bool geo = points.has_attr("lon") && points.has_attr("lat");
    const std::vector<double>& px = geo ? points.attr("lon") : points.xs;
    const std::vector<double>& py = geo ? points.attr("lat") : points.ys;

    PointSet labeled = points;
    std::vector<std::size_t> keep;
    AssignReport report;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const Stratum* hit = nullptr;
        // Ascending id order makes the boundary tie rule "smallest id wins".
        for (std::size_t idx : order) {
            if (point_in_polygon(spec.strata[idx].ring, px[i], py[i])) {
                hit = &spec.strata[idx];
                break;
            }
        }
        if (hit) {
            labeled.strata[i] = hit->id;
            keep.push_back(i);
        } else {
            report.unassigned_ids.push_back(points.ids[i]);
        }
    }
    report.points = labeled.subset(keep);
    return report;
}

HedonicResult hedonic_pipeline(const PointSet& labeled, const StrataSpec& spec,
                               const WeightsOptions& weights, const SweepOptions& sweep) {
    if (labeled.size() == 0) throw data_error("hedonic: no listings");
    for (const std::string& s : labeled.strata)
        if (s.empty()) throw data_error("hedonic: unlabeled listings; assign strata first");
    if (!labeled.has_attr("price") || !labeled.has_attr("size"))
        throw data_error("hedonic: listings need price and size columns");

    const std::map<std::string, double> aux = spec.aux();
    const std::vector<std::string> present = labeled.stratum_labels();
    for (const std::string& l : present)
        if (aux.find(l) == aux.end())
            throw data_error("hedonic: stratum '" + l + "' is missing from the strata table");

    HedonicResult result;
    {
        const std::set<std::string> present_set(present.begin(), present.end());
        for (const Stratum& s : spec.strata)
            if (present_set.find(s.id) == present_set.end())
                result.warnings.push_back("stratum '" + s.id +
                                          "' has no listings; excluded from the design");
    }

    SweepOptions opts = sweep;
    opts.x_attr = "size";
    opts.y_attr = "price";
    result.sweep = zeta_sweep(labeled, aux, weights, opts);

    const double beta1 = result.sweep.rows.back().beta_hat;
    if (beta1 == 0.0) throw numerical_error("hedonic: reference estimate at zeta = 1 is zero");
    for (const ZetaSweepRow& r : result.sweep.rows) {
        HedonicRow h;
        h.zeta = r.zeta;
        h.n = r.n;
        h.rho_hat = r.rho_hat;
        h.beta_hat = r.beta_hat;
        h.rel_bias_pct = 100.0 * r.bias / std::abs(beta1);
        h.mse = r.mse;
        h.ok = r.fit_ok;
        result.rows.push_back(h);
    }
    result.selected = result.sweep.selected;
    return result;
}

void write_hedonic_csv(const HedonicResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot open " + path + " for writing");
    out << "zeta,n,rho_hat,beta_hat,rel_bias_pct,mse,selected\n";
    for (std::size_t i = 0; i < result.rows.size(); ++i) {
        const HedonicRow& r = result.rows[i];
        out << format_double(r.zeta) << ',' << r.n << ',' << format_double(r.rho_hat) << ','
            << format_double(r.beta_hat) << ',' << format_double(r.rel_bias_pct) << ','
            << format_double(r.mse) << ',' << (i == result.selected ? '1' : '0') << '\n';
    }
    if (!out) throw data_error("write failed: " + path);
}

void write_synthetic_milan(const std::string& listings_path, const std::string& strata_path,
                           std::uint64_t seed) {
    // City box roughly 22 x 18 km, carved into an 11 x 8 stratum grid (88
    // cells). Family counts and listing coverage both peak downtown; the
    // coverage tilt is steeper, which is exactly the convenience-sampling
    // distortion the pipeline is meant to correct.
    const double lon_min = 9.05, lon_max = 9.33;
    const double lat_min = 45.39, lat_max = 45.55;
    const int ncols = 11, nrows = 8;
    const double dlon = (lon_max - lon_min) / ncols;
    const double dlat = (lat_max - lat_min) / nrows;
    const double clon = 0.5 * (lon_min + lon_max);
    const double clat = 0.5 * (lat_min + lat_max);
    const auto center_r2 = [&](double lon, double lat) {
        const double dx = (lon - clon) / (0.5 * (lon_max - lon_min));
        const double dy = (lat - clat) / (0.5 * (lat_max - lat_min));
        return dx * dx + dy * dy;  // 0 downtown, 2 at the box corners
    };

    struct Cell {
        std::string id;
        double lon0, lat0;
        double aux;
        double weight;  // convenience coverage, steeper than aux
    };
    std::vector<Cell> cells;
    for (int row = 0; row < nrows; ++row) {
        for (int col = 0; col < ncols; ++col) {
            Cell c;
            const int l = row * ncols + col + 1;
            c.id = "NIL" + std::string(l < 10 ? "0" : "") + std::to_string(l);
            c.lon0 = lon_min + col * dlon;
            c.lat0 = lat_min + row * dlat;
            const double r2 = center_r2(c.lon0 + 0.5 * dlon, c.lat0 + 0.5 * dlat);
            c.aux = std::round(2500.0 + 26000.0 * std::exp(-2.2 * r2));
            c.weight = c.aux * std::exp(-1.8 * r2);
            cells.push_back(std::move(c));
        }
    }

    // Deterministic per-cell listing counts: PPS rounding of the coverage
    // weights to exactly 1000.
    std::vector<double> weights, m_real;
    std::vector<std::size_t> counts;
    for (const Cell& c : cells) weights.push_back(c.weight);
    pps_allocation(weights, 1000, m_real, counts);

    PointSet pts;
    pts.attr_names = {"size"};
    pts.attrs.resize(1);
    std::vector<double> lons, lats;
    Rng size_rng = Rng::stream(seed, Rng::tag("milsize"));
    for (std::size_t l = 0; l < cells.size(); ++l) {
        Rng loc = Rng::stream(seed, Rng::tag("milloc"), l);
        for (std::size_t k = 0; k < counts[l]; ++k) {
            const double lon = cells[l].lon0 + loc.next_double() * dlon;
            const double lat = cells[l].lat0 + loc.next_double() * dlat;
            const double size = 35.0 + std::floor(size_rng.next_double() * 146.0);  // 35..180 m2
            const std::size_t i = pts.size();
            pts.add("L" + std::to_string(10000 + i + 1).substr(1), 0.0, 0.0, cells[l].id, {size});
            lons.push_back(lon);
            lats.push_back(lat);
        }
    }
    const LocalProjection proj = projection_about_centroid(lons, lats);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const auto [mx, my] = proj.to_meters(lons[i], lats[i]);
        pts.xs[i] = mx;
        pts.ys[i] = my;
    }

    // Price DGP: a genuine spatial lag plus a center-periphery level term the
    // size regression cannot explain. Downtown-heavy coverage then biases the
    // uncorrected slope upward.
    const double rho_true = 0.45;
    const double beta_size = 3000.0;   // EUR per m2
    const double gradient0 = 90000.0;  // downtown premium, EUR
    const double noise_sd = 30000.0;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(pts.size()), 2);
    const std::vector<double>& sizes = pts.attr("size");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        X(static_cast<Eigen::Index>(i), 0) = sizes[i];
        X(static_cast<Eigen::Index>(i), 1) = gradient0 * std::exp(-2.5 * center_r2(lons[i], lats[i]));
    }
    WeightsOptions wopts;  // threshold scheme, auto threshold, row-standardized
    const SpatialWeights w = build_weights(pts, wopts);
    SlmParams truth;
    truth.beta = Eigen::Vector2d(beta_size, 1.0);
    truth.rho = rho_true;
    truth.sigma2 = noise_sd * noise_sd;
    const Eigen::VectorXd y =
        simulate(X, w, truth, Rng::stream(seed, Rng::tag("milprice")).next_u64());

    std::ofstream out(listings_path, std::ios::binary);
    if (!out) throw data_error("cannot open " + listings_path + " for writing");
    out << "id,lon,lat,price,size\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const long long price = std::llround(y[static_cast<Eigen::Index>(i)]);
        if (price <= 0)
            throw numerical_error("synthetic listing " + pts.ids[i] + " priced at " +
                                  std::to_string(price) + "; DGP constants need retuning");
        out << pts.ids[i] << ',' << format_double(lons[i]) << ',' << format_double(lats[i]) << ','
            << price << ',' << format_double(sizes[i]) << '\n';
    }
    if (!out) throw data_error("write failed: " + listings_path);

    nlohmann::ordered_json j;
    j["strata"] = nlohmann::ordered_json::array();
    for (const Cell& c : cells) {
        nlohmann::ordered_json s;
        s["id"] = c.id;
        s["aux_size"] = c.aux;
        const auto vertex = [](double a, double b) { return nlohmann::ordered_json::array({a, b}); };
        auto ring = nlohmann::ordered_json::array();
        ring.push_back(vertex(c.lon0, c.lat0));
        ring.push_back(vertex(c.lon0 + dlon, c.lat0));
        ring.push_back(vertex(c.lon0 + dlon, c.lat0 + dlat));
        ring.push_back(vertex(c.lon0, c.lat0 + dlat));
        ring.push_back(vertex(c.lon0, c.lat0));
        s["ring"] = std::move(ring);
        j["strata"].push_back(std::move(s));
    }
    std::ofstream sj(strata_path, std::ios::binary);
    if (!sj) throw data_error("cannot open " + strata_path + " for writing");
    sj << j.dump(2) << '\n';
    if (!sj) throw data_error("write failed: " + strata_path);
}

}  // namespace spatialps
