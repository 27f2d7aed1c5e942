#pragma once

// Dataset files and JSON report shapes.
//
// Native dataset format: CSV with a two-line header
//     format,quaternion            (or: format,matrix)
//     group,C2
// followed by optional '#'-prefixed provenance comments and one rotation per
// row (4 or 9 columns; paired data uses 8 or 18). Values are written with 17
// significant digits so write -> read -> write is byte identical.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ambirot/inference.hpp"
#include "ambirot/regression.hpp"

namespace ambirot {

using ordered_json = nlohmann::ordered_json;

enum class DataFormat { Quaternion, Matrix };

inline const char* format_name(DataFormat f) {
    return f == DataFormat::Quaternion ? "quaternion" : "matrix";
}

inline DataFormat parse_format(const std::string& s) {
    if (s == "quaternion") return DataFormat::Quaternion;
    if (s == "matrix") return DataFormat::Matrix;
    throw std::invalid_argument("unknown format tag: " + s);
}

struct DatasetFile {
    DataFormat format = DataFormat::Quaternion;
    GroupPtr group;
    GroupPtr group2;                        // paired data with a second group
    std::vector<std::vector<double>> rows;  // raw values, exactly as parsed
    std::vector<std::pair<std::string, std::string>> provenance;

    bool paired() const {
        size_t w = format == DataFormat::Quaternion ? 4 : 9;
        return !rows.empty() && rows.front().size() == 2 * w;
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline Rotation rotation_from_values(const std::vector<double>& v, size_t offset, DataFormat fmt,
                                     size_t row_index, bool* repaired) {
    if (fmt == DataFormat::Quaternion) {
        Quat q{v[offset], v[offset + 1], v[offset + 2], v[offset + 3]};
        double n2 = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
        if (n2 < 1e-12)
            throw std::invalid_argument("row " + std::to_string(row_index) + ": zero quaternion");
        return Rotation(q.normalized());
    }
    Mat3 m;
    for (int i = 0; i < 9; ++i) m.a[i] = v[offset + i];
    Mat3 defect = transpose(m) * m - Mat3::identity();
    double err = 0;
    for (double d : defect.a) err = std::max(err, std::fabs(d));
    if (err > 1e-6 || det(m) <= 0)
        throw std::invalid_argument("row " + std::to_string(row_index) +
                                    ": not a rotation matrix (orthogonality defect " +
                                    format_double(err) + ")");
    if (err > kOrthoTol) {
        if (repaired) *repaired = true;
        return Rotation(nearest_rotation(m), false);
    }
    return Rotation(m, false);
}

} // namespace detail

inline void write_dataset(std::ostream& os, const DatasetFile& d) {
    os << "format," << format_name(d.format) << "\n";
    os << "group," << d.group->name();
    if (d.group2) os << "," << d.group2->name();
    os << "\n";
    for (const auto& [k, v] : d.provenance) os << "# " << k << "," << v << "\n";
    for (const auto& row : d.rows) {
        for (size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << detail::format_double(row[i]);
        os << "\n";
    }
}

inline void write_dataset(const std::string& path, const DatasetFile& d) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_dataset(os, d);
}

inline DatasetFile read_dataset(std::istream& is, std::ostream* warnings = nullptr) {
    DatasetFile d;
    std::string line;
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(tok);
        return out;
    };
    if (!std::getline(is, line)) throw std::invalid_argument("empty dataset file");
    auto h1 = split(line);
    if (h1.size() != 2 || h1[0] != "format")
        throw std::invalid_argument("dataset header must start with 'format,<tag>'");
    d.format = parse_format(h1[1]);
    if (!std::getline(is, line)) throw std::invalid_argument("missing group header line");
    auto h2 = split(line);
    if (h2.size() < 2 || h2.size() > 3 || h2[0] != "group")
        throw std::invalid_argument("second header line must be 'group,<tag>[,<tag>]'");
    d.group = SymmetryGroup::parse(h2[1]);
    if (h2.size() == 3) d.group2 = SymmetryGroup::parse(h2[2]);

    size_t width = d.format == DataFormat::Quaternion ? 4 : 9;
    size_t row_index = 0;
    while (std::getline(is, line)) {
        ++row_index;
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto body = line.substr(line.find_first_not_of("# "));
            auto parts = split(body);
            if (!parts.empty())
                d.provenance.emplace_back(parts[0],
                                          body.size() > parts[0].size() ? body.substr(parts[0].size() + 1)
                                                                        : "");
            continue;
        }
        auto toks = split(line);
        if (toks.size() != width && toks.size() != 2 * width)
            throw std::invalid_argument("row " + std::to_string(row_index) + ": expected " +
                                        std::to_string(width) + " or " + std::to_string(2 * width) +
                                        " values, got " + std::to_string(toks.size()));
        std::vector<double> vals;
        vals.reserve(toks.size());
        for (const auto& t : toks) {
            size_t pos = 0;
            double v;
            try {
                v = std::stod(t, &pos);
            } catch (...) {
                throw std::invalid_argument("row " + std::to_string(row_index) +
                                            ": cannot parse value '" + t + "'");
            }
            if (pos != t.size())
                throw std::invalid_argument("row " + std::to_string(row_index) +
                                            ": trailing characters in '" + t + "'");
            vals.push_back(v);
        }
        if (!d.rows.empty() && vals.size() != d.rows.front().size())
            throw std::invalid_argument("row " + std::to_string(row_index) +
                                        ": inconsistent column count");
        // validate now so errors carry the row number
        bool repaired = false;
        detail::rotation_from_values(vals, 0, d.format, row_index, &repaired);
        if (vals.size() == 2 * width)
            detail::rotation_from_values(vals, width, d.format, row_index, &repaired);
        if (repaired && warnings)
            (*warnings) << "warning: row " << row_index << " repaired by polar projection\n";
        d.rows.push_back(std::move(vals));
    }
    return d;
}

inline DatasetFile read_dataset(const std::string& path, std::ostream* warnings = nullptr) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_dataset(is, warnings);
}

inline std::vector<AmbiguousRotation> ingest(const DatasetFile& d) {
    std::vector<AmbiguousRotation> out;
    out.reserve(d.rows.size());
    for (size_t i = 0; i < d.rows.size(); ++i)
        out.emplace_back(detail::rotation_from_values(d.rows[i], 0, d.format, i + 1, nullptr),
                         d.group);
    return out;
}

inline RotationPairs ingest_pairs(const DatasetFile& d) {
    if (!d.paired()) throw std::invalid_argument("dataset is not paired");
    size_t w = d.format == DataFormat::Quaternion ? 4 : 9;
    GroupPtr g2 = d.group2 ? d.group2 : d.group;
    RotationPairs out;
    out.reserve(d.rows.size());
    for (size_t i = 0; i < d.rows.size(); ++i)
        out.emplace_back(
            AmbiguousRotation(detail::rotation_from_values(d.rows[i], 0, d.format, i + 1, nullptr),
                              d.group),
            AmbiguousRotation(detail::rotation_from_values(d.rows[i], w, d.format, i + 1, nullptr),
                              g2));
    return out;
}

inline DatasetFile make_dataset(const std::vector<AmbiguousRotation>& sample, DataFormat fmt,
                                std::vector<std::pair<std::string, std::string>> provenance = {}) {
    DatasetFile d;
    d.format = fmt;
    d.group = sample.front().group;
    d.provenance = std::move(provenance);
    for (const auto& x : sample) {
        std::vector<double> row;
        if (fmt == DataFormat::Quaternion) {
            Quat q = x.rep.quaternion();
            row = {q.w, q.x, q.y, q.z};
        } else {
            row.assign(x.rep.m.a.begin(), x.rep.m.a.end());
        }
        d.rows.push_back(std::move(row));
    }
    return d;
}

// ---------------------------------------------------------------------------
// JSON report shapes

inline ordered_json to_json(const TestReport& r) {
    ordered_json j;
    j["method"] = r.method;
    j["statistic"] = r.statistic;
    j["p_value"] = r.p_value;
    j["reference"] = r.reference;
    if (r.df) j["df"] = *r.df;
    if (r.replicates) j["B"] = *r.replicates;
    if (r.seed) j["seed"] = *r.seed;
    if (!r.components.empty()) j["components"] = r.components;
    if (!r.assumptions.empty()) j["assumptions"] = r.assumptions;
    return j;
}

inline ordered_json quat_json(const Rotation& r) {
    Quat q = r.quaternion();
    return ordered_json::array({q.w, q.x, q.y, q.z});
}

inline ordered_json to_json(const SampleSummary& s) {
    ordered_json j;
    j["n"] = s.n;
    j["group"] = s.group->name();
    j["mean"] = quat_json(s.mean.rep);
    j["dispersion"] = s.dispersion;
    j["mean_norm2"] = norm2(s.mean_embedding);
    j["mean_unique"] = s.mean_unique;
    j["config"] = {{"grid_size", s.config.grid_size}, {"gradient_tol", s.config.gradient_tol}};
    return j;
}

inline ordered_json to_json(const RegressionFit& f) {
    ordered_json j;
    j["a_hat"] = quat_json(f.a_hat);
    if (std::isfinite(f.kappa_hat))
        j["kappa_hat"] = f.kappa_hat;
    else {
        j["kappa_hat"] = nullptr; // perfect fit: zero residual
        j["perfect_fit"] = true;
    }
    j["r"] = f.r;
    j["rho12"] = f.rho12;
    j["residual_sum"] = f.residual_sum;
    if (f.cross_group) j["L"] = f.band_limit;
    j["groups"] = ordered_json::array({f.group1->name(), f.group2->name()});
    if (f.degenerate_objective) j["degenerate_objective"] = true;
    return j;
}

inline ordered_json to_json(const Misorientation& m) {
    ordered_json j;
    j["angle"] = m.angle;
    j["axis"] = ordered_json::array({m.axis.x, m.axis.y, m.axis.z});
    j["p"] = quat_json(m.p);
    j["groups"] = ordered_json::array({m.group1->name(), m.group2->name()});
    return j;
}

inline ordered_json to_json(const NormalizingConstant& nc) {
    ordered_json j;
    j["family"] = family_name(nc.family);
    j["group"] = nc.group_name;
    j["kappa_grid"] = nc.kappa_grid;
    j["log_c"] = nc.log_c;
    j["stderr"] = nc.log_c_stderr;
    j["seed"] = nc.seed;
    j["draws"] = nc.draws;
    return j;
}

inline NormalizingConstant normalizer_from_json(const ordered_json& j, GroupPtr group) {
    NormalizingConstant nc;
    nc.family = parse_family(j.at("family").get<std::string>());
    nc.group_name = j.at("group").get<std::string>();
    if (nc.group_name != group->name())
        throw std::invalid_argument("normalizer cache is for group " + nc.group_name);
    nc.kappa_grid = j.at("kappa_grid").get<std::vector<double>>();
    nc.log_c = j.at("log_c").get<std::vector<double>>();
    nc.log_c_stderr = j.at("stderr").get<std::vector<double>>();
    nc.seed = j.at("seed").get<uint64_t>();
    nc.draws = j.at("draws").get<size_t>();
    nc.interp = MonotoneCubic(nc.kappa_grid, nc.log_c);
    return nc;
}

} // namespace ambirot
