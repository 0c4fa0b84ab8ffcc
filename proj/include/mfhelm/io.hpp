#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "mfhelm/common.hpp"
#include "mfhelm/field.hpp"
#include "mfhelm/illumination.hpp"
#include "mfhelm/mesh.hpp"
#include "mfhelm/power_density.hpp"

namespace mfhelm {

namespace detail {

inline std::string full_precision(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace detail

/// CSV export with one row per entity: `id,x1,x2,value` (entity coordinates
/// are vertex positions or cell barycenters).
inline void write_csv(const ScalarField& field, const std::string& path)
{
    field.check();
    std::ofstream os(path);
    if (!os) throw validation_error("write_csv: cannot open " + path);
    os << "id,x1,x2,value\n";
    const Mesh2D& mesh = *field.mesh;
    if (field.kind == FieldKind::vertex) {
        for (int v = 0; v < mesh.vertex_count(); ++v)
            os << v << ',' << detail::full_precision(mesh.vertices[v].x) << ','
               << detail::full_precision(mesh.vertices[v].y) << ','
               << detail::full_precision(field[v]) << '\n';
    } else {
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            Point b = mesh.barycenter(t);
            os << t << ',' << detail::full_precision(b.x) << ',' << detail::full_precision(b.y)
               << ',' << detail::full_precision(field[t]) << '\n';
        }
    }
    if (!os) throw validation_error("write_csv: write failed for " + path);
}

/// Reads back a CSV written by write_csv; returns the value column indexed
/// by id.
inline std::vector<double> read_csv_values(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw validation_error("read_csv_values: cannot open " + path);
    std::string line;
    if (!std::getline(is, line) || line.rfind("id,", 0) != 0)
        throw validation_error("read_csv_values: missing header in " + path);
    std::vector<double> values;
    int line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        long id;
        double x1, x2, value;
        if (std::sscanf(line.c_str(), "%ld,%lf,%lf,%lf", &id, &x1, &x2, &value) != 4)
            throw validation_error(format_msg("read_csv_values: ", path, ":", line_no,
                                              ": malformed row"));
        if (id != static_cast<long>(values.size()))
            throw validation_error(format_msg("read_csv_values: ", path, ":", line_no,
                                              ": ids must be consecutive"));
        values.push_back(value);
    }
    return values;
}

/// Legacy-VTK ASCII writer (UNSTRUCTURED_GRID of triangles). Vertex fields
/// land in POINT_DATA, cell fields in CELL_DATA; names must be unique.
inline void write_vtk(const std::vector<std::pair<std::string, const ScalarField*>>& fields,
                      const Mesh2D& mesh, const std::string& path)
{
    std::ofstream os(path);
    if (!os) throw validation_error("write_vtk: cannot open " + path);
    os << "# vtk DataFile Version 3.0\n";
    os << "mfhelm fields\n";
    os << "ASCII\n";
    os << "DATASET UNSTRUCTURED_GRID\n";
    os << "POINTS " << mesh.vertex_count() << " double\n";
    for (const auto& p : mesh.vertices)
        os << detail::full_precision(p.x) << ' ' << detail::full_precision(p.y) << " 0\n";
    os << "CELLS " << mesh.triangle_count() << ' ' << 4 * mesh.triangle_count() << '\n';
    for (const auto& t : mesh.triangles) os << "3 " << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << '\n';
    os << "CELL_TYPES " << mesh.triangle_count() << '\n';
    for (int t = 0; t < mesh.triangle_count(); ++t) os << "5\n";

    bool point_header = false, cell_header = false;
    for (const auto& [name, field] : fields) {
        field->check();
        if (field->mesh != &mesh) throw validation_error("write_vtk: field on a different mesh");
        if (field->kind == FieldKind::vertex) {
            if (!point_header) {
                os << "POINT_DATA " << mesh.vertex_count() << '\n';
                point_header = true;
            }
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : field->values) os << detail::full_precision(v) << '\n';
        }
    }
    for (const auto& [name, field] : fields) {
        if (field->kind == FieldKind::cell) {
            if (!cell_header) {
                os << "CELL_DATA " << mesh.triangle_count() << '\n';
                cell_header = true;
            }
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double v : field->values) os << detail::full_precision(v) << '\n';
        }
    }
    if (!os) throw validation_error("write_vtk: write failed for " + path);
}

/// Writes a power-density dataset: one CSV per (k, i, j) entry of e and E,
/// the mesh, and a manifest tying them together.
inline void write_power_density(const PowerDensityData& data, const std::string& dir,
                                const std::string& basename = "data")
{
    std::filesystem::create_directories(dir);
    const std::string mesh_file = basename + ".mesh";
    save_mesh(*data.mesh, dir + "/" + mesh_file);

    std::ofstream manifest(dir + "/" + basename + ".manifest");
    if (!manifest) throw validation_error("write_power_density: cannot open manifest");
    manifest << "mesh " << mesh_file << '\n';
    manifest << "region " << data.region_tag << '\n';
    manifest << "frequencies " << data.n_freq() << '\n';
    for (double k : data.frequencies) manifest << detail::full_precision(k) << '\n';
    manifest << "illuminations " << data.n_illum() << '\n';
    for (const auto& phi : data.illuminations) manifest << phi.source() << '\n';
    for (int ki = 0; ki < data.n_freq(); ++ki)
        for (int i = 0; i < data.n_illum(); ++i)
            for (int j = i; j < data.n_illum(); ++j) {
                std::string e_file = format_msg(basename, "_e_k", ki, "_", i, j, ".csv");
                std::string E_file = format_msg(basename, "_E_k", ki, "_", i, j, ".csv");
                write_csv(data.e(ki, i, j), dir + "/" + e_file);
                write_csv(data.E(ki, i, j), dir + "/" + E_file);
                manifest << "entry e " << ki << ' ' << i << ' ' << j << ' ' << e_file << '\n';
                manifest << "entry E " << ki << ' ' << i << ' ' << j << ' ' << E_file << '\n';
            }
    if (!manifest) throw validation_error("write_power_density: manifest write failed");
}

struct LoadedPowerDensity {
    std::shared_ptr<Mesh2D> mesh;
    PowerDensityData data;
};

/// Reads a dataset written by write_power_density.
inline LoadedPowerDensity load_power_density(const std::string& manifest_path)
{
    std::ifstream is(manifest_path);
    if (!is) throw validation_error("load_power_density: cannot open " + manifest_path);
    std::string dir = std::filesystem::path(manifest_path).parent_path().string();
    if (dir.empty()) dir = ".";

    auto fail = [&](const std::string& what) {
        throw validation_error("load_power_density: " + manifest_path + ": " + what);
    };

    std::string word;
    if (!(is >> word) || word != "mesh") fail("expected mesh entry");
    std::string mesh_file;
    is >> mesh_file;

    LoadedPowerDensity out;
    out.mesh = std::make_shared<Mesh2D>(load_mesh(dir + "/" + mesh_file));
    out.data.mesh = out.mesh.get();

    if (!(is >> word) || word != "region") fail("expected region entry");
    is >> out.data.region_tag;

    long n_freq = 0;
    if (!(is >> word >> n_freq) || word != "frequencies") fail("expected frequency count");
    std::vector<double> freqs(n_freq);
    for (auto& k : freqs)
        if (!(is >> k)) fail("truncated frequency list");

    long n_illum = 0;
    if (!(is >> word >> n_illum) || word != "illuminations") fail("expected illumination count");
    is.ignore();
    for (long i = 0; i < n_illum; ++i) {
        std::string src;
        if (!std::getline(is, src)) fail("truncated illumination list");
        out.data.illuminations.push_back(Illumination::parse(src));
    }

    const long pairs = n_illum * (n_illum + 1) / 2;
    std::vector<std::vector<ScalarField>> e_store(n_freq), E_store(n_freq);
    for (long ki = 0; ki < n_freq; ++ki) {
        e_store[ki].resize(pairs);
        E_store[ki].resize(pairs);
    }
    std::string kind;
    long ki, i, j;
    std::string file;
    long seen = 0;
    while (is >> word >> kind >> ki >> i >> j >> file) {
        if (word != "entry") fail("unexpected token '" + word + "'");
        if (kind != "e" && kind != "E") fail("entry kind must be e or E, got '" + kind + "'");
        if (ki < 0 || ki >= n_freq || i < 0 || j < i || j >= n_illum) fail("entry indices out of range");
        auto values = read_csv_values(dir + "/" + file);
        long pidx = i * n_illum - i * (i - 1) / 2 + (j - i);
        FieldKind fk = (kind == "e") ? FieldKind::vertex : FieldKind::cell;
        ScalarField f(*out.mesh, fk);
        if (values.size() != f.values.size()) fail("field size mismatch in " + file);
        f.values = values;
        (kind == "e" ? e_store : E_store)[ki][pidx] = std::move(f);
        ++seen;
    }
    if (seen != 2 * n_freq * pairs) fail("manifest lists an incomplete entry set");
    for (long kk = 0; kk < n_freq; ++kk)
        out.data.push_frequency(freqs[kk], std::move(e_store[kk]), std::move(E_store[kk]));
    return out;
}

/// Flat key-value configuration file: `key = value` lines, '#' comments.
inline std::map<std::string, std::string> parse_config_file(const std::string& path)
{
    std::ifstream is(path);
    if (!is) throw validation_error("parse_config_file: cannot open " + path);
    std::map<std::string, std::string> out;
    std::string line;
    int line_no = 0;
    auto trim = [](std::string s) {
        auto issp = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
        while (!s.empty() && issp(s.front())) s.erase(s.begin());
        while (!s.empty() && issp(s.back())) s.pop_back();
        return s;
    };
    while (std::getline(is, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw validation_error(format_msg("parse_config_file: ", path, ":", line_no,
                                              ": expected `key = value`"));
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw validation_error(format_msg("parse_config_file: ", path, ":", line_no,
                                              ": empty key"));
        out[key] = value;
    }
    return out;
}

/// Splits a comma-separated list, trimming blanks.
inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    for (auto& item : out) {
        while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.erase(item.begin());
        while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.pop_back();
    }
    if (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

}  // namespace mfhelm
