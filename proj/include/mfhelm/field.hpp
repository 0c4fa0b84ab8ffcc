#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mfhelm/common.hpp"
#include "mfhelm/mesh.hpp"

namespace mfhelm {

enum class FieldKind { vertex, cell };

/// Piecewise field on a mesh: P1 nodal (per-vertex) or P0 (per-cell).
struct ScalarField {
    const Mesh2D* mesh = nullptr;
    FieldKind kind = FieldKind::vertex;
    std::vector<double> values;
    std::string unit;

    ScalarField() = default;
    ScalarField(const Mesh2D& m, FieldKind k, double fill = 0.0, std::string unit_tag = "")
        : mesh(&m),
          kind(k),
          values(k == FieldKind::vertex ? m.vertex_count() : m.triangle_count(), fill),
          unit(std::move(unit_tag))
    {
    }

    std::size_t expected_size() const
    {
        return kind == FieldKind::vertex ? mesh->vertices.size() : mesh->triangles.size();
    }

    void check() const
    {
        if (!mesh) throw validation_error("ScalarField: no mesh attached");
        if (values.size() != expected_size())
            throw validation_error(format_msg("ScalarField: ", values.size(), " values for ",
                                              expected_size(), " entities"));
        for (double v : values)
            if (!std::isfinite(v)) throw validation_error("ScalarField: non-finite value");
    }

    double& operator[](std::size_t i) { return values[i]; }
    double operator[](std::size_t i) const { return values[i]; }

    /// P1 value at a cell barycenter (vertex average); P0 is constant per cell.
    double at_barycenter(int t) const
    {
        if (kind == FieldKind::cell) return values[t];
        const auto& tr = mesh->triangles[t];
        return (values[tr.v[0]] + values[tr.v[1]] + values[tr.v[2]]) / 3.0;
    }

    /// Cellwise view: P0 passthrough, P1 averaged at barycenters.
    std::vector<double> cell_values() const
    {
        if (kind == FieldKind::cell) return values;
        std::vector<double> out(mesh->triangle_count());
        for (int t = 0; t < mesh->triangle_count(); ++t) out[t] = at_barycenter(t);
        return out;
    }

    /// Point evaluation: P1 interpolation (or the P0 cell value) on the
    /// triangle containing p. Linear scan; intended for probing, not inner
    /// loops.
    double value_at(const Point& p) const
    {
        const Mesh2D& m = *mesh;
        for (int t = 0; t < m.triangle_count(); ++t) {
            const auto& tr = m.triangles[t];
            const Point &a = m.vertices[tr.v[0]], &b = m.vertices[tr.v[1]], &c = m.vertices[tr.v[2]];
            double det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
            double l1 = ((p.x - a.x) * (c.y - a.y) - (c.x - a.x) * (p.y - a.y)) / det;
            double l2 = ((b.x - a.x) * (p.y - a.y) - (p.x - a.x) * (b.y - a.y)) / det;
            double l0 = 1.0 - l1 - l2;
            if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12) continue;
            if (kind == FieldKind::cell) return values[t];
            return l0 * values[tr.v[0]] + l1 * values[tr.v[1]] + l2 * values[tr.v[2]];
        }
        throw validation_error(format_msg("value_at: point (", p.x, ",", p.y, ") outside the mesh"));
    }

    /// Vertexwise view: P1 passthrough, P0 averaged over incident cells
    /// weighted by area.
    std::vector<double> vertex_values() const
    {
        if (kind == FieldKind::vertex) return values;
        std::vector<double> out(mesh->vertex_count(), 0.0);
        std::vector<double> w(mesh->vertex_count(), 0.0);
        for (int t = 0; t < mesh->triangle_count(); ++t) {
            double a = mesh->area(t);
            for (int vi : mesh->triangles[t].v) {
                out[vi] += a * values[t];
                w[vi] += a;
            }
        }
        for (int v = 0; v < mesh->vertex_count(); ++v) out[v] /= w[v];
        return out;
    }
};

/// Restriction of a field to a submesh via its parent-index maps.
inline ScalarField restrict_field(const ScalarField& field, const Mesh2D& sub, const SubmeshMaps& maps)
{
    field.check();
    ScalarField out(sub, field.kind, 0.0, field.unit);
    const auto& idx = (field.kind == FieldKind::vertex) ? maps.vertex_to_parent : maps.cell_to_parent;
    if (idx.size() != out.values.size())
        throw validation_error("restrict_field: submesh maps do not match the submesh");
    for (std::size_t i = 0; i < idx.size(); ++i) out.values[i] = field.values[idx[i]];
    return out;
}

/// One 2-vector per triangle (e.g. a P1 gradient).
struct CellVectorField {
    const Mesh2D* mesh = nullptr;
    std::vector<std::array<double, 2>> values;

    CellVectorField() = default;
    explicit CellVectorField(const Mesh2D& m) : mesh(&m), values(m.triangle_count(), {0.0, 0.0}) {}

    void check() const
    {
        if (!mesh) throw validation_error("CellVectorField: no mesh attached");
        if (values.size() != mesh->triangles.size())
            throw validation_error(format_msg("CellVectorField: ", values.size(), " values for ",
                                              mesh->triangles.size(), " cells"));
        for (const auto& v : values)
            if (!std::isfinite(v[0]) || !std::isfinite(v[1]))
                throw validation_error("CellVectorField: non-finite value");
    }
};

}  // namespace mfhelm
