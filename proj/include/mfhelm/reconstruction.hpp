#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "mfhelm/common.hpp"
#include "mfhelm/fem.hpp"
#include "mfhelm/power_density.hpp"

namespace mfhelm {

namespace detail {

/// tr(e_k) as a vertex field: sum of the diagonal entries at frequency ki.
inline std::vector<double> trace_e_vertex(const PowerDensityData& data, int ki)
{
    const Mesh2D& mesh = *data.mesh;
    std::vector<double> tr(mesh.vertex_count(), 0.0);
    for (int i = 0; i < data.n_illum(); ++i) {
        const auto& eii = data.e(ki, i, i);
        for (int v = 0; v < mesh.vertex_count(); ++v) tr[v] += eii[v];
    }
    return tr;
}

inline double vertex_avg(const Mesh2D& mesh, const std::vector<double>& f, int t)
{
    const auto& tri = mesh.triangles[t].v;
    return (f[tri[0]] + f[tri[1]] + f[tri[2]]) / 3.0;
}

}  // namespace detail

/// Pointwise value of (tr(e) tr(E) - tr(eE)) / tr(e)^2 at cell barycenters
/// for one frequency; cells where tr(e) <= 0 are flagged invalid.
struct PositivityField {
    ScalarField value;        // per-cell
    std::vector<char> valid;  // tr(e) > 0 at the barycenter
};

inline PositivityField positivity_field(const PowerDensityData& data, int ki)
{
    const Mesh2D& mesh = *data.mesh;
    const int n = data.n_illum();
    PositivityField out{ScalarField(mesh, FieldKind::cell), std::vector<char>(mesh.triangle_count(), 0)};

    auto tr_e_vertex = detail::trace_e_vertex(data, ki);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        double tr_e = detail::vertex_avg(mesh, tr_e_vertex, t);
        if (!(tr_e > 0.0)) continue;
        double tr_E = 0.0;
        for (int i = 0; i < n; ++i) tr_E += data.E(ki, i, i)[t];
        double tr_eE = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const auto& eij = data.e(ki, i, j);
                const auto& tri = mesh.triangles[t].v;
                double e_bary = (eij[tri[0]] + eij[tri[1]] + eij[tri[2]]) / 3.0;
                tr_eE += e_bary * data.E(ki, i, j)[t];
            }
        out.value[t] = (tr_e * tr_E - tr_eE) / (tr_e * tr_e);
        out.valid[t] = 1;
    }
    return out;
}

/// Result of the trace-formula reconstruction of G = a/q.
struct GReconstruction {
    ScalarField G;                          // per-cell
    std::vector<std::vector<int>> used_k;   // frequency indices averaged per cell
    std::vector<char> neighbor_filled;      // cells inheriting from neighbors
    ScalarField denominator;                // per-cell max over k of the formula denominator
    ScalarField positivity;                 // per-cell min over used k of the trace expression
};

/// Exact formula for G = a/q per cell:
///   G_k = 2 (tr(e) tr(E) - tr(eE)) / (|grad(e/tr e)|_2^2 tr(e)^2),
/// averaged over every k whose denominator exceeds denom_threshold, with
/// off-diagonal gradient entries counted twice. Cells with no valid k take
/// one pass of neighbor averaging and are flagged.
inline GReconstruction reconstruct_G(const PowerDensityData& data, double denom_threshold = 1e-2)
{
    const Mesh2D& mesh = *data.mesh;
    const int n = data.n_illum();
    const int nt = mesh.triangle_count();

    GReconstruction out{ScalarField(mesh, FieldKind::cell),
                        std::vector<std::vector<int>>(nt),
                        std::vector<char>(nt, 0),
                        ScalarField(mesh, FieldKind::cell),
                        ScalarField(mesh, FieldKind::cell,
                                    std::numeric_limits<double>::quiet_NaN())};
    std::vector<double> accum(nt, 0.0);

    for (int ki = 0; ki < data.n_freq(); ++ki) {
        auto tr_e_vertex = detail::trace_e_vertex(data, ki);
        PositivityField pos = positivity_field(data, ki);

        // cells touching a vertex with tr(e) <= 0 cannot form the quotient at
        // this frequency
        std::vector<char> quotient_ok(nt, 1);
        for (int t = 0; t < nt; ++t)
            for (int vi : mesh.triangles[t].v)
                if (!(tr_e_vertex[vi] > 0.0)) quotient_ok[t] = 0;

        // cell gradients of w^{ij} = e^{ij}/tr(e)
        std::vector<double> grad_norm2(nt, 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                ScalarField w(mesh, FieldKind::vertex);
                const auto& eij = data.e(ki, i, j);
                for (int v = 0; v < mesh.vertex_count(); ++v)
                    w[v] = (tr_e_vertex[v] > 0.0) ? eij[v] / tr_e_vertex[v] : 0.0;
                CellVectorField g = p1_gradient(w);
                double mult = (i == j) ? 1.0 : 2.0;
                for (int t = 0; t < nt; ++t)
                    grad_norm2[t] += mult * (g.values[t][0] * g.values[t][0] +
                                             g.values[t][1] * g.values[t][1]);
            }

        for (int t = 0; t < nt; ++t) {
            if (!pos.valid[t] || !quotient_ok[t]) continue;
            double tr_e = detail::vertex_avg(mesh, tr_e_vertex, t);
            double denom = grad_norm2[t] * tr_e * tr_e;
            out.denominator[t] = std::max(out.denominator[t], denom);
            if (denom <= denom_threshold) continue;
            double g_k = 2.0 * pos.value[t] * tr_e * tr_e / denom;
            accum[t] += g_k;
            out.used_k[t].push_back(ki);
            double prev = out.positivity[t];
            out.positivity[t] = std::isnan(prev) ? pos.value[t] : std::min(prev, pos.value[t]);
        }
    }

    bool any = false;
    for (int t = 0; t < nt; ++t)
        if (!out.used_k[t].empty()) {
            out.G[t] = accum[t] / static_cast<double>(out.used_k[t].size());
            any = true;
        }
    if (!any)
        throw numerical_error("reconstruct_G: no cell has any frequency above the denominator "
                              "threshold");

    auto neighbors = mesh.cell_neighbors();
    std::vector<int> empty_cells;
    for (int t = 0; t < nt; ++t)
        if (out.used_k[t].empty()) empty_cells.push_back(t);
    for (int t : empty_cells) {
        double sum = 0.0;
        int cnt = 0;
        for (int nb : neighbors[t]) {
            if (out.used_k[nb].empty()) continue;
            sum += out.G[nb];
            ++cnt;
        }
        if (cnt > 0) out.G[t] = sum / cnt;
        out.neighbor_filled[t] = 1;
    }
    return out;
}

/// Weighted elliptic solve for log q on the measurement submesh:
///   -div(G tr(e) grad u) = -div(G grad tr(e)) + 2 sum_{k,i} (E^ii - k e^ii),
///   u = log q on the submesh boundary;  returns q* = exp(u).
/// tr(e) sums the diagonal entries over every frequency and illumination.
inline ScalarField reconstruct_q(const ScalarField& G, const PowerDensityData& data,
                                 const std::map<int, double>& boundary_log_q)
{
    const Mesh2D& mesh = *data.mesh;
    if (G.mesh != &mesh || G.kind != FieldKind::cell)
        throw validation_error("reconstruct_q: G must be a cell field on the data mesh");

    // total trace over k and i, as a vertex field
    std::vector<double> tr_e(mesh.vertex_count(), 0.0);
    for (int ki = 0; ki < data.n_freq(); ++ki) {
        auto tk = detail::trace_e_vertex(data, ki);
        for (int v = 0; v < mesh.vertex_count(); ++v) tr_e[v] += tk[v];
    }
    ScalarField tr_e_field(mesh, FieldKind::vertex);
    tr_e_field.values = tr_e;
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (tr_e_field.at_barycenter(t) < 1e-12)
            throw numerical_error(format_msg("reconstruct_q: tr(e) vanishes at cell ", t));

    ScalarField coef(mesh, FieldKind::cell);
    for (int t = 0; t < mesh.triangle_count(); ++t)
        coef[t] = G[t] * tr_e_field.at_barycenter(t);
    SparseMatrix K = assemble_stiffness(mesh, coef);

    Vector rhs = gradient_pairing_load(mesh, G.values, p1_gradient(tr_e_field));
    std::vector<double> E_sum(mesh.triangle_count(), 0.0);
    Vector ke_sum = Vector::Zero(mesh.vertex_count());
    for (int ki = 0; ki < data.n_freq(); ++ki) {
        double k = data.frequencies[ki];
        for (int i = 0; i < data.n_illum(); ++i) {
            const auto& Eii = data.E(ki, i, i);
            for (int t = 0; t < mesh.triangle_count(); ++t) E_sum[t] += Eii[t];
            const auto& eii = data.e(ki, i, i);
            for (int v = 0; v < mesh.vertex_count(); ++v) ke_sum[v] += k * eii[v];
        }
    }
    SparseMatrix M1 = assemble_mass(mesh, ScalarField(mesh, FieldKind::cell, 1.0));
    rhs += 2.0 * cell_load(mesh, E_sum) - 2.0 * (M1 * ke_sum);

    SparseSystem reduced = apply_dirichlet(SparseSystem::from(K, rhs), boundary_log_q);
    Vector u = extend_solution(reduced, solve_spd(reduced.A, reduced.b));

    ScalarField q_star(mesh, FieldKind::vertex);
    for (int v = 0; v < mesh.vertex_count(); ++v) q_star[v] = std::exp(u[v]);
    return q_star;
}

/// a* = G q*, cellwise (q* averaged from vertices).
inline ScalarField reconstruct_a(const ScalarField& G, const ScalarField& q_star)
{
    if (G.mesh != q_star.mesh) throw validation_error("reconstruct_a: mesh mismatch");
    if (G.kind != FieldKind::cell || q_star.kind != FieldKind::vertex)
        throw validation_error("reconstruct_a: expect cell G and vertex q*");
    const Mesh2D& mesh = *G.mesh;
    ScalarField a_star(mesh, FieldKind::cell);
    for (int t = 0; t < mesh.triangle_count(); ++t) a_star[t] = G[t] * q_star.at_barycenter(t);
    return a_star;
}

struct ErrorNorms {
    double a = 0.0;
    double q = 0.0;
};

/// L2 norms over the reconstruction region: a compared cellwise, q
/// vertexwise (the cellwise truth averaged to vertices).
inline ErrorNorms error_norms(const ScalarField& a_star, const ScalarField& q_star,
                              const CoefficientPair& truth)
{
    const Mesh2D& mesh = *a_star.mesh;
    if (truth.a.mesh != &mesh || q_star.mesh != &mesh)
        throw validation_error("error_norms: all fields must live on the region mesh");

    ScalarField da(mesh, FieldKind::cell);
    auto a_truth = truth.a.cell_values();
    for (int t = 0; t < mesh.triangle_count(); ++t) da[t] = a_truth[t] - a_star[t];

    ScalarField dq(mesh, FieldKind::vertex);
    auto q_truth = truth.q.vertex_values();
    for (int v = 0; v < mesh.vertex_count(); ++v) dq[v] = q_truth[v] - q_star[v];

    return {l2_norm(da), l2_norm(dq)};
}

}  // namespace mfhelm
