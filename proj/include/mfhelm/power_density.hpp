#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "mfhelm/coefficients.hpp"
#include "mfhelm/common.hpp"
#include "mfhelm/fem.hpp"
#include "mfhelm/helmholtz.hpp"

namespace mfhelm {

/// Per-frequency power densities e_k^{ij} = q u_i u_j (vertex fields) and
/// E_k^{ij} = a grad(u_i).grad(u_j) (cell fields). Entries are stored once
/// per unordered pair, so matrix symmetry is structural.
class PowerDensityData {
public:
    const Mesh2D* mesh = nullptr;
    std::vector<double> frequencies;
    std::vector<Illumination> illuminations;
    std::string region_tag = "omega";

    int n_freq() const { return static_cast<int>(frequencies.size()); }
    int n_illum() const { return static_cast<int>(illuminations.size()); }

    int pair_index(int i, int j) const
    {
        if (i > j) std::swap(i, j);
        int n = n_illum();
        if (i < 0 || j >= n) throw validation_error("PowerDensityData: illumination index out of range");
        return i * n - i * (i - 1) / 2 + (j - i);
    }

    const ScalarField& e(int ki, int i, int j) const { return e_store_.at(ki).at(pair_index(i, j)); }
    const ScalarField& E(int ki, int i, int j) const { return E_store_.at(ki).at(pair_index(i, j)); }

    void push_frequency(double k, std::vector<ScalarField> e_fields, std::vector<ScalarField> E_fields)
    {
        frequencies.push_back(k);
        e_store_.push_back(std::move(e_fields));
        E_store_.push_back(std::move(E_fields));
    }

    /// Structural sanity plus the pointwise matrix inequalities: nonnegative
    /// diagonals, the rank-one identity (e^ij)^2 = e^ii e^jj, and
    /// Cauchy-Schwarz (E^ij)^2 <= E^ii E^jj up to 1e-10 relative slack.
    void check_invariants() const
    {
        const int n = n_illum();
        const std::size_t pairs = static_cast<std::size_t>(n * (n + 1) / 2);
        for (int ki = 0; ki < n_freq(); ++ki) {
            if (e_store_[ki].size() != pairs || E_store_[ki].size() != pairs)
                throw validation_error("PowerDensityData: inconsistent pair storage");
            for (int i = 0; i < n; ++i) {
                for (double v : e(ki, i, i).values)
                    if (v < 0.0) throw validation_error("PowerDensityData: negative e diagonal");
                for (double v : E(ki, i, i).values)
                    if (v < 0.0) throw validation_error("PowerDensityData: negative E diagonal");
            }
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const auto& eij = e(ki, i, j).values;
                    const auto& eii = e(ki, i, i).values;
                    const auto& ejj = e(ki, j, j).values;
                    for (std::size_t v = 0; v < eij.size(); ++v) {
                        double lhs = eij[v] * eij[v], rhs = eii[v] * ejj[v];
                        if (std::abs(lhs - rhs) > 1e-10 * std::max(std::abs(rhs), 1e-300))
                            throw validation_error(
                                format_msg("PowerDensityData: rank-one identity violated at vertex ",
                                           v, " (", lhs, " vs ", rhs, ")"));
                    }
                    const auto& Eij = E(ki, i, j).values;
                    const auto& Eii = E(ki, i, i).values;
                    const auto& Ejj = E(ki, j, j).values;
                    for (std::size_t t = 0; t < Eij.size(); ++t)
                        if (Eij[t] * Eij[t] > Eii[t] * Ejj[t] * (1.0 + 1e-10))
                            throw validation_error(
                                format_msg("PowerDensityData: Cauchy-Schwarz violated at cell ", t));
                }
        }
    }

private:
    std::vector<std::vector<ScalarField>> e_store_;  // [freq][pair]
    std::vector<std::vector<ScalarField>> E_store_;
};

/// Builds e and E from per-frequency, per-illumination solutions sharing one
/// mesh and coefficient pair. q is sampled at vertices by incident-cell area
/// averaging; a and the P1 gradients live on cells.
inline PowerDensityData synthesize(const std::vector<std::vector<HelmholtzSolution>>& solutions,
                                   const CoefficientPair& coeffs, std::string region_tag = "omega")
{
    if (solutions.empty() || solutions.front().empty())
        throw validation_error("synthesize: no solutions given");
    const Mesh2D* mesh = solutions[0][0].u.mesh;
    if (coeffs.a.mesh != mesh) throw validation_error("synthesize: coefficients on a different mesh");
    const std::size_t n_illum = solutions.front().size();

    PowerDensityData data;
    data.mesh = mesh;
    data.region_tag = std::move(region_tag);
    for (const auto& sol : solutions.front()) data.illuminations.push_back(sol.phi);

    std::vector<double> q_vertex = coeffs.q.vertex_values();
    const auto& a_cells = coeffs.a.values;

    for (const auto& per_k : solutions) {
        if (per_k.size() != n_illum) throw validation_error("synthesize: ragged solution table");
        double k = per_k.front().k;
        for (const auto& sol : per_k) {
            if (sol.u.mesh != mesh) throw validation_error("synthesize: solutions on different meshes");
            if (sol.k != k) throw validation_error("synthesize: mixed frequencies within one group");
        }
        std::vector<ScalarField> e_fields, E_fields;
        for (std::size_t i = 0; i < n_illum; ++i) {
            for (std::size_t j = i; j < n_illum; ++j) {
                ScalarField eij(*mesh, FieldKind::vertex);
                for (int v = 0; v < mesh->vertex_count(); ++v)
                    eij[v] = q_vertex[v] * per_k[i].u[v] * per_k[j].u[v];
                e_fields.push_back(std::move(eij));

                ScalarField Eij(*mesh, FieldKind::cell);
                for (int t = 0; t < mesh->triangle_count(); ++t) {
                    const auto &gi = per_k[i].grad_u.values[t], &gj = per_k[j].grad_u.values[t];
                    Eij[t] = a_cells[t] * (gi[0] * gj[0] + gi[1] * gj[1]);
                }
                E_fields.push_back(std::move(Eij));
            }
        }
        data.push_frequency(k, std::move(e_fields), std::move(E_fields));
    }
    data.check_invariants();
    return data;
}

/// Restriction of a dataset to a measurement submesh (e.g. Omega').
inline PowerDensityData restrict_power_density(const PowerDensityData& data, const Mesh2D& sub,
                                               const SubmeshMaps& maps,
                                               std::string region_tag = "omega_prime")
{
    PowerDensityData out;
    out.mesh = &sub;
    out.illuminations = data.illuminations;
    out.region_tag = std::move(region_tag);
    const int n = data.n_illum();
    for (int ki = 0; ki < data.n_freq(); ++ki) {
        std::vector<ScalarField> e_fields, E_fields;
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                e_fields.push_back(restrict_field(data.e(ki, i, j), sub, maps));
                E_fields.push_back(restrict_field(data.E(ki, i, j), sub, maps));
            }
        out.push_frequency(data.frequencies[ki], std::move(e_fields), std::move(E_fields));
    }
    return out;
}

/// Localized ultrasound perturbation: coefficients inside B(z, rho) are
/// scaled by (1 + c alpha), with contrasts c_a, c_q evaluated pointwise.
struct AcousticPerturbation {
    Point center{};
    double rho = 0.0;
    std::vector<double> amplitudes;
    Illumination c_a = Illumination::constant(1.0);
    Illumination c_q = Illumination::constant(1.0);

    void check(const Mesh2D& mesh) const
    {
        if (!(rho > 0.0)) throw validation_error("AcousticPerturbation: rho must be positive");
        for (std::size_t i = 0; i < amplitudes.size(); ++i)
            for (std::size_t j = i + 1; j < amplitudes.size(); ++j)
                if (amplitudes[i] == amplitudes[j])
                    throw validation_error("AcousticPerturbation: amplitudes must be distinct");
        double ca = c_a.eval(center);
        for (double alpha : amplitudes)
            if (std::abs(ca * alpha) >= 2.0)
                throw validation_error(format_msg("AcousticPerturbation: |c_a alpha| = ",
                                                  std::abs(ca * alpha), " must stay below d = 2"));
        // B(z, rho) must not cross the domain boundary
        for (const auto& be : mesh.boundary_edges) {
            const Point &p = mesh.vertices[be.v[0]], &q = mesh.vertices[be.v[1]];
            double vx = q.x - p.x, vy = q.y - p.y;
            double len2 = vx * vx + vy * vy;
            double t = len2 > 0.0
                           ? std::clamp(((center.x - p.x) * vx + (center.y - p.y) * vy) / len2, 0.0, 1.0)
                           : 0.0;
            Point closest{p.x + t * vx, p.y + t * vy};
            if (dist(closest, center) <= rho)
                throw validation_error("AcousticPerturbation: B(z, rho) is not inside the domain");
        }
    }

    /// Cells whose barycenter lies in the ball, and their total area |omega|.
    std::pair<std::vector<int>, double> support(const Mesh2D& mesh) const
    {
        std::vector<int> cells;
        double area = 0.0;
        for (int t = 0; t < mesh.triangle_count(); ++t)
            if (dist(mesh.barycenter(t), center) <= rho) {
                cells.push_back(t);
                area += mesh.area(t);
            }
        if (cells.empty())
            throw validation_error("AcousticPerturbation: no cell barycenter inside B(z, rho)");
        return {cells, area};
    }

    CoefficientPair perturbed(const Mesh2D& mesh, const CoefficientPair& coeffs, double alpha) const
    {
        CoefficientPair out = coeffs;
        auto [cells, area] = support(mesh);
        (void)area;
        for (int t : cells) {
            Point b = mesh.barycenter(t);
            out.a[t] *= 1.0 + c_a.eval(b) * alpha;
            out.q[t] *= 1.0 + c_q.eval(b) * alpha;
        }
        out.compute_bounds();
        out.check();
        return out;
    }
};

/// Boundary pairing  integral_dOmega a (dnu u_bar - dnu u) psi  computed by
/// the equivalent volume identity with the P1 lifting of psi (zero at
/// interior vertices; the pairing difference is lifting-independent up to
/// solver residual).
inline double boundary_flux_pairing(const HelmholtzSolution& u_bar, const HelmholtzSolution& u,
                                    const Illumination& psi, const CoefficientPair& coeffs_bar,
                                    const CoefficientPair& coeffs, double k)
{
    if (u_bar.k != k || u.k != k)
        throw validation_error("boundary_flux_pairing: frequency mismatch");
    const Mesh2D* mesh = u.u.mesh;
    if (u_bar.u.mesh != mesh) throw validation_error("boundary_flux_pairing: mesh mismatch");

    Vector lift = Vector::Zero(mesh->vertex_count());
    for (int v : mesh->boundary_vertices()) lift[v] = psi.eval(mesh->vertices[v]);

    Vector ub(mesh->vertex_count()), uu(mesh->vertex_count());
    for (int i = 0; i < mesh->vertex_count(); ++i) {
        ub[i] = u_bar.u[i];
        uu[i] = u.u[i];
    }
    SparseMatrix Kb = assemble_stiffness(*mesh, coeffs_bar.a);
    SparseMatrix Mb = assemble_mass(*mesh, coeffs_bar.q);
    SparseMatrix K = assemble_stiffness(*mesh, coeffs.a);
    SparseMatrix M = assemble_mass(*mesh, coeffs.q);
    double perturbed = lift.dot(Kb * ub) - k * lift.dot(Mb * ub);
    double reference = lift.dot(K * uu) - k * lift.dot(M * uu);
    return perturbed - reference;
}

struct AcquisitionEstimate {
    double E_value = 0.0;  // a grad(u_phi).grad(u_psi) at z
    double e_value = 0.0;  // q u_phi u_psi at z
    double omega_area = 0.0;
};

/// Recovers the two power densities at the perturbation centre from boundary
/// flux differences at several ultrasound amplitudes, inverting the
/// small-inclusion asymptotics row by row:
///   I_alpha = (d c_a alpha / (c_a alpha + d)) X - (k c_q alpha) Y,  d = 2.
/// (The q-term sign follows from the Green identity
///   I = int_w a c_a alpha grad(u_bar).grad(u_psi) - k c_q alpha int_w q u_bar u_psi,
/// and is confirmed by direct perturbation runs.)
/// Two amplitudes give an exact 2x2 solve, more give least squares.
inline AcquisitionEstimate simulate_acquisition(const AcousticPerturbation& pert, double k,
                                                const Illumination& phi, const Illumination& psi,
                                                const Mesh2D& mesh, const CoefficientPair& coeffs,
                                                const SpectrumEstimate& spectrum,
                                                double gap_tol = default_gap_tol)
{
    pert.check(mesh);
    if (pert.amplitudes.size() < 2)
        throw validation_error("simulate_acquisition: need at least two distinct amplitudes");
    const double d = 2.0;
    double ca = pert.c_a.eval(pert.center);
    double cq = pert.c_q.eval(pert.center);

    HelmholtzSolution base = solve_helmholtz(mesh, coeffs, k, phi, spectrum, gap_tol);
    auto [cells, omega_area] = pert.support(mesh);
    (void)cells;

    const int rows = static_cast<int>(pert.amplitudes.size());
    Eigen::MatrixXd A(rows, 2);
    Vector rhs(rows);
    for (int r = 0; r < rows; ++r) {
        double alpha = pert.amplitudes[r];
        CoefficientPair pc = pert.perturbed(mesh, coeffs, alpha);
        HelmholtzSolution pu = solve_helmholtz(mesh, pc, k, phi, spectrum, gap_tol);
        rhs[r] = boundary_flux_pairing(pu, base, psi, pc, coeffs, k) / omega_area;
        A(r, 0) = d * ca * alpha / (ca * alpha + d);
        A(r, 1) = -k * cq * alpha;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    double smax = svd.singularValues()[0];
    if (!(smax > 0.0) || svd.singularValues()[1] <= 1e-12 * smax)
        throw numerical_error(
            "simulate_acquisition: amplitude system is singular (is c_a or c_q zero?)");
    Vector xy = svd.solve(rhs);
    return {xy[0], xy[1], omega_area};
}

/// Relative weak residual of the product identity
///   -div(a grad(u_i u_j)) = 2 k e^{ij} - 2 E^{ij}
/// tested against interior P1 functions: the vertexwise product is paired
/// with the stiffness form and compared to the load assembled from the data.
inline double product_pde_residual(const HelmholtzSolution& u_i, const HelmholtzSolution& u_j,
                                   const ScalarField& e_ij, const ScalarField& E_ij,
                                   const CoefficientPair& coeffs)
{
    if (u_i.k != u_j.k) throw validation_error("product_pde_residual: frequency mismatch");
    const Mesh2D* mesh = u_i.u.mesh;
    if (u_j.u.mesh != mesh || e_ij.mesh != mesh || E_ij.mesh != mesh)
        throw validation_error("product_pde_residual: mesh mismatch");
    if (e_ij.kind != FieldKind::vertex || E_ij.kind != FieldKind::cell)
        throw validation_error("product_pde_residual: e must be per-vertex, E per-cell");
    const double k = u_i.k;

    ScalarField prod(*mesh, FieldKind::vertex);
    for (int v = 0; v < mesh->vertex_count(); ++v) prod[v] = u_i.u[v] * u_j.u[v];

    SparseMatrix K = assemble_stiffness(*mesh, coeffs.a);
    SparseMatrix M1 = assemble_mass(*mesh, ScalarField(*mesh, FieldKind::cell, 1.0));
    Vector pv(mesh->vertex_count()), ev(mesh->vertex_count());
    for (int v = 0; v < mesh->vertex_count(); ++v) {
        pv[v] = prod[v];
        ev[v] = e_ij[v];
    }
    Vector load = 2.0 * k * (M1 * ev) - 2.0 * cell_load(*mesh, E_ij.values);
    Vector residual = K * pv - load;

    auto on_boundary = mesh->boundary_vertex_mask();
    double rn = 0.0, ln = 0.0;
    for (int v = 0; v < mesh->vertex_count(); ++v) {
        if (on_boundary[v]) continue;
        rn += residual[v] * residual[v];
        ln += load[v] * load[v];
    }
    rn = std::sqrt(rn);
    ln = std::sqrt(ln);
    // rounding floor of the stiffness pairing; below it the identity holds to
    // machine precision and the ratio is meaningless
    double floor = 1e-12 * l2_norm(prod) * K.coeffs().cwiseAbs().maxCoeff();
    if (ln <= floor) return rn <= floor ? 0.0 : std::numeric_limits<double>::infinity();
    return rn / ln;
}

}  // namespace mfhelm
