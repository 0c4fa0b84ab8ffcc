#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "mfhelm/bessel.hpp"
#include "mfhelm/coefficients.hpp"
#include "mfhelm/common.hpp"
#include "mfhelm/fem.hpp"
#include "mfhelm/illumination.hpp"

namespace mfhelm {

constexpr double default_gap_tol = 0.05;

/// Estimates of the two smallest Dirichlet eigenvalues of
/// -div(a grad u) = lambda q u on the mesh they were computed for.
struct SpectrumEstimate {
    double lambda0 = 0.0;
    double lambda1 = 0.0;
    const Mesh2D* mesh = nullptr;

    void check() const
    {
        if (!(0.0 < lambda0 && lambda0 < lambda1))
            throw validation_error(format_msg("SpectrumEstimate: need 0 < lambda0 < lambda1, got ",
                                              lambda0, ", ", lambda1));
    }
};

inline SpectrumEstimate estimate_spectrum(const Mesh2D& mesh, const CoefficientPair& coeffs)
{
    coeffs.check();
    SparseMatrix K = assemble_stiffness(mesh, coeffs.a);
    SparseMatrix M = assemble_mass(mesh, coeffs.q);
    std::map<int, double> zero_bc;
    for (int v : mesh.boundary_vertices()) zero_bc[v] = 0.0;
    SparseSystem sk = apply_dirichlet(SparseSystem::from(K, Vector::Zero(K.rows())), zero_bc);
    SparseSystem sm = apply_dirichlet(SparseSystem::from(M, Vector::Zero(M.rows())), zero_bc);
    auto vals = smallest_eigenvalues(sk.A, sm.A, 2);
    SpectrumEstimate est{vals[0], vals[1], &mesh};
    est.check();
    return est;
}

/// Throws when k is within gap_tol (relative) of an estimated eigenvalue.
/// Frequencies above lambda1 are not guarded (flagged downstream instead).
inline void check_resonance_guard(double k, const SpectrumEstimate& spectrum, double gap_tol)
{
    spectrum.check();
    if (k < 0.0) throw validation_error("frequency k must be nonnegative");
    if (k > spectrum.lambda1) return;
    for (double lam : {spectrum.lambda0, spectrum.lambda1}) {
        if (std::abs(k - lam) / lam <= gap_tol)
            throw numerical_error(format_msg("rejected frequency k = ", k,
                                             ": within relative gap ", gap_tol,
                                             " of estimated eigenvalue ", lam));
    }
}

struct SolveDiagnostics {
    double residual = 0.0;       // relative residual of the reduced solve
    double resonance_gap = 0.0;  // min over {lambda0, lambda1} of |k-lam|/lam
    bool above_lambda1 = false;  // k beyond the estimated spectrum window
    const char* method = "";
};

/// One Dirichlet Helmholtz solve: frequency, boundary datum, nodal values,
/// cell gradients and their vertex recovery, plus solver diagnostics.
/// Boundary vertices carry the illumination values exactly.
struct HelmholtzSolution {
    double k = 0.0;
    Illumination phi;
    ScalarField u;
    CellVectorField grad_u;
    std::vector<std::array<double, 2>> vertex_grad;
    SolveDiagnostics diag;
};

/// Pre-assembled discrete operators for one (mesh, coefficients) pair, so
/// that solves at many (k, phi) share the assembly. Immutable once built;
/// concurrent solves may share one instance.
class HelmholtzOperator {
public:
    HelmholtzOperator(const Mesh2D& mesh, const CoefficientPair& coeffs)
        : mesh_(&mesh),
          coeffs_(&coeffs),
          stiffness_(assemble_stiffness(mesh, coeffs.a)),
          mass_(assemble_mass(mesh, coeffs.q)),
          boundary_(mesh.boundary_vertices())
    {
    }

    const Mesh2D& mesh() const { return *mesh_; }
    const CoefficientPair& coeffs() const { return *coeffs_; }
    const SparseMatrix& stiffness() const { return stiffness_; }
    const SparseMatrix& mass() const { return mass_; }
    const std::vector<int>& boundary() const { return boundary_; }

    HelmholtzSolution solve(double k, const Illumination& phi, const SpectrumEstimate& spectrum,
                            double gap_tol = default_gap_tol) const
    {
        check_resonance_guard(k, spectrum, gap_tol);

        std::map<int, double> bc;
        for (int v : boundary_) {
            double val = phi.eval(mesh_->vertices[v]);
            if (!std::isfinite(val))
                throw validation_error(format_msg("illumination not finite at boundary vertex ", v));
            bc[v] = val;
        }
        SparseMatrix S = stiffness_ - k * mass_;
        SparseSystem reduced = apply_dirichlet(SparseSystem::from(S, Vector::Zero(S.rows())), bc);
        SolveReport rep;
        Vector x = solve_spd(reduced.A, reduced.b, &rep);
        Vector full = extend_solution(reduced, x);

        HelmholtzSolution sol;
        sol.k = k;
        sol.phi = phi;
        sol.u = ScalarField(*mesh_, FieldKind::vertex);
        for (int i = 0; i < mesh_->vertex_count(); ++i) sol.u[i] = full[i];
        sol.grad_u = p1_gradient(sol.u);
        sol.vertex_grad = recover_vertex_gradient(sol.grad_u);
        sol.diag.residual = rep.relative_residual;
        sol.diag.method = rep.method;
        sol.diag.above_lambda1 = k > spectrum.lambda1;
        sol.diag.resonance_gap = std::min(std::abs(k - spectrum.lambda0) / spectrum.lambda0,
                                          std::abs(k - spectrum.lambda1) / spectrum.lambda1);
        return sol;
    }

private:
    const Mesh2D* mesh_;
    const CoefficientPair* coeffs_;
    SparseMatrix stiffness_, mass_;
    std::vector<int> boundary_;
};

inline HelmholtzSolution solve_helmholtz(const Mesh2D& mesh, const CoefficientPair& coeffs, double k,
                                         const Illumination& phi, const SpectrumEstimate& spectrum,
                                         double gap_tol = default_gap_tol)
{
    return HelmholtzOperator(mesh, coeffs).solve(k, phi, spectrum, gap_tol);
}

enum class BesselMode { J0, J1cos };

/// Analytic Helmholtz solutions on the unit disk with a = q = 1:
/// J0 mode is the solution for phi = 1, J1cos for phi = x1.
inline std::vector<double> bessel_reference(double k, BesselMode mode,
                                            const std::vector<Point>& points)
{
    if (!(k > 0.0)) throw validation_error("bessel_reference: k must be positive");
    double rk = std::sqrt(k);
    double denom = (mode == BesselMode::J0) ? bessel_j0(rk) : bessel_j1(rk);
    if (std::abs(denom) < 1e-10)
        throw numerical_error(format_msg("bessel_reference: sqrt(k) = ", rk,
                                         " is too close to a Bessel zero (denominator ", denom, ")"));
    std::vector<double> out;
    out.reserve(points.size());
    for (const Point& p : points) {
        double r = std::hypot(p.x, p.y);
        if (mode == BesselMode::J0) {
            out.push_back(bessel_j0(rk * r) / denom);
        } else {
            double ct = (r > 0.0) ? p.x / r : 0.0;  // J1(0) = 0, angle irrelevant
            out.push_back(bessel_j1(rk * r) / denom * ct);
        }
    }
    return out;
}

struct NeumannSeriesResult {
    std::vector<double> errors;  // ||S_n - u_k||_L2 for partial sums S_0..S_n
    bool diverged = false;
};

/// Frequency-perturbation series around k0: partial sums of terms obtained by
/// solving (K - k0 M) w_{n+1} = (k - k0) M w_n with zero boundary data,
/// compared in L2 against the direct solve at k. Growth over 3 consecutive
/// terms is reported as divergence, not an error.
inline NeumannSeriesResult neumann_series_check(const Mesh2D& mesh, const CoefficientPair& coeffs,
                                                double k0, double k, int n_terms,
                                                const Illumination& phi,
                                                const SpectrumEstimate& spectrum,
                                                double gap_tol = default_gap_tol)
{
    if (n_terms < 0) throw validation_error("neumann_series_check: n_terms must be >= 0");
    HelmholtzOperator op(mesh, coeffs);
    HelmholtzSolution base = op.solve(k0, phi, spectrum, gap_tol);
    HelmholtzSolution target = op.solve(k, phi, spectrum, gap_tol);

    std::map<int, double> zero_bc;
    for (int v : op.boundary()) zero_bc[v] = 0.0;
    SparseMatrix S0 = op.stiffness() - k0 * op.mass();
    SparseSystem reduced =
        apply_dirichlet(SparseSystem::from(S0, Vector::Zero(S0.rows())), zero_bc);
    Eigen::SimplicialLDLT<SparseMatrix> fact(reduced.A);
    bool have_fact = fact.info() == Eigen::Success;

    const int n = mesh.vertex_count();
    Vector w(n), partial(n);
    for (int i = 0; i < n; ++i) w[i] = base.u[i];
    partial = w;

    auto l2_error = [&](const Vector& s) {
        ScalarField d(mesh, FieldKind::vertex);
        for (int i = 0; i < n; ++i) d[i] = s[i] - target.u[i];
        return l2_norm(d);
    };

    NeumannSeriesResult result;
    result.errors.push_back(l2_error(partial));
    int growth_streak = 0;
    for (int term = 1; term <= n_terms; ++term) {
        Vector rhs_full = (k - k0) * (op.mass() * w);
        Vector rhs(reduced.free_to_full.size());
        for (std::size_t i = 0; i < reduced.free_to_full.size(); ++i)
            rhs[static_cast<Eigen::Index>(i)] = rhs_full[reduced.free_to_full[i]];
        Vector x;
        if (have_fact) {
            x = fact.solve(rhs);
            double rn = rhs.norm();
            if (rn > 0.0 && (reduced.A * x - rhs).norm() > 1e-10 * rn)
                x = solve_spd(reduced.A, rhs);  // indefinite factorization lost accuracy
        } else {
            x = solve_spd(reduced.A, rhs);
        }
        w.setZero();
        for (std::size_t i = 0; i < reduced.free_to_full.size(); ++i)
            w[reduced.free_to_full[i]] = x[static_cast<Eigen::Index>(i)];
        partial += w;
        double err = l2_error(partial);
        growth_streak = (err > result.errors.back()) ? growth_streak + 1 : 0;
        result.errors.push_back(err);
        if (growth_streak >= 3) {
            result.diverged = true;
            break;
        }
    }
    return result;
}

}  // namespace mfhelm
