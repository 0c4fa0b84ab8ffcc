#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

#include <array>
#include <cmath>
#include <map>
#include <vector>

#include "mfhelm/common.hpp"
#include "mfhelm/field.hpp"
#include "mfhelm/mesh.hpp"

namespace mfhelm {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vector = Eigen::VectorXd;

namespace detail {

/// Gradients of the three P1 basis functions on a triangle (constant).
inline std::array<std::array<double, 2>, 3> p1_basis_gradients(const Mesh2D& mesh, int t)
{
    const auto& tr = mesh.triangles[t];
    const Point &a = mesh.vertices[tr.v[0]], &b = mesh.vertices[tr.v[1]], &c = mesh.vertices[tr.v[2]];
    double two_area = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    auto rot = [two_area](const Point& p, const Point& q) {
        return std::array<double, 2>{(q.y - p.y) / two_area, (p.x - q.x) / two_area};
    };
    // grad(lambda_i) = rot90(opposite edge) / (2A)
    return {rot(c, b), rot(a, c), rot(b, a)};
}

inline std::vector<double> coefficient_cell_samples(const Mesh2D& mesh, const ScalarField& coef,
                                                    const char* name, double lower_bound_exclusive)
{
    coef.check();
    if (coef.mesh != &mesh) throw validation_error(format_msg(name, ": coefficient lives on another mesh"));
    auto cells = coef.cell_values();
    for (int t = 0; t < mesh.triangle_count(); ++t)
        if (cells[t] <= lower_bound_exclusive)
            throw validation_error(format_msg(name, ": ellipticity violation, sample ", cells[t],
                                              " at cell ", t));
    return cells;
}

}  // namespace detail

/// Stiffness matrix of the form  integral a grad(u) . grad(v)  on P1 spaces.
/// The coefficient is sampled cellwise (P1 inputs averaged at barycenters)
/// and must be strictly positive.
inline SparseMatrix assemble_stiffness(const Mesh2D& mesh, const ScalarField& a)
{
    auto a_cells = detail::coefficient_cell_samples(mesh, a, "assemble_stiffness", 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        auto g = detail::p1_basis_gradients(mesh, t);
        double w = a_cells[t] * mesh.area(t);
        const auto& v = mesh.triangles[t].v;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                trip.emplace_back(v[i], v[j], w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
    }
    SparseMatrix K(mesh.vertex_count(), mesh.vertex_count());
    K.setFromTriplets(trip.begin(), trip.end());
    return K;
}

/// Mass matrix of the form  integral q u v  on P1 spaces, exact for cellwise
/// q: elementwise (area q / 12) [[2,1,1],[1,2,1],[1,1,2]].
inline SparseMatrix assemble_mass(const Mesh2D& mesh, const ScalarField& q)
{
    auto q_cells = detail::coefficient_cell_samples(mesh, q, "assemble_mass", 0.0);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(mesh.triangles.size() * 9);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        double w = q_cells[t] * mesh.area(t) / 12.0;
        const auto& v = mesh.triangles[t].v;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) trip.emplace_back(v[i], v[j], w * (i == j ? 2.0 : 1.0));
    }
    SparseMatrix M(mesh.vertex_count(), mesh.vertex_count());
    M.setFromTriplets(trip.begin(), trip.end());
    return M;
}

/// Symmetric sparse system with Dirichlet bookkeeping. Before reduction,
/// `constrained` is empty and A/b are in the full numbering; after
/// apply_dirichlet, A/b are the reduced problem and free_to_full maps reduced
/// rows back.
struct SparseSystem {
    SparseMatrix A;
    Vector b;
    std::vector<int> constrained;
    std::vector<double> constrained_values;
    std::vector<int> free_to_full;
    int full_size = 0;

    static SparseSystem from(SparseMatrix A_in, Vector b_in)
    {
        SparseSystem s;
        s.full_size = static_cast<int>(A_in.rows());
        if (b_in.size() != A_in.rows())
            throw validation_error("SparseSystem: rhs dimension mismatch");
        s.A = std::move(A_in);
        s.b = std::move(b_in);
        return s;
    }

    double symmetry_defect() const
    {
        SparseMatrix D = SparseMatrix(A.transpose()) - A;
        double na = A.coeffs().size() ? A.coeffs().cwiseAbs().maxCoeff() : 0.0;
        double nd = D.coeffs().size() ? D.coeffs().cwiseAbs().maxCoeff() : 0.0;
        return na > 0.0 ? nd / na : nd;
    }
};

/// Eliminates the constrained unknowns: returns the reduced system whose
/// solution, extended by the prescribed values, satisfies the variational
/// problem on the remaining test functions.
inline SparseSystem apply_dirichlet(const SparseSystem& sys,
                                    const std::map<int, double>& boundary_values)
{
    const int n = sys.full_size;
    std::vector<char> is_constrained(n, 0);
    std::vector<double> value(n, 0.0);
    for (const auto& [idx, val] : boundary_values) {
        if (idx < 0 || idx >= n)
            throw validation_error(format_msg("apply_dirichlet: constraint on index ", idx,
                                              " outside [0,", n, ")"));
        is_constrained[idx] = 1;
        value[idx] = val;
    }

    SparseSystem red;
    red.full_size = n;
    std::vector<int> full_to_free(n, -1);
    for (int i = 0; i < n; ++i) {
        if (is_constrained[i]) {
            red.constrained.push_back(i);
            red.constrained_values.push_back(value[i]);
        } else {
            full_to_free[i] = static_cast<int>(red.free_to_full.size());
            red.free_to_full.push_back(i);
        }
    }

    const int nf = static_cast<int>(red.free_to_full.size());
    red.b = Vector::Zero(nf);
    for (int i = 0; i < nf; ++i) red.b[i] = sys.b[red.free_to_full[i]];

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(sys.A.nonZeros());
    for (int col = 0; col < sys.A.outerSize(); ++col) {
        for (SparseMatrix::InnerIterator it(sys.A, col); it; ++it) {
            int r = static_cast<int>(it.row()), c = static_cast<int>(it.col());
            if (is_constrained[r]) continue;
            if (is_constrained[c])
                red.b[full_to_free[r]] -= it.value() * value[c];
            else
                trip.emplace_back(full_to_free[r], full_to_free[c], it.value());
        }
    }
    red.A = SparseMatrix(nf, nf);
    red.A.setFromTriplets(trip.begin(), trip.end());
    return red;
}

/// Extends a reduced solution back to the full numbering, writing the
/// prescribed values exactly.
inline Vector extend_solution(const SparseSystem& reduced, const Vector& x_reduced)
{
    Vector full = Vector::Zero(reduced.full_size);
    for (std::size_t i = 0; i < reduced.free_to_full.size(); ++i)
        full[reduced.free_to_full[i]] = x_reduced[static_cast<int>(i)];
    for (std::size_t i = 0; i < reduced.constrained.size(); ++i)
        full[reduced.constrained[i]] = reduced.constrained_values[i];
    return full;
}

namespace detail {

/// Diagonal preconditioner by |diag|, safe for symmetric indefinite systems.
class AbsDiagonalPreconditioner {
public:
    using StorageIndex = int;
    AbsDiagonalPreconditioner() = default;
    template <typename MatType>
    explicit AbsDiagonalPreconditioner(const MatType& mat)
    {
        compute(mat);
    }
    template <typename MatType>
    AbsDiagonalPreconditioner& analyzePattern(const MatType&)
    {
        return *this;
    }
    template <typename MatType>
    AbsDiagonalPreconditioner& factorize(const MatType& mat)
    {
        inv_diag_ = Vector::Ones(mat.cols());
        for (int col = 0; col < mat.outerSize(); ++col)
            for (typename MatType::InnerIterator it(mat, col); it; ++it)
                if (it.row() == it.col() && std::abs(it.value()) > 0.0)
                    inv_diag_[it.row()] = 1.0 / std::abs(it.value());
        return *this;
    }
    template <typename MatType>
    AbsDiagonalPreconditioner& compute(const MatType& mat)
    {
        return factorize(mat);
    }
    template <typename Rhs>
    Vector solve(const Rhs& x) const
    {
        return inv_diag_.asDiagonal() * x;
    }
    Eigen::ComputationInfo info() const { return Eigen::Success; }

private:
    Vector inv_diag_;
};

}  // namespace detail

struct SolveReport {
    double relative_residual = 0.0;
    const char* method = "";
};

/// Direct sparse solve with residual verification: LDLT, then LU, then a
/// preconditioned MINRES fallback. Accepts symmetric indefinite input.
/// Guarantees relative residual <= 1e-10 or throws numerical_error carrying
/// the best achieved residual.
inline Vector solve_spd(const SparseMatrix& A, const Vector& b, SolveReport* report = nullptr)
{
    if (A.rows() != A.cols() || A.rows() != b.size())
        throw validation_error("solve_spd: dimension mismatch");
    if (A.rows() == 0) {
        if (report) *report = {0.0, "empty"};
        return Vector();
    }
    const double bnorm = b.norm();
    auto residual_of = [&](const Vector& x) {
        double r = (A * x - b).norm();
        return bnorm > 0.0 ? r / bnorm : r;
    };
    const double tol = 1e-10;
    double best_res = std::numeric_limits<double>::infinity();

    {
        Eigen::SimplicialLDLT<SparseMatrix> ldlt(A);
        if (ldlt.info() == Eigen::Success) {
            Vector x = ldlt.solve(b);
            double res = residual_of(x);
            if (res <= tol) {
                if (report) *report = {res, "ldlt"};
                return x;
            }
            best_res = std::min(best_res, res);
        }
    }
    {
        Eigen::SparseLU<SparseMatrix> lu(A);
        if (lu.info() == Eigen::Success) {
            Vector x = lu.solve(b);
            double res = residual_of(x);
            if (res <= tol) {
                if (report) *report = {res, "lu"};
                return x;
            }
            best_res = std::min(best_res, res);
        }
    }
    {
        Eigen::MINRES<SparseMatrix, Eigen::Lower | Eigen::Upper, detail::AbsDiagonalPreconditioner>
            minres(A);
        minres.setTolerance(1e-13);
        minres.setMaxIterations(20 * A.rows());
        Vector x = minres.solve(b);
        double res = residual_of(x);
        if (res <= tol) {
            if (report) *report = {res, "minres"};
            return x;
        }
        best_res = std::min(best_res, res);
    }
    throw numerical_error(format_msg("solve_spd: no solver reached relative residual ", tol,
                                     " (best achieved ", best_res, ")"));
}

/// The `count` smallest eigenvalues of K x = lambda M x (both Dirichlet
/// reduced), ascending. Block shift-and-invert iteration at shift 0 with
/// M-orthonormalization and Rayleigh-Ritz extraction; two guard vectors
/// keep clustered pairs (symmetric domains) resolvable. Iterates until the
/// Ritz values settle (1e-10 relative) and every requested pair has relative
/// residual <= 1e-8.
inline std::vector<double> smallest_eigenvalues(const SparseMatrix& K, const SparseMatrix& M,
                                                int count)
{
    if (count < 1) throw validation_error("smallest_eigenvalues: count must be >= 1");
    const int n = static_cast<int>(K.rows());
    if (K.cols() != n || M.rows() != n || M.cols() != n)
        throw validation_error("smallest_eigenvalues: dimension mismatch");
    if (n < count)
        throw validation_error(format_msg("smallest_eigenvalues: requested ", count,
                                          " eigenvalues of a ", n, "-dim system"));

    Eigen::SimplicialLDLT<SparseMatrix> kinv(K);
    if (kinv.info() != Eigen::Success)
        throw numerical_error("smallest_eigenvalues: factorization of K failed");

    const int max_iter = 10000;
    const double rq_tol = 1e-10;
    const double res_tol = 1e-8;
    const int block = std::min(count + 2, n);

    Eigen::MatrixXd X(n, block);
    for (int j = 0; j < block; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = std::sin(0.7 * (i + 1) * (j + 1) + 0.3);

    auto m_orthonormalize = [&](Eigen::MatrixXd& Y) {
        Eigen::MatrixXd G = Y.transpose() * (M * Y);
        Eigen::LLT<Eigen::MatrixXd> llt(G);
        if (llt.info() != Eigen::Success)
            throw numerical_error("smallest_eigenvalues: block lost rank");
        Y = llt.matrixL().solve(Y.transpose()).transpose();
    };

    std::vector<double> prev(count, std::numeric_limits<double>::infinity());
    for (int it = 0; it < max_iter; ++it) {
        Eigen::MatrixXd Y = kinv.solve(M * X);
        m_orthonormalize(Y);
        Eigen::MatrixXd Kp = Y.transpose() * (K * Y);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Kp);
        if (ritz.info() != Eigen::Success)
            throw numerical_error("smallest_eigenvalues: Rayleigh-Ritz projection failed");
        X = Y * ritz.eigenvectors();

        bool done = true;
        for (int j = 0; j < count && done; ++j) {
            double lam = ritz.eigenvalues()[j];
            if (std::abs(lam - prev[j]) > rq_tol * std::abs(lam)) done = false;
            Vector x = X.col(j);
            Vector mx = M * x;
            double rel_res = (K * x - lam * mx).norm() / (std::abs(lam) * mx.norm());
            if (rel_res > res_tol) done = false;
        }
        for (int j = 0; j < count; ++j) prev[j] = ritz.eigenvalues()[j];
        if (done) {
            std::vector<double> out(count);
            for (int j = 0; j < count; ++j) out[j] = ritz.eigenvalues()[j];
            return out;
        }
    }
    throw numerical_error(format_msg("smallest_eigenvalues: not converged within ", max_iter,
                                     " iterations; best estimates start at ", prev[0]));
}

/// Exact gradient of the P1 interpolant, constant per cell.
inline CellVectorField p1_gradient(const ScalarField& field)
{
    field.check();
    if (field.kind != FieldKind::vertex)
        throw validation_error("p1_gradient: field must be per-vertex");
    const Mesh2D& mesh = *field.mesh;
    CellVectorField g(mesh);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        auto basis = detail::p1_basis_gradients(mesh, t);
        const auto& v = mesh.triangles[t].v;
        double gx = 0.0, gy = 0.0;
        for (int i = 0; i < 3; ++i) {
            gx += field[v[i]] * basis[i][0];
            gy += field[v[i]] * basis[i][1];
        }
        g.values[t] = {gx, gy};
    }
    return g;
}

/// Area-weighted average of incident-cell gradients at each vertex.
inline std::vector<std::array<double, 2>> recover_vertex_gradient(const CellVectorField& g)
{
    g.check();
    const Mesh2D& mesh = *g.mesh;
    std::vector<std::array<double, 2>> out(mesh.vertex_count(), {0.0, 0.0});
    std::vector<double> w(mesh.vertex_count(), 0.0);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        double a = mesh.area(t);
        for (int vi : mesh.triangles[t].v) {
            out[vi][0] += a * g.values[t][0];
            out[vi][1] += a * g.values[t][1];
            w[vi] += a;
        }
    }
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        out[v][0] /= w[v];
        out[v][1] /= w[v];
    }
    return out;
}

/// L2 norm over the field's mesh; exact elementwise quadrature for P0/P1.
inline double l2_norm(const ScalarField& field)
{
    field.check();
    const Mesh2D& mesh = *field.mesh;
    double acc = 0.0;
    if (field.kind == FieldKind::cell) {
        for (int t = 0; t < mesh.triangle_count(); ++t)
            acc += mesh.area(t) * field[t] * field[t];
    } else {
        for (int t = 0; t < mesh.triangle_count(); ++t) {
            const auto& v = mesh.triangles[t].v;
            double f0 = field[v[0]], f1 = field[v[1]], f2 = field[v[2]];
            acc += mesh.area(t) / 6.0 * (f0 * f0 + f1 * f1 + f2 * f2 + f0 * f1 + f1 * f2 + f0 * f2);
        }
    }
    return std::sqrt(acc);
}

/// Load vector of a cellwise density:  F_v = integral g lambda_v  with P0 g.
inline Vector cell_load(const Mesh2D& mesh, const std::vector<double>& cell_density)
{
    if (cell_density.size() != mesh.triangles.size())
        throw validation_error("cell_load: size mismatch");
    Vector f = Vector::Zero(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        double w = mesh.area(t) * cell_density[t] / 3.0;
        for (int vi : mesh.triangles[t].v) f[vi] += w;
    }
    return f;
}

/// Load vector of a weighted gradient pairing:
/// F_v = integral c (g . grad lambda_v)  with P0 coefficient c and cellwise
/// vector field g.
inline Vector gradient_pairing_load(const Mesh2D& mesh, const std::vector<double>& cell_coef,
                                    const CellVectorField& g)
{
    if (cell_coef.size() != mesh.triangles.size() || g.values.size() != mesh.triangles.size())
        throw validation_error("gradient_pairing_load: size mismatch");
    Vector f = Vector::Zero(mesh.vertex_count());
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        auto basis = detail::p1_basis_gradients(mesh, t);
        double w = mesh.area(t) * cell_coef[t];
        const auto& v = mesh.triangles[t].v;
        for (int i = 0; i < 3; ++i)
            f[v[i]] += w * (g.values[t][0] * basis[i][0] + g.values[t][1] * basis[i][1]);
    }
    return f;
}

}  // namespace mfhelm
