#include <catch_amalgamated.hpp>

#include <cmath>

#include "mfhelm/helmholtz.hpp"

using namespace mfhelm;

namespace {

double relative_l2_error_vs_bessel(const HelmholtzSolution& sol, BesselMode mode)
{
    const Mesh2D& mesh = *sol.u.mesh;
    std::vector<Point> pts = mesh.vertices;
    auto ref = bessel_reference(sol.k, mode, pts);
    ScalarField diff(mesh, FieldKind::vertex), exact(mesh, FieldKind::vertex);
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        diff[v] = sol.u[v] - ref[v];
        exact[v] = ref[v];
    }
    return l2_norm(diff) / l2_norm(exact);
}

}  // namespace

TEST_CASE("spectrum estimate on the homogeneous disk")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.08);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    est.check();
    CHECK(est.lambda0 == Catch::Approx(5.7832).epsilon(0.01));
    CHECK(est.lambda1 == Catch::Approx(14.682).epsilon(0.02));
}

TEST_CASE("k = 0 with unit illumination gives the constant solution")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.1);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    auto sol = solve_helmholtz(mesh, coeffs, 0.0, Illumination::parse("1"), est);
    for (int v = 0; v < mesh.vertex_count(); ++v) CHECK(sol.u[v] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("FEM matches the analytic Bessel solutions at h = 0.05")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.05);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);

    auto sol_x1 = solve_helmholtz(mesh, coeffs, 1.0, Illumination::parse("x1"), est);
    CHECK(relative_l2_error_vs_bessel(sol_x1, BesselMode::J1cos) <= 0.02);

    auto sol_1 = solve_helmholtz(mesh, coeffs, 1.0, Illumination::parse("1"), est);
    CHECK(relative_l2_error_vs_bessel(sol_1, BesselMode::J0) <= 0.02);
}

TEST_CASE("halving h improves the Bessel error by the P1 rate")
{
    Mesh2D coarse = gen_disk_mesh(1.0, 0.05);
    Mesh2D fine = gen_disk_mesh(1.0, 0.025);
    auto cc = CoefficientPair::constant(coarse, 1.0, 1.0);
    auto cf = CoefficientPair::constant(fine, 1.0, 1.0);
    SpectrumEstimate ec = estimate_spectrum(coarse, cc);
    SpectrumEstimate ef = estimate_spectrum(fine, cf);

    double e_coarse = relative_l2_error_vs_bessel(
        solve_helmholtz(coarse, cc, 1.0, Illumination::parse("x1"), ec), BesselMode::J1cos);
    double e_fine = relative_l2_error_vs_bessel(
        solve_helmholtz(fine, cf, 1.0, Illumination::parse("x1"), ef), BesselMode::J1cos);
    double factor = e_coarse / e_fine;
    CHECK(factor >= 3.0);
    CHECK(factor <= 5.0);
}

TEST_CASE("boundary trace is prescribed exactly")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.15);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    Illumination phi = Illumination::parse("x1+2");
    auto sol = solve_helmholtz(mesh, coeffs, 3.0, phi, est);
    for (int v : mesh.boundary_vertices()) CHECK(sol.u[v] == phi.eval(mesh.vertices[v]));
}

TEST_CASE("k = 0 with positive illumination stays positive (maximum principle)")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.1);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    auto sol = solve_helmholtz(mesh, coeffs, 0.0, Illumination::parse("x1+2"), est);
    double min_u = sol.u.values[0];
    for (double v : sol.u.values) min_u = std::min(min_u, v);
    CHECK(min_u > 0.0);
}

TEST_CASE("solution is linear in the illumination")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.12);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    double k = 3.0;
    auto u1 = solve_helmholtz(mesh, coeffs, k, Illumination::parse("x1+2"), est);
    auto u2 = solve_helmholtz(mesh, coeffs, k, Illumination::parse("x2-1"), est);
    auto combo = solve_helmholtz(mesh, coeffs, k, Illumination::parse("2*(x1+2)-0.5*(x2-1)"), est);
    double scale = 0.0;
    for (int v = 0; v < mesh.vertex_count(); ++v) scale = std::max(scale, std::abs(combo.u[v]));
    for (int v = 0; v < mesh.vertex_count(); ++v) {
        double expected = 2.0 * u1.u[v] - 0.5 * u2.u[v];
        CHECK(std::abs(combo.u[v] - expected) <= 1e-10 * scale);
    }
}

TEST_CASE("resonance guard rejects frequencies near the spectrum")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.08);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    CHECK_THROWS_AS(solve_helmholtz(mesh, coeffs, est.lambda0, Illumination::parse("1"), est),
                    numerical_error);
    CHECK_THROWS_AS(solve_helmholtz(mesh, coeffs, est.lambda0 * 1.04, Illumination::parse("1"), est),
                    numerical_error);
    CHECK_THROWS_AS(solve_helmholtz(mesh, coeffs, -1.0, Illumination::parse("1"), est),
                    validation_error);

    // k = 7 sits safely between the eigenvalues
    auto ok = solve_helmholtz(mesh, coeffs, 7.0, Illumination::parse("1"), est);
    CHECK(ok.diag.residual <= 1e-10);
    CHECK_FALSE(ok.diag.above_lambda1);

    // beyond lambda1 solves succeed but carry the warning flag
    auto warned = solve_helmholtz(mesh, coeffs, 20.0, Illumination::parse("1"), est);
    CHECK(warned.diag.above_lambda1);
    CHECK(warned.diag.residual <= 1e-10);
}

TEST_CASE("Neumann series: zero increment is exact")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.1);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    auto res = neumann_series_check(mesh, coeffs, 1.0, 1.0, 3, Illumination::parse("x1+2"), est);
    REQUIRE_FALSE(res.errors.empty());
    CHECK(res.errors[0] <= 1e-12);
    CHECK_FALSE(res.diverged);
}

TEST_CASE("Neumann series converges geometrically for a small frequency step")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.05);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    auto res = neumann_series_check(mesh, coeffs, 1.0, 1.5, 6, Illumination::parse("x1"), est);
    REQUIRE(res.errors.size() == 7);
    CHECK_FALSE(res.diverged);
    // monotone decreasing after the first term
    for (std::size_t i = 1; i + 1 < res.errors.size(); ++i) CHECK(res.errors[i + 1] < res.errors[i]);
    // ratio stabilizes to a constant below 1 (terms stay far above the
    // rounding floor at this depth)
    double r_mid = res.errors[4] / res.errors[3];
    double r_late = res.errors[6] / res.errors[5];
    CHECK(r_late < 1.0);
    CHECK(r_late == Catch::Approx(r_mid).margin(0.05));
}

TEST_CASE("Neumann series reports divergence far from the base frequency")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.1);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    SpectrumEstimate est = estimate_spectrum(mesh, coeffs);
    // phi = 1 couples to the radial modes, so the increment ratio
    // |k - k0| / (lambda0 - k0) = 11/4.8 exceeds 1 and the sums blow up
    auto res = neumann_series_check(mesh, coeffs, 1.0, 12.0, 20, Illumination::parse("1"), est);
    CHECK(res.diverged);
    CHECK(res.errors.size() < 21);  // growth detected before the term cap
}
