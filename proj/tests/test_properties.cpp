// Generator-driven invariant checks across randomized inputs.

#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mfhelm/mfhelm.hpp"

using namespace mfhelm;

namespace {

/// Random expression sources over the full grammar, depth-bounded.
std::string random_expression(std::mt19937& rng, int depth)
{
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 7);
    std::uniform_real_distribution<double> num(0.0, 9.5);
    switch (pick(rng)) {
        case 0: {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3g", num(rng));
            return buf;
        }
        case 1: return "x1";
        case 2: return "x2";
        case 3: return random_expression(rng, depth - 1) + "+" + random_expression(rng, depth - 1);
        case 4: return random_expression(rng, depth - 1) + "-" + random_expression(rng, depth - 1);
        case 5: return random_expression(rng, depth - 1) + "*" + random_expression(rng, depth - 1);
        case 6: return "-(" + random_expression(rng, depth - 1) + ")";
        default: {
            const char* fn = (pick(rng) % 2 == 0) ? "sin" : "cos";
            return std::string(fn) + "(" + random_expression(rng, depth - 1) + ")";
        }
    }
}

}  // namespace

TEST_CASE("property: printed expressions reparse to the same tree and values")
{
    std::mt19937 rng(20240817);
    for (int trial = 0; trial < 300; ++trial) {
        std::string src = random_expression(rng, 4);
        Illumination a = Illumination::parse(src);
        Illumination b = Illumination::parse(a.print());
        INFO("src: " << src << "  printed: " << a.print());
        REQUIRE(a.same_tree(b));
        for (double x : {-0.7, 0.0, 1.3})
            for (double y : {-1.1, 0.4}) {
                double va = a.eval(x, y), vb = b.eval(x, y);
                if (std::isfinite(va)) CHECK(va == vb);
            }
    }
}

TEST_CASE("property: disk meshes satisfy all structural invariants")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> rad(0.4, 3.0);
    std::uniform_real_distribution<double> frac(0.03, 0.4);
    for (int trial = 0; trial < 12; ++trial) {
        double radius = rad(rng);
        double h = frac(rng) * radius;
        Mesh2D mesh = gen_disk_mesh(radius, h);
        INFO("radius " << radius << " h " << h);
        CHECK_NOTHROW(mesh.validate());
        CHECK(mesh.max_edge_length() <= 1.5 * h);
        for (int v : mesh.boundary_vertices())
            CHECK(std::hypot(mesh.vertices[v].x, mesh.vertices[v].y) ==
                  Catch::Approx(radius).margin(1e-12 * radius));
        // polygon area identity (triangulation fills the inscribed polygon)
        double n = static_cast<double>(mesh.boundary_edges.size());
        double polygon = 0.5 * n * radius * radius * std::sin(2.0 * M_PI / n);
        CHECK(mesh.total_area() == Catch::Approx(polygon).epsilon(1e-10));
    }
}

TEST_CASE("property: refinement preserves area and quadruples the cells")
{
    Mesh2D base = gen_disk_mesh(1.4, 0.3);
    Mesh2D fine = refine_uniform(base);  // no boundary snap: exact polygon
    CHECK(fine.triangle_count() == 4 * base.triangle_count());
    CHECK(fine.total_area() == Catch::Approx(base.total_area()).epsilon(1e-12));
    CHECK_NOTHROW(fine.validate());
}

TEST_CASE("property: solve linearity over random coefficients of illuminations")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.15);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    auto spectrum = estimate_spectrum(mesh, coeffs);
    HelmholtzOperator op(mesh, coeffs);
    auto u1 = op.solve(3.0, Illumination::parse("x1+2"), spectrum);
    auto u2 = op.solve(3.0, Illumination::parse("sin(x2)"), spectrum);

    std::mt19937 rng(99);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    for (int trial = 0; trial < 5; ++trial) {
        double alpha = coef(rng), beta = coef(rng);
        char buf[128];
        std::snprintf(buf, sizeof buf, "%.17g*(x1+2)+%.17g*sin(x2)", alpha, beta);
        auto combo = op.solve(3.0, Illumination::parse(buf), spectrum);
        double scale = 0.0;
        for (double v : combo.u.values) scale = std::max(scale, std::abs(v));
        for (int v = 0; v < mesh.vertex_count(); ++v)
            CHECK(std::abs(combo.u[v] - (alpha * u1.u[v] + beta * u2.u[v])) <= 1e-10 * scale);
    }
}

TEST_CASE("property: synthesized invariants hold across random coefficient fields")
{
    std::mt19937 rng(4242);
    std::uniform_real_distribution<double> level(0.0, 2.0);
    Mesh2D mesh = gen_disk_mesh(1.0, 0.14);
    for (int trial = 0; trial < 4; ++trial) {
        std::array<int, 8> levels{};
        for (auto& l : levels) l = static_cast<int>(level(rng) + 0.5);
        auto coeffs = build_coefficients(four_ball_spec(levels, 0.03), mesh);
        auto spectrum = estimate_spectrum(mesh, coeffs);
        double k = frequency_sequence(spectrum.lambda0, spectrum.lambda1, 0.25, 0.5, trial);
        std::vector<std::vector<HelmholtzSolution>> sols = {
            {solve_helmholtz(mesh, coeffs, k, Illumination::parse("1"), spectrum),
             solve_helmholtz(mesh, coeffs, k, Illumination::parse("x1"), spectrum),
             solve_helmholtz(mesh, coeffs, k, Illumination::parse("x2"), spectrum)}};
        PowerDensityData data = synthesize(sols, coeffs);
        CHECK_NOTHROW(data.check_invariants());
    }
}

TEST_CASE("property: non-finite illumination values are rejected at the boundary")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.3);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    auto spectrum = estimate_spectrum(mesh, coeffs);
    // 1e200 * 1e200 overflows to infinity at every evaluation point
    auto phi = Illumination::parse("1e200*1e200");
    CHECK_THROWS_AS(solve_helmholtz(mesh, coeffs, 1.0, phi, spectrum), validation_error);
}

TEST_CASE("five smallest disk eigenvalues including multiplicities")
{
    // Squares of Bessel-function zeros: j01^2, j11^2 (double), j21^2 (double).
    auto bisect = [](auto f, double lo, double hi) {
        double flo = f(lo);
        for (int i = 0; i < 200; ++i) {
            double mid = 0.5 * (lo + hi);
            if ((f(mid) < 0) == (flo < 0)) {
                lo = mid;
                flo = f(mid);
            } else {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    double j01 = bisect([](double z) { return bessel_j0(z); }, 2.0, 3.0);
    double j11 = bisect([](double z) { return bessel_j1(z); }, 3.0, 4.5);
    // J2 via the recurrence J2(z) = 2 J1(z)/z - J0(z)
    double j21 = bisect([](double z) { return 2.0 * bessel_j1(z) / z - bessel_j0(z); }, 4.6, 5.5);

    Mesh2D mesh = gen_disk_mesh(1.0, 0.06);
    SparseMatrix K = assemble_stiffness(mesh, ScalarField(mesh, FieldKind::cell, 1.0));
    SparseMatrix M = assemble_mass(mesh, ScalarField(mesh, FieldKind::cell, 1.0));
    std::map<int, double> bc;
    for (int v : mesh.boundary_vertices()) bc[v] = 0.0;
    SparseSystem rk = apply_dirichlet(SparseSystem::from(K, Vector::Zero(K.rows())), bc);
    SparseSystem rm = apply_dirichlet(SparseSystem::from(M, Vector::Zero(M.rows())), bc);
    auto vals = smallest_eigenvalues(rk.A, rm.A, 5);
    REQUIRE(vals.size() == 5);
    CHECK(vals[0] == Catch::Approx(j01 * j01).epsilon(0.01));
    CHECK(vals[1] == Catch::Approx(j11 * j11).epsilon(0.02));
    CHECK(vals[2] == Catch::Approx(j11 * j11).epsilon(0.02));
    CHECK(vals[3] == Catch::Approx(j21 * j21).epsilon(0.03));
    CHECK(vals[4] == Catch::Approx(j21 * j21).epsilon(0.03));
}
