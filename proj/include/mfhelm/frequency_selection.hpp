#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <vector>

#include "mfhelm/common.hpp"
#include "mfhelm/helmholtz.hpp"

namespace mfhelm {

/// Lower bounds (p, r, s) for the pointwise non-degeneracy conditions.
/// p gates |u1|, r the gradient determinant, s the augmented determinant.
struct AdmissibilityThresholds {
    double p = 1e-3;
    double r = 1e-3;
    double s = 1e-3;

    void check() const
    {
        if (!(p > 0.0 && r > 0.0 && s > 0.0))
            throw validation_error("AdmissibilityThresholds: p, r, s must be positive");
    }
};

enum class MeasurementMode { proper, complete };

/// Pointwise (per-cell) admissibility of each frequency, plus the global
/// coverage flags. `roles` records which illumination served as phi1, phi2,
/// phi3 (aliasing allowed).
struct AdmissibilityReport {
    struct ConditionValues {
        double u1_abs = 0.0;
        double grad_det_abs = 0.0;
        double det3_abs = 0.0;
        bool pass = false;
    };

    std::vector<double> frequencies;
    AdmissibilityThresholds thresholds;
    MeasurementMode mode = MeasurementMode::proper;
    std::array<int, 3> roles{0, 1, 2};
    std::vector<int> region_cells;                      // cell ids in the solution mesh
    std::vector<std::vector<int>> admissible;           // [region cell] -> freq indices
    std::vector<std::vector<ConditionValues>> values;   // [region cell][freq]
    bool is_proper = false;
    bool is_complete = false;
    int min_K = 0;  // smallest frequency-prefix length that covers the region (0 = uncovered)

    bool covered() const
    {
        for (const auto& list : admissible)
            if (list.empty()) return false;
        return true;
    }

    std::vector<int> uncovered_cells() const
    {
        std::vector<int> out;
        for (std::size_t c = 0; c < admissible.size(); ++c)
            if (admissible[c].empty()) out.push_back(region_cells[c]);
        return out;
    }
};

/// Evaluates the proper/complete-set conditions at cell barycenters for every
/// frequency. `solutions` is indexed [frequency][illumination]; `roles` maps
/// the three condition slots onto illuminations (they may alias, e.g. (0,0,1)
/// when one sign-definite illumination doubles as phi1 and phi2). Complete
/// mode requires three distinct roles.
inline AdmissibilityReport evaluate_conditions(
    const std::vector<std::vector<HelmholtzSolution>>& solutions,
    const AdmissibilityThresholds& thresholds, MeasurementMode mode,
    std::array<int, 3> roles = {0, 1, 2}, const std::vector<int>* region = nullptr)
{
    thresholds.check();
    if (solutions.empty() || solutions.front().empty())
        throw validation_error("evaluate_conditions: no solutions");
    const int n_illum = static_cast<int>(solutions.front().size());
    for (int rr : roles)
        if (rr < 0 || rr >= n_illum)
            throw validation_error(format_msg("evaluate_conditions: role index ", rr,
                                              " outside the illumination list (size ", n_illum, ")"));
    if (mode == MeasurementMode::complete &&
        (roles[0] == roles[1] || roles[0] == roles[2] || roles[1] == roles[2]))
        throw validation_error("evaluate_conditions: complete mode needs d+1 = 3 distinct illuminations");

    const Mesh2D* mesh = solutions[0][0].u.mesh;
    AdmissibilityReport report;
    report.thresholds = thresholds;
    report.mode = mode;
    report.roles = roles;
    if (region) {
        report.region_cells = *region;
    } else {
        report.region_cells.resize(mesh->triangle_count());
        for (int t = 0; t < mesh->triangle_count(); ++t) report.region_cells[t] = t;
    }
    for (const auto& per_k : solutions) {
        if (static_cast<int>(per_k.size()) != n_illum)
            throw validation_error("evaluate_conditions: ragged solution table");
        report.frequencies.push_back(per_k.front().k);
    }

    const std::size_t n_cells = report.region_cells.size();
    report.admissible.resize(n_cells);
    report.values.resize(n_cells);

    for (std::size_t c = 0; c < n_cells; ++c) {
        int t = report.region_cells[c];
        const auto& tri = mesh->triangles[t].v;
        for (std::size_t ki = 0; ki < solutions.size(); ++ki) {
            const auto& per_k = solutions[ki];
            auto bary_value = [&](int role) {
                const auto& u = per_k[roles[role]].u;
                return (u[tri[0]] + u[tri[1]] + u[tri[2]]) / 3.0;
            };
            auto grad = [&](int role) { return per_k[roles[role]].grad_u.values[t]; };

            AdmissibilityReport::ConditionValues cv;
            cv.u1_abs = std::abs(bary_value(0));
            auto g2 = grad(1), g3 = grad(2);
            cv.grad_det_abs = std::abs(g2[0] * g3[1] - g2[1] * g3[0]);
            if (mode == MeasurementMode::complete) {
                double u1 = bary_value(0), u2 = bary_value(1), u3 = bary_value(2);
                auto g1 = grad(0);
                // rows: values, then the two gradient components
                double det3 = u1 * (g2[0] * g3[1] - g3[0] * g2[1]) -
                              u2 * (g1[0] * g3[1] - g3[0] * g1[1]) +
                              u3 * (g1[0] * g2[1] - g2[0] * g1[1]);
                cv.det3_abs = std::abs(det3);
            }
            cv.pass = cv.u1_abs >= thresholds.p && cv.grad_det_abs >= thresholds.r &&
                      (mode != MeasurementMode::complete || cv.det3_abs >= thresholds.s);
            if (cv.pass) report.admissible[c].push_back(static_cast<int>(ki));
            report.values[c].push_back(cv);
        }
    }

    bool cov = report.covered();
    report.is_proper = (mode == MeasurementMode::proper) && cov;
    report.is_complete = (mode == MeasurementMode::complete) && cov;
    if (cov) {
        int longest_first = 0;
        for (const auto& list : report.admissible)
            longest_first = std::max(longest_first, list.front());
        report.min_K = longest_first + 1;
    }
    return report;
}

/// The frequency sequence k_l = lambda0 + A + B/(l+1) with
/// A = a_off (lambda1 - lambda0) and B = b_span (lambda1 - lambda0); all
/// members lie strictly between the two eigenvalues when a_off + b_span < 1.
inline double frequency_sequence(double lambda0, double lambda1, double a_off, double b_span, int l)
{
    if (!(lambda0 > 0.0 && lambda1 > lambda0))
        throw validation_error("frequency_sequence: need 0 < lambda0 < lambda1");
    if (!(a_off > 0.0 && b_span > 0.0 && a_off + b_span < 1.0))
        throw validation_error("frequency_sequence: need a_off, b_span > 0 with a_off + b_span < 1");
    if (l < 0) throw validation_error("frequency_sequence: l must be nonnegative");
    double gap = lambda1 - lambda0;
    return lambda0 + a_off * gap + b_span * gap / (l + 1);
}

struct FrequencySweepParams {
    double a_off = 0.25;
    double b_span = 0.5;
    int max_l = 8;
    double gap_tol = default_gap_tol;
};

struct FrequencySelection {
    std::vector<double> frequencies;
    AdmissibilityReport report;
    SpectrumEstimate spectrum;
    bool covered = false;
};

/// Greedy sweep along the frequency sequence: solve at k_l, re-evaluate the
/// conditions, stop as soon as every region cell admits some frequency.
/// Returns the partial report with the uncovered-cell list when max_l is
/// exhausted.
inline FrequencySelection select_frequency_set(const Mesh2D& mesh, const CoefficientPair& coeffs,
                                               const std::vector<Illumination>& illuminations,
                                               const AdmissibilityThresholds& thresholds,
                                               MeasurementMode mode,
                                               const FrequencySweepParams& params = {},
                                               std::array<int, 3> roles = {0, 1, 2},
                                               const std::vector<int>* region = nullptr)
{
    if (params.max_l < 1) throw validation_error("select_frequency_set: max_l must be >= 1");
    FrequencySelection out;
    out.spectrum = estimate_spectrum(mesh, coeffs);
    HelmholtzOperator op(mesh, coeffs);

    std::vector<std::vector<HelmholtzSolution>> solutions;
    for (int l = 0; l < params.max_l; ++l) {
        double k = frequency_sequence(out.spectrum.lambda0, out.spectrum.lambda1, params.a_off,
                                      params.b_span, l);
        std::vector<HelmholtzSolution> per_k(illuminations.size());
        parallel_for(illuminations.size(), [&](std::size_t i) {
            per_k[i] = op.solve(k, illuminations[i], out.spectrum, params.gap_tol);
        });
        solutions.push_back(std::move(per_k));
        out.frequencies.push_back(k);
        out.report = evaluate_conditions(solutions, thresholds, mode, roles, region);
        if (out.report.covered()) {
            out.covered = true;
            break;
        }
    }
    return out;
}

struct BmnReport {
    bool pass = false;
    bool convex = false;
    bool nondegenerate = false;
    bool interior_jacobian_positive = false;
    int first_violation_index = -1;
    double polygon_area = 0.0;
};

/// Necessary-condition screen for BMN boundary data at mesh resolution:
/// samples (phi2, phi3) along the boundary loop, requires the image polygon
/// to be convex and non-degenerate, and checks the Jacobian determinant of
/// the pair at interior cell barycenters.
inline BmnReport verify_bmn(const Illumination& phi2, const Illumination& phi3, const Mesh2D& mesh)
{
    auto loops = mesh.boundary_loops();
    if (loops.size() != 1)
        throw validation_error(format_msg("verify_bmn: mesh boundary has ", loops.size(),
                                          " loops; only single-loop boundaries are supported"));
    const auto& loop = loops[0];
    const std::size_t n = loop.size();

    std::vector<Point> image(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point& v = mesh.vertices[loop[i]];
        image[i] = {phi2.eval(v), phi3.eval(v)};
        scale = std::max({scale, std::abs(image[i].x), std::abs(image[i].y)});
    }
    const double tol = 1e-12 * scale * scale;

    BmnReport report;
    int pos = 0, neg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point &a = image[i], &b = image[(i + 1) % n], &c = image[(i + 2) % n];
        double cross = (b.x - a.x) * (c.y - b.y) - (b.y - a.y) * (c.x - b.x);
        if (cross > tol) ++pos;
        if (cross < -tol) ++neg;
        if (pos > 0 && neg > 0 && report.first_violation_index < 0)
            report.first_violation_index = static_cast<int>(i);
    }
    report.convex = (pos == 0 || neg == 0);

    double area2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Point &a = image[i], &b = image[(i + 1) % n];
        area2 += a.x * b.y - b.x * a.y;
    }
    report.polygon_area = 0.5 * std::abs(area2);
    report.nondegenerate = report.polygon_area > tol;

    report.interior_jacobian_positive = true;
    // the loop orientation is arbitrary; require one consistent sign instead
    int jpos = 0, jneg = 0;
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        Point b = mesh.barycenter(t);
        auto g2 = phi2.eval_grad(b.x, b.y);
        auto g3 = phi3.eval_grad(b.x, b.y);
        double J = g2.dx1 * g3.dx2 - g2.dx2 * g3.dx1;
        if (J > 0.0)
            ++jpos;
        else
            ++jneg;
        if (J == 0.0) report.interior_jacobian_positive = false;
    }
    if (jpos > 0 && jneg > 0) report.interior_jacobian_positive = false;

    report.pass = report.convex && report.nondegenerate && report.interior_jacobian_positive;
    return report;
}

}  // namespace mfhelm
