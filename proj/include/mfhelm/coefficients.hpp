#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "mfhelm/common.hpp"
#include "mfhelm/field.hpp"
#include "mfhelm/mesh.hpp"

namespace mfhelm {

/// One inclusion of the coefficient geometry. Values are either set inside
/// the shape (replacing the background) or added as offsets; smoothed balls
/// blend with a logistic profile of width `width`.
struct Inclusion {
    enum class Shape { rectangle, ellipse, star_curve, smoothed_ball };
    enum class Mode { set_value, add_offset };

    Shape shape = Shape::rectangle;
    Mode mode = Mode::set_value;
    double a_value = 1.0;
    double q_value = 1.0;

    // rectangle: axis-aligned, given by the diagonal corners
    Point corner_lo{}, corner_hi{};
    // ellipse / star_curve / smoothed_ball
    Point center{};
    double semi_x = 0.0, semi_y = 0.0;  // ellipse semi-axes
    // star_curve boundary: rho(t) = rho_base + sum_i amp_i * sin(freq_i * t)
    double rho_base = 0.0;
    std::vector<std::pair<double, double>> rho_terms;  // (amplitude, frequency)
    // smoothed_ball
    double radius = 0.0;
    double width = 0.02;

    /// Membership weight at a point: 1 inside, 0 outside, logistic profile
    /// for smoothed balls.
    double weight(const Point& p) const
    {
        switch (shape) {
            case Shape::rectangle:
                return (p.x >= std::min(corner_lo.x, corner_hi.x) &&
                        p.x <= std::max(corner_lo.x, corner_hi.x) &&
                        p.y >= std::min(corner_lo.y, corner_hi.y) &&
                        p.y <= std::max(corner_lo.y, corner_hi.y))
                           ? 1.0
                           : 0.0;
            case Shape::ellipse: {
                double dx = (p.x - center.x) / semi_x, dy = (p.y - center.y) / semi_y;
                return (dx * dx + dy * dy <= 1.0) ? 1.0 : 0.0;
            }
            case Shape::star_curve: {
                double t = std::atan2(p.y - center.y, p.x - center.x);
                double rho = rho_base;
                for (const auto& [amp, freq] : rho_terms) rho += amp * std::sin(freq * t);
                return (dist(p, center) <= rho) ? 1.0 : 0.0;
            }
            case Shape::smoothed_ball: {
                double t = (radius - dist(p, center)) / width;
                return 1.0 / (1.0 + std::exp(-t));
            }
        }
        return 0.0;
    }
};

struct CoefficientSpec {
    double a_background = 1.0;
    double q_background = 1.0;
    std::vector<Inclusion> inclusions;
};

/// Scalar coefficient fields (a, q) sampled cellwise, with their computed
/// ellipticity/positivity bounds.
struct CoefficientPair {
    ScalarField a, q;  // P0 on the mesh
    double lambda = 0.0, Lambda = 0.0;  // min/max of a
    double beta1 = 0.0, beta2 = 0.0;    // min/max of q
    std::vector<std::string> warnings;

    void compute_bounds()
    {
        lambda = Lambda = a.values.at(0);
        beta1 = beta2 = q.values.at(0);
        for (double v : a.values) {
            lambda = std::min(lambda, v);
            Lambda = std::max(Lambda, v);
        }
        for (double v : q.values) {
            beta1 = std::min(beta1, v);
            beta2 = std::max(beta2, v);
        }
    }

    void check() const
    {
        a.check();
        q.check();
        if (a.mesh != q.mesh) throw validation_error("CoefficientPair: a and q on different meshes");
        if (!(lambda > 0.0))
            throw validation_error(format_msg("CoefficientPair: ellipticity bound lambda = ", lambda,
                                              " must be positive"));
        if (!(beta1 > 0.0))
            throw validation_error(format_msg("CoefficientPair: positivity bound beta1 = ", beta1,
                                              " must be positive"));
    }

    static CoefficientPair constant(const Mesh2D& mesh, double a0, double q0)
    {
        CoefficientPair cp;
        cp.a = ScalarField(mesh, FieldKind::cell, a0, "a");
        cp.q = ScalarField(mesh, FieldKind::cell, q0, "q");
        cp.compute_bounds();
        cp.check();
        return cp;
    }
};

/// Samples the inclusion geometry at cell barycenters. Inclusions that miss
/// every barycenter produce a warning, not an error.
inline CoefficientPair build_coefficients(const CoefficientSpec& spec, const Mesh2D& mesh)
{
    CoefficientPair cp;
    cp.a = ScalarField(mesh, FieldKind::cell, spec.a_background, "a");
    cp.q = ScalarField(mesh, FieldKind::cell, spec.q_background, "q");

    std::vector<bool> hit(spec.inclusions.size(), false);
    for (int t = 0; t < mesh.triangle_count(); ++t) {
        Point p = mesh.barycenter(t);
        for (std::size_t i = 0; i < spec.inclusions.size(); ++i) {
            const Inclusion& inc = spec.inclusions[i];
            double w = inc.weight(p);
            if (w > 1e-9) hit[i] = true;
            if (inc.mode == Inclusion::Mode::add_offset) {
                cp.a[t] += inc.a_value * w;
                cp.q[t] += inc.q_value * w;
            } else if (w > 0.0) {
                cp.a[t] = cp.a[t] * (1.0 - w) + inc.a_value * w;
                cp.q[t] = cp.q[t] * (1.0 - w) + inc.q_value * w;
            }
        }
    }
    for (std::size_t i = 0; i < spec.inclusions.size(); ++i)
        if (!hit[i])
            cp.warnings.push_back(
                format_msg("inclusion ", i, " does not reach any cell barycenter (clipped)"));
    cp.compute_bounds();
    cp.check();
    return cp;
}

}  // namespace mfhelm
