#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "mfhelm/coefficients.hpp"
#include "mfhelm/common.hpp"
#include "mfhelm/frequency_selection.hpp"
#include "mfhelm/helmholtz.hpp"
#include "mfhelm/io.hpp"
#include "mfhelm/power_density.hpp"
#include "mfhelm/reconstruction.hpp"

namespace mfhelm {

/// The three-inclusion phantom of the 2D reconstruction experiment:
/// a rectangle (a=2, q=2), a star-shaped blob (a=1.2, q=1.8) and an ellipse
/// (a=2.5, q=1.2) in a homogeneous unit background.
inline CoefficientSpec three_inclusion_phantom()
{
    CoefficientSpec spec;
    Inclusion rect;
    rect.shape = Inclusion::Shape::rectangle;
    rect.mode = Inclusion::Mode::set_value;
    rect.corner_lo = {0.0, 0.4};
    rect.corner_hi = {0.3, 0.5};
    rect.a_value = 2.0;
    rect.q_value = 2.0;
    spec.inclusions.push_back(rect);

    Inclusion star;
    star.shape = Inclusion::Shape::star_curve;
    star.mode = Inclusion::Mode::set_value;
    star.center = {0.3, -0.2};
    star.rho_base = 0.20;
    star.rho_terms = {{0.03, 5.0}, {-0.02, 15.0}, {0.01, 25.0}};
    star.a_value = 1.2;
    star.q_value = 1.8;
    spec.inclusions.push_back(star);

    Inclusion ellipse;
    ellipse.shape = Inclusion::Shape::ellipse;
    ellipse.mode = Inclusion::Mode::set_value;
    ellipse.center = {-0.3, 0.1};
    // axis lengths 0.2 (horizontal) and 0.3 (vertical)
    ellipse.semi_x = 0.1;
    ellipse.semi_y = 0.15;
    ellipse.a_value = 2.5;
    ellipse.q_value = 1.2;
    spec.inclusions.push_back(ellipse);
    return spec;
}

/// The four-ball coefficient family of the frequency-count study:
/// a = 1 + sum alpha_i chi_i, q = 1 + sum beta_i chi_i with smoothed
/// indicators of B((+-c, +-c), r), c = 0.35, r = 0.2.
inline CoefficientSpec four_ball_spec(const std::array<int, 8>& levels, double smoothing_width)
{
    const double c = 0.35, r = 0.2;
    const Point centers[4] = {{-c, -c}, {-c, c}, {c, -c}, {c, c}};
    CoefficientSpec spec;
    for (int i = 0; i < 4; ++i) {
        Inclusion ball;
        ball.shape = Inclusion::Shape::smoothed_ball;
        ball.mode = Inclusion::Mode::add_offset;
        ball.center = centers[i];
        ball.radius = r;
        ball.width = smoothing_width;
        ball.a_value = static_cast<double>(levels[i]);
        ball.q_value = static_cast<double>(levels[4 + i]);
        spec.inclusions.push_back(ball);
    }
    return spec;
}

struct PaperExperimentConfig {
    double radius = 1.0;
    double mesh_h = 0.05;
    double omega_prime_radius = 0.8;
    std::vector<double> frequencies = {1.0, 3.0, 7.0};
    std::vector<std::string> illuminations = {"x1+2", "x2+2"};
    std::array<int, 3> roles = {0, 0, 1};  // x1+2 doubles as phi1 and phi2
    AdmissibilityThresholds thresholds;
    double denom_threshold = 1e-2;
    double gap_tol = default_gap_tol;
    bool homogeneous = false;  // drop the inclusions (sanity configuration)
    std::string out_dir;       // empty: no files written

    void check() const
    {
        if (!(omega_prime_radius > 0.0 && omega_prime_radius < radius))
            throw validation_error(format_msg("paper-2d config: omega_prime radius ",
                                              omega_prime_radius, " must lie strictly inside ",
                                              "the domain radius ", radius));
        if (frequencies.empty() || illuminations.empty())
            throw validation_error("paper-2d config: frequencies and illuminations required");
        thresholds.check();
    }
};

struct PaperExperimentReport {
    std::shared_ptr<Mesh2D> omega;
    std::shared_ptr<Mesh2D> omega_prime;
    SubmeshMaps maps;
    CoefficientPair truth_omega;        // on omega
    CoefficientPair truth_omega_prime;  // restricted
    SpectrumEstimate spectrum;
    AdmissibilityReport properness;     // a posteriori check on omega-prime cells
    GReconstruction g;
    ScalarField q_star, a_star;
    ErrorNorms errors;
    bool proper = false;
    bool every_cell_used = false;  // each omega-prime cell has >= 1 valid k
    double runtime_seconds = 0.0;
};

/// End-to-end 2D reconstruction: synthesize power densities for the phantom,
/// verify the measurement set is proper on the subdomain, reconstruct G, q*
/// and a*, compare to the ground truth, optionally write every field plus a
/// plain-text summary.
inline PaperExperimentReport run_paper_2d(const PaperExperimentConfig& config)
{
    config.check();
    auto t_start = std::chrono::steady_clock::now();
    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            throw numerical_error(format_msg("paper-2d stage '", name, "': ", e.what()));
        }
    };

    PaperExperimentReport report;
    report.omega = std::make_shared<Mesh2D>(
        stage("mesh", [&] { return gen_disk_mesh(config.radius, config.mesh_h); }));
    report.omega_prime = std::make_shared<Mesh2D>(stage("submesh", [&] {
        return submesh(*report.omega, {0.0, 0.0}, config.omega_prime_radius, &report.maps);
    }));

    report.truth_omega = stage("coefficients", [&] {
        CoefficientSpec spec = config.homogeneous ? CoefficientSpec{} : three_inclusion_phantom();
        return build_coefficients(spec, *report.omega);
    });
    report.truth_omega_prime.a = restrict_field(report.truth_omega.a, *report.omega_prime, report.maps);
    report.truth_omega_prime.q = restrict_field(report.truth_omega.q, *report.omega_prime, report.maps);
    report.truth_omega_prime.compute_bounds();

    report.spectrum =
        stage("spectrum", [&] { return estimate_spectrum(*report.omega, report.truth_omega); });

    std::vector<Illumination> illum;
    for (const auto& src : config.illuminations) illum.push_back(Illumination::parse(src));

    HelmholtzOperator op(*report.omega, report.truth_omega);
    std::vector<std::vector<HelmholtzSolution>> solutions(config.frequencies.size());
    stage("solve", [&] {
        for (std::size_t ki = 0; ki < config.frequencies.size(); ++ki) {
            solutions[ki].resize(illum.size());
            parallel_for(illum.size(), [&](std::size_t i) {
                solutions[ki][i] =
                    op.solve(config.frequencies[ki], illum[i], report.spectrum, config.gap_tol);
            });
        }
        return 0;
    });

    PowerDensityData data_omega =
        stage("synthesize", [&] { return synthesize(solutions, report.truth_omega); });
    PowerDensityData data = restrict_power_density(data_omega, *report.omega_prime, report.maps);

    report.properness = stage("properness", [&] {
        return evaluate_conditions(solutions, config.thresholds, MeasurementMode::proper,
                                   config.roles, &report.maps.cell_to_parent);
    });
    report.proper = report.properness.covered();

    report.g = stage("reconstruct_G", [&] { return reconstruct_G(data, config.denom_threshold); });
    report.every_cell_used = true;
    for (const auto& used : report.g.used_k)
        if (used.empty()) report.every_cell_used = false;

    std::map<int, double> boundary_log_q;
    for (int v : report.omega_prime->boundary_vertices()) boundary_log_q[v] = 0.0;
    report.q_star =
        stage("reconstruct_q", [&] { return reconstruct_q(report.g.G, data, boundary_log_q); });
    report.a_star = reconstruct_a(report.g.G, report.q_star);
    report.errors = error_norms(report.a_star, report.q_star, report.truth_omega_prime);

    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!config.out_dir.empty()) {
        stage("write", [&] {
            const std::string& dir = config.out_dir;
            std::filesystem::create_directories(dir);
            save_mesh(*report.omega, dir + "/omega.mesh");
            save_mesh(*report.omega_prime, dir + "/omega_prime.mesh");
            write_power_density(data, dir, "power_density");
            ScalarField usage(*report.omega_prime, FieldKind::cell);
            for (int t = 0; t < report.omega_prime->triangle_count(); ++t)
                usage[t] = static_cast<double>(report.g.used_k[t].size());
            write_vtk({{"G", &report.g.G},
                       {"a_star", &report.a_star},
                       {"q_star", &report.q_star},
                       {"a_truth", &report.truth_omega_prime.a},
                       {"q_truth", &report.truth_omega_prime.q},
                       {"positivity", &report.g.positivity},
                       {"denominator", &report.g.denominator},
                       {"usage", &usage}},
                      *report.omega_prime, dir + "/reconstruction.vtk");
            write_csv(report.g.G, dir + "/G.csv");
            write_csv(report.a_star, dir + "/a_star.csv");
            write_csv(report.q_star, dir + "/q_star.csv");
            write_csv(report.g.positivity, dir + "/positivity.csv");
            write_csv(usage, dir + "/usage.csv");

            std::ofstream os(dir + "/summary.txt");
            os << "experiment paper-2d\n";
            os << "mesh_h = " << detail::full_precision(config.mesh_h) << "\n";
            os << "omega_cells = " << report.omega->triangle_count() << "\n";
            os << "omega_prime_cells = " << report.omega_prime->triangle_count() << "\n";
            os << "lambda0 = " << detail::full_precision(report.spectrum.lambda0) << "\n";
            os << "lambda1 = " << detail::full_precision(report.spectrum.lambda1) << "\n";
            os << "proper = " << (report.proper ? "yes" : "no") << "\n";
            os << "every_cell_used = " << (report.every_cell_used ? "yes" : "no") << "\n";
            os << "err_a_l2 = " << detail::full_precision(report.errors.a) << "\n";
            os << "err_q_l2 = " << detail::full_precision(report.errors.q) << "\n";
            return 0;
        });
    }
    return report;
}

struct FrequencyCountConfig {
    int sample_count = 100;
    unsigned seed = 0;
    bool full_sweep = false;  // all 3^8 combinations, overrides sample_count
    double radius = 1.0;
    double mesh_h = 0.1;
    double smoothing_width = 0.02;
    AdmissibilityThresholds thresholds;
    FrequencySweepParams sweep;
    std::string out_dir;
};

struct CombinationResult {
    int index = 0;                 // base-3 code of (alpha_1..4, beta_1..4)
    std::array<int, 8> levels{};   // digits, alpha first
    int needed_frequencies = 0;    // 0 when not covered
    bool covered = false;
    bool failed = false;
    std::string error;
    double lambda0 = 0.0, lambda1 = 0.0;
};

struct FrequencyCountReport {
    std::vector<CombinationResult> results;
    std::map<int, int> histogram;  // #K -> combinations
    int failures = 0;
    double runtime_seconds = 0.0;
};

inline std::array<int, 8> combination_levels(int index)
{
    std::array<int, 8> levels{};
    for (int d = 0; d < 8; ++d) {
        levels[d] = index % 3;
        index /= 3;
    }
    return levels;
}

/// Frequency-count study over the four-ball coefficient family: for each
/// sampled combination, estimate the spectrum, sweep the frequency sequence
/// with illuminations {1, x1, x2} in proper mode, and record how many
/// frequencies cover the disk. Per-combination failures are recorded and the
/// sweep continues.
inline FrequencyCountReport run_frequency_count(const FrequencyCountConfig& config)
{
    const int total = 6561;  // 3^8
    if (!config.full_sweep && (config.sample_count < 1 || config.sample_count > total))
        throw validation_error("frequency-count config: sample_count must be in [1, 6561]");
    config.thresholds.check();
    auto t_start = std::chrono::steady_clock::now();

    std::vector<int> indices;
    if (config.full_sweep || config.sample_count == total) {
        indices.resize(total);
        for (int i = 0; i < total; ++i) indices[i] = i;
    } else {
        // seeded partial Fisher-Yates: deterministic sample without replacement
        std::vector<int> pool(total);
        for (int i = 0; i < total; ++i) pool[i] = i;
        std::mt19937 rng(config.seed);
        for (int i = 0; i < config.sample_count; ++i) {
            std::uniform_int_distribution<int> pick(i, total - 1);
            std::swap(pool[i], pool[pick(rng)]);
        }
        indices.assign(pool.begin(), pool.begin() + config.sample_count);
    }

    Mesh2D mesh = gen_disk_mesh(config.radius, config.mesh_h);
    std::vector<Illumination> illum = {Illumination::parse("1"), Illumination::parse("x1"),
                                       Illumination::parse("x2")};

    FrequencyCountReport report;
    report.results.resize(indices.size());
    parallel_for(indices.size(), [&](std::size_t slot) {
        CombinationResult& res = report.results[slot];
        res.index = indices[slot];
        res.levels = combination_levels(res.index);
        try {
            CoefficientPair coeffs =
                build_coefficients(four_ball_spec(res.levels, config.smoothing_width), mesh);
            auto sel = select_frequency_set(mesh, coeffs, illum, config.thresholds,
                                            MeasurementMode::proper, config.sweep);
            res.lambda0 = sel.spectrum.lambda0;
            res.lambda1 = sel.spectrum.lambda1;
            res.covered = sel.covered;
            res.needed_frequencies = sel.covered ? static_cast<int>(sel.frequencies.size()) : 0;
        } catch (const std::exception& e) {
            res.failed = true;
            res.error = e.what();
        }
    });

    for (const auto& res : report.results) {
        if (res.failed || !res.covered)
            ++report.failures;
        else
            ++report.histogram[res.needed_frequencies];
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    if (!config.out_dir.empty()) {
        std::filesystem::create_directories(config.out_dir);
        std::ofstream csv(config.out_dir + "/combinations.csv");
        csv << "index,a1,a2,a3,a4,b1,b2,b3,b4,lambda0,lambda1,needed_frequencies,covered,failed\n";
        for (const auto& r : report.results) {
            csv << r.index;
            for (int d : r.levels) csv << ',' << d;
            csv << ',' << detail::full_precision(r.lambda0) << ','
                << detail::full_precision(r.lambda1) << ',' << r.needed_frequencies << ','
                << (r.covered ? 1 : 0) << ',' << (r.failed ? 1 : 0) << '\n';
        }
        std::ofstream os(config.out_dir + "/summary.txt");
        os << "experiment frequency-count\n";
        os << "samples = " << indices.size() << "\n";
        os << "seed = " << config.seed << "\n";
        os << "failures = " << report.failures << "\n";
        for (const auto& [nk, count] : report.histogram)
            os << "needed_" << nk << " = " << count << "\n";
    }
    return report;
}

}  // namespace mfhelm
