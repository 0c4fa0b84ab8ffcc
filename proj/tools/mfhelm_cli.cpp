// Command-line front end: mesh generation, spectrum estimates, Helmholtz
// solves, power-density synthesis, admissibility reports, frequency
// selection, reconstruction, and the two canned experiments.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "mfhelm/experiments.hpp"
#include "mfhelm/frequency_selection.hpp"
#include "mfhelm/io.hpp"

using namespace mfhelm;
using nlohmann::json;

namespace {

std::string fp(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

struct CommonConfig {
    std::string config_path;
    double radius = 1.0;
    double mesh_h = 0.05;
    double omega_prime_radius = 0.8;
    std::vector<double> freqs = {1.0, 3.0, 7.0};
    std::vector<std::string> illuminations = {"x1+2", "x2+2"};
    std::vector<int> roles;  // defaults derived from the illumination count
    double p = 1e-3, r = 1e-3, s = 1e-3;
    double denom_threshold = 1e-2;
    double gap_tol = default_gap_tol;
    unsigned seed = 0;
    int sample_count = 100;
    std::string coefficients = "phantom";  // phantom | homogeneous
    std::string out_dir = "out";
    int threads = 0;

    void load_file_defaults()
    {
        if (config_path.empty()) return;
        auto kv = parse_config_file(config_path);
        auto get = [&](const char* key) -> const std::string* {
            auto it = kv.find(key);
            return it == kv.end() ? nullptr : &it->second;
        };
        if (auto v = get("radius")) radius = std::stod(*v);
        if (auto v = get("mesh.h")) mesh_h = std::stod(*v);
        if (auto v = get("omega_prime.radius")) omega_prime_radius = std::stod(*v);
        if (auto v = get("freqs")) {
            freqs.clear();
            for (const auto& f : split_list(*v)) freqs.push_back(std::stod(f));
        }
        if (auto v = get("illuminations")) illuminations = split_list(*v);
        if (auto v = get("roles")) {
            roles.clear();
            for (const auto& rr : split_list(*v)) roles.push_back(std::stoi(rr));
        }
        if (auto v = get("thresholds.p")) p = std::stod(*v);
        if (auto v = get("thresholds.r")) r = std::stod(*v);
        if (auto v = get("thresholds.s")) s = std::stod(*v);
        if (auto v = get("denom_threshold")) denom_threshold = std::stod(*v);
        if (auto v = get("gap_tol")) gap_tol = std::stod(*v);
        if (auto v = get("seed")) seed = static_cast<unsigned>(std::stoul(*v));
        if (auto v = get("sample_count")) sample_count = std::stoi(*v);
        if (auto v = get("coefficients")) coefficients = *v;
        if (auto v = get("out_dir")) out_dir = *v;
    }

    AdmissibilityThresholds thresholds() const { return {p, r, s}; }

    std::array<int, 3> resolved_roles() const
    {
        if (!roles.empty()) {
            if (roles.size() != 3)
                throw validation_error("roles must list exactly three illumination indices");
            return {roles[0], roles[1], roles[2]};
        }
        if (illuminations.size() >= 3) return {0, 1, 2};
        if (illuminations.size() == 2) return {0, 0, 1};
        return {0, 0, 0};
    }

    void echo(const std::string& subcommand) const
    {
        std::cout << "resolved config for `" << subcommand << "`:\n";
        std::cout << "  radius = " << fp(radius) << "\n";
        std::cout << "  mesh.h = " << fp(mesh_h) << "\n";
        std::cout << "  omega_prime.radius = " << fp(omega_prime_radius) << "\n";
        std::cout << "  freqs =";
        for (double k : freqs) std::cout << ' ' << fp(k);
        std::cout << "\n  illuminations =";
        for (const auto& phi : illuminations) std::cout << " \"" << phi << '"';
        auto rr = resolved_roles();
        std::cout << "\n  roles = " << rr[0] << "," << rr[1] << "," << rr[2] << "\n";
        std::cout << "  thresholds.p = " << fp(p) << "\n";
        std::cout << "  thresholds.r = " << fp(r) << "\n";
        std::cout << "  thresholds.s = " << fp(s) << "\n";
        std::cout << "  denom_threshold = " << fp(denom_threshold) << "\n";
        std::cout << "  gap_tol = " << fp(gap_tol) << "\n";
        std::cout << "  seed = " << seed << "\n";
        std::cout << "  sample_count = " << sample_count << "\n";
        std::cout << "  coefficients = " << coefficients << "\n";
        std::cout << "  out_dir = " << out_dir << "\n";
        std::cout << "  threads = " << threads << "\n";
    }

    std::shared_ptr<Mesh2D> make_mesh() const
    {
        return std::make_shared<Mesh2D>(gen_disk_mesh(radius, mesh_h));
    }

    CoefficientPair make_coefficients(const Mesh2D& mesh) const
    {
        if (coefficients == "phantom") return build_coefficients(three_inclusion_phantom(), mesh);
        if (coefficients == "homogeneous") return CoefficientPair::constant(mesh, 1.0, 1.0);
        throw validation_error("coefficients must be `phantom` or `homogeneous`, got `" +
                               coefficients + "`");
    }

    std::vector<Illumination> make_illuminations() const
    {
        std::vector<Illumination> out;
        for (const auto& src : illuminations) out.push_back(Illumination::parse(src));
        if (out.empty()) throw validation_error("at least one illumination required");
        return out;
    }
};

void add_common_flags(CLI::App* cmd, CommonConfig& cfg)
{
    cmd->set_help_flag("--help", "print help");  // frees -h / --h for the mesh size
    cmd->add_option("--config", cfg.config_path, "flat key-value config file (flags win)");
    cmd->add_option("--radius", cfg.radius, "domain radius");
    cmd->add_option("--h", cfg.mesh_h, "target mesh size");
    cmd->add_option("--omega-prime-radius", cfg.omega_prime_radius, "measurement region radius");
    cmd->add_option("--freqs", cfg.freqs, "frequency list")->delimiter(',');
    cmd->add_option("--illuminations", cfg.illuminations, "illumination expressions")->delimiter(',');
    cmd->add_option("--roles", cfg.roles, "role indices (phi1,phi2,phi3)")->delimiter(',');
    cmd->add_option("--p", cfg.p, "PSM1/CSM1 threshold");
    cmd->add_option("--r", cfg.r, "PSM2/CSM2 threshold");
    cmd->add_option("--s", cfg.s, "CSM3 threshold");
    cmd->add_option("--denom-threshold", cfg.denom_threshold, "G-formula denominator threshold");
    cmd->add_option("--gap-tol", cfg.gap_tol, "relative resonance gap");
    cmd->add_option("--seed", cfg.seed, "RNG seed for sampled sweeps");
    cmd->add_option("--samples", cfg.sample_count, "sweep sample count");
    cmd->add_option("--coefficients", cfg.coefficients, "phantom | homogeneous");
    cmd->add_option("--out", cfg.out_dir, "output directory");
    cmd->add_option("--threads", cfg.threads, "worker thread cap (0 = hardware)");
}

/// Solves the configured (freqs x illuminations) table on the given mesh.
std::vector<std::vector<HelmholtzSolution>> solve_table(const CommonConfig& cfg, const Mesh2D& mesh,
                                                        const CoefficientPair& coeffs,
                                                        const SpectrumEstimate& spectrum)
{
    auto illum = cfg.make_illuminations();
    HelmholtzOperator op(mesh, coeffs);
    std::vector<std::vector<HelmholtzSolution>> sols(cfg.freqs.size());
    for (std::size_t ki = 0; ki < cfg.freqs.size(); ++ki) {
        sols[ki].resize(illum.size());
        parallel_for(illum.size(), [&](std::size_t i) {
            sols[ki][i] = op.solve(cfg.freqs[ki], illum[i], spectrum, cfg.gap_tol);
        });
    }
    return sols;
}

int cmd_mesh_gen_disk(const CommonConfig& cfg, const std::string& output)
{
    Mesh2D mesh = gen_disk_mesh(cfg.radius, cfg.mesh_h);
    save_mesh(mesh, output);
    std::cout << "wrote " << output << ": " << mesh.vertex_count() << " vertices, "
              << mesh.triangle_count() << " triangles, max edge " << fp(mesh.max_edge_length())
              << "\n";
    return 0;
}

int cmd_spectrum(const CommonConfig& cfg)
{
    auto mesh = cfg.make_mesh();
    auto coeffs = cfg.make_coefficients(*mesh);
    auto est = estimate_spectrum(*mesh, coeffs);
    std::cout << "lambda0 = " << fp(est.lambda0) << "\n";
    std::cout << "lambda1 = " << fp(est.lambda1) << "\n";
    return 0;
}

int cmd_solve(const CommonConfig& cfg, double k, const std::string& phi_src,
              const std::string& csv_out, const std::string& vtk_out)
{
    auto mesh = cfg.make_mesh();
    auto coeffs = cfg.make_coefficients(*mesh);
    auto est = estimate_spectrum(*mesh, coeffs);
    auto sol = solve_helmholtz(*mesh, coeffs, k, Illumination::parse(phi_src), est, cfg.gap_tol);
    std::cout << "solved k = " << fp(k) << ", residual " << fp(sol.diag.residual)
              << ", resonance gap " << fp(sol.diag.resonance_gap)
              << (sol.diag.above_lambda1 ? " (above lambda1)" : "") << "\n";
    if (!csv_out.empty()) {
        write_csv(sol.u, csv_out);
        std::cout << "wrote " << csv_out << "\n";
    }
    if (!vtk_out.empty()) {
        write_vtk({{"u", &sol.u}}, *mesh, vtk_out);
        std::cout << "wrote " << vtk_out << "\n";
    }
    return 0;
}

int cmd_synthesize(const CommonConfig& cfg, const std::string& region)
{
    auto mesh = cfg.make_mesh();
    auto coeffs = cfg.make_coefficients(*mesh);
    auto est = estimate_spectrum(*mesh, coeffs);
    auto sols = solve_table(cfg, *mesh, coeffs, est);
    PowerDensityData data = synthesize(sols, coeffs);
    if (region == "omega-prime") {
        SubmeshMaps maps;
        auto sub = std::make_shared<Mesh2D>(
            submesh(*mesh, {0.0, 0.0}, cfg.omega_prime_radius, &maps));
        PowerDensityData restricted = restrict_power_density(data, *sub, maps);
        write_power_density(restricted, cfg.out_dir, "power_density");
    } else if (region == "omega") {
        write_power_density(data, cfg.out_dir, "power_density");
    } else {
        throw validation_error("--region must be omega or omega-prime");
    }
    std::cout << "wrote power-density dataset (" << region << ") to " << cfg.out_dir << "\n";
    return 0;
}

void write_admissibility_outputs(const AdmissibilityReport& report, const std::string& dir)
{
    std::filesystem::create_directories(dir);
    std::ofstream csv(dir + "/admissibility.csv");
    csv << "cell,u1_abs,grad_det_abs,det3_abs,admissible_k\n";
    for (std::size_t c = 0; c < report.region_cells.size(); ++c) {
        // one row per cell with the per-frequency values flattened
        csv << report.region_cells[c];
        for (const auto& cv : report.values[c])
            csv << ',' << fp(cv.u1_abs) << ',' << fp(cv.grad_det_abs) << ',' << fp(cv.det3_abs);
        csv << ',';
        for (std::size_t i = 0; i < report.admissible[c].size(); ++i) {
            if (i) csv << ';';
            csv << report.admissible[c][i];
        }
        csv << '\n';
    }

    json summary;
    summary["mode"] = report.mode == MeasurementMode::proper ? "proper" : "complete";
    summary["thresholds"] = {{"p", report.thresholds.p},
                             {"r", report.thresholds.r},
                             {"s", report.thresholds.s}};
    summary["frequencies"] = report.frequencies;
    summary["roles"] = report.roles;
    summary["cells"] = report.region_cells.size();
    summary["covered_cells"] = report.region_cells.size() - report.uncovered_cells().size();
    summary["uncovered_cells"] = report.uncovered_cells().size();
    summary["is_proper"] = report.is_proper;
    summary["is_complete"] = report.is_complete;
    summary["min_K"] = report.min_K;
    std::ofstream js(dir + "/admissibility.json");
    js << summary.dump(2) << "\n";
}

int cmd_admissibility(const CommonConfig& cfg, const std::string& mode_str)
{
    auto mesh = cfg.make_mesh();
    auto coeffs = cfg.make_coefficients(*mesh);
    auto est = estimate_spectrum(*mesh, coeffs);
    auto sols = solve_table(cfg, *mesh, coeffs, est);
    MeasurementMode mode =
        (mode_str == "complete") ? MeasurementMode::complete : MeasurementMode::proper;
    auto report = evaluate_conditions(sols, cfg.thresholds(), mode, cfg.resolved_roles());
    write_admissibility_outputs(report, cfg.out_dir);
    std::cout << "admissibility: " << (report.covered() ? "covered" : "NOT covered") << ", min #K "
              << report.min_K << ", wrote " << cfg.out_dir << "/admissibility.{csv,json}\n";
    return report.covered() ? 0 : 2;
}

int cmd_select_frequencies(const CommonConfig& cfg, const std::string& mode_str, int max_l,
                           double a_off, double b_span)
{
    auto mesh = cfg.make_mesh();
    auto coeffs = cfg.make_coefficients(*mesh);
    MeasurementMode mode =
        (mode_str == "complete") ? MeasurementMode::complete : MeasurementMode::proper;
    FrequencySweepParams params;
    params.max_l = max_l;
    params.a_off = a_off;
    params.b_span = b_span;
    params.gap_tol = cfg.gap_tol;
    auto sel = select_frequency_set(*mesh, coeffs, cfg.make_illuminations(), cfg.thresholds(), mode,
                                    params, cfg.resolved_roles());
    std::cout << "lambda0 = " << fp(sel.spectrum.lambda0) << ", lambda1 = "
              << fp(sel.spectrum.lambda1) << "\n";
    std::cout << (sel.covered ? "covered" : "NOT covered") << " with K = {";
    for (std::size_t i = 0; i < sel.frequencies.size(); ++i)
        std::cout << (i ? ", " : "") << fp(sel.frequencies[i]);
    std::cout << "}\n";
    if (!sel.covered)
        std::cout << "uncovered cells: " << sel.report.uncovered_cells().size() << "\n";
    write_admissibility_outputs(sel.report, cfg.out_dir);
    return sel.covered ? 0 : 2;
}

int cmd_reconstruct(const CommonConfig& cfg, const std::string& data_manifest,
                    double boundary_log_q)
{
    std::shared_ptr<Mesh2D> region;
    PowerDensityData data;
    std::optional<CoefficientPair> truth;

    if (!data_manifest.empty()) {
        auto loaded = load_power_density(data_manifest);
        region = loaded.mesh;
        data = std::move(loaded.data);
        data.mesh = region.get();
    } else {
        auto mesh = cfg.make_mesh();
        auto coeffs = cfg.make_coefficients(*mesh);
        auto est = estimate_spectrum(*mesh, coeffs);
        auto sols = solve_table(cfg, *mesh, coeffs, est);
        PowerDensityData full = synthesize(sols, coeffs);
        SubmeshMaps maps;
        region = std::make_shared<Mesh2D>(submesh(*mesh, {0.0, 0.0}, cfg.omega_prime_radius, &maps));
        data = restrict_power_density(full, *region, maps);
        CoefficientPair tr;
        tr.a = restrict_field(coeffs.a, *region, maps);
        tr.q = restrict_field(coeffs.q, *region, maps);
        tr.compute_bounds();
        truth = std::move(tr);
    }

    auto g = reconstruct_G(data, cfg.denom_threshold);
    std::map<int, double> bc;
    for (int v : region->boundary_vertices()) bc[v] = boundary_log_q;
    ScalarField q_star = reconstruct_q(g.G, data, bc);
    ScalarField a_star = reconstruct_a(g.G, q_star);

    std::filesystem::create_directories(cfg.out_dir);
    write_csv(g.G, cfg.out_dir + "/G.csv");
    write_csv(q_star, cfg.out_dir + "/q_star.csv");
    write_csv(a_star, cfg.out_dir + "/a_star.csv");
    write_csv(g.positivity, cfg.out_dir + "/positivity.csv");
    ScalarField usage(*region, FieldKind::cell);
    for (int t = 0; t < region->triangle_count(); ++t)
        usage[t] = static_cast<double>(g.used_k[t].size());
    write_csv(usage, cfg.out_dir + "/usage.csv");
    write_vtk({{"G", &g.G},
               {"q_star", &q_star},
               {"a_star", &a_star},
               {"positivity", &g.positivity},
               {"usage", &usage}},
              *region, cfg.out_dir + "/reconstruction.vtk");
    std::cout << "wrote reconstruction fields to " << cfg.out_dir << "\n";
    if (truth) {
        auto errs = error_norms(a_star, q_star, *truth);
        std::cout << "err_a_l2 = " << fp(errs.a) << "\n";
        std::cout << "err_q_l2 = " << fp(errs.q) << "\n";
    }
    return 0;
}

int cmd_experiment_paper_2d(const CommonConfig& cfg)
{
    PaperExperimentConfig config;
    config.radius = cfg.radius;
    config.mesh_h = cfg.mesh_h;
    config.omega_prime_radius = cfg.omega_prime_radius;
    config.frequencies = cfg.freqs;
    config.illuminations = cfg.illuminations;
    config.roles = cfg.resolved_roles();
    config.thresholds = cfg.thresholds();
    config.denom_threshold = cfg.denom_threshold;
    config.gap_tol = cfg.gap_tol;
    config.homogeneous = cfg.coefficients == "homogeneous";
    config.out_dir = cfg.out_dir;
    auto rep = run_paper_2d(config);
    std::cout << "lambda0 = " << fp(rep.spectrum.lambda0) << ", lambda1 = "
              << fp(rep.spectrum.lambda1) << "\n";
    std::cout << "proper set on omega_prime: " << (rep.proper ? "yes" : "no") << "\n";
    std::cout << "every cell used by the G-average: " << (rep.every_cell_used ? "yes" : "no")
              << "\n";
    std::cout << "err_a_l2 = " << fp(rep.errors.a) << "\n";
    std::cout << "err_q_l2 = " << fp(rep.errors.q) << "\n";
    std::cout << "runtime = " << fp(rep.runtime_seconds) << " s\n";
    return 0;
}

int cmd_experiment_frequency_count(const CommonConfig& cfg, bool full)
{
    FrequencyCountConfig config;
    config.sample_count = cfg.sample_count;
    config.seed = cfg.seed;
    config.full_sweep = full;
    config.radius = cfg.radius;
    config.mesh_h = cfg.mesh_h;
    config.thresholds = cfg.thresholds();
    config.sweep.gap_tol = cfg.gap_tol;
    config.out_dir = cfg.out_dir;
    auto rep = run_frequency_count(config);
    std::cout << "combinations: " << rep.results.size() << ", failures: " << rep.failures << "\n";
    for (const auto& [nk, count] : rep.histogram)
        std::cout << "needed " << nk << " frequencies: " << count << "\n";
    std::cout << "runtime = " << fp(rep.runtime_seconds) << " s\n";
    return rep.failures == 0 ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"multi-frequency Helmholtz power-density imaging toolkit"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");

    CommonConfig cfg;

    // mesh gen-disk
    auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities")->require_subcommand(1);
    mesh_cmd->set_help_flag("--help", "print help");
    auto* gen_disk = mesh_cmd->add_subcommand("gen-disk", "generate a structured disk mesh");
    std::string mesh_out = "disk.mesh";
    add_common_flags(gen_disk, cfg);
    gen_disk->add_option("-o,--output", mesh_out, "output mesh file");

    auto* spectrum = app.add_subcommand("spectrum", "estimate the two smallest eigenvalues");
    add_common_flags(spectrum, cfg);

    auto* solve = app.add_subcommand("solve", "one Helmholtz Dirichlet solve");
    double solve_k = 1.0;
    std::string solve_phi = "x1+2", solve_csv, solve_vtk;
    add_common_flags(solve, cfg);
    solve->add_option("--k", solve_k, "frequency")->required();
    solve->add_option("--phi", solve_phi, "illumination expression");
    solve->add_option("--csv", solve_csv, "nodal CSV output");
    solve->add_option("--vtk", solve_vtk, "VTK output");

    auto* synth = app.add_subcommand("synthesize", "write the power-density dataset");
    std::string synth_region = "omega-prime";
    add_common_flags(synth, cfg);
    synth->add_option("--region", synth_region, "omega | omega-prime");

    auto* adm = app.add_subcommand("admissibility", "evaluate proper/complete-set conditions");
    std::string adm_mode = "proper";
    add_common_flags(adm, cfg);
    adm->add_option("--mode", adm_mode, "proper | complete");

    auto* sel = app.add_subcommand("select-frequencies", "greedy multi-frequency sweep");
    std::string sel_mode = "proper";
    int sel_max_l = 8;
    double sel_a_off = 0.25, sel_b_span = 0.5;
    add_common_flags(sel, cfg);
    sel->add_option("--mode", sel_mode, "proper | complete");
    sel->add_option("--max-l", sel_max_l, "sweep length cap");
    sel->add_option("--a-off", sel_a_off, "sequence offset fraction");
    sel->add_option("--b-span", sel_b_span, "sequence span fraction");

    auto* rec = app.add_subcommand("reconstruct", "reconstruct G, q*, a* from power densities");
    std::string rec_data;
    double rec_boundary_log_q = 0.0;
    add_common_flags(rec, cfg);
    rec->add_option("--data", rec_data, "power-density manifest (default: synthesize from config)");
    rec->add_option("--boundary-log-q", rec_boundary_log_q, "log q on the region boundary");

    auto* exp = app.add_subcommand("experiment", "canned experiments")->require_subcommand(1);
    exp->set_help_flag("--help", "print help");
    auto* p2d = exp->add_subcommand("paper-2d", "full 2D reconstruction experiment");
    add_common_flags(p2d, cfg);
    auto* fcount = exp->add_subcommand("frequency-count", "frequency-count study");
    bool fcount_full = false;
    add_common_flags(fcount, cfg);
    fcount->add_flag("--full", fcount_full, "run all 6561 combinations");

    CLI11_PARSE(app, argc, argv);

    try {
        // file values first, then flags win: reparse flags over the loaded file
        if (!cfg.config_path.empty()) {
            CommonConfig file_cfg;
            file_cfg.config_path = cfg.config_path;
            file_cfg.load_file_defaults();
            // flags that were actually given keep their parsed values
            auto keep_if_set = [&](const char* name, auto CommonConfig::* member, CLI::App* cmd) {
                if (cmd->count(name) == 0) cfg.*member = file_cfg.*member;
            };
            CLI::App* active = nullptr;
            for (auto* top : {gen_disk, spectrum, solve, synth, adm, sel, rec, p2d, fcount})
                if (top->parsed()) active = top;
            if (active) {
                keep_if_set("--radius", &CommonConfig::radius, active);
                keep_if_set("--h", &CommonConfig::mesh_h, active);
                keep_if_set("--omega-prime-radius", &CommonConfig::omega_prime_radius, active);
                keep_if_set("--freqs", &CommonConfig::freqs, active);
                keep_if_set("--illuminations", &CommonConfig::illuminations, active);
                keep_if_set("--roles", &CommonConfig::roles, active);
                keep_if_set("--p", &CommonConfig::p, active);
                keep_if_set("--r", &CommonConfig::r, active);
                keep_if_set("--s", &CommonConfig::s, active);
                keep_if_set("--denom-threshold", &CommonConfig::denom_threshold, active);
                keep_if_set("--gap-tol", &CommonConfig::gap_tol, active);
                keep_if_set("--seed", &CommonConfig::seed, active);
                keep_if_set("--samples", &CommonConfig::sample_count, active);
                keep_if_set("--coefficients", &CommonConfig::coefficients, active);
                keep_if_set("--out", &CommonConfig::out_dir, active);
                keep_if_set("--threads", &CommonConfig::threads, active);
            }
        }
        worker_thread_cap() = cfg.threads <= 0 ? 0 : static_cast<unsigned>(cfg.threads);

        std::string active_name;
        if (gen_disk->parsed()) active_name = "mesh gen-disk";
        else if (spectrum->parsed()) active_name = "spectrum";
        else if (solve->parsed()) active_name = "solve";
        else if (synth->parsed()) active_name = "synthesize";
        else if (adm->parsed()) active_name = "admissibility";
        else if (sel->parsed()) active_name = "select-frequencies";
        else if (rec->parsed()) active_name = "reconstruct";
        else if (p2d->parsed()) active_name = "experiment paper-2d";
        else if (fcount->parsed()) active_name = "experiment frequency-count";
        cfg.echo(active_name);

        if (gen_disk->parsed()) return cmd_mesh_gen_disk(cfg, mesh_out);
        if (spectrum->parsed()) return cmd_spectrum(cfg);
        if (solve->parsed()) return cmd_solve(cfg, solve_k, solve_phi, solve_csv, solve_vtk);
        if (synth->parsed()) return cmd_synthesize(cfg, synth_region);
        if (adm->parsed()) return cmd_admissibility(cfg, adm_mode);
        if (sel->parsed())
            return cmd_select_frequencies(cfg, sel_mode, sel_max_l, sel_a_off, sel_b_span);
        if (rec->parsed()) return cmd_reconstruct(cfg, rec_data, rec_boundary_log_q);
        if (p2d->parsed()) return cmd_experiment_paper_2d(cfg);
        if (fcount->parsed()) return cmd_experiment_frequency_count(cfg, fcount_full);
        return 1;
    } catch (const validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const resource_error& e) {
        std::cerr << "resource error: " << e.what() << "\n";
        return 1;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
