#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "mfhelm/helmholtz.hpp"
#include "mfhelm/io.hpp"

using namespace mfhelm;

namespace {

std::string temp_dir(const std::string& name)
{
    auto p = std::filesystem::temp_directory_path() / name;
    std::filesystem::create_directories(p);
    return p.string();
}

}  // namespace

TEST_CASE("CSV round trip preserves values bit-exactly")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.25);
    ScalarField f(mesh, FieldKind::vertex);
    for (int v = 0; v < mesh.vertex_count(); ++v) f[v] = std::sin(12.345 * v) / 3.0;
    std::string path = temp_dir("mfhelm_io") + "/field.csv";
    write_csv(f, path);
    auto values = read_csv_values(path);
    REQUIRE(values.size() == f.values.size());
    for (std::size_t i = 0; i < values.size(); ++i) CHECK(values[i] == f.values[i]);
}

TEST_CASE("VTK output carries the expected structure")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.3);
    ScalarField vf(mesh, FieldKind::vertex, 1.0);
    ScalarField cf(mesh, FieldKind::cell, 2.0);
    std::string path = temp_dir("mfhelm_io") + "/fields.vtk";
    write_vtk({{"vertex_one", &vf}, {"cell_two", &cf}}, mesh, path);

    std::ifstream is(path);
    std::string text((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    CHECK(text.rfind("# vtk DataFile Version 3.0\n", 0) == 0);
    CHECK(text.find("DATASET UNSTRUCTURED_GRID") != std::string::npos);
    CHECK(text.find(format_msg("POINTS ", mesh.vertex_count(), " double")) != std::string::npos);
    CHECK(text.find(format_msg("CELL_TYPES ", mesh.triangle_count())) != std::string::npos);
    auto point_data = text.find("POINT_DATA");
    auto cell_data = text.find("CELL_DATA");
    REQUIRE(point_data != std::string::npos);
    REQUIRE(cell_data != std::string::npos);
    // vertex field lands in POINT_DATA, cell field in CELL_DATA
    CHECK(text.find("SCALARS vertex_one") > point_data);
    CHECK(text.find("SCALARS vertex_one") < cell_data);
    CHECK(text.find("SCALARS cell_two") > cell_data);
}

TEST_CASE("power density dataset round-trips through the manifest")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.2);
    auto coeffs = CoefficientPair::constant(mesh, 1.0, 1.0);
    auto spectrum = estimate_spectrum(mesh, coeffs);
    std::vector<std::vector<HelmholtzSolution>> sols;
    for (double k : {1.0, 3.0})
        sols.push_back({solve_helmholtz(mesh, coeffs, k, Illumination::parse("x1+2"), spectrum),
                        solve_helmholtz(mesh, coeffs, k, Illumination::parse("x2+2"), spectrum)});
    PowerDensityData data = synthesize(sols, coeffs);

    std::string dir = temp_dir("mfhelm_io_pd");
    write_power_density(data, dir, "t");
    auto loaded = load_power_density(dir + "/t.manifest");

    CHECK(loaded.data.region_tag == data.region_tag);
    REQUIRE(loaded.data.n_freq() == 2);
    REQUIRE(loaded.data.n_illum() == 2);
    CHECK(loaded.data.frequencies[0] == data.frequencies[0]);
    CHECK(loaded.data.illuminations[1].source() == "x2+2");
    for (int ki = 0; ki < 2; ++ki)
        for (int i = 0; i < 2; ++i)
            for (int j = i; j < 2; ++j) {
                for (int v = 0; v < mesh.vertex_count(); ++v)
                    CHECK(loaded.data.e(ki, i, j)[v] == data.e(ki, i, j)[v]);
                for (int t = 0; t < mesh.triangle_count(); ++t)
                    CHECK(loaded.data.E(ki, i, j)[t] == data.E(ki, i, j)[t]);
            }
    CHECK_NOTHROW(loaded.data.check_invariants());
}

TEST_CASE("rewriting the same dataset is byte-identical")
{
    Mesh2D mesh = gen_disk_mesh(1.0, 0.3);
    ScalarField f(mesh, FieldKind::cell);
    for (int t = 0; t < mesh.triangle_count(); ++t) f[t] = std::cos(0.789 * t);
    std::string d = temp_dir("mfhelm_io");
    write_csv(f, d + "/a.csv");
    write_csv(f, d + "/b.csv");
    std::ifstream fa(d + "/a.csv"), fb(d + "/b.csv");
    std::string sa((std::istreambuf_iterator<char>(fa)), std::istreambuf_iterator<char>());
    std::string sb((std::istreambuf_iterator<char>(fb)), std::istreambuf_iterator<char>());
    CHECK(sa == sb);
}

TEST_CASE("config files parse keys, comments and lists")
{
    std::string path = temp_dir("mfhelm_io") + "/run.cfg";
    {
        std::ofstream os(path);
        os << "# experiment configuration\n";
        os << "mesh.h = 0.05\n";
        os << "omega_prime.radius = 0.8\n";
        os << "freqs = 1, 3, 7\n";
        os << "illuminations = x1+2, x2+2\n";
        os << "thresholds.p = 1e-3   # lower bound\n";
        os << "out_dir = runs/demo\n";
    }
    auto cfg = parse_config_file(path);
    CHECK(cfg.at("mesh.h") == "0.05");
    CHECK(cfg.at("out_dir") == "runs/demo");
    auto freqs = split_list(cfg.at("freqs"));
    REQUIRE(freqs.size() == 3);
    CHECK(freqs[1] == "3");
    auto illum = split_list(cfg.at("illuminations"));
    REQUIRE(illum.size() == 2);
    CHECK(illum[0] == "x1+2");

    std::ofstream bad(path);
    bad << "keyonly\n";
    bad.close();
    CHECK_THROWS_AS(parse_config_file(path), validation_error);
}
