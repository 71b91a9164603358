// Command-line front end. Exit codes: 0 all checks pass, 1 a check failed, 2 input or
// configuration error, 3 numerical abort.
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cfh/pipeline.hpp"

namespace {

using namespace cfh;

struct Common {
    std::string config;
    std::vector<std::string> sets;
    std::string out;
    std::string report;
    bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("-c,--config", c.config, "configuration file (key = value)");
    app->add_option("--set", c.sets, "override a configuration key, key=value")->take_all();
    app->add_option("-o,--out", c.out, "output directory (overrides output.dir)");
    app->add_option("--report", c.report, "report path (default <out>/report.json)");
    app->add_flag("-q,--quiet", c.quiet, "do not print the check summary");
}

Config load_config(const Common& c) {
    Config cfg;
    if (!c.config.empty()) cfg = Config::load(c.config);
    for (const auto& kv : c.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!c.out.empty()) cfg.set("output.dir", c.out);
    return cfg;
}

int finish(Report& r, const Config& cfg, const Settings& s, const Common& c) {
    r.set_config(cfg.echo(), cfg.tolerances());
    std::error_code ec;
    std::filesystem::create_directories(s.out_dir, ec);
    if (ec) throw InputError("cannot create output directory " + s.out_dir + ": " + ec.message());
    const std::string path = c.report.empty() ? (std::filesystem::path(s.out_dir) / "report.json").string() : c.report;
    r.write(path);
    if (!c.quiet) {
        r.summary(std::cout);
        std::cout << (r.passed() ? "status: pass" : "status: fail") << " (" << path << ")\n";
    }
    return exit_code(r);
}

int run_stage(const Common& c, Stage last, const std::string& name) {
    Config cfg = load_config(c);
    const Settings s = Settings::from(cfg);
    Report r(name);
    run_pipeline(s, last, r);
    return finish(r, cfg, s, c);
}

int verify(const Common& c, const std::string& mesh) {
    Config cfg = load_config(c);
    const Settings s = Settings::from(cfg);
    Report r("verify");
    const HypersurfaceMesh m = read_mesh(mesh);
    r.stage("input")["mesh"] = mesh;
    r.stage("input")["sha256"] = sha256_file(mesh);
    verify_mesh(m, s, r);
    return finish(r, cfg, s, c);
}

int check_surface_cmd(const Common& c, const std::string& input) {
    Config cfg = load_config(c);
    const Settings s = Settings::from(cfg);
    Report r("check-surface");
    const auto pts = read_surface_csv(input);
    r.stage("input")["surface"] = input;
    r.stage("input")["sha256"] = sha256_file(input);
    const SurfaceVerdict v = check_surface(pts, s, r);
    if (v.solution.phi.size()) {
        const auto dir = std::filesystem::path(s.out_dir);
        std::filesystem::create_directories(dir);
        write_csv((dir / "phi_recovered.csv").string(), v.solution.phi);
        r.artifacts()["phi"] = "phi_recovered.csv";
        if (v.solution.accepted) {
            write_csv((dir / "pbar_recovered.csv").string(), v.solution.Pbar);
            r.artifacts()["Pbar"] = "pbar_recovered.csv";
        }
    }
    return finish(r, cfg, s, c);
}

int dual_cmd(const Common& c, const std::string& mesh) {
    Config cfg = load_config(c);
    const Settings s = Settings::from(cfg);
    Report r("dual");
    const HypersurfaceMesh m = read_mesh(mesh);
    r.stage("input")["mesh"] = mesh;
    r.stage("input")["sha256"] = sha256_file(mesh);
    int k0 = -1;
    for (int k = 0; k < m.grid.nz; ++k)
        if (std::fabs(m.grid.z(k)) <= 1e-12) k0 = k;
    if (k0 < 0) throw InputError(mesh + ": the mesh has no z = 0 slice");
    const DualData d = dual_from_mesh(m, s.surface.order);
    const std::array<Field2, 4> pts{slice(m.N[0], k0), slice(m.N[1], k0), slice(m.N[2], k0), slice(m.N[3], k0)};
    const Field2 phi0 = slice(m.phi, k0);
    const SurfaceVerdict v = check_surface(pts, s, r);
    check_dual(v, d, slice(m.kappa3, k0), phi0, s, r);
    const auto dir = std::filesystem::path(s.out_dir);
    std::filesystem::create_directories(dir);
    const std::pair<const char*, const Field2*> out[] = {
        {"phi_star", &d.phi_star}, {"P_star", &d.P_star}, {"sigma1", &d.sigma1}, {"sigma2", &d.sigma2},
        {"sigma3", &d.sigma3},     {"kappa1_star", &d.kappa1}, {"kappa2_star", &d.kappa2}, {"kappa3_star", &d.kappa3}};
    for (const auto& [name, f] : out) {
        const std::string file = std::string(name) + ".csv";
        write_csv((dir / file).string(), *f);
        r.artifacts()[name] = file;
    }
    return finish(r, cfg, s, c);
}

int export_cmd(const std::string& mesh, const std::string& format, const std::string& out) {
    const HypersurfaceMesh m = read_mesh(mesh);
    if (format == "vtk") write_vtk(out, m);
    else write_mesh_csv(out, m);
    std::cout << "wrote " << out << " (" << format << ", sha256 " << sha256_file(out) << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformally flat hypersurfaces from Guichard nets"};
    app.require_subcommand(1);

    Common seed_c, evolve_c, run_c, verify_c, surface_c, dual_c;
    std::string verify_mesh_path, surface_input, dual_mesh, export_mesh, export_format = "vtk", export_out;

    auto* seed = app.add_subcommand("seed", "build the seed and the z = 0 data, check constraints");
    add_common(seed, seed_c);
    auto* evolve = app.add_subcommand("evolve", "seed, then evolve in z and check flatness");
    add_common(evolve, evolve_c);
    auto* run = app.add_subcommand("reconstruct", "full pipeline up to the hypersurface mesh and its checks");
    run->alias("run");
    add_common(run, run_c);
    auto* ver = app.add_subcommand("verify", "residual suite of a stored mesh");
    ver->add_option("mesh", verify_mesh_path, "mesh file (.vtk or .csv)")->required();
    add_common(ver, verify_c);
    auto* surf = app.add_subcommand("check-surface", "frame coefficients and phi/Pbar recovery of a sampled surface");
    surf->add_option("surface", surface_input, "CSV with header x,y,p1,p2,p3,p4")->required();
    add_common(surf, surface_c);
    auto* dual = app.add_subcommand("dual", "Schouten dual of a stored mesh at z = 0");
    dual->add_option("mesh", dual_mesh, "mesh file")->required();
    add_common(dual, dual_c);
    auto* exp = app.add_subcommand("export", "convert a mesh between formats");
    exp->add_option("mesh", export_mesh, "mesh file")->required();
    exp->add_option("-f,--format", export_format, "vtk or csv")->check(CLI::IsMember({"vtk", "csv"}));
    exp->add_option("-o,--out", export_out, "output path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*seed) return run_stage(seed_c, Stage::Seed, "seed");
        if (*evolve) return run_stage(evolve_c, Stage::Evolve, "evolve");
        if (*run) return run_stage(run_c, Stage::Reconstruct, "reconstruct");
        if (*ver) return verify(verify_c, verify_mesh_path);
        if (*surf) return check_surface_cmd(surface_c, surface_input);
        if (*dual) return dual_cmd(dual_c, dual_mesh);
        if (*exp) return export_cmd(export_mesh, export_format, export_out);
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical abort: " << e.what() << '\n';
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
