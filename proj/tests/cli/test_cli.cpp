// End-to-end tests of the cfh executable. CFH_CLI, CFH_CONFIGS, CFH_GOLDEN and CFH_WORK are set by CMake;
// the reference run lives in CFH_WORK/reference (ctest fixture).
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cfh/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string cli = CFH_CLI;
const fs::path configs = CFH_CONFIGS, golden = CFH_GOLDEN, work = CFH_WORK;
const fs::path reference = work / "reference";
const std::string default_cfg = (configs / "example2-default.cfg").string();
const std::string small_cfg = (configs / "example2-small.cfg").string();

struct Run {
    int code = -1;
    std::string output;
};

// Runs the CLI with stdout and stderr captured.
Run run(const std::string& args, const std::string& env = "") {
    const fs::path log = work / ("log_" + std::to_string(std::hash<std::string>{}(args + env)));
    fs::create_directories(work);
    const std::string cmd = env + (env.empty() ? "" : " ") + cli + " " + args + " > " + log.string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
    std::ifstream is(log);
    std::ostringstream os;
    os << is.rdbuf();
    r.output = os.str();
    return r;
}

json load(const fs::path& p) {
    std::ifstream is(p);
    REQUIRE(is);
    return json::parse(is);
}

std::map<std::string, double> values(const json& report) {
    std::map<std::string, double> v;
    for (const auto& c : report["checks"])
        v[c["name"]] = c["value"].is_number() ? c["value"].get<double>() : NAN;
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

}  // namespace

TEST_CASE("reference config exits 0 with every check passing") {
    std::ifstream is(reference / "exit_code");
    int code = -1;
    is >> code;
    const json r = load(reference / "report.json");
    for (const auto& c : r["checks"])
        if (!c["pass"].get<bool>()) MESSAGE("failing: " << c["name"].get<std::string>() << " = " << c["value"]);
    CHECK(r["status"] == "pass");
    CHECK(code == 0);
}

TEST_CASE("report: unique checks, echoed tolerances, hash excludes timings") {
    const json r = load(reference / "report.json");
    std::set<std::string> names;
    for (const auto& c : r["checks"]) CHECK(names.insert(c["name"].get<std::string>()).second);
    CHECK(names.size() > 30);
    CHECK(r["tolerances"]["codazzi"] == 1e-4);
    CHECK(r["tolerances"]["sigma3"] == 1e-12);
    CHECK(r["config"]["grid.nx"] == "81");
    CHECK(r["timings"].size() > 0);
    json h = r;
    h.erase("timings");
    h.erase("sha256");
    CHECK(cfh::sha256_hex(h.dump()) == r["sha256"]);
    // payloads are referenced by relative path
    for (const auto& [k, v] : r["artifacts"].items()) {
        CHECK(fs::path(v.get<std::string>()).is_relative());
        CHECK(fs::exists(reference / v.get<std::string>()));
    }
}

TEST_CASE("identical config gives a bit-identical report, independent of the thread count") {
    const Run a = run("run -q -c " + small_cfg + " -o " + (work / "det_a").string());
    const Run b = run("run -q -c " + small_cfg + " -o " + (work / "det_b").string(), "CFH_THREADS=1");
    REQUIRE(a.code == b.code);
    REQUIRE((a.code == 0 || a.code == 1));
    json ra = load(work / "det_a" / "report.json"), rb = load(work / "det_b" / "report.json");
    // output.dir differs between the two runs and is part of the config echo
    CHECK(ra["checks"] == rb["checks"]);
    CHECK(ra["stages"] == rb["stages"]);
    CHECK(slurp(work / "det_a" / "kappa3.csv") == slurp(work / "det_b" / "kappa3.csv"));
    CHECK(slurp(work / "det_a" / "mesh.vtk") == slurp(work / "det_b" / "mesh.vtk"));
}

TEST_CASE("t = 0 is rejected before any computation") {
    const fs::path out = work / "t_zero";
    fs::remove_all(out);
    const Run r = run("run -c " + default_cfg + " --set seed.t=0 -o " + out.string());
    CHECK(r.code == 2);
    CHECK(r.output.find("seed.t") != std::string::npos);
    CHECK_FALSE(fs::exists(out / "report.json"));
}

TEST_CASE("configuration errors name the offending key") {
    const Run unknown = run("run -c " + small_cfg + " --set evolution.Mx=3");
    CHECK(unknown.code == 2);
    CHECK(unknown.output.find("evolution.Mx") != std::string::npos);
    const Run bad = run("run -c " + small_cfg + " --set evolution.M=abc");
    CHECK(bad.code == 2);
    CHECK(bad.output.find("evolution.M") != std::string::npos);
    const Run tol = run("run -c " + small_cfg + " --set tol.gram=-1");
    CHECK(tol.code == 2);
    CHECK(tol.output.find("tol.gram") != std::string::npos);
    const fs::path cfg = work / "broken.cfg";
    std::ofstream(cfg) << "seed.example = example2\nthis line has no equals sign\n";
    const Run parse = run("run -c " + cfg.string());
    CHECK(parse.code == 2);
    CHECK(parse.output.find("broken.cfg:2") != std::string::npos);
    CHECK(run("frobnicate").code == 2);
}

TEST_CASE("z_max = 0 runs the z = 0 checks only and exits 0") {
    const fs::path out = work / "z_zero";
    const Run r = run("run -c " + default_cfg + " --set evolution.z_max=0 -o " + out.string());
    INFO(r.output);
    CHECK(r.code == 0);
    const json rep = load(out / "report.json");
    const auto v = values(rep);
    CHECK(v.count("surface.roundtrip_phi"));
    CHECK(v.count("dual.laplacian"));
    CHECK_FALSE(v.count("mesh.first_form"));
    CHECK_FALSE(v.count("evolution.flatness_1"));
}

TEST_CASE("verify reproduces the reference residuals bit-identically") {
    const fs::path out = work / "verify";
    const Run r = run("verify -q " + (reference / "mesh.vtk").string() + " -c " + default_cfg + " -o " + out.string());
    CHECK((r.code == 0 || r.code == 1));
    const auto ref = values(load(reference / "report.json"));
    const auto ver = values(load(out / "report.json"));
    CHECK(ver.size() >= 20);
    for (const auto& [k, v] : ver) {
        INFO(k);
        REQUIRE(ref.count(k));
        CHECK(std::memcmp(&v, &ref.at(k), sizeof v) == 0);
    }
}

TEST_CASE("verify of a truncated mesh reports the byte offset") {
    const std::string full = slurp(reference / "mesh.vtk");
    const fs::path cut = work / "truncated.vtk";
    std::ofstream(cut, std::ios::binary) << full.substr(0, full.size() / 3);
    const Run r = run("verify " + cut.string() + " -c " + default_cfg + " -o " + (work / "trunc").string());
    CHECK(r.code == 2);
    CHECK(r.output.find("at byte") != std::string::npos);
}

TEST_CASE("1e-3 noise on f raises the Gauss residual to order noise / h^2") {
    cfh::HypersurfaceMesh m = cfh::read_mesh((reference / "mesh.vtk").string());
    const double noise = 1e-3;
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1, 1);
    for (auto& c : m.f)
        for (double& x : c.v) x += noise * U(rng);
    const fs::path noisy = work / "noisy.vtk";
    cfh::write_vtk(noisy.string(), m);
    const Run r = run("verify -q " + noisy.string() + " -c " + default_cfg + " -o " + (work / "noisy").string());
    CHECK(r.code == 1);
    const auto ref = values(load(reference / "report.json"));
    const auto v = values(load(work / "noisy" / "report.json"));
    const double h = std::min({m.grid.xy.hx(), m.grid.xy.hy(), m.grid.hz()});
    const double scale = noise / (h * h);
    const double g = std::max({v.at("mesh.gauss_1"), v.at("mesh.gauss_2"), v.at("mesh.gauss_3")});
    const double g0 = std::max({ref.at("mesh.gauss_1"), ref.at("mesh.gauss_2"), ref.at("mesh.gauss_3")});
    MESSAGE("noisy Gauss residual " << g << ", noise/h^2 = " << scale << ", clean " << g0);
    CHECK(g >= 0.5 * scale);
    CHECK(g <= 50 * scale);
    CHECK(g > 1e4 * g0);
}

TEST_CASE("export: VTK header, CSV round trip, unwritable path") {
    const std::string vtk = slurp(reference / "mesh.vtk");
    CHECK(vtk.find("DATASET STRUCTURED_GRID") != std::string::npos);
    CHECK(vtk.find("DIMENSIONS 81 81 41") != std::string::npos);
    const fs::path csv = work / "export.csv", back = work / "export.vtk";
    REQUIRE(run("export " + (reference / "mesh.vtk").string() + " -f csv -o " + csv.string()).code == 0);
    REQUIRE(run("export " + csv.string() + " -f vtk -o " + back.string()).code == 0);
    CHECK(slurp(back) == vtk);
    const auto a = cfh::read_mesh((reference / "mesh.vtk").string()), b = cfh::read_mesh(csv.string());
    for (int c = 0; c < 4; ++c) {
        CHECK(a.f[c].v == b.f[c].v);
        CHECK(a.N[c].v == b.N[c].v);
    }
    CHECK(a.kappa3.v == b.kappa3.v);
    CHECK(run("export " + csv.string() + " -f vtk -o /nonexistent-dir/x.vtk").code == 2);
    CHECK(run("run -q -c " + small_cfg + " -o /proc/forbidden").code == 2);
}

TEST_CASE("kappa_3 of the reference run matches the golden hash") {
    std::ifstream is(golden / "kappa3_example2_default.sha256");
    std::string want;
    is >> want;
    REQUIRE(want.size() == 64);
    CHECK(cfh::sha256_file((reference / "kappa3.csv").string()) == want);
}

TEST_CASE("check-surface and dual on pipeline output") {
    const fs::path z0 = work / "surface_z0";
    REQUIRE(run("run -q -c " + default_cfg + " --set evolution.z_max=0 -o " + z0.string()).code == 0);
    const fs::path out = work / "check_surface";
    const Run s = run("check-surface -q " + (z0 / "surface_z0.csv").string() + " -c " + default_cfg + " -o " +
                      out.string());
    INFO(s.output);
    CHECK(s.code == 0);
    CHECK(fs::exists(out / "pbar_recovered.csv"));
    const Run d = run("dual -q " + (reference / "mesh.vtk").string() + " -c " + default_cfg + " -o " +
                      (work / "dual").string());
    INFO(d.output);
    CHECK(d.code == 0);
    CHECK(fs::exists(work / "dual" / "phi_star.csv"));
    const auto v = values(load(work / "dual" / "report.json"));
    CHECK(v.at("dual.sigma3_identity") <= 1e-12);
    CHECK(run("check-surface " + (work / "missing.csv").string()).code == 2);
}
