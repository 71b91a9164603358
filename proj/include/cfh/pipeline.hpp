#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cfh/evolution.hpp"
#include "cfh/frames.hpp"
#include "cfh/initial_data.hpp"
#include "cfh/surface.hpp"
#include "json.hpp"

namespace cfh {

// Flat "key = value" configuration with dotted section keys and '#' comments. Every key must be
// consumed by the settings parser; leftovers are reported by name.
class Config {
public:
    static Config parse(std::istream& is, const std::string& origin = "<config>");
    static Config load(const std::string& path);

    // Adds or replaces a key (command-line override).
    void set(const std::string& key, const std::string& value);
    bool has(const std::string& key) const;

    std::string str(const std::string& key, const std::string& def);
    double num(const std::string& key, double def);
    int integer(const std::string& key, int def);
    bool boolean(const std::string& key, bool def);
    // "tol.<name>": positive, read at most once, echoed in the report.
    double tol(const std::string& name, double def);

    // Throws InputError naming the first key that nothing consumed.
    void finish() const;
    // Every consumed key with its effective value (defaults included), and the tolerances.
    nlohmann::json echo() const;
    nlohmann::json tolerances() const;

private:
    struct Entry {
        std::string value;
        int line = 0;
        bool used = false;
    };
    const Entry* take(const std::string& key);
    std::string where(const std::string& key) const;

    std::string origin_;
    std::map<std::string, Entry> entries_;
    std::map<std::string, std::string> resolved_;
    std::map<std::string, double> tols_;
};

struct Check {
    std::string name;
    double value = 0;
    std::string relation;  // "<=", ">=" or ">"
    double bound = 0;
    bool pass = false;
};

// Single JSON document. Everything except "timings" enters the SHA-256 stored under "sha256".
class Report {
public:
    explicit Report(std::string command) : command_(std::move(command)) {}

    void le(const std::string& name, double value, double tol);
    void ge(const std::string& name, double value, double bound);
    void gt(const std::string& name, double value, double bound);
    void flag(const std::string& name, bool ok);  // value 1/0 against ">= 1"
    bool passed() const;
    const std::vector<Check>& checks() const { return checks_; }
    const Check* find(const std::string& name) const;

    nlohmann::json& stage(const std::string& name) { return stages_[name]; }
    nlohmann::json& artifacts() { return artifacts_; }
    nlohmann::json& timings() { return timings_; }
    void set_config(nlohmann::json config, nlohmann::json tolerances);

    nlohmann::json hashed() const;  // the document without timings and hash
    nlohmann::json to_json() const;
    void write(const std::string& path) const;
    // One "PASS|FAIL name value relation bound" line per check.
    void summary(std::ostream& os) const;

private:
    void add(Check c);

    std::string command_;
    nlohmann::json config_ = nlohmann::json::object(), tolerances_ = nlohmann::json::object();
    nlohmann::json stages_ = nlohmann::json::object(), artifacts_ = nlohmann::json::object();
    nlohmann::json timings_ = nlohmann::json::object();
    std::vector<Check> checks_;
};

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

struct Tolerances {
    double gh = 1e-6, g_min = 1e-10, constraints = 1e-6, genericity = 1e-3;
    double curvature = 1e-4, flatness = 1e-4, propagation = 1e-4;
    double gram = 1e-8, gauss_map = 1e-4;
    double first_form = 1e-4, shape = 1e-3, guichard = 1e-4, gauss = 1e-4, codazzi = 1e-4;
    double connection = 1e-5, closed = 1e-3, roundtrip = 1e-4;
    double sigma3 = 1e-12, angle = 1e-10, dual = 1e-4, laplacian = 1e-3, gauss_identity = 1e-3;
};

// Everything a run needs, parsed and validated before any computation.
struct Settings {
    std::string example = "example2";  // example1 | example2
    std::string mode = "family";       // example2: family | explicit
    double c0 = 1, c1 = 0, c2 = 0, c3 = 0;
    double X1 = 3.5, X1p = 2.0, Y = -2.0, Yp = 0.0;  // example2 explicit, example1 uses X1, X1p
    std::string rho = "affine:0,1", sigma = "exp:0,1,1";  // example1
    int root = 1;                                         // example1 completion root
    double t = 1.0;
    double ode_rtol = 1e-10;
    Grid2 window{81, 81, 1.6, 2.4, 0.6, 1.4};
    EvolutionOptions evolution;
    FrameOptions frames;
    SurfaceOptions surface;
    int sign = 1, branch = 0;
    int band = 3;
    std::optional<Vec4> inversion_q;
    Tolerances tol;
    std::string out_dir = ".";
    std::string mesh_format = "vtk";

    // Consumes the keys of `c` (and calls c.finish()).
    static Settings from(Config& c);
};

// Stage data kept between steps.
struct PipelineState {
    std::shared_ptr<const Seed> seed;
    InitialDataSet data;
    std::optional<EvolvedGuichardData> evolved;
    std::optional<FrameField> v, u;
    std::optional<HypersurfaceMesh> mesh;
};

enum class Stage { Seed, Evolve, Reconstruct };

// Runs the stages up to `last`, adding checks and stage tables to `report` and writing artifacts
// to settings.out_dir. Typed errors propagate (InputError, NumericalError).
PipelineState run_pipeline(const Settings& s, Stage last, Report& report);

// Residual suite of a stored mesh: fundamental forms, Gauss-Codazzi, the Gauss-map surface,
// phi/Pbar recovery, duality and the Laplacian identity.
void verify_mesh(const HypersurfaceMesh& m, const Settings& s, Report& report);

// Surface checker on an S^3-valued sample: coefficients, phi/Pbar and (optional) comparison fields.
struct SurfaceVerdict {
    SurfaceData surface;
    PhiPbar solution;
};
SurfaceVerdict check_surface(const std::array<Field2, 4>& points, const Settings& s, Report& report,
                             const Field2* phi_ref = nullptr, const Field2* P_ref = nullptr);

// Schouten duality on the z = 0 surface: identities, consistency with the surface coefficients, the
// Laplacian identity and (for an accepted phi/Pbar) the Gauss identity.
void check_dual(const SurfaceVerdict& v, const DualData& d, const Field2& k3, const Field2& phi0, const Settings& s,
                Report& report);

// Surface samples: header "x,y,p1,p2,p3,p4", x fastest.
std::array<Field2, 4> read_surface_csv(const std::string& path);
void write_surface_csv(const std::string& path, const std::array<Field2, 4>& p);

// Exit code for a finished report: 0 pass, 1 check failure.
int exit_code(const Report& r);

}  // namespace cfh
