#include "cfh/pipeline.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numbers>
#include <sstream>

#include "cfh/calculus.hpp"
#include "cfh/guichard.hpp"

namespace cfh {

using nlohmann::json;

// ---------------------------------------------------------------- Config

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

Config Config::parse(std::istream& is, const std::string& origin) {
    Config c;
    c.origin_ = origin;
    std::string line;
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(origin + ":" + std::to_string(n) + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
        if (key.empty()) throw InputError(origin + ":" + std::to_string(n) + ": empty key");
        if (c.entries_.count(key)) throw InputError(origin + ":" + std::to_string(n) + ": duplicate key '" + key + "'");
        c.entries_[key] = {value, n, false};
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read config " + path);
    return parse(is, path);
}

void Config::set(const std::string& key, const std::string& value) { entries_[trim(key)] = {trim(value), 0, false}; }

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string Config::where(const std::string& key) const {
    const auto it = entries_.find(key);
    if (it == entries_.end() || it->second.line == 0) return "config key '" + key + "'";
    return origin_ + ":" + std::to_string(it->second.line) + ": key '" + key + "'";
}

const Config::Entry* Config::take(const std::string& key) {
    if (resolved_.count(key)) throw std::logic_error("config key read twice: " + key);
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

std::string Config::str(const std::string& key, const std::string& def) {
    const Entry* e = take(key);
    const std::string v = e ? e->value : def;
    resolved_[key] = v;
    return v;
}

double Config::num(const std::string& key, double def) {
    const Entry* e = take(key);
    double v = def;
    if (e) {
        std::size_t pos = 0;
        try {
            v = std::stod(e->value, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != e->value.size() || !std::isfinite(v))
            throw InputError(where(key) + ": expected a number, got '" + e->value + "'");
    }
    std::ostringstream os;
    os << std::setprecision(17) << v;
    resolved_[key] = os.str();
    return v;
}

int Config::integer(const std::string& key, int def) {
    const Entry* e = take(key);
    int v = def;
    if (e) {
        std::size_t pos = 0;
        try {
            v = std::stoi(e->value, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != e->value.size())
            throw InputError(where(key) + ": expected an integer, got '" + e->value + "'");
    }
    resolved_[key] = std::to_string(v);
    return v;
}

bool Config::boolean(const std::string& key, bool def) {
    const Entry* e = take(key);
    bool v = def;
    if (e) {
        if (e->value == "true" || e->value == "1" || e->value == "yes") v = true;
        else if (e->value == "false" || e->value == "0" || e->value == "no") v = false;
        else throw InputError(where(key) + ": expected true or false, got '" + e->value + "'");
    }
    resolved_[key] = v ? "true" : "false";
    return v;
}

double Config::tol(const std::string& name, double def) {
    const std::string key = "tol." + name;
    const double v = num(key, def);
    if (!(v > 0)) throw InputError(where(key) + ": tolerances must be > 0");
    tols_[name] = v;
    return v;
}

void Config::finish() const {
    for (const auto& [k, e] : entries_)
        if (!e.used) throw InputError(where(k) + ": unknown key");
}

json Config::echo() const {
    json j = json::object();
    for (const auto& [k, v] : resolved_) j[k] = v;
    return j;
}

json Config::tolerances() const {
    json j = json::object();
    for (const auto& [k, v] : tols_) j[k] = v;
    return j;
}

// ---------------------------------------------------------------- Report

void Report::add(Check c) {
    if (find(c.name)) throw std::logic_error("check recorded twice: " + c.name);
    checks_.push_back(std::move(c));
}

void Report::le(const std::string& name, double value, double tol) { add({name, value, "<=", tol, value <= tol}); }
void Report::ge(const std::string& name, double value, double bound) {
    add({name, value, ">=", bound, value >= bound});
}
void Report::gt(const std::string& name, double value, double bound) { add({name, value, ">", bound, value > bound}); }
void Report::flag(const std::string& name, bool ok) { add({name, ok ? 1.0 : 0.0, ">=", 1.0, ok}); }

bool Report::passed() const {
    for (const auto& c : checks_)
        if (!c.pass) return false;
    return true;
}

const Check* Report::find(const std::string& name) const {
    for (const auto& c : checks_)
        if (c.name == name) return &c;
    return nullptr;
}

void Report::set_config(json config, json tolerances) {
    config_ = std::move(config);
    tolerances_ = std::move(tolerances);
}

namespace {

// NaN and infinities are not JSON numbers.
json number(double v) {
    if (std::isfinite(v)) return v;
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
}

}  // namespace

json Report::hashed() const {
    json checks = json::array();
    for (const auto& c : checks_)
        checks.push_back({{"name", c.name}, {"value", number(c.value)}, {"relation", c.relation},
                          {"bound", number(c.bound)}, {"pass", c.pass}});
    return {{"command", command_}, {"config", config_},     {"tolerances", tolerances_}, {"stages", stages_},
            {"checks", checks},    {"artifacts", artifacts_}, {"status", passed() ? "pass" : "fail"}};
}

json Report::to_json() const {
    json j = hashed();
    j["sha256"] = sha256_hex(hashed().dump());
    j["timings"] = timings_;
    return j;
}

void Report::write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    os << to_json().dump(2) << '\n';
    if (!os) throw InputError("write failed: " + path);
}

void Report::summary(std::ostream& os) const {
    for (const auto& c : checks_) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s %s %.3e %s %.3e\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.value,
                      c.relation.c_str(), c.bound);
        os << buf;
    }
}

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("SHA-256 failed");
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 15];
    }
    return s;
}

std::string sha256_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot read " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return sha256_hex(os.str());
}

int exit_code(const Report& r) { return r.passed() ? 0 : 1; }

// ---------------------------------------------------------------- Settings

Settings Settings::from(Config& c) {
    Settings s;
    s.example = c.str("seed.example", s.example);
    if (s.example != "example1" && s.example != "example2")
        throw InputError("config key 'seed.example': expected example1 or example2, got '" + s.example + "'");
    s.t = c.num("seed.t", s.t);
    if (s.t == 0) throw InputError("config key 'seed.t': t = 0 gives a degenerate (flat in z) seed");
    s.ode_rtol = c.num("seed.ode_rtol", s.ode_rtol);
    if (!(s.ode_rtol > 0)) throw InputError("config key 'seed.ode_rtol': must be > 0");
    if (s.example == "example2") {
        s.mode = c.str("seed.mode", s.mode);
        if (s.mode != "family" && s.mode != "explicit")
            throw InputError("config key 'seed.mode': expected family or explicit, got '" + s.mode + "'");
        s.c0 = c.num("seed.c0", 1.0);
        s.c2 = c.num("seed.c2", s.mode == "family" ? 0.0 : -4.5);
        if (s.mode == "family") {
            s.c3 = c.num("seed.c3", 0.0);
        } else {
            s.c1 = c.num("seed.c1", 0.0);
            s.X1 = c.num("seed.X1", 3.5);
            s.X1p = c.num("seed.X1p", 2.0);
            s.Y = c.num("seed.Y", -2.0);
            s.Yp = c.num("seed.Yp", 0.0);
        }
    } else {
        s.rho = c.str("seed.rho", s.rho);
        s.sigma = c.str("seed.sigma", s.sigma);
        s.c0 = c.num("seed.c0", 0.5);
        s.c1 = c.num("seed.c1", 0.3);
        s.c2 = c.num("seed.c2", 0.2);
        s.X1 = c.num("seed.X1", 1.0);
        s.X1p = c.num("seed.X1p", 0.0);
        s.root = c.integer("seed.root", 1);
        if (std::abs(s.root) != 1) throw InputError("config key 'seed.root': must be 1 or -1");
    }

    const int n = c.integer("grid.n", 81);
    s.window.nx = c.integer("grid.nx", n);
    s.window.ny = c.integer("grid.ny", n);
    s.window.x0 = c.num("grid.x0", s.example == "example2" ? 1.6 : -0.5);
    s.window.x1 = c.num("grid.x1", s.example == "example2" ? 2.4 : 0.5);
    s.window.y0 = c.num("grid.y0", s.example == "example2" ? 0.6 : -0.5);
    s.window.y1 = c.num("grid.y1", s.example == "example2" ? 1.4 : 0.5);
    try {
        s.window.validate();
    } catch (const InputError& e) {
        throw InputError(std::string("config section 'grid': ") + e.what());
    }

    auto& e = s.evolution;
    e.method = parse_zmethod(c.str("evolution.method", "taylor"));
    e.M = c.integer("evolution.M", 12);
    e.z_max = c.num("evolution.z_max", 0.1);
    e.nz = c.integer("evolution.nz", 41);
    if (e.z_max == 0) e.nz = 1;  // a zero range is the z = 0 slice alone
    e.order = c.integer("evolution.stencil_order", 4);
    e.filter = c.boolean("evolution.filter", true);
    e.pad = c.integer("evolution.pad", e.pad);
    e.step_ratio = c.num("evolution.step_ratio", e.step_ratio);
    e.kappa_guard = c.num("evolution.kappa_guard", e.kappa_guard);
    e.generic_guard = c.num("evolution.generic_guard", e.generic_guard);
    try {
        e.validate();
    } catch (const InputError& err) {
        throw InputError(std::string("config section 'evolution': ") + err.what());
    }

    auto& f = s.frames;
    f.substeps = c.integer("frames.substeps", f.substeps);
    f.dz = c.num("frames.dz", f.dz);
    f.decimate = c.integer("frames.decimate", f.decimate);
    f.compat_tol = c.num("frames.compat_tol", f.compat_tol);
    f.drift_tol = c.num("frames.drift_tol", f.drift_tol);
    f.mgs_every = c.integer("frames.mgs_every", f.mgs_every);
    f.validate();

    s.surface.sign_a1 = c.integer("surface.sign_a1", 1);
    s.surface.sign_a2 = c.integer("surface.sign_a2", 1);
    s.surface.umbilic_tol = c.num("surface.umbilic_tol", s.surface.umbilic_tol);
    s.sign = c.integer("surface.sign", 1);
    s.branch = c.integer("surface.branch", 0);
    s.band = c.integer("checks.band", 3);
    s.surface.band = s.band;
    s.surface.validate();
    PhiPbarOptions po;
    po.sign = s.sign;
    po.branch = s.branch;
    po.validate();
    if (s.band < 0 || 2 * s.band >= std::min(s.window.nx, s.window.ny))
        throw InputError("config key 'checks.band': band leaves no interior nodes");

    const std::string q = c.str("inversion.q", "");
    if (!q.empty()) {
        Vec4 v{};
        std::istringstream is(q);
        std::string part;
        int k = 0;
        while (std::getline(is, part, ',')) {
            if (k == 4) throw InputError("config key 'inversion.q': expected four comma-separated numbers");
            try {
                v[k++] = std::stod(part);
            } catch (const std::exception&) {
                throw InputError("config key 'inversion.q': bad number '" + part + "'");
            }
        }
        if (k != 4) throw InputError("config key 'inversion.q': expected four comma-separated numbers");
        s.inversion_q = v;
    }

    auto& t = s.tol;
    t.gh = c.tol("gh", t.gh);
    t.g_min = c.tol("g_min", t.g_min);
    t.constraints = c.tol("constraints", t.constraints);
    t.genericity = c.tol("genericity", t.genericity);
    t.curvature = c.tol("curvature", t.curvature);
    t.flatness = c.tol("flatness", t.flatness);
    t.propagation = c.tol("propagation", t.propagation);
    t.gram = c.tol("gram", t.gram);
    t.gauss_map = c.tol("gauss_map", t.gauss_map);
    t.first_form = c.tol("first_form", t.first_form);
    t.shape = c.tol("shape", t.shape);
    t.guichard = c.tol("guichard", t.guichard);
    t.gauss = c.tol("gauss", t.gauss);
    t.codazzi = c.tol("codazzi", t.codazzi);
    t.connection = c.tol("connection", t.connection);
    t.closed = c.tol("closed", t.closed);
    t.roundtrip = c.tol("roundtrip", t.roundtrip);
    t.sigma3 = c.tol("sigma3", t.sigma3);
    t.angle = c.tol("angle", t.angle);
    t.dual = c.tol("dual", t.dual);
    t.laplacian = c.tol("laplacian", t.laplacian);
    t.gauss_identity = c.tol("gauss_identity", t.gauss_identity);

    s.out_dir = c.str("output.dir", s.out_dir);
    s.mesh_format = c.str("output.mesh_format", s.mesh_format);
    if (s.mesh_format != "vtk" && s.mesh_format != "csv")
        throw InputError("config key 'output.mesh_format': expected vtk or csv, got '" + s.mesh_format + "'");
    c.finish();
    return s;
}

// ---------------------------------------------------------------- stages

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string out_path(const Settings& s, const std::string& name) {
    std::error_code ec;
    std::filesystem::create_directories(s.out_dir, ec);
    if (ec) throw InputError("cannot create output directory " + s.out_dir + ": " + ec.message());
    return (std::filesystem::path(s.out_dir) / name).string();
}

double wrapped_max(const Field2& a, const Field2& b, int band) {
    Field2 d = a - b;
    for (double& x : d.v) x = std::remainder(x, 2 * std::numbers::pi);
    return max_abs(d, band);
}

int zero_slice_of(const Grid3& g) {
    for (int k = 0; k < g.nz; ++k)
        if (std::fabs(g.z(k)) <= 1e-12 * std::max(1.0, std::fabs(g.z1 - g.z0))) return k;
    throw InputError("the z-grid has no z = 0 slice");
}

std::shared_ptr<const Seed> make_seed(const Settings& s, Report& report) {
    json& st = report.stage("seed");
    st["example"] = s.example;
    std::shared_ptr<const Seed> seed;
    GHStats gh;
    if (s.example == "example2") {
        Example2Params p;
        if (s.mode == "family") {
            const Ex2FamilyResult fam = ex2_family_sample(s.c0, s.c2, s.c3, s.window);
            st["family"] = {{"c0", s.c0}, {"c2", s.c2}, {"c3", s.c3}, {"accepted", fam.accepted},
                            {"reason", fam.reason}, {"margin", number(fam.margin)}};
            if (!fam.accepted) throw InputError("seed: family sample rejected: " + fam.reason);
            p = fam.params;
        } else {
            p.c0 = s.c0;
            p.c1 = s.c1;
            p.c2 = s.c2;
            p.X1 = s.X1;
            p.X1p = s.X1p;
            p.Y = s.Y;
            p.Yp = s.Yp;
        }
        p.ode.rtol = s.ode_rtol;
        const auto odes = ex2_solve_odes(p);
        const Ex2OdeCheck oc = ex2_ode_check(odes);
        st["ode"] = {{"x_equation", oc.x_equation}, {"y_equation", oc.y_equation}, {"x2_relation", oc.x2_relation}};
        gh = ex2_GH(odes, s.window);
        seed = std::make_shared<Example2Seed>(odes);
    } else {
        Example1Params p;
        p.rho = ScalarFunction::parse(s.rho);
        p.sigma = ScalarFunction::parse(s.sigma);
        p.c0 = s.c0;
        p.c1 = s.c1;
        p.c2 = s.c2;
        p.X1 = s.X1;
        p.X1p = s.X1p;
        p.x_lo = std::min(p.x_lo, s.window.x0);
        p.x_hi = std::max(p.x_hi, s.window.x1);
        p.y_lo = std::min(p.y_lo, s.window.y0);
        p.y_hi = std::max(p.y_hi, s.window.y1);
        p.ode.rtol = s.ode_rtol;
        const Ex1Completion comp = ex1_family_sample(p, s.root);
        st["completion"] = {{"accepted", comp.accepted}, {"reason", comp.reason}, {"G0", comp.G0}};
        if (!comp.accepted) throw InputError("seed: Example 1 completion rejected: " + comp.reason);
        p.Y1 = comp.Y1;
        p.Y1p = comp.Y1p;
        auto ex1 = std::make_shared<Example1Seed>(p);
        const Ex1OdeCheck oc = ex1_ode_check(ex1->odes());
        st["ode"] = {{"x_cross", oc.x_cross}, {"y_relation", oc.y_relation}};
        gh = ex1_GH(ex1->odes(), s.window);
        report.ge("seed.G_min", gh.G_min, -s.tol.g_min);
        seed = ex1;
    }
    st["G"] = {{"mean", gh.G_mean}, {"sd", gh.G_sd}, {"rel", gh.G_rel()}, {"min", gh.G_min}};
    st["H"] = {{"mean", gh.H_mean}, {"sd", gh.H_sd}, {"rel", gh.H_rel()}};
    report.le("seed.G_constancy", gh.G_rel(), s.tol.gh);
    report.le("seed.H_constancy", gh.H_rel(), s.tol.gh);
    return seed;
}

void initial_checks(const InitialDataSet& d, const Settings& s, Report& report) {
    const ConstraintReport cr = constraint_residuals(d, 0);
    json& st = report.stage("initial");
    st["t"] = d.t;
    st["min_sincos"] = d.min_sincos();
    st["min_u"] = d.min_u();
    st["min_k1k2"] = cr.min_k1k2;
    static const char* names[4] = {"xy_equation", "uz_x_equation", "uz_y_equation", "kappa3_zeta"};
    for (int i = 0; i < 4; ++i) {
        st["constraints"][names[i]] = {{"linf", cr.residual[i].linf}, {"l2", cr.residual[i].l2}};
        report.le(std::string("initial.constraint.") + names[i], cr.residual[i].linf, s.tol.constraints);
    }
    report.ge("initial.min_k1k2", cr.min_k1k2, s.tol.genericity);
}

void evolution_checks(const EvolvedGuichardData& e, const InitialDataSet& d, const Settings& s, Report& report) {
    json& st = report.stage("evolution");
    st["method"] = e.method;
    st["M"] = s.evolution.M;
    st["z_range"] = {e.z_lo, e.z_hi};
    st["shrunk"] = e.shrunk;
    json mon = json::array();
    for (const auto& m : e.monitors)
        mon.push_back({{"z", m.z}, {"ok", m.ok}, {"min_k1k2", number(m.min_k1k2)},
                       {"min_generic", number(m.min_generic)}, {"min_sincos", number(m.min_sincos)}});
    st["monitors"] = mon;
    report.flag("evolution.full_z_range", !e.shrunk);
    const int order = s.evolution.order;
    double curv = 0;
    if (e.grid.nz == 1) {
        const Hat2Metric h = d.exact ? hat_metric(d.phi, d.phi_z, d.exact->phi_zx, d.exact->phi_zy)
                                     : hat_metric(d.phi, d.phi_z, order);
        curv = max_abs(gauss_curvature(h.a, h.b, order) + 1.0, s.band);
    } else {
        for (int k = 0; k < e.grid.nz; ++k) {
            const Hat2Metric h = hat_metric(e.phi, k, order);
            curv = std::max(curv, max_abs(gauss_curvature(h.a, h.b, order) + 1.0, s.band));
        }
    }
    st["curvature_minus_one"] = curv;
    report.le("evolution.hat_curvature", curv, s.tol.curvature);
    if (e.grid.nz < 5) return;  // z-stencils need slices
    const auto fl = flatness_residuals(e.phi, order);
    for (int i = 0; i < 4; ++i) {
        const double v = max_linf(fl[i], s.band);
        st["flatness"].push_back(v);
        report.le("evolution.flatness_" + std::to_string(i + 1), v, s.tol.flatness);
    }
    const ConstraintSlices cs = constraint_report(e.phi, e.u, e.kappa3, s.band, order);
    for (int i = 0; i < 4; ++i) {
        st["propagation"][ConstraintSlices::names[i]] = cs.max_linf[i];
        report.le(std::string("evolution.propagation_") + ConstraintSlices::names[i], cs.max_linf[i],
                  s.tol.propagation);
    }
}

}  // namespace

void check_dual(const SurfaceVerdict& v, const DualData& d, const Field2& k3, const Field2& phi0, const Settings& s,
                Report& report) {
    json& st = report.stage("dual");
    const DualIdentities id = dual_identities(d, k3);
    st["identities"] = {{"sigma3", id.sigma3}, {"angle", id.angle}, {"unit", id.unit}};
    report.le("dual.sigma3_identity", id.sigma3, s.tol.sigma3);
    report.le("dual.angle_identity", id.angle, s.tol.angle);
    const DualConsistency c = dual_consistency(v.surface, d, s.sign, s.surface.order, s.band);
    st["consistency"] = {{"unit", c.unit},       {"one_form", c.one_form},
                         {"b_dual", c.b_dual},   {"b_primal", c.b_primal},
                         {"b_discrepancy", c.b_discrepancy}};
    report.le("dual.unit_relation", c.unit, s.tol.dual);
    report.le("dual.one_form", c.one_form, s.tol.dual);
    report.le("dual.b_dual", c.b_dual, s.tol.dual);
    report.le("dual.b_primal", c.b_primal, s.tol.dual);
    report.le("dual.b_discrepancy", c.b_discrepancy, s.tol.dual);
    const FieldCheck lap = laplacian_check(v.surface, phi0, d.phi_star, s.surface.order, s.band);
    st["laplacian"] = lap.linf;
    report.le("dual.laplacian", lap.linf, s.tol.laplacian);
    if (v.solution.accepted) {
        const FieldCheck g = gauss_identity_check(v.surface, v.solution.Pbar, v.solution.phi, s.surface.order, s.band);
        st["gauss_identity"] = g.linf;
        report.le("dual.gauss_identity", g.linf, s.tol.gauss_identity);
    }
}

namespace {

void mesh_table(const MeshChecks& c, json& st) {
    st = {{"first_form", c.first_form},
          {"shape_eigen", c.shape_eigen},
          {"middle_margin", c.middle_margin},
          {"guichard_ratio", c.guichard_ratio},
          {"gauss", c.gauss},
          {"codazzi", c.codazzi}};
}

void write_mesh(const HypersurfaceMesh& m, const Settings& s, Report& report) {
    const std::string name = "mesh." + s.mesh_format;
    if (s.mesh_format == "vtk") write_vtk(out_path(s, name), m);
    else write_mesh_csv(out_path(s, name), m);
    report.artifacts()["mesh"] = name;
}

}  // namespace

SurfaceVerdict check_surface(const std::array<Field2, 4>& points, const Settings& s, Report& report,
                             const Field2* phi_ref, const Field2* P_ref) {
    SurfaceVerdict v;
    v.surface = frame_coefficients(points, s.surface);
    json& st = report.stage("surface");
    st["connection"] = v.surface.connection;
    st["principal"] = v.surface.principal;
    st["min_umbilic"] = v.surface.min_umbilic;
    report.le("surface.connection_consistency", v.surface.connection, s.tol.connection);
    PhiPbarOptions po;
    po.sign = s.sign;
    po.branch = s.branch;
    po.closed_tol = s.tol.closed;
    po.order = s.surface.order;
    po.band = s.band;
    v.solution = solve_phi_pbar(v.surface.a1, v.surface.a2, po);
    const PhiPbar& r = v.solution;
    st["phi_pbar"] = {{"accepted", r.accepted},
                      {"reason", r.reason},
                      {"sign", s.sign},
                      {"branch", r.branch},
                      {"closedness", number(r.closedness)},
                      {"branch_closedness", {number(r.branch_closedness[0]), number(r.branch_closedness[1])}},
                      {"max_jump", number(r.max_jump)},
                      {"jump_bound", number(r.jump_bound)}};
    report.flag("surface.phi_pbar_accepted", r.accepted);
    if (r.phi.size() == 0) return v;
    if (phi_ref) {
        const double e = wrapped_max(r.phi, *phi_ref, 0);
        st["roundtrip_phi"] = e;
        report.le("surface.roundtrip_phi", e, s.tol.roundtrip);
    }
    if (P_ref) {
        const double e = std::max(max_abs(r.Pbar_x - partial(*P_ref, Axis::X, 1, s.surface.order), s.band),
                                  max_abs(r.Pbar_y - partial(*P_ref, Axis::Y, 1, s.surface.order), s.band));
        st["roundtrip_dPbar"] = e;
        report.le("surface.roundtrip_dPbar", e, s.tol.roundtrip);
    }
    return v;
}

void verify_mesh(const HypersurfaceMesh& m, const Settings& s, Report& report) {
    const auto t0 = Clock::now();
    json& st = report.stage("mesh");
    st["grid"] = {{"nx", m.grid.xy.nx}, {"ny", m.grid.xy.ny}, {"nz", m.grid.nz}};
    st["closure"] = m.closure;
    const int order = s.surface.order;
    const bool volume = m.grid.nz >= order + 1;
    if (volume) {
        const MeshChecks c = mesh_checks(m, s.band, order);
        mesh_table(c, st["checks"]);
        report.le("mesh.first_form", c.first_form, s.tol.first_form);
        report.le("mesh.shape_eigen", c.shape_eigen, s.tol.shape);
        report.gt("mesh.kappa3_middle_margin", c.middle_margin, 0.0);
        report.le("mesh.guichard_ratio", c.guichard_ratio, s.tol.guichard);
        for (int i = 0; i < 3; ++i) report.le("mesh.gauss_" + std::to_string(i + 1), c.gauss[i], s.tol.gauss);
        for (int i = 0; i < 3; ++i) report.le("mesh.codazzi_" + std::to_string(i + 1), c.codazzi[i], s.tol.codazzi);
        if (s.inversion_q) {
            const HypersurfaceMesh inv = inversion(m, *s.inversion_q);
            const MeshChecks ci = mesh_checks(inv, s.band, order);
            mesh_table(ci, report.stage("inversion"));
            report.stage("inversion")["q"] = *s.inversion_q;
            report.le("inversion.guichard_ratio", ci.guichard_ratio, s.tol.guichard);
        }
    }
    report.timings()["mesh_checks"] = seconds_since(t0);
    const auto t1 = Clock::now();
    const int k0 = zero_slice_of(m.grid);
    const std::array<Field2, 4> pts{slice(m.N[0], k0), slice(m.N[1], k0), slice(m.N[2], k0), slice(m.N[3], k0)};
    const Field2 phi0 = slice(m.phi, k0), P0 = slice(m.P, k0);
    const SurfaceVerdict v = check_surface(pts, s, report, &phi0, &P0);
    if (volume) check_dual(v, dual_from_mesh(m, order), slice(m.kappa3, k0), phi0, s, report);
    report.timings()["surface"] = seconds_since(t1);
}

PipelineState run_pipeline(const Settings& s, Stage last, Report& report) {
    PipelineState ps;
    auto t0 = Clock::now();
    ps.seed = make_seed(s, report);
    ps.data = assemble_initial_data(ps.seed, s.window);
    if (s.t != 1.0) ps.data = t_scale(ps.data, s.t);
    initial_checks(ps.data, s, report);
    report.timings()["seed"] = seconds_since(t0);
    if (last == Stage::Seed) {
        write_csv(out_path(s, "phi_z0.csv"), ps.data.phi);
        write_csv(out_path(s, "kappa3_z0.csv"), ps.data.kappa3);
        report.artifacts()["phi"] = "phi_z0.csv";
        report.artifacts()["kappa3"] = "kappa3_z0.csv";
        return ps;
    }

    t0 = Clock::now();
    ps.evolved = evolve(ps.data, s.evolution);
    evolution_checks(*ps.evolved, ps.data, s, report);
    report.timings()["evolution"] = seconds_since(t0);
    write_csv(out_path(s, "kappa3.csv"), ps.evolved->kappa3);
    write_csv(out_path(s, "phi.csv"), ps.evolved->phi);
    report.artifacts()["kappa3"] = "kappa3.csv";
    report.artifacts()["phi"] = "phi.csv";
    if (last == Stage::Evolve) return ps;

    t0 = Clock::now();
    ps.v = build_initial_frames(ps.data, s.frames);
    json& fr = report.stage("frames");
    fr["initial_gram"] = ps.v->gram;
    fr["path_commutation"] = ps.v->compatibility;
    report.le("frames.initial_gram", ps.v->gram, s.tol.gram);
    if (ps.evolved->grid.nz == 1) {
        // z = 0 only: the Gauss map is the initial phi-surface, the dual uses the exact z = 0 data
        report.timings()["frames"] = seconds_since(t0);
        t0 = Clock::now();
        const Grid2& g = s.window;
        std::array<Field2, 4> pts;
        for (int c = 0; c < 4; ++c) {
            pts[c] = Field2(g);
            for (std::size_t n = 0; n < g.size(); ++n) pts[c][n] = ps.v->position[n][c];
        }
        const SurfaceVerdict v = check_surface(pts, s, report, &ps.data.phi, &ps.data.P);
        const Field2 eP = map(ps.data.P, [](double p) { return std::exp(p); });
        const DualData d = schouten_dual(ps.data.kappa1, ps.data.kappa2, ps.data.kappa3, eP, ps.data.phi,
                                         ps.data.P_z, ps.data.phi_z);
        check_dual(v, d, ps.data.kappa3, ps.data.phi, s, report);
        write_surface_csv(out_path(s, "surface_z0.csv"), pts);
        report.artifacts()["surface"] = "surface_z0.csv";
        report.timings()["surface"] = seconds_since(t0);
        return ps;
    }
    ps.u = evolve_frames(*ps.v, *ps.evolved, s.frames);
    const auto gm = gauss_map_residual(*ps.u, ps.evolved->phi, ps.evolved->u,
                                       KappaFields{ps.evolved->kappa1, ps.evolved->kappa2, ps.evolved->kappa3},
                                       s.band, s.evolution.order);
    const double gmax = std::max({gm[0], gm[1], gm[2]});
    fr["gram"] = ps.u->gram;
    fr["gauss_map"] = gm;
    report.le("frames.gram", ps.u->gram, s.tol.gram);
    report.le("frames.gauss_map", gmax, s.tol.gauss_map);
    report.timings()["frames"] = seconds_since(t0);

    t0 = Clock::now();
    ps.mesh = reconstruct_f(*ps.u, *ps.evolved, s.frames);
    report.timings()["reconstruct"] = seconds_since(t0);
    write_mesh(*ps.mesh, s, report);
    verify_mesh(*ps.mesh, s, report);
    return ps;
}

// ---------------------------------------------------------------- surface CSV

std::array<Field2, 4> read_surface_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot read " + path);
    std::string line;
    if (!std::getline(is, line) || trim(line) != "x,y,p1,p2,p3,p4")
        throw InputError(path + ": expected header x,y,p1,p2,p3,p4");
    std::vector<std::array<double, 6>> rows;
    long lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::array<double, 6> r{};
        std::istringstream ls(line);
        std::string cell;
        int k = 0;
        while (std::getline(ls, cell, ',')) {
            if (k == 6) throw InputError(path + ":" + std::to_string(lineno) + ": too many columns");
            char* end = nullptr;
            r[k] = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw InputError(path + ":" + std::to_string(lineno) + ": bad number");
            ++k;
        }
        if (k != 6) throw InputError(path + ":" + std::to_string(lineno) + ": expected 6 columns");
        rows.push_back(r);
    }
    if (rows.size() < 4) throw InputError(path + ": too few rows");
    int nx = 1;
    while (nx < static_cast<int>(rows.size()) && rows[nx][1] == rows[0][1]) ++nx;
    if (rows.size() % nx) throw InputError(path + ": rows do not form a grid");
    const int ny = static_cast<int>(rows.size() / nx);
    const Grid2 g{nx, ny, rows[0][0], rows[nx - 1][0], rows[0][1], rows.back()[1]};
    g.validate();
    std::array<Field2, 4> p;
    for (int c = 0; c < 4; ++c) {
        p[c] = Field2(g);
        for (std::size_t n = 0; n < rows.size(); ++n) p[c][n] = rows[n][2 + c];
    }
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const auto& r = rows[g.idx(i, j)];
            if (std::fabs(r[0] - g.x(i)) > 1e-9 * (1 + std::fabs(g.x(i))) ||
                std::fabs(r[1] - g.y(j)) > 1e-9 * (1 + std::fabs(g.y(j))))
                throw InputError(path + ": node coordinates are not a uniform grid");
        }
    return p;
}

void write_surface_csv(const std::string& path, const std::array<Field2, 4>& p) {
    std::ofstream os(path);
    if (!os) throw InputError("cannot write " + path);
    const Grid2& g = p[0].grid;
    os << "x,y,p1,p2,p3,p4\n";
    char buf[64];
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g", g.x(i), g.y(j));
            os << buf;
            for (int c = 0; c < 4; ++c) {
                std::snprintf(buf, sizeof buf, ",%.17g", p[c][g.idx(i, j)]);
                os << buf;
            }
            os << '\n';
        }
    if (!os) throw InputError("write failed: " + path);
}

}  // namespace cfh
