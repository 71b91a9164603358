#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cfh/guichard.hpp"
#include "cfh/pipeline.hpp"

namespace py = pybind11;
using namespace cfh;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Fields map to C-ordered arrays of shape (ny, nx) and (nz, ny, nx).
Array to_numpy(const Field2& f) {
    Array a({f.grid.ny, f.grid.nx});
    std::copy(f.v.begin(), f.v.end(), a.mutable_data());
    return a;
}

Array to_numpy(const Field3& f) {
    Array a({f.grid.nz, f.grid.xy.ny, f.grid.xy.nx});
    std::copy(f.v.begin(), f.v.end(), a.mutable_data());
    return a;
}

Field2 from_numpy(const Array& a, const Grid2& g, const char* what) {
    if (a.ndim() != 2 || a.shape(0) != g.ny || a.shape(1) != g.nx) {
        std::ostringstream os;
        os << what << ": expected shape (" << g.ny << ", " << g.nx << ")";
        throw InputError(os.str());
    }
    Field2 f(g);
    std::copy(a.data(), a.data() + f.size(), f.v.begin());
    return f;
}

std::array<Field2, 4> points_from_numpy(const Array& a, const Grid2& g) {
    if (a.ndim() != 3 || a.shape(0) != 4 || a.shape(1) != g.ny || a.shape(2) != g.nx)
        throw InputError("points: expected shape (4, ny, nx)");
    std::array<Field2, 4> p;
    const std::size_t n = g.size();
    for (int c = 0; c < 4; ++c) {
        p[c] = Field2(g);
        std::copy(a.data() + c * n, a.data() + (c + 1) * n, p[c].v.begin());
    }
    return p;
}

py::object to_python(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Config make_config(const py::object& source) {
    Config cfg;
    if (source.is_none()) return cfg;
    if (py::isinstance<py::dict>(source)) {
        for (auto item : source.cast<py::dict>())
            cfg.set(py::str(item.first).cast<std::string>(), py::str(item.second).cast<std::string>());
        return cfg;
    }
    return Config::load(py::str(source).cast<std::string>());
}

py::dict report_result(Report& r, const Config& cfg) {
    r.set_config(cfg.echo(), cfg.tolerances());
    py::dict d;
    d["passed"] = r.passed();
    d["report"] = to_python(r.to_json());
    return d;
}

Stage parse_stage(const std::string& s) {
    if (s == "seed") return Stage::Seed;
    if (s == "evolve") return Stage::Evolve;
    if (s == "reconstruct" || s == "run") return Stage::Reconstruct;
    throw InputError("stage must be seed, evolve or reconstruct, got '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Conformally flat hypersurfaces from Guichard nets";

    auto input_error = py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
    (void)input_error;

    py::class_<Grid2>(m, "Grid2")
        .def(py::init([](int nx, int ny, double x0, double x1, double y0, double y1) {
                 Grid2 g{nx, ny, x0, x1, y0, y1};
                 g.validate();
                 return g;
             }),
             py::arg("nx"), py::arg("ny"), py::arg("x0"), py::arg("x1"), py::arg("y0"), py::arg("y1"))
        .def_readonly("nx", &Grid2::nx)
        .def_readonly("ny", &Grid2::ny)
        .def_readonly("x0", &Grid2::x0)
        .def_readonly("x1", &Grid2::x1)
        .def_readonly("y0", &Grid2::y0)
        .def_readonly("y1", &Grid2::y1)
        .def_property_readonly("hx", &Grid2::hx)
        .def_property_readonly("hy", &Grid2::hy)
        .def("__repr__", [](const Grid2& g) {
            std::ostringstream os;
            os << "Grid2(" << g.nx << ", " << g.ny << ", [" << g.x0 << ", " << g.x1 << "] x [" << g.y0 << ", " << g.y1
               << "])";
            return os.str();
        });

    m.def(
        "run",
        [](const py::object& config, const py::dict& overrides, const std::string& stage, const py::object& out) {
            Config cfg = make_config(config);
            for (auto item : overrides)
                cfg.set(py::str(item.first).cast<std::string>(), py::str(item.second).cast<std::string>());
            if (!out.is_none()) cfg.set("output.dir", py::str(out).cast<std::string>());
            const Settings s = Settings::from(cfg);
            Report r(stage);
            {
                py::gil_scoped_release release;
                run_pipeline(s, parse_stage(stage), r);
            }
            return report_result(r, cfg);
        },
        py::arg("config") = py::none(), py::arg("overrides") = py::dict(), py::arg("stage") = "reconstruct",
        py::arg("out") = py::none(),
        "Run the pipeline from a config path or dict plus key/value overrides. Returns {'passed', 'report'}; "
        "artifacts go to `out` (or output.dir).");

    m.def(
        "verify",
        [](const std::string& mesh, const py::object& config) {
            Config cfg = make_config(config);
            const Settings s = Settings::from(cfg);
            Report r("verify");
            {
                py::gil_scoped_release release;
                verify_mesh(read_mesh(mesh), s, r);
            }
            return report_result(r, cfg);
        },
        py::arg("mesh"), py::arg("config") = py::none(), "Residual suite of a stored mesh.");

    m.def(
        "read_mesh",
        [](const std::string& path) {
            const HypersurfaceMesh mesh = read_mesh(path);
            py::dict d;
            py::list f, N;
            for (int c = 0; c < 4; ++c) {
                f.append(to_numpy(mesh.f[c]));
                N.append(to_numpy(mesh.N[c]));
            }
            d["f"] = f;
            d["N"] = N;
            d["P"] = to_numpy(mesh.P);
            d["phi"] = to_numpy(mesh.phi);
            d["kappa"] = py::make_tuple(to_numpy(mesh.kappa1), to_numpy(mesh.kappa2), to_numpy(mesh.kappa3));
            d["z"] = py::make_tuple(mesh.grid.z0, mesh.grid.z1, mesh.grid.nz);
            d["grid"] = mesh.grid.xy;
            return d;
        },
        py::arg("path"), "Load a mesh (.vtk or .csv) as arrays of shape (nz, ny, nx).");

    m.def(
        "frame_coefficients",
        [](const Array& points, const Grid2& g, int sign_a1, int sign_a2) {
            SurfaceOptions o;
            o.sign_a1 = sign_a1;
            o.sign_a2 = sign_a2;
            const SurfaceData s = frame_coefficients(points_from_numpy(points, g), o);
            py::dict d;
            d["a1"] = to_numpy(s.a1);
            d["a2"] = to_numpy(s.a2);
            d["b1"] = to_numpy(s.b1);
            d["b2"] = to_numpy(s.b2);
            d["c1"] = to_numpy(s.c1);
            d["c2"] = to_numpy(s.c2);
            d["connection"] = s.connection;
            d["principal"] = s.principal;
            d["min_umbilic"] = s.min_umbilic;
            return d;
        },
        py::arg("points"), py::arg("grid"), py::arg("sign_a1") = 1, py::arg("sign_a2") = 1,
        "Frame coefficients of an S^3-valued surface sample of shape (4, ny, nx).");

    m.def(
        "solve_phi_pbar",
        [](const Array& a1, const Array& a2, const Grid2& g, int sign, int branch, double closed_tol) {
            PhiPbarOptions o;
            o.sign = sign;
            o.branch = branch;
            o.closed_tol = closed_tol;
            const PhiPbar r = solve_phi_pbar(from_numpy(a1, g, "a1"), from_numpy(a2, g, "a2"), o);
            py::dict d;
            d["accepted"] = r.accepted;
            d["reason"] = r.reason;
            d["branch"] = r.branch;
            d["closedness"] = r.closedness;
            if (r.phi.size()) d["phi"] = to_numpy(r.phi);
            if (r.Pbar.size()) d["Pbar"] = to_numpy(r.Pbar);
            return d;
        },
        py::arg("a1"), py::arg("a2"), py::arg("grid"), py::arg("sign") = 1, py::arg("branch") = 0,
        py::arg("closed_tol") = 1e-3, "Solve a1 sin phi - a2 cos phi = sign and integrate dPbar.");

    m.def(
        "schouten_dual",
        [](const Array& k1, const Array& k2, const Array& k3, const Array& eP, const Array& phi, const Array& P_z,
           const Array& phi_z, const Grid2& g) {
            const DualData d = schouten_dual(from_numpy(k1, g, "k1"), from_numpy(k2, g, "k2"), from_numpy(k3, g, "k3"),
                                             from_numpy(eP, g, "eP"), from_numpy(phi, g, "phi"),
                                             from_numpy(P_z, g, "P_z"), from_numpy(phi_z, g, "phi_z"));
            const DualIdentities id = dual_identities(d, from_numpy(k3, g, "k3"));
            py::dict r;
            r["sigma"] = py::make_tuple(to_numpy(d.sigma1), to_numpy(d.sigma2), to_numpy(d.sigma3));
            r["kappa_star"] = py::make_tuple(to_numpy(d.kappa1), to_numpy(d.kappa2), to_numpy(d.kappa3));
            r["P_star"] = to_numpy(d.P_star);
            r["phi_star"] = to_numpy(d.phi_star);
            r["identities"] = py::dict(py::arg("sigma3") = id.sigma3, py::arg("angle") = id.angle,
                                       py::arg("unit") = id.unit);
            return r;
        },
        py::arg("k1"), py::arg("k2"), py::arg("k3"), py::arg("eP"), py::arg("phi"), py::arg("P_z"), py::arg("phi_z"),
        py::arg("grid"), "Schouten dual data on one slice.");

    m.def(
        "hat_curvature",
        [](const Array& phi, const Array& phi_z, const Grid2& g) {
            const Hat2Metric h = hat_metric(from_numpy(phi, g, "phi"), from_numpy(phi_z, g, "phi_z"));
            return to_numpy(gauss_curvature(h.a, h.b));
        },
        py::arg("phi"), py::arg("phi_z"), py::arg("grid"),
        "Gauss curvature of the hat metric from phi and phi_z samples (stencil derivatives).");

    m.def("sha256", [](const py::bytes& b) { return sha256_hex(b.cast<std::string>()); }, py::arg("data"));
}
