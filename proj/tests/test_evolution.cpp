#include <cmath>
#include <memory>
#include <vector>

#include "cfh/calculus.hpp"
#include "cfh/evolution.hpp"
#include "cfh/guichard.hpp"
#include "cfh/initial_data.hpp"
#include "cfh/ode.hpp"
#include "doctest.h"

using namespace cfh;

namespace {

// phi = phi0 + v0 z-data, psi = b x^2, e^{-P} = u0 + w0 z-data: no x/y dependence survives, so the
// system reduces to phi'' = 2b sin 2phi and u'' = (1 + 4b cos 2phi) u.
class PendulumSeed : public Seed {
public:
    double phi0 = 0.6, v0 = 0.3, b = 0.4, u0 = 1.2, w0 = -0.2;
    SeedJets jets(double x, double, int order) const override {
        Jet2 X = Jet2::variable(order, x, 0);
        Jet2 psi = X * X;
        psi *= b;
        return {Jet2(order, phi0), Jet2(order, v0), psi, Jet2(order, 0.0), Jet2(order, u0), Jet2(order, w0)};
    }
    double kappa3(double, double) const override { return u0 * 2 * b * std::sin(2 * phi0) - w0 * v0; }
    Grid2 domain() const override { return Grid2{2, 2, -1, 1, -1, 1}; }
    std::string name() const override { return "pendulum"; }
};

OdeSolution pendulum_solution(const PendulumSeed& s, double z1) {
    OdeRhs f = [&](double, const std::vector<double>& y, std::vector<double>& dy) {
        dy[0] = y[1];
        dy[1] = 2 * s.b * std::sin(2 * y[0]);
        dy[2] = y[3];
        dy[3] = (1 + 4 * s.b * std::cos(2 * y[0])) * y[2];
    };
    OdeOptions o;
    o.rtol = 1e-12;
    o.atol = 1e-14;
    return solve_ode(f, 0.0, {s.phi0, s.v0, s.u0, s.w0}, z1, o);
}

// Mirror of the default Example 2 window: phi_z phi_zx phi_zy keeps its sign for |z| <= 0.1 here.
const Grid2 kGeneric{41, 41, 1.6, 2.4, 0.6, 1.4};

std::shared_ptr<Example2Seed> family_seed(const Grid2& w) {
    auto fam = ex2_family_sample(1, 0, 0, w);
    REQUIRE(fam.accepted);
    return std::make_shared<Example2Seed>(ex2_solve_odes(fam.params));
}

EvolutionOptions opts(int nz, int M = 8) {
    EvolutionOptions o;
    o.M = M;
    o.nz = nz;
    return o;
}

}  // namespace

TEST_CASE("z-series matches the reduced ODE on x/y-independent data") {
    PendulumSeed s;
    auto ode = pendulum_solution(s, 0.1);
    auto c = taylor_z_series(s, 0.3, -0.2, 16);
    for (double z : {0.05, 0.1}) {
        double phi = 0, u = 0, p = 1;
        for (int k = 0; k <= 16; ++k, p *= z) phi += c.phi[std::size_t(k)] * p, u += c.u[std::size_t(k)] * p;
        auto y = ode(z);
        CHECK(std::fabs(phi - y[0]) < 1e-10);
        CHECK(std::fabs(u - y[2]) < 1e-10);
    }
    // psi_zz = -2b cos 2phi at z = 0
    CHECK(c.psi[2] == doctest::Approx(-s.b * std::cos(2 * s.phi0)).epsilon(1e-14));
}

TEST_CASE("method of lines matches the reduced ODE on x/y-independent data") {
    PendulumSeed s;
    auto ode = pendulum_solution(s, 0.1);
    auto ode_neg = pendulum_solution(s, -0.1);
    Grid2 w{21, 21, -0.5, 0.5, -0.5, 0.5};
    EvolutionOptions o = opts(21);
    o.method = ZMethod::MOL;
    o.generic_guard = 0;  // phi_zx = phi_zy = 0 for this data
    auto d = evolve(s, w, o);
    CHECK_FALSE(d.shrunk);
    double worst = 0;
    for (int k = 0; k < d.grid.nz; ++k) {
        const double z = d.grid.z(k);
        auto y = z >= 0 ? ode(z) : ode_neg(z);
        Field2 p = slice(d.phi, k), u = slice(d.u, k);
        worst = std::max({worst, max_abs(p - y[0]), max_abs(u - y[2])});
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("second z-coefficients reproduce phi_zz, psi_zz and (e^{-P})_zz of the initial data") {
    auto seed = family_seed(kGeneric);
    auto d = assemble_initial_data(*seed, kGeneric);
    for (auto [i, j] : {std::pair{0, 0}, {20, 20}, {40, 7}, {13, 33}}) {
        const std::size_t n = kGeneric.idx(i, j);
        auto c = taylor_z_series(*seed, kGeneric.x(i), kGeneric.y(j), 8);
        CHECK(c.phi[0] == doctest::Approx(d.phi[n]).epsilon(1e-14));
        CHECK(c.phi[1] == doctest::Approx(d.phi_z[n]).epsilon(1e-14));
        CHECK(std::fabs(2 * c.phi[2] - d.phi_zz[n]) < 1e-12);
        CHECK(std::fabs(2 * c.psi[2] - d.psi_zz[n]) < 1e-12);
        CHECK(std::fabs(2 * c.u[2] - d.u_zz[n]) < 1e-12);
    }
}

TEST_CASE("z_max = 0 returns the initial slice") {
    auto seed = family_seed(kGeneric);
    auto id = assemble_initial_data(*seed, kGeneric);
    EvolutionOptions o = opts(1);
    o.z_max = 0;
    for (ZMethod m : {ZMethod::Taylor, ZMethod::MOL}) {
        o.method = m;
        auto d = evolve(*seed, kGeneric, o);
        REQUIRE(d.grid.nz == 1);
        CHECK(max_abs(slice(d.phi, 0) - id.phi) < 1e-14);
        CHECK(max_abs(slice(d.u, 0) - id.u) < 1e-14);
        CHECK(d.z_lo == 0.0);
        CHECK(d.z_hi == 0.0);
    }
}

TEST_CASE("kappa_i on the z = 0 slice agree with the initial data") {
    auto seed = family_seed(kGeneric);
    auto id = assemble_initial_data(*seed, kGeneric);
    EvolutionOptions o = opts(21);
    o.order = 6;
    auto d = evolve(*seed, kGeneric, o);
    const int k0 = d.grid.nz / 2;
    CHECK(d.grid.z(k0) == 0.0);
    CHECK(max_abs(slice(d.kappa1, k0) - id.kappa1, 3) < 1e-8);
    CHECK(max_abs(slice(d.kappa2, k0) - id.kappa2, 3) < 1e-8);
    CHECK(max_abs(slice(d.kappa3, k0) - id.kappa3, 3) < 1e-8);
}

TEST_CASE("zeta from the evolved fields matches the initial-data zeta at z = 0") {
    auto seed = family_seed(kGeneric);
    auto id = assemble_initial_data(*seed, kGeneric);
    EvolutionOptions o = opts(21);
    o.order = 6;
    auto d = evolve(*seed, kGeneric, o);
    auto c = constraint_report(d.phi, d.u, d.kappa3, 3, 6);
    const int k0 = d.grid.nz / 2;
    Field2 zeta = slice(c.field[3], k0) + slice(d.kappa3, k0) * slice(d.kappa3, k0);
    CHECK(max_abs(zeta - id.zeta, 3) < 1e-7);
}

TEST_CASE("admissible Example 2 evolution: monitors, constraints, curvature") {
    auto seed = family_seed(kGeneric);
    auto d = evolve(*seed, kGeneric, opts(21));
    CHECK_FALSE(d.shrunk);
    CHECK(d.z_lo == doctest::Approx(-0.1));
    CHECK(d.z_hi == doctest::Approx(0.1));
    for (const auto& m : d.monitors) {
        CHECK(m.ok);
        CHECK(m.min_generic > 0);
    }
    auto c = constraint_report(d.phi, d.u, d.kappa3);
    for (double v : c.max_linf) CHECK(v < 1e-4);
    auto fl = flatness_residuals(d.phi);
    for (const auto& f : fl) CHECK(max_linf(f) < 1e-4);
    for (int k = 0; k < d.grid.nz; ++k) {
        auto h = hat_metric(d.phi, k);
        CHECK(max_abs(gauss_curvature(h.a, h.b) + 1.0, 3) < 1e-4);
    }
    auto cd = curvature_diagnostics(d.phi, d.u, KappaFields{d.kappa1, d.kappa2, d.kappa3});
    CHECK(max_linf(cd.zeta_identity) < 1e-10);
    CHECK(max_linf(cd.chi) < 1e-4);
    for (const auto& g : cd.gauss) CHECK(max_linf(g) < 1e-4);
}

TEST_CASE("Example 2 on the default window leaves the generic class and the range shrinks") {
    const Grid2 w{41, 41, 0.6, 1.4, 1.6, 2.4};
    auto seed = family_seed(w);
    auto d = evolve(*seed, w, opts(41));
    CHECK(d.shrunk);
    CHECK(d.z_hi < 0.03);
    CHECK(d.z_lo == -d.z_hi);
    CHECK(d.monitors.back().min_generic < 0);  // phi_zx has changed sign by z = 0.1
    for (const auto& m : d.monitors)
        if (m.z >= d.z_lo && m.z <= d.z_hi) CHECK(m.ok);
    EvolutionOptions off = opts(41);
    off.generic_guard = 0;
    CHECK_FALSE(evolve(*seed, w, off).shrunk);
}

TEST_CASE("Taylor and method-of-lines evolutions agree") {
    auto seed = family_seed(kGeneric);
    auto a = evolve(*seed, kGeneric, opts(21));
    EvolutionOptions o = opts(21);
    o.method = ZMethod::MOL;
    auto b = evolve(*seed, kGeneric, o);
    CHECK(b.method == "mol");
    const int k = 15;  // z = 0.05
    CHECK(a.grid.z(k) == doctest::Approx(0.05));
    CHECK(max_abs(slice(a.phi, k) - slice(b.phi, k), 3) < 1e-6);
    CHECK(max_abs(slice(a.u, k) - slice(b.u, k), 3) < 1e-6);
}

TEST_CASE("constraint and identity residuals decrease under refinement") {
    auto seed = family_seed(Grid2{41, 41, 1.8, 2.2, 0.8, 1.2});
    std::vector<double> coarse, fine;
    for (int level = 0; level < 2; ++level) {
        const int n = level ? 41 : 21, band = level ? 6 : 3;
        Grid2 w{n, n, 1.8, 2.2, 0.8, 1.2};
        auto d = evolve(*seed, w, opts(n, 12));
        auto& r = level ? fine : coarse;
        auto c = constraint_report(d.phi, d.u, d.kappa3, band);
        r.assign(c.max_linf.begin(), c.max_linf.end());
        for (const auto& f : propagation_identities(d.phi, d.u, d.kappa3)) r.push_back(max_linf(f, band));
        auto cd = curvature_diagnostics(d.phi, d.u, KappaFields{d.kappa1, d.kappa2, d.kappa3});
        for (const auto& f : cd.kappa3_derivs) r.push_back(max_linf(f, band));
        for (const auto& f : cd.codazzi) r.push_back(max_linf(f, band));
        for (const auto& f : cd.gauss) r.push_back(max_linf(f, band));
    }
    for (std::size_t q = 0; q < coarse.size(); ++q) {
        INFO("residual " << q << ": " << coarse[q] << " -> " << fine[q]);
        CHECK(coarse[q] / fine[q] >= 6);
    }
}

TEST_CASE("G + H = 1 control keeps J of order one") {
    const Grid2 w{41, 41, 0.6, 1.4, 1.6, 2.4};
    Example2Seed seed(Example2Params{});
    auto d = evolve(seed, w, opts(41));
    auto c = constraint_report(d.phi, d.u, d.kappa3);
    for (const auto& nm : c.per_slice[3]) {
        CHECK(nm.linf > 0.5);
        CHECK(nm.linf < 2.0);
    }
    const int k0 = d.grid.nz / 2;
    // kappa_3^2 - zeta = G + H = 5 - 4
    Field2 J0 = slice(c.field[3], k0);
    CHECK(max_abs(J0 + 1.0, 3) < 1e-5);
}

TEST_CASE("flat sanity input has vanishing sectional curvatures") {
    Grid3 g{Grid2{21, 21, 0, 1, 0, 1}, 11, -0.1, 0.1};
    Field3 phi(g, 0.7), u(g, 1.3);
    auto k = kappa_fields(phi, u);
    auto cd = curvature_diagnostics(phi, u, k);
    CHECK(max_abs(cd.K_ab) < 1e-12);
    CHECK(max_abs(cd.K_bc) < 1e-12);
    CHECK(max_abs(cd.K_ca) < 1e-12);
}

TEST_CASE("propagation identities hold on an admissible evolution") {
    auto seed = family_seed(kGeneric);
    auto d = evolve(*seed, kGeneric, opts(21));
    // stencil-level residuals at h = 0.02; convergence is checked in the refinement case
    for (const auto& f : propagation_identities(d.phi, d.u, d.kappa3)) CHECK(max_linf(f) < 5e-3);
    auto cd = curvature_diagnostics(d.phi, d.u, KappaFields{d.kappa1, d.kappa2, d.kappa3});
    for (const auto& f : cd.kappa3_derivs) CHECK(max_linf(f) < 1e-3);
    for (const auto& f : cd.codazzi) CHECK(max_linf(f) < 5e-2);
}

TEST_CASE("e^{-P} evolution is linear in its initial data") {
    auto seed = family_seed(kGeneric);
    auto d = evolve(*seed, kGeneric, opts(21));
    auto id = assemble_initial_data(*seed, kGeneric);
    Field2 v0 = sample(kGeneric, [](double x, double y) { return 1 + 0.1 * x * y; });
    Field2 w0 = sample(kGeneric, [](double x, double) { return 0.2 * x; });
    Field3 a = evolve_conformal(d.phi, id.u, id.u_z);
    Field3 b = evolve_conformal(d.phi, v0, w0);
    Field3 ab = evolve_conformal(d.phi, id.u * 2.0 + v0 * -3.0, id.u_z * 2.0 + w0 * -3.0);
    CHECK(max_abs(ab - (a * 2.0 + b * -3.0)) < 1e-9);
    // it tracks the jointly evolved e^{-P}
    CHECK(max_abs(a - d.u, 3) < 1e-5);
}

TEST_CASE("tenth-order filter keeps low-degree polynomials and removes the odd-even mode") {
    Grid2 g{31, 31, 0, 1, 0, 1};
    Field2 p = sample(g, [](double x, double y) { return std::pow(x, 9) - 3 * std::pow(y, 7) * x + x * y; });
    Field2 q = p;
    lowpass_filter(q);
    CHECK(max_abs(q - p) < 1e-12);
    Field2 zigzag(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) zigzag[g.idx(i, j)] = ((i + j) % 2) ? 1.0 : -1.0;
    lowpass_filter(zigzag);
    CHECK(max_abs(zigzag, 5) < 1e-14);
}

TEST_CASE("evolution option and input validation") {
    auto seed = family_seed(kGeneric);
    EvolutionOptions o;
    o.nz = 20;
    CHECK_THROWS_AS(evolve(*seed, kGeneric, o), InputError);
    o = EvolutionOptions{};
    o.M = 1;
    CHECK_THROWS_AS(o.validate(), InputError);
    CHECK_THROWS_AS(parse_zmethod("euler"), InputError);
    CHECK(parse_zmethod("mol") == ZMethod::MOL);
    CHECK(to_string(ZMethod::Taylor) == "taylor");
    // sampled data without a seed: the series method needs jets
    auto s = sample_seed(*seed, kGeneric);
    auto id = assemble_initial_data(s.phi, s.phi_z, s.psi, s.psi_z, s.u, s.u_z);
    CHECK_THROWS_AS(evolve(id, EvolutionOptions{}), InputError);
    // degenerate trig data fails on the z = 0 slice
    PendulumSeed flat;
    flat.phi0 = 0.01;
    EvolutionOptions g0 = opts(11);
    g0.generic_guard = 0;
    CHECK_THROWS_AS(evolve(flat, Grid2{11, 11, -0.5, 0.5, -0.5, 0.5}, g0), NumericalError);
}
