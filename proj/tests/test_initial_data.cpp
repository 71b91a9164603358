#include <cmath>
#include <memory>

#include "cfh/calculus.hpp"
#include "cfh/guichard.hpp"
#include "cfh/initial_data.hpp"
#include "doctest.h"

using namespace cfh;

namespace {

const Grid2 kWindow{81, 81, 0.6, 1.4, 1.6, 2.4};

Example2Seed control_seed() { return Example2Seed(Example2Params{}); }

double r2(double x, double y) { return x * x + y * y; }

}  // namespace

TEST_CASE("Example 2 control data at (1, 2): principal curvature values") {
    auto seed = control_seed();
    Grid2 g{9, 9, 0.96, 1.04, 1.96, 2.04};
    auto d = assemble_initial_data(seed, g);
    std::size_t n = g.idx(4, 4);
    CHECK(d.u[n] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(std::tan(d.phi[n]) == doctest::Approx(-4.0 / 3).epsilon(1e-12));
    CHECK(d.kappa3[n] == doctest::Approx(-0.4).epsilon(1e-10));
    CHECK(d.kappa1[n] == doctest::Approx(-2.0 / 3).epsilon(1e-10));
    CHECK(d.kappa2[n] == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(d.kappa1[n] * d.kappa2[n] == doctest::Approx(1.0 / 6).epsilon(1e-10));
}

TEST_CASE("kappa_3 from the generic formula agrees with the Example 2 closed formula") {
    auto seed = control_seed();
    auto d = assemble_initial_data(seed, kWindow);
    Field2 k3 = sample(kWindow, [&](double x, double y) { return seed.kappa3(x, y); });
    Field2 want = sample(kWindow, [](double x, double y) { return -y / r2(x, y); });
    CHECK(max_abs(k3 - want) < 1e-8);
    CHECK(max_abs(d.kappa3 - k3) < 1e-8);
    // stencil route on sampled fields, away from the one-sided edge stencils
    auto s = sample_seed(seed, kWindow);
    auto ds = assemble_initial_data(s.phi, s.phi_z, s.psi, s.psi_z, s.u, s.u_z, 6);
    CHECK(max_abs(ds.kappa3 - k3, 4) < 1e-8);
}

TEST_CASE("kappa_1 - kappa_2 = e^{-P} / (sin phi cos phi)") {
    auto seed = control_seed();
    auto d = assemble_initial_data(seed, kWindow);
    double worst = 0;
    for (std::size_t n = 0; n < kWindow.size(); ++n) {
        double want = d.u[n] / (std::sin(d.phi[n]) * std::cos(d.phi[n]));
        worst = std::max(worst, std::fabs(d.kappa1[n] - d.kappa2[n] - want));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("derived_quantities from (phi, phi_z, phi_zz, psi_zz, P, P_z) matches the assembled set") {
    auto seed = control_seed();
    auto d = assemble_initial_data(seed, kWindow);
    auto q = derived_quantities(d.phi, d.phi_z, d.phi_zz, d.psi_zz, d.P, d.P_z, 6);
    CHECK(max_abs(q.kappa3 - d.kappa3, 3) < 1e-8);
    CHECK(max_abs(q.zeta - d.zeta, 3) < 1e-7);
    CHECK(max_abs(q.u_zz - d.u_zz, 3) < 1e-7);
    Field2 bad = d.P;
    bad[0] = std::nan("");
    CHECK_THROWS_AS(derived_quantities(d.phi, d.phi_z, d.phi_zz, d.psi_zz, bad, d.P_z), NumericalError);
}

TEST_CASE("control dataset: kappa_3^2 - zeta is identically G + H = 1, the other constraints vanish") {
    auto seed = control_seed();
    auto d = assemble_initial_data(seed, kWindow);
    auto r = constraint_residuals(d);
    CHECK(r.residual[0].linf <= 1e-6);
    CHECK(r.residual[1].linf <= 1e-6);
    CHECK(r.residual[2].linf <= 1e-6);
    CHECK(max_abs(r.field[3] - 1.0) <= 1e-6);
}

TEST_CASE("constraint_residuals is idempotent") {
    auto seed = control_seed();
    auto d = assemble_initial_data(seed, Grid2{21, 21, 0.6, 1.4, 1.6, 2.4});
    auto a = constraint_residuals(d), b = constraint_residuals(d);
    for (int k = 0; k < 4; ++k) {
        CHECK(a.field[std::size_t(k)].v == b.field[std::size_t(k)].v);
        CHECK(a.residual[std::size_t(k)].linf == b.residual[std::size_t(k)].linf);
        CHECK(a.residual[std::size_t(k)].l2 == b.residual[std::size_t(k)].l2);
    }
    CHECK(a.min_k1k2 == b.min_k1k2);
}

TEST_CASE("admissible Example 2 family member satisfies the constraints with a genericity margin") {
    auto fam = ex2_family_sample(1, 0, 0, kWindow);
    REQUIRE(fam.accepted);
    auto odes = ex2_solve_odes(fam.params);
    Example2Seed seed(std::move(odes));
    auto d = assemble_initial_data(seed, kWindow);
    auto r = constraint_residuals(d);
    for (const auto& res : r.residual) CHECK(res.linf <= 1e-6);
    CHECK(r.min_k1k2 >= 1e-3);
}

TEST_CASE("perturbing P by eps x produces a first-order xy-constraint residual") {
    auto seed = control_seed();
    auto s = sample_seed(seed, kWindow);
    Field2 X = sample(kWindow, [](double x, double) { return x; });
    auto base = assemble_initial_data(s.phi, s.phi_z, s.psi, s.psi_z, s.u, s.u_z, 6);
    double r0 = constraint_residuals(base).residual[0].linf;
    CHECK(r0 < 1e-6);
    double res[2];
    for (int k = 0; k < 2; ++k) {
        double eps = 1e-3 * (k + 1);
        Field2 u = s.u * map(X, [&](double x) { return std::exp(-eps * x); });
        auto d = assemble_initial_data(s.phi, s.phi_z, s.psi, s.psi_z, u, s.u_z, 6);
        res[k] = constraint_residuals(d).residual[0].linf;
        CHECK(res[k] > 0.1 * eps);
        CHECK(res[k] < 10 * eps);
    }
    CHECK(res[1] / res[0] == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("Example 1 seed assembles with vanishing constraints") {
    Example1Seed seed(Example1Params{});
    Grid2 g{41, 41, -0.5, 0.5, -0.5, 0.5};
    auto d = assemble_initial_data(seed, g);
    auto r = constraint_residuals(d);
    for (const auto& res : r.residual) CHECK(res.linf <= 1e-6);
    // kappa_1 = Y2 for this family
    const auto& o = seed.odes();
    double worst = 0;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) worst = std::max(worst, std::fabs(d.kappa1[g.idx(i, j)] - o.ys(g.y(j))[2]));
    CHECK(worst < 1e-8);
    Field2 k3 = sample(g, [&](double x, double y) { return seed.kappa3(x, y); });
    CHECK(max_abs(d.kappa3 - k3) < 1e-8);
}

TEST_CASE("assembly rejects degenerate angles and non-positive e^{-P}") {
    Grid2 g{9, 9, 0.1, 0.5, 0.1, 0.5};
    Field2 one(g, 1.0), zero(g, 0.0);
    Field2 small(g, 0.01);
    CHECK_THROWS_AS(assemble_initial_data(small, one, zero, zero, one, zero), NumericalError);
    Field2 phi(g, 0.7);
    CHECK_THROWS_AS(assemble_initial_data(phi, one, zero, zero, one * -1.0, zero), NumericalError);
    CHECK_THROWS_AS(assemble_initial_data(phi, one, zero, zero, zero, zero), NumericalError);
}

TEST_CASE("reconstruct_psi_z recovers the Example 2 psi_z") {
    Field2 phi = sample(kWindow, [](double x, double y) { return 2 * std::atan2(y, x); });
    Field2 pz = sample(kWindow, [](double x, double y) { return y / r2(x, y); });
    int bi = 40, bj = 40;
    auto r = reconstruct_psi_z(phi, pz, bi, bj);
    CHECK(r.psi_z[kWindow.idx(bi, bj)] == 0.0);
    const double x0 = kWindow.x(bi), y0 = kWindow.y(bj);
    Field2 want = sample(kWindow, [&](double x, double y) { return -x / r2(x, y) + x0 / r2(x0, y0); });
    CHECK(max_abs(r.psi_z - want) < 1e-8);
    CHECK(r.integrability < 1e-6);
}

TEST_CASE("reconstruct_psi_z: constant phi_z gives zero") {
    Grid2 g{21, 21, 0.2, 0.6, 0.3, 0.7};
    Field2 phi = sample(g, [](double x, double y) { return 0.5 + 0.3 * x - 0.2 * y; });
    auto r = reconstruct_psi_z(phi, Field2(g, 0.8), 0, 0);
    CHECK(max_abs(r.psi_z) < 1e-14);
}

TEST_CASE("reconstruct_psi_z on Example 1 with rho = y, sigma = e^x") {
    // psi_z = -sigma cos phi with tan phi = e^y, phi_z = sigma sin phi
    Grid2 g{81, 81, -0.4, 0.4, -0.4, 0.4};
    Field2 phi = sample(g, [](double, double y) { return std::atan(std::exp(y)); });
    Field2 pz = sample(g, [](double x, double y) { return std::exp(x) * std::sin(std::atan(std::exp(y))); });
    auto r = reconstruct_psi_z(phi, pz, 40, 40);
    auto psi_z = [](double x, double y) { return -std::exp(x) * std::cos(std::atan(std::exp(y))); };
    Field2 want = sample(g, [&](double x, double y) { return psi_z(x, y) - psi_z(0, 0); });
    CHECK(max_abs(r.psi_z - want) < 1e-8);
    // along the base row the x-quadrature alone gives -(e^x - 1) cos(pi/4)
    for (int i = 0; i < g.nx; i += 10)
        CHECK(r.psi_z[g.idx(i, 40)] == doctest::Approx(-(std::exp(g.x(i)) - 1) / std::sqrt(2.0)).epsilon(1e-8));
}

TEST_CASE("reconstruct_psi_z rejects a non-closed one-form") {
    Grid2 g{21, 21, 0.5, 0.9, 0.5, 0.9};
    Field2 phi(g, 0.7);
    Field2 pz = sample(g, [](double x, double y) { return x * y; });
    CHECK_THROWS_AS(reconstruct_psi_z(phi, pz, 0, 0), InputError);
    CHECK_THROWS_AS(reconstruct_psi_z(phi, pz, 30, 0), InputError);
}

TEST_CASE("t_scale") {
    auto seed = control_seed();
    Grid2 g{41, 41, 0.6, 1.4, 1.6, 2.4};
    auto d = assemble_initial_data(seed, g);
    auto same = t_scale(d, 1.0);
    CHECK(same.kappa3.v == d.kappa3.v);
    CHECK(same.phi_z.v == d.phi_z.v);
    CHECK_THROWS_AS(t_scale(d, 0.0), InputError);
    auto neg = t_scale(d, -1.0);
    CHECK(neg.t == -1.0);
    CHECK(max_abs(neg.phi_z + d.phi_z) == 0.0);
    CHECK(max_abs(neg.psi_z + d.psi_z) == 0.0);
    CHECK(neg.phi_zz.v == d.phi_zz.v);
    Hat2Metric h = hat_metric(neg.phi, neg.phi_z, neg.exact->phi_zx, neg.exact->phi_zy);
    CHECK(max_abs(gauss_curvature(h.a, h.b) + 1.0, 3) < 1e-4);
    // the scaled seed carries the same jets
    auto base = std::make_shared<Example2Seed>(Example2Params{});
    ScaledSeed ss(base, -1.0);
    auto ds = assemble_initial_data(ss, g);
    CHECK(max_abs(ds.phi_z - neg.phi_z) == 0.0);
    CHECK(max_abs(ds.kappa3 - neg.kappa3) < 1e-14);
    CHECK_THROWS_AS(ScaledSeed(base, 0.0), InputError);
}
